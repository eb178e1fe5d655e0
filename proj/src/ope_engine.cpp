#include "opeps/ope_engine.hpp"

#include <algorithm>

namespace opeps {

namespace {

constexpr u128 kSpaceLo = 1;
const u128 kSpaceHi = (~u128{0}) - 1; // 2^128 - 2

// Gaps narrower than this skip the keyed offset and split exactly.
constexpr u128 kMinJitterGap = 16;

uint64_t fnv1a64(std::string_view bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

uint64_t fnv1a64(const std::vector<uint8_t> &bytes) {
    return fnv1a64(std::string_view(
        reinterpret_cast<const char *>(bytes.data()), bytes.size()));
}

u128 draw_u128(Rng &rng) {
    return (static_cast<u128>(rng()) << 64) | rng();
}

} // namespace

OpeEngine::OpeEngine(std::string_view seed)
    : OpeEngine(seed, kSpaceLo, kSpaceHi) {}

OpeEngine::OpeEngine(std::string_view seed, u128 space_lo, u128 space_hi)
    : space_lo_(space_lo), space_hi_(space_hi), prg_(fnv1a64(seed)) {
    if (seed.empty())
        throw argument_error("key seed must be non-empty");
    if (space_lo < 1 || space_hi <= space_lo || space_hi > kSpaceHi)
        throw argument_error("invalid token space");
}

u128 OpeEngine::default_space_lo() { return kSpaceLo; }
u128 OpeEngine::default_space_hi() { return kSpaceHi; }

u128 OpeEngine::full_space_midpoint() {
    return kSpaceLo + (kSpaceHi - kSpaceLo) / 2;
}

u128 OpeEngine::pick_token(u128 fence_lo, u128 fence_hi, bool first_insert) {
    const u128 gap = fence_hi - fence_lo - 1; // free positions between fences
    if (gap == 0)
        return 0; // caller rebalances
    if (first_insert || gap < kMinJitterGap)
        return fence_lo + 1 + (gap - 1) / 2;
    // Keyed split inside the middle half keeps gaps shrinking by >= 1/4 per
    // level while making token sequences depend on the secret seed.
    const u128 quarter = gap / 4;
    const u128 span = gap - 2 * quarter;
    return fence_lo + 1 + quarter + draw_u128(prg_) % span;
}

std::vector<TokenRemap> OpeEngine::rebalance() {
    const u128 width = space_hi_ - space_lo_ + 1;
    const u128 n = by_key_.size();
    if (width < n + 1)
        throw error("token space exhausted");
    const u128 step_q = width / (n + 1);
    const u128 step_r = width % (n + 1);
    std::vector<TokenRemap> remaps;
    remaps.reserve(by_key_.size());
    u128 i = 0;
    for (auto &[key, token] : by_key_) {
        const u128 fresh =
            space_lo_ + step_q * (i + 1) + (step_r * (i + 1)) / (n + 1);
        if (fresh != token)
            remaps.push_back({token, fresh});
        token = fresh;
        ++i;
    }
    by_token_.clear();
    for (const auto &[key, token] : by_key_)
        by_token_.emplace(token, key);
    ++rebalances_;
    return remaps;
}

OpeEngine::InsertResult OpeEngine::encrypt(int64_t plaintext,
                                           uint32_t gamma_rank) {
    const Key key{plaintext, gamma_rank};
    if (by_key_.count(key))
        throw argument_error("duplicate randomized-order rank for plaintext " +
                             std::to_string(plaintext));

    InsertResult result;
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto next = by_key_.lower_bound(key);
        const u128 fence_hi =
            next == by_key_.end() ? space_hi_ + 1 : next->second;
        const u128 fence_lo = next == by_key_.begin()
                                  ? space_lo_ - 1
                                  : std::prev(next)->second;
        const u128 token = pick_token(fence_lo, fence_hi, fresh_);
        if (token != 0) {
            by_key_.emplace(key, token);
            by_token_.emplace(token, key);
            fresh_ = false;
            result.token = token;
            return result;
        }
        if (attempt == 0)
            result.remapped = rebalance();
    }
    throw error("token space exhausted");
}

int64_t OpeEngine::decrypt(u128 token) const {
    auto it = by_token_.find(token);
    if (it == by_token_.end())
        throw lookup_error("unknown order token");
    return it->second.first;
}

bool OpeEngine::has_token(u128 token) const {
    return by_token_.count(token) > 0;
}

std::vector<OpeEntry> OpeEngine::entries() const {
    std::vector<OpeEntry> out;
    out.reserve(by_token_.size());
    for (const auto &[token, key] : by_token_)
        out.push_back({key.first, key.second, token});
    return out;
}

std::vector<uint8_t> OpeEngine::checkpoint() const {
    std::vector<uint8_t> blob;
    blob.reserve(14 + by_token_.size() * 28);
    for (char c : {'O', 'P', 'E', 'S'})
        blob.push_back(static_cast<uint8_t>(c));
    append_u16_le(blob, 1);
    append_u64_le(blob, by_token_.size());
    for (const auto &[token, key] : by_token_) {
        append_i64_le(blob, key.first);
        append_u32_le(blob, key.second);
        append_u128_le(blob, token);
    }
    return blob;
}

OpeEngine OpeEngine::restore(const std::vector<uint8_t> &blob) {
    const uint8_t *p = blob.data();
    const uint8_t *end = p + blob.size();
    if (blob.size() < 14 || p[0] != 'O' || p[1] != 'P' || p[2] != 'E' ||
        p[3] != 'S')
        throw error("not an engine checkpoint");
    p += 4;
    const uint16_t version = read_u16_le(p, end);
    if (version != 1)
        throw error("unsupported checkpoint version " +
                    std::to_string(version));
    const uint64_t count = read_u64_le(p, end);

    // Further insertions continue from a stream derived from the snapshot.
    OpeEngine engine(std::string_view("opes-restore"), kSpaceLo, kSpaceHi);
    engine.prg_.seed(fnv1a64(blob));
    u128 prev_token = 0;
    Key prev_key{INT64_MIN, 0};
    bool first = true;
    for (uint64_t i = 0; i < count; ++i) {
        const int64_t plaintext = read_i64_le(p, end);
        const uint32_t rank = read_u32_le(p, end);
        const u128 token = read_u128_le(p, end);
        const Key key{plaintext, rank};
        if (!first && (token <= prev_token || key <= prev_key))
            throw error("corrupt checkpoint: entries out of order");
        first = false;
        prev_token = token;
        prev_key = key;
        engine.by_key_.emplace(key, token);
        engine.by_token_.emplace(token, key);
    }
    if (p != end)
        throw error("trailing bytes after checkpoint entries");
    engine.fresh_ = engine.by_key_.empty();
    return engine;
}

} // namespace opeps
