#pragma once

#include "opeps/codec.hpp"
#include "opeps/core.hpp"

#include <map>
#include <string_view>

namespace opeps {

struct OpeEntry {
    int64_t plaintext;
    uint32_t gamma_rank;
    u128 token;
};

struct TokenRemap {
    u128 old_token;
    u128 new_token;
};

// Stateful order-preserving encryption engine over a 128-bit token space.
// Every insertion receives a fresh token (frequency hiding); equal plaintexts
// are ordered internally by their randomized-order rank. Tokens are placed
// near the midpoint of the gap between tree neighbors, with a seed-keyed
// offset inside the middle half of the gap; the first insertion takes the
// exact midpoint of the full space. A closed gap triggers a deterministic
// rebalance that re-spaces all tokens uniformly and reports the remapping so
// stored ciphertexts can be updated.
//
// Single writer: insert_token mutates state. Frozen snapshots may be read
// concurrently; callers serialize insertions.
class OpeEngine {
  public:
    explicit OpeEngine(std::string_view seed);
    // Restricted token space, for exercising rebalances in tests.
    OpeEngine(std::string_view seed, u128 space_lo, u128 space_hi);

    struct InsertResult {
        u128 token;
        // Non-empty when this insertion forced a rebalance.
        std::vector<TokenRemap> remapped;
    };

    // Inserts one plaintext occurrence; gamma_rank breaks ties among equal
    // plaintexts. A (plaintext, gamma_rank) pair may be inserted only once.
    InsertResult encrypt(int64_t plaintext, uint32_t gamma_rank);

    int64_t decrypt(u128 token) const;
    bool has_token(u128 token) const;

    size_t size() const { return by_key_.size(); }
    uint64_t rebalances() const { return rebalances_; }
    u128 space_lo() const { return space_lo_; }
    u128 space_hi() const { return space_hi_; }
    static u128 default_space_lo();
    static u128 default_space_hi();
    // Token handed to the very first insertion of a fresh default engine.
    static u128 full_space_midpoint();

    // Entries in token order (equivalently plaintext-then-rank order).
    std::vector<OpeEntry> entries() const;

    // Versioned binary state snapshot: magic "OPES", version u16, entry
    // count u64, then per-entry (plaintext i64, gamma_rank u32, token u128),
    // all little-endian, entries sorted by token.
    std::vector<uint8_t> checkpoint() const;
    static OpeEngine restore(const std::vector<uint8_t> &blob);

  private:
    using Key = std::pair<int64_t, uint32_t>;

    u128 pick_token(u128 fence_lo, u128 fence_hi, bool first_insert);
    std::vector<TokenRemap> rebalance();

    std::map<Key, u128> by_key_;
    std::map<u128, Key> by_token_;
    u128 space_lo_;
    u128 space_hi_;
    Rng prg_;
    uint64_t rebalances_ = 0;
    bool fresh_ = true;
};

} // namespace opeps
