#include "opeps/sealing.hpp"

#include "opeps/codec.hpp"

#include <mutex>

#include <sodium.h>

namespace opeps {

namespace {

void ensure_sodium() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0)
            throw error("libsodium initialization failed");
    });
}

static_assert(kSealNonceBytes ==
              crypto_aead_chacha20poly1305_ietf_NPUBBYTES);

} // namespace

SealKey derive_seal_key(std::string_view seed, std::string_view label) {
    ensure_sodium();
    if (seed.empty())
        throw argument_error("key seed must be non-empty");
    SealKey key;
    crypto_generichash_state state;
    crypto_generichash_init(&state, nullptr, 0, key.bytes.size());
    crypto_generichash_update(
        &state, reinterpret_cast<const unsigned char *>(label.data()),
        label.size());
    crypto_generichash_update(
        &state, reinterpret_cast<const unsigned char *>(seed.data()),
        seed.size());
    crypto_generichash_final(&state, key.bytes.data(), key.bytes.size());
    return key;
}

std::array<uint8_t, kSealNonceBytes> random_nonce(Rng &rng) {
    std::array<uint8_t, kSealNonceBytes> nonce;
    for (size_t i = 0; i < nonce.size(); i += 4) {
        const uint32_t word = static_cast<uint32_t>(rng());
        for (size_t j = 0; j < 4 && i + j < nonce.size(); ++j)
            nonce[i + j] = static_cast<uint8_t>((word >> (8 * j)) & 0xff);
    }
    return nonce;
}

std::vector<uint8_t> seal_value(
    const SealKey &key, const std::array<uint8_t, kSealNonceBytes> &nonce,
    int64_t value) {
    ensure_sodium();
    std::vector<uint8_t> message;
    append_i64_le(message, value);

    std::vector<uint8_t> blob(nonce.begin(), nonce.end());
    blob.resize(kSealNonceBytes + message.size() +
                crypto_aead_chacha20poly1305_ietf_ABYTES);
    unsigned long long clen = 0;
    crypto_aead_chacha20poly1305_ietf_encrypt(
        blob.data() + kSealNonceBytes, &clen, message.data(), message.size(),
        nullptr, 0, nullptr, nonce.data(), key.bytes.data());
    blob.resize(kSealNonceBytes + clen);
    return blob;
}

int64_t unseal_value(const SealKey &key, const std::vector<uint8_t> &blob) {
    ensure_sodium();
    if (blob.size() <
        kSealNonceBytes + 8 + crypto_aead_chacha20poly1305_ietf_ABYTES)
        throw integrity_error("sealed blob too short");
    std::vector<uint8_t> message(blob.size() - kSealNonceBytes -
                                 crypto_aead_chacha20poly1305_ietf_ABYTES);
    unsigned long long mlen = 0;
    if (crypto_aead_chacha20poly1305_ietf_decrypt(
            message.data(), &mlen, nullptr, blob.data() + kSealNonceBytes,
            blob.size() - kSealNonceBytes, nullptr, 0, blob.data(),
            key.bytes.data()) != 0)
        throw integrity_error("sealed record failed authentication");
    if (mlen != 8)
        throw integrity_error("sealed record has unexpected length");
    const uint8_t *p = message.data();
    return read_i64_le(p, message.data() + message.size());
}

} // namespace opeps
