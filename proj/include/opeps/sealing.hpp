#pragma once

#include "opeps/core.hpp"

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace opeps {

// Authenticated-encryption envelope for exact record values. Blob layout is
// nonce (12 bytes) followed by ciphertext and tag; the tag is verified on
// unseal. Nonces are supplied by the caller so that seeded pipelines stay
// reproducible; never reuse a nonce under one key.
struct SealKey {
    std::array<uint8_t, 32> bytes{};
};

constexpr size_t kSealNonceBytes = 12;

SealKey derive_seal_key(std::string_view seed, std::string_view label);

std::array<uint8_t, kSealNonceBytes> random_nonce(Rng &rng);

std::vector<uint8_t> seal_value(const SealKey &key,
                                const std::array<uint8_t, kSealNonceBytes> &nonce,
                                int64_t value);

// Throws integrity_error when authentication fails.
int64_t unseal_value(const SealKey &key, const std::vector<uint8_t> &blob);

} // namespace opeps
