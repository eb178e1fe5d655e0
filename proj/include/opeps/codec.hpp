#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace opeps {

using u128 = unsigned __int128;

std::string to_hex(u128 value);                  // 32 lowercase hex digits
u128 u128_from_hex(std::string_view hex);

std::string base64_encode(const std::vector<uint8_t> &bytes);
std::vector<uint8_t> base64_decode(std::string_view text);

void append_u16_le(std::vector<uint8_t> &out, uint16_t v);
void append_u32_le(std::vector<uint8_t> &out, uint32_t v);
void append_u64_le(std::vector<uint8_t> &out, uint64_t v);
void append_i64_le(std::vector<uint8_t> &out, int64_t v);
void append_u128_le(std::vector<uint8_t> &out, u128 v);

// Cursor-style readers; each throws opeps::error on truncated input.
uint16_t read_u16_le(const uint8_t *&p, const uint8_t *end);
uint32_t read_u32_le(const uint8_t *&p, const uint8_t *end);
uint64_t read_u64_le(const uint8_t *&p, const uint8_t *end);
int64_t read_i64_le(const uint8_t *&p, const uint8_t *end);
u128 read_u128_le(const uint8_t *&p, const uint8_t *end);

} // namespace opeps
