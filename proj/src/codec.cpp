#include "opeps/codec.hpp"

#include "opeps/core.hpp"

namespace opeps {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";
constexpr char kB64Digits[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
    if (c >= 'A' && c <= 'Z')
        return c - 'A';
    if (c >= 'a' && c <= 'z')
        return c - 'a' + 26;
    if (c >= '0' && c <= '9')
        return c - '0' + 52;
    if (c == '+')
        return 62;
    if (c == '/')
        return 63;
    return -1;
}

} // namespace

std::string to_hex(u128 value) {
    std::string out(32, '0');
    for (int i = 31; i >= 0; --i) {
        out[i] = kHexDigits[static_cast<unsigned>(value & 0xf)];
        value >>= 4;
    }
    return out;
}

u128 u128_from_hex(std::string_view hex) {
    if (hex.empty() || hex.size() > 32)
        throw error("bad u128 hex length");
    u128 value = 0;
    for (char c : hex) {
        int d;
        if (c >= '0' && c <= '9')
            d = c - '0';
        else if (c >= 'a' && c <= 'f')
            d = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F')
            d = c - 'A' + 10;
        else
            throw error("bad hex digit");
        value = (value << 4) | static_cast<unsigned>(d);
    }
    return value;
}

std::string base64_encode(const std::vector<uint8_t> &bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out.push_back(kB64Digits[(v >> 18) & 63]);
        out.push_back(kB64Digits[(v >> 12) & 63]);
        out.push_back(kB64Digits[(v >> 6) & 63]);
        out.push_back(kB64Digits[v & 63]);
    }
    if (i + 1 == bytes.size()) {
        uint32_t v = bytes[i] << 16;
        out.push_back(kB64Digits[(v >> 18) & 63]);
        out.push_back(kB64Digits[(v >> 12) & 63]);
        out += "==";
    } else if (i + 2 == bytes.size()) {
        uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out.push_back(kB64Digits[(v >> 18) & 63]);
        out.push_back(kB64Digits[(v >> 12) & 63]);
        out.push_back(kB64Digits[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::vector<uint8_t> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0)
        throw error("base64 length must be a multiple of 4");
    std::vector<uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (size_t i = 0; i < text.size(); i += 4) {
        int pad = 0;
        uint32_t v = 0;
        for (int j = 0; j < 4; ++j) {
            char c = text[i + j];
            if (c == '=') {
                if (i + 4 != text.size() || j < 2)
                    throw error("misplaced base64 padding");
                ++pad;
                v <<= 6;
                continue;
            }
            if (pad > 0)
                throw error("data after base64 padding");
            int d = b64_value(c);
            if (d < 0)
                throw error("bad base64 digit");
            v = (v << 6) | static_cast<uint32_t>(d);
        }
        out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
        if (pad < 2)
            out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
        if (pad < 1)
            out.push_back(static_cast<uint8_t>(v & 0xff));
    }
    return out;
}

void append_u16_le(std::vector<uint8_t> &out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>(v >> 8));
}

void append_u32_le(std::vector<uint8_t> &out, uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void append_u64_le(std::vector<uint8_t> &out, uint64_t v) {
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void append_i64_le(std::vector<uint8_t> &out, int64_t v) {
    append_u64_le(out, static_cast<uint64_t>(v));
}

void append_u128_le(std::vector<uint8_t> &out, u128 v) {
    for (int i = 0; i < 16; ++i)
        out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

namespace {
void need(const uint8_t *p, const uint8_t *end, size_t count) {
    if (static_cast<size_t>(end - p) < count)
        throw error("truncated binary input");
}
} // namespace

uint16_t read_u16_le(const uint8_t *&p, const uint8_t *end) {
    need(p, end, 2);
    uint16_t v = static_cast<uint16_t>(p[0] | (p[1] << 8));
    p += 2;
    return v;
}

uint32_t read_u32_le(const uint8_t *&p, const uint8_t *end) {
    need(p, end, 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<uint32_t>(p[i]) << (8 * i);
    p += 4;
    return v;
}

uint64_t read_u64_le(const uint8_t *&p, const uint8_t *end) {
    need(p, end, 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<uint64_t>(p[i]) << (8 * i);
    p += 8;
    return v;
}

int64_t read_i64_le(const uint8_t *&p, const uint8_t *end) {
    return static_cast<int64_t>(read_u64_le(p, end));
}

u128 read_u128_le(const uint8_t *&p, const uint8_t *end) {
    need(p, end, 16);
    u128 v = 0;
    for (int i = 0; i < 16; ++i)
        v |= static_cast<u128>(p[i]) << (8 * i);
    p += 16;
    return v;
}

} // namespace opeps
