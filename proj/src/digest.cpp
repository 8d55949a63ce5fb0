#include "vwsim/digest.hpp"

#include <openssl/evp.h>

#include <stdexcept>
#include <vector>

namespace vwsim {

std::string HashDigest::hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

static int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

HashDigest HashDigest::from_hex(std::string_view s) {
    if (s.size() != 64) throw std::invalid_argument("digest hex must be 64 chars");
    HashDigest d;
    for (std::size_t i = 0; i < 32; ++i) {
        int hi = hex_nibble(s[2 * i]);
        int lo = hex_nibble(s[2 * i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("digest hex has non-hex char");
        d.bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return d;
}

HashDigest sha256(std::span<const std::uint8_t> data) {
    HashDigest d;
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), d.bytes.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != d.bytes.size()) {
        throw std::runtime_error("sha256 failed");
    }
    return d;
}

HashDigest sha256(std::string_view data) {
    return sha256(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

HashDigest merkle_root(std::span<const HashDigest> leaves) {
    if (leaves.empty()) throw std::invalid_argument("merkle_root: empty leaf list");
    std::vector<HashDigest> level(leaves.begin(), leaves.end());
    while (level.size() > 1) {
        if (level.size() % 2 != 0) level.push_back(level.back());
        std::vector<HashDigest> next;
        next.reserve(level.size() / 2);
        for (std::size_t i = 0; i < level.size(); i += 2) {
            std::array<std::uint8_t, 64> buf;
            std::copy(level[i].bytes.begin(), level[i].bytes.end(), buf.begin());
            std::copy(level[i + 1].bytes.begin(), level[i + 1].bytes.end(), buf.begin() + 32);
            next.push_back(sha256(std::span<const std::uint8_t>(buf.data(), buf.size())));
        }
        level = std::move(next);
    }
    return level.front();
}

} // namespace vwsim
