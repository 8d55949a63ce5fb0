#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace vwsim {

/// 256-bit digest. Equality is bitwise.
struct HashDigest {
    std::array<std::uint8_t, 32> bytes{};

    auto operator<=>(const HashDigest&) const = default;

    std::string hex() const;
    /// Parses 64 lowercase/uppercase hex chars; throws std::invalid_argument.
    static HashDigest from_hex(std::string_view s);
};

HashDigest sha256(std::span<const std::uint8_t> data);
HashDigest sha256(std::string_view data);

/// Binary Merkle root over an ordered leaf list: left-to-right pairing, a
/// level with an odd count duplicates its last digest, a single leaf is its
/// own root. Internal node = sha256(left_bytes || right_bytes).
/// Throws std::invalid_argument on an empty list.
HashDigest merkle_root(std::span<const HashDigest> leaves);

} // namespace vwsim
