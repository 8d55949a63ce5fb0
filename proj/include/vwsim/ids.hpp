#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace vwsim {

using ObjectId = std::string;
using LogicalComputerId = std::string;
using RegionId = std::string;

/// Opaque simulated endpoint handle. Unique across bots, replica nodes and
/// clients within one simulation.
struct NodeAddress {
    std::uint32_t value = 0;
    auto operator<=>(const NodeAddress&) const = default;
};

} // namespace vwsim
