#pragma once

#include "vwsim/inventory.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace vwsim {

/// Raised by the parsers; the message names the offending path.
struct InventoryParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Region inventory wire format:
///   { "RID": ..., "RCoord": "x, y", "Object": [ ... ] }
/// with objects as
///   { "OID", "OHash", "OCoord", "LCID", "OProperties": { "PHash", ... },
///     "FileType": [ { "Type", "FTHash", "Files": [ { "FHash",
///     "FProperties", "Size" } ] } ] }
/// Hash digests travel as lowercase hex; file payloads never travel in the
/// catalog, only their hash and byte count.
std::string serialize_inventory(const Inventory& inv);
Inventory parse_inventory(std::string_view text);

std::string serialize_object(const ObjectEntry& obj);
ObjectEntry parse_object(std::string_view text);

/// "x, y" with shortest round-trip number formatting.
std::string format_coord_pair(double x, double y);

} // namespace vwsim
