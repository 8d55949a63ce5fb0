#pragma once

#include "vwsim/chord.hpp"
#include "vwsim/geometry.hpp"
#include "vwsim/ids.hpp"
#include "vwsim/inventory.hpp"
#include "vwsim/metrics.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

namespace vwsim {

/// Rectangle of whole grids; units are grid counts, lower-left at (x, y).
struct Zone {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    bool contains(int gx, int gy) const {
        return gx >= x && gx < x + w && gy >= y && gy < y + h;
    }
    double center_x() const { return x + w / 2.0; }
    double center_y() const { return y + h / 2.0; }
    bool operator==(const Zone&) const = default;
};

/// Returns true when the two zones share an edge segment of positive length.
bool zones_abut(const Zone& a, const Zone& b);

/// Location record kept by the region bot owning the object's grid. Besides
/// the author's logical computer id it caches the addressing bot currently in
/// charge of that id's hash key.
struct ObjectLocationRecord {
    ObjectId oid;
    Coord ocoord;
    LogicalComputerId lcid;
    NodeAddress cached_addressing_bot;
    std::uint64_t cache_version = 0;
    bool operator==(const ObjectLocationRecord&) const = default;
};

/// Coordinate-overlay node. Owns one zone after a split, possibly more after
/// absorbing fragments from departing neighbors.
struct RegionBot {
    NodeAddress address;
    std::vector<Zone> zones;
    // grid index -> records of objects located on that grid, sorted by oid
    std::map<std::pair<int, int>, std::vector<ObjectLocationRecord>> objects;
    // region corner grid index -> that region's inventory
    std::map<std::pair<int, int>, Inventory> inventories;
    std::set<NodeAddress> neighbors;
    // load counters for the current sampling window
    std::uint64_t handled = 0;
    std::uint64_t forwarded = 0;

    bool covers(int gx, int gy) const;
};

/// Normalization of a map point into the unit square; throws
/// std::domain_error when p lies outside [0, X) x [0, Y).
Coord normalize(Coord p, double x_map, double y_map);

/// The location mapping service: a 2-d coordinate overlay of region bots with
/// grid-aligned zones. Splits follow the longer zone axis (ties split
/// left/right), the splitting owner keeps the lower/left ceil(n/2) grids and
/// the newcomer takes the rest. Departures hand each zone to the
/// smallest-addressed neighbor that can absorb it as a rectangle, falling
/// back to handing it over as an extra fragment. Neighbor sets are rebuilt
/// structurally after every membership change.
class CanOverlay {
public:
    struct RouteResult {
        OverlayStatus status = OverlayStatus::Ok;
        NodeAddress owner;
        int forwards = 0;
    };
    struct GridQueryResult {
        OverlayStatus status = OverlayStatus::Ok;
        std::vector<ObjectLocationRecord> records;
        std::vector<std::pair<NodeAddress, GridCoord>> neighbors;
    };
    struct LocationResult {
        OverlayStatus status = OverlayStatus::Ok;
        ObjectLocationRecord record;
    };
    struct InventoryResult {
        OverlayStatus status = OverlayStatus::Ok;
        Inventory inventory;
    };

    explicit CanOverlay(GeometryParams geom);

    const GeometryParams& geometry() const { return geom_; }
    bool empty() const { return bots_.empty(); }
    std::size_t size() const { return bots_.size(); }
    bool alive(NodeAddress addr) const { return bots_.count(addr) != 0; }
    std::vector<NodeAddress> addresses() const;
    NodeAddress first_live() const;
    const RegionBot& bot(NodeAddress addr) const { return bots_.at(addr); }
    RegionBot& bot_mut(NodeAddress addr) { return bots_.at(addr); }

    /// First bot; owns the entire grid space.
    void bootstrap(NodeAddress addr);
    /// Splits the zone covering `point`. Returns AlreadyExists for a live
    /// address, RetryAfterStabilization when the target zone is a single grid
    /// (the caller redraws the point).
    OverlayStatus join(NodeAddress addr, Coord point);
    void leave(NodeAddress addr);

    /// Greedy coordinate routing: forward to the neighbor zone whose centroid
    /// is closest to the target, ties to the smaller address, never revisiting
    /// a bot. Meters one direct hop for the client delivery plus one region
    /// hop per forward.
    RouteResult route(NodeAddress entry, Coord target, Meter* m);

    /// One round trip to a known bot asking for a grid's objects and its up to
    /// four edge-adjacent (bot, grid) neighbor pairs. Off-map grids are
    /// omitted; a grid outside the bot's zones earns a WrongOwner reply.
    GridQueryResult grid_query(NodeAddress addr, GridCoord grid, Meter* m);

    /// Routed stores. object_create also appends the catalog entry to the
    /// inventory of the object's region, wherever that region's coordinate
    /// owner lives.
    OverlayStatus object_create(NodeAddress entry, const ObjectLocationRecord& rec,
                                const ObjectEntry& catalog_entry, Meter* m);
    OverlayStatus inventory_create(NodeAddress entry, Inventory inv, Meter* m);

    /// Routed fetches.
    LocationResult object_location_retrieval(NodeAddress entry, Coord ocoord, Meter* m);
    InventoryResult inventory_retrieval(NodeAddress entry, RegionCoord rcoord, Meter* m);

    /// Freshness pass over every stored record: looks the lcid key up on the
    /// ring and rewrites the cached addressing bot where ownership moved.
    /// Returns the number of rewritten records.
    std::size_t cache_refresh(ChordRing& ring, Meter* m);

    /// Structural owner scan (no messages); the routing oracle.
    NodeAddress owner_of_grid(int gx, int gy) const;
    NodeAddress owner_of_point(Coord p) const;

    std::pair<int, int> grid_index(Coord p) const;
    GridCoord grid_coord(std::pair<int, int> idx) const;

    // Conservation accounting: every delivery to a region bot bumps exactly
    // one bot counter and the overlay total.
    std::uint64_t total_deliveries() const { return total_deliveries_; }
    std::uint64_t sampled_deliveries() const { return sampled_deliveries_; }
    std::uint64_t lost_on_departure() const { return lost_on_departure_; }
    /// Snapshot and reset the per-bot window counters.
    std::vector<std::pair<NodeAddress, std::uint64_t>> collect_window_loads();

private:
    void deliver(RegionBot& b, bool terminal);
    void recompute_neighbors();
    RouteResult route_from_bot(NodeAddress start, Coord target, Meter* m);
    void move_contents_for_zone(RegionBot& from, RegionBot& to, const Zone& zone);
    Inventory& inventory_slot(RegionBot& owner, RegionCoord rc);

    GeometryParams geom_;
    std::map<NodeAddress, RegionBot> bots_;
    std::uint64_t total_deliveries_ = 0;
    std::uint64_t sampled_deliveries_ = 0;
    std::uint64_t lost_on_departure_ = 0;
};

} // namespace vwsim
