#pragma once

#include "vwsim/can.hpp"
#include "vwsim/chord.hpp"
#include "vwsim/geometry.hpp"
#include "vwsim/inventory.hpp"
#include "vwsim/logical_computer.hpp"
#include "vwsim/metrics.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace vwsim {

enum class RetrievalStrategy { Proximity, Basic, DistanceSorted };

const char* strategy_name(RetrievalStrategy s);
RetrievalStrategy strategy_from_name(const std::string& name);

/// Cross-region content inventory: the merged, radius-filtered catalog of the
/// neighbor regions around one search origin.
struct CRCInventory {
    Coord origin;
    double radius = 0;
    bool partial = false; // a region fetch hit a routing retry this cycle
    std::vector<ObjectEntry> objects; // merge order: region by region, oid-sorted within
    std::map<ObjectId, std::size_t> index;

    const ObjectEntry* find(const ObjectId& oid) const {
        auto it = index.find(oid);
        return it == index.end() ? nullptr : &objects[it->second];
    }
    void add(ObjectEntry entry) {
        if (index.count(entry.oid)) return;
        index.emplace(entry.oid, objects.size());
        objects.push_back(std::move(entry));
    }
};

struct ClientState {
    Coord pos;
    double velocity = 0;
    // last successfully synced catalog entries, keyed by region grid index
    std::map<std::pair<int, int>, Inventory> local_inventories;
    // content-ful local copies
    std::map<ObjectId, ObjectEntry> cache;
    std::uint64_t cache_bytes = 0;
    std::uint64_t cache_capacity = 0;
    // visited grids P of the running retrieval cycle
    std::set<std::pair<int, int>> visited;
    NodeAddress entry_region_bot;
    bool has_entry = false;
    std::set<ObjectId> deferred;
};

/// Everything a retrieval cycle talks to.
struct World {
    ChordRing& ring;
    CanOverlay& can;
    LogicalComputerRegistry& lcs;
    std::mt19937_64& rng;
};

struct ClientParams {
    double r_search = 0;
    double perception_range = 0;
    RetrievalStrategy strategy = RetrievalStrategy::Proximity;
};

struct CycleStats {
    std::vector<ObjectId> loaded_order;
    std::uint64_t total_delay = 0;     // clock at the last load
    std::uint64_t perceived_delay = 0; // clock when the perception range completed
    std::size_t deferred = 0;
    bool partial = false;
};

enum class LoadResult { CacheHit, Downloaded, Deferred, IntegrityError };

/// Regions whose inventories cover a search origin: the home region, the
/// horizontal and vertical neighbors on the side of the origin's half of the
/// region (strict inequalities, so a midline adds nothing), and their common
/// diagonal when both were added. Off-map regions are skipped. Sorted by
/// (x, y).
std::vector<RegionCoord> neighbor_regions(Coord p0, const GeometryParams& geom);

/// Fetches and merges the neighbor regions' inventories, dropping every
/// object farther than r_search from the origin. Routing retries leave the
/// result partial; the next cycle restores completeness.
CRCInventory construct_crc_inventory(ClientState& client, World& world, double r_search,
                                     Meter& m);

/// Brings one object up to the remote catalog entry. An equal local hash is
/// served from the cache with zero messages (unless `always_resolve_and_fetch`
/// forces the baseline resolve-and-fetch round trip). Resolution prefers the
/// cached addressing bot from `rec`, falling back to a full ring lookup on a
/// wrong-owner or dead-bot reply; `rec == nullptr` goes straight to the full
/// lookup. Downloads exactly the diff plan's files from one replica,
/// re-verifies the object root, then updates the cache and local inventory.
LoadResult load_content(ClientState& client, World& world, const ObjectEntry& remote,
                        const ObjectLocationRecord* rec, bool always_resolve_and_fetch,
                        const ClientParams& params, Meter& m);

/// One full retrieval cycle under the configured strategy.
CycleStats content_retrieval_cycle(ClientState& client, World& world,
                                   const ClientParams& params, Meter& m);

/// Evicts farthest-first while over capacity, touching objects inside the
/// perception range only after everything outside it is gone.
void evict_cache(ClientState& client, double perception_range);

std::uint64_t object_bytes(const ObjectEntry& entry);

} // namespace vwsim
