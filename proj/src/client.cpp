#include "vwsim/client.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace vwsim {

LogicalComputer& LogicalComputerRegistry::create(const LogicalComputerId& lcid,
                                                 std::vector<NodeAddress> replicas) {
    if (lcid.empty()) throw std::invalid_argument("lcid must be non-empty");
    if (replicas.empty()) throw std::invalid_argument("replica set must be non-empty");
    if (lcs_.count(lcid)) throw std::invalid_argument("logical computer already exists");
    LogicalComputer lc;
    lc.lcid = lcid;
    lc.replicas = replicas;
    auto [it, _] = lcs_.emplace(lcid, std::move(lc));
    for (NodeAddress a : replicas) by_replica_.emplace(a.value, lcid);
    return it->second;
}

void LogicalComputerRegistry::replace_replica(const LogicalComputerId& lcid, NodeAddress old_addr,
                                              NodeAddress fresh_addr) {
    LogicalComputer& lc = lcs_.at(lcid);
    auto it = std::find(lc.replicas.begin(), lc.replicas.end(), old_addr);
    if (it == lc.replicas.end()) throw std::invalid_argument("replace_replica: unknown replica");
    *it = fresh_addr;
    by_replica_.erase(old_addr.value);
    by_replica_.emplace(fresh_addr.value, lcid);
}

LogicalComputerRegistry::FetchResult LogicalComputerRegistry::fetch(NodeAddress replica,
                                                                    const ObjectId& oid,
                                                                    std::size_t wanted_files,
                                                                    Meter* m) const {
    if (m) m->hop(HopKind::Direct, "replica-fetch");
    auto rit = by_replica_.find(replica.value);
    if (rit == by_replica_.end()) {
        if (m) ++m->dead_deliveries;
        return {OverlayStatus::Unreachable, nullptr};
    }
    const LogicalComputer& lc = lcs_.at(rit->second);
    auto oit = lc.store.find(oid);
    if (m) {
        m->hop(HopKind::Direct, "replica-reply");
        m->transfer(wanted_files);
    }
    if (oit == lc.store.end()) return {OverlayStatus::NotFound, nullptr};
    return {OverlayStatus::Ok, &oit->second};
}

const char* strategy_name(RetrievalStrategy s) {
    switch (s) {
    case RetrievalStrategy::Proximity: return "improved";
    case RetrievalStrategy::Basic: return "basic";
    case RetrievalStrategy::DistanceSorted: return "distance_sorted";
    }
    return "?";
}

RetrievalStrategy strategy_from_name(const std::string& name) {
    if (name == "improved" || name == "proximity") return RetrievalStrategy::Proximity;
    if (name == "basic") return RetrievalStrategy::Basic;
    if (name == "distance_sorted") return RetrievalStrategy::DistanceSorted;
    throw std::invalid_argument("unknown strategy: " + name);
}

std::uint64_t object_bytes(const ObjectEntry& entry) {
    std::uint64_t total = 0;
    for (const auto& g : entry.file_types) {
        for (const auto& f : g.files) total += f.size;
    }
    return total;
}

std::vector<RegionCoord> neighbor_regions(Coord p0, const GeometryParams& geom) {
    if (!geom.inside(p0)) throw std::domain_error("neighbor_regions: origin outside the map");
    double s = geom.region_side();
    RegionCoord home = region_of(p0, geom.grid_side, geom.grids_per_region);
    std::vector<RegionCoord> out{home};
    double dx = p0.x - home.x;
    double dy = p0.y - home.y;
    bool have_x = false, have_y = false;
    double nx = 0, ny = 0;
    if (dx < s / 2 && home.x > 0) {
        nx = home.x - s;
        have_x = true;
    } else if (dx > s / 2 && home.x + s < geom.x_map) {
        nx = home.x + s;
        have_x = true;
    }
    if (dy < s / 2 && home.y > 0) {
        ny = home.y - s;
        have_y = true;
    } else if (dy > s / 2 && home.y + s < geom.y_map) {
        ny = home.y + s;
        have_y = true;
    }
    if (have_x) out.push_back({nx, home.y});
    if (have_y) out.push_back({home.x, ny});
    if (have_x && have_y) out.push_back({nx, ny});
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

NodeAddress entry_bot(ClientState& client, World& world) {
    if (client.has_entry && world.can.alive(client.entry_region_bot))
        return client.entry_region_bot;
    return world.can.first_live();
}

const FileEntry* find_file(const ObjectEntry& entry, const std::string& type,
                           const std::string& name) {
    for (const auto& g : entry.file_types) {
        if (g.type_name != type) continue;
        for (const auto& f : g.files) {
            if (f.name() == name) return &f;
        }
    }
    return nullptr;
}

/// Resolve the replica set of `lcid`: cached addressing bot first (when
/// given), full ring lookup as the fallback or when forced.
bool resolve_replicas(World& world, const LogicalComputerId& lcid,
                      const ObjectLocationRecord* rec, bool force_full, Meter& m,
                      MappingRecord& out) {
    if (rec && !force_full) {
        auto direct = world.ring.query_at(rec->cached_addressing_bot, lcid, &m);
        if (direct.status == OverlayStatus::Ok) {
            out = std::move(direct.record);
            return true;
        }
        if (direct.status == OverlayStatus::NotFound) return false;
        // WrongOwner / Unreachable: fall through to the lookup service.
    }
    if (world.ring.empty()) return false;
    auto qr = world.ring.mapping_query(world.ring.first_live(), lcid, &m);
    if (qr.status != OverlayStatus::Ok) return false;
    out = std::move(qr.record);
    return true;
}

void remember_locally(ClientState& client, World& world, const ObjectEntry& remote,
                      ObjectEntry local_copy, const ClientParams& params) {
    auto old = client.cache.find(remote.oid);
    if (old != client.cache.end()) client.cache_bytes -= object_bytes(old->second);
    client.cache_bytes += object_bytes(local_copy);
    client.cache[remote.oid] = std::move(local_copy);

    const GeometryParams& geom = world.can.geometry();
    RegionCoord rc = region_of(remote.ocoord, geom.grid_side, geom.grids_per_region);
    auto key = world.can.grid_index({rc.x, rc.y});
    Inventory& inv = client.local_inventories[key];
    if (inv.rid.empty()) {
        inv.rid = "local-" + std::to_string(key.first) + "x" + std::to_string(key.second);
        inv.rcoord = rc;
    }
    ObjectEntry catalog = remote; // catalog copy carries no payloads
    for (auto& g : catalog.file_types) {
        for (auto& f : g.files) f.content.clear();
    }
    inv.upsert(std::move(catalog));
    evict_cache(client, params.perception_range);
}

} // namespace

CRCInventory construct_crc_inventory(ClientState& client, World& world, double r_search,
                                     Meter& m) {
    const GeometryParams& geom = world.can.geometry();
    CRCInventory crc;
    crc.origin = client.pos;
    crc.radius = r_search;
    for (const RegionCoord& rc : neighbor_regions(client.pos, geom)) {
        auto res = world.can.inventory_retrieval(entry_bot(client, world), rc, &m);
        if (res.status == OverlayStatus::RetryAfterStabilization) {
            crc.partial = true;
            continue;
        }
        if (res.status != OverlayStatus::Ok) continue; // absent inventory contributes nothing
        for (ObjectEntry& obj : res.inventory.objects) {
            if (distance(obj.ocoord, client.pos) > r_search) continue;
            crc.add(std::move(obj));
        }
    }
    return crc;
}

LoadResult load_content(ClientState& client, World& world, const ObjectEntry& remote,
                        const ObjectLocationRecord* rec, bool always_resolve_and_fetch,
                        const ClientParams& params, Meter& m) {
    auto local_it = client.cache.find(remote.oid);
    const ObjectEntry* local = local_it == client.cache.end() ? nullptr : &local_it->second;
    bool up_to_date = local && local->ohash == remote.ohash;
    if (up_to_date && !always_resolve_and_fetch) return LoadResult::CacheHit;

    DownloadPlan plan = diff_objects(local, remote);

    MappingRecord mapping;
    if (!resolve_replicas(world, remote.lcid, rec, always_resolve_and_fetch, m, mapping)) {
        client.deferred.insert(remote.oid);
        return LoadResult::Deferred;
    }

    // The wanted payloads: the plan's stale files, or everything on a full
    // resync, plus any content the local copy cannot supply.
    std::vector<std::pair<std::string, std::string>> wanted;
    for (const auto& g : remote.file_types) {
        for (const auto& f : g.files) {
            bool need = plan.object_needed ||
                        plan.stale_files.count({g.type_name, f.name()}) != 0;
            if (!need && local) {
                const FileEntry* lf = find_file(*local, g.type_name, f.name());
                need = lf == nullptr || lf->content.empty() || lf->fhash != f.fhash;
            }
            if (need) wanted.emplace_back(g.type_name, f.name());
        }
    }
    if (up_to_date) wanted.clear(); // baseline round trip confirms freshness only

    const ObjectEntry* authoritative = nullptr;
    std::uniform_int_distribution<std::size_t> pick(0, mapping.replicas.size() - 1);
    std::size_t start = pick(world.rng);
    for (std::size_t i = 0; i < mapping.replicas.size(); ++i) {
        NodeAddress replica = mapping.replicas[(start + i) % mapping.replicas.size()];
        auto fr = world.lcs.fetch(replica, remote.oid, wanted.size(), &m);
        if (fr.status == OverlayStatus::Ok) {
            authoritative = fr.entry;
            break;
        }
        if (fr.status == OverlayStatus::NotFound) break;
    }
    if (!authoritative) {
        client.deferred.insert(remote.oid);
        return LoadResult::Deferred;
    }
    if (up_to_date) return LoadResult::CacheHit; // nothing to apply

    // Assemble the fresh local copy: remote catalog metadata, payloads from
    // the replica where stale and from the old copy where still valid.
    ObjectEntry assembled = remote;
    for (auto& g : assembled.file_types) {
        for (auto& f : g.files) {
            bool fetched = std::find(wanted.begin(), wanted.end(),
                                     std::pair(g.type_name, f.name())) != wanted.end();
            const ObjectEntry* source = fetched ? authoritative : local;
            const FileEntry* sf = source ? find_file(*source, g.type_name, f.name()) : nullptr;
            if (!sf || sf->content.empty()) {
                client.deferred.insert(remote.oid);
                return LoadResult::Deferred;
            }
            f.content = sf->content;
            f.size = sf->content.size();
        }
    }
    ObjectEntry checked = recompute_hashes(assembled);
    if (checked.ohash != remote.ohash) {
        client.deferred.insert(remote.oid);
        return LoadResult::IntegrityError;
    }
    client.deferred.erase(remote.oid);
    remember_locally(client, world, remote, std::move(checked), params);
    return LoadResult::Downloaded;
}

namespace {

struct QueueItem {
    double dist;
    int gx;
    int gy;
    NodeAddress bot;
    bool operator>(const QueueItem& o) const {
        return std::tie(dist, gx, gy) > std::tie(o.dist, o.gx, o.gy);
    }
};

CycleStats proximity_cycle(ClientState& client, World& world, const CRCInventory& crc,
                           const ClientParams& params, Meter& m) {
    CycleStats stats;
    stats.partial = crc.partial;
    const GeometryParams& geom = world.can.geometry();
    Coord p0 = client.pos;

    std::set<ObjectId> loaded;
    std::set<ObjectId> perception;
    for (const auto& obj : crc.objects) {
        if (distance(obj.ocoord, p0) <= params.perception_range) perception.insert(obj.oid);
    }
    std::uint64_t last_load_clock = 0;
    std::uint64_t last_perception_clock = 0;
    auto note_loaded = [&](const ObjectId& oid) {
        loaded.insert(oid);
        stats.loaded_order.push_back(oid);
        last_load_clock = m.clock;
        if (perception.count(oid)) last_perception_clock = m.clock;
    };
    auto load_from_grid = [&](const ObjectLocationRecord& rec) {
        if (loaded.count(rec.oid)) return;
        const ObjectEntry* remote = crc.find(rec.oid);
        if (!remote) return; // outside the search radius or an unfetched region
        LoadResult r = load_content(client, world, *remote, &rec, false, params, m);
        if (r == LoadResult::CacheHit || r == LoadResult::Downloaded) note_loaded(rec.oid);
    };

    // Route to the bot in charge of the origin grid, then expand outward in
    // grid-distance order; P suppresses revisits within the cycle.
    auto rr = world.can.route(entry_bot(client, world), p0, &m);
    if (rr.status != OverlayStatus::Ok) {
        stats.partial = true;
        stats.total_delay = m.clock;
        stats.perceived_delay = m.clock;
        return stats;
    }
    client.entry_region_bot = rr.owner;
    client.has_entry = true;

    std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> queue;
    std::set<std::pair<int, int>> seen;
    auto push = [&](NodeAddress bot, GridCoord g) {
        auto idx = world.can.grid_index({g.x, g.y});
        if (seen.count(idx) || client.visited.count(idx)) return;
        seen.insert(idx);
        queue.push({distance(g, p0), idx.first, idx.second, bot});
    };
    push(rr.owner, geom.grid_at(p0));

    while (!queue.empty()) {
        QueueItem item = queue.top();
        queue.pop();
        if (client.visited.count({item.gx, item.gy})) continue;
        if (item.dist > params.r_search) continue;
        client.visited.insert({item.gx, item.gy});
        GridCoord g = world.can.grid_coord({item.gx, item.gy});
        auto reply = world.can.grid_query(item.bot, g, &m);
        if (reply.status == OverlayStatus::WrongOwner || reply.status == OverlayStatus::Unreachable) {
            // Stale pair: re-route to the current owner and ask again.
            auto rr2 = world.can.route(entry_bot(client, world), {g.x, g.y}, &m);
            if (rr2.status != OverlayStatus::Ok) {
                stats.partial = true;
                continue;
            }
            reply = world.can.grid_query(rr2.owner, g, &m);
            if (reply.status != OverlayStatus::Ok) {
                stats.partial = true;
                continue;
            }
        }
        for (const auto& rec : reply.records) load_from_grid(rec);
        for (const auto& [bot, grid] : reply.neighbors) push(bot, grid);
    }

    // Sweep: whatever the traversal missed is fetched individually unless the
    // cache already holds the current version.
    for (const auto& remote : crc.objects) {
        if (loaded.count(remote.oid)) continue;
        auto lit = client.cache.find(remote.oid);
        if (lit != client.cache.end() && lit->second.ohash == remote.ohash) {
            note_loaded(remote.oid);
            continue;
        }
        auto loc = world.can.object_location_retrieval(entry_bot(client, world), remote.ocoord, &m);
        if (loc.status != OverlayStatus::Ok) {
            client.deferred.insert(remote.oid);
            ++stats.deferred;
            continue;
        }
        LoadResult r = load_content(client, world, remote, &loc.record, false, params, m);
        if (r == LoadResult::CacheHit || r == LoadResult::Downloaded) {
            note_loaded(remote.oid);
        } else {
            ++stats.deferred;
        }
    }

    stats.total_delay = last_load_clock;
    stats.perceived_delay = loaded.size() >= perception.size() &&
                                    std::includes(loaded.begin(), loaded.end(),
                                                  perception.begin(), perception.end())
                                ? last_perception_clock
                                : m.clock;
    return stats;
}

CycleStats baseline_cycle(ClientState& client, World& world, const CRCInventory& crc,
                          const ClientParams& params, bool sort_by_distance, Meter& m) {
    CycleStats stats;
    stats.partial = crc.partial;
    Coord p0 = client.pos;

    std::vector<const ObjectEntry*> order;
    order.reserve(crc.objects.size());
    for (const auto& obj : crc.objects) order.push_back(&obj);
    if (sort_by_distance) {
        std::stable_sort(order.begin(), order.end(), [&](const ObjectEntry* a, const ObjectEntry* b) {
            double da = distance(a->ocoord, p0);
            double db = distance(b->ocoord, p0);
            return da != db ? da < db : a->oid < b->oid;
        });
    }

    std::set<ObjectId> perception;
    for (const auto& obj : crc.objects) {
        if (distance(obj.ocoord, p0) <= params.perception_range) perception.insert(obj.oid);
    }
    std::set<ObjectId> loaded;
    std::uint64_t last_load_clock = 0;
    std::uint64_t last_perception_clock = 0;
    for (const ObjectEntry* remote : order) {
        LoadResult r = load_content(client, world, *remote, nullptr, true, params, m);
        if (r == LoadResult::CacheHit || r == LoadResult::Downloaded) {
            loaded.insert(remote->oid);
            stats.loaded_order.push_back(remote->oid);
            last_load_clock = m.clock;
            if (perception.count(remote->oid)) last_perception_clock = m.clock;
        } else {
            ++stats.deferred;
        }
    }
    stats.total_delay = last_load_clock;
    stats.perceived_delay = loaded.size() >= perception.size() &&
                                    std::includes(loaded.begin(), loaded.end(),
                                                  perception.begin(), perception.end())
                                ? last_perception_clock
                                : m.clock;
    return stats;
}

} // namespace

CycleStats content_retrieval_cycle(ClientState& client, World& world, const ClientParams& params,
                                   Meter& m) {
    const GeometryParams& geom = world.can.geometry();
    if (!geom.inside(client.pos))
        throw std::domain_error("content_retrieval_cycle: client outside the map");
    client.visited.clear();
    CRCInventory crc = construct_crc_inventory(client, world, params.r_search, m);
    switch (params.strategy) {
    case RetrievalStrategy::Proximity:
        return proximity_cycle(client, world, crc, params, m);
    case RetrievalStrategy::Basic:
        return baseline_cycle(client, world, crc, params, false, m);
    case RetrievalStrategy::DistanceSorted:
        return baseline_cycle(client, world, crc, params, true, m);
    }
    throw std::logic_error("unreachable");
}

void evict_cache(ClientState& client, double perception_range) {
    while (client.cache_bytes > client.cache_capacity && !client.cache.empty()) {
        auto pick_victim = [&](bool outside_only) -> const ObjectId* {
            const ObjectId* victim = nullptr;
            double victim_dist = -1;
            for (const auto& [oid, entry] : client.cache) {
                double d = distance(entry.ocoord, client.pos);
                if (outside_only && d <= perception_range) continue;
                if (d > victim_dist || (d == victim_dist && victim && oid > *victim)) {
                    victim = &oid;
                    victim_dist = d;
                }
            }
            return victim;
        };
        const ObjectId* victim = pick_victim(true);
        if (!victim) victim = pick_victim(false);
        auto it = client.cache.find(*victim);
        client.cache_bytes -= object_bytes(it->second);
        client.cache.erase(it);
    }
}

} // namespace vwsim
