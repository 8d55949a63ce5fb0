#include "vwsim/can.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vwsim {

bool zones_abut(const Zone& a, const Zone& b) {
    bool x_touch = a.x + a.w == b.x || b.x + b.w == a.x;
    bool y_touch = a.y + a.h == b.y || b.y + b.h == a.y;
    int x_overlap = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
    int y_overlap = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
    return (x_touch && y_overlap > 0) || (y_touch && x_overlap > 0);
}

bool RegionBot::covers(int gx, int gy) const {
    for (const auto& z : zones) {
        if (z.contains(gx, gy)) return true;
    }
    return false;
}

Coord normalize(Coord p, double x_map, double y_map) {
    if (p.x < 0 || p.y < 0 || p.x >= x_map || p.y >= y_map)
        throw std::domain_error("normalize: coordinate outside the map");
    return {p.x / x_map, p.y / y_map};
}

CanOverlay::CanOverlay(GeometryParams geom) : geom_(geom) { geom_.validate(); }

std::vector<NodeAddress> CanOverlay::addresses() const {
    std::vector<NodeAddress> out;
    out.reserve(bots_.size());
    for (const auto& [addr, _] : bots_) out.push_back(addr);
    return out;
}

NodeAddress CanOverlay::first_live() const {
    if (bots_.empty()) throw std::runtime_error("overlay is empty");
    return bots_.begin()->first;
}

std::pair<int, int> CanOverlay::grid_index(Coord p) const {
    GridCoord g = grid_of(p, geom_.grid_side);
    return {static_cast<int>(std::lround(g.x / geom_.grid_side)),
            static_cast<int>(std::lround(g.y / geom_.grid_side))};
}

GridCoord CanOverlay::grid_coord(std::pair<int, int> idx) const {
    return {idx.first * geom_.grid_side, idx.second * geom_.grid_side};
}

void CanOverlay::deliver(RegionBot& b, bool terminal) {
    if (terminal) {
        ++b.handled;
    } else {
        ++b.forwarded;
    }
    ++total_deliveries_;
}

void CanOverlay::bootstrap(NodeAddress addr) {
    if (!bots_.empty()) throw std::invalid_argument("bootstrap: overlay not empty");
    RegionBot bot;
    bot.address = addr;
    bot.zones.push_back({0, 0, geom_.grid_cols(), geom_.grid_rows()});
    bots_.emplace(addr, std::move(bot));
}

OverlayStatus CanOverlay::join(NodeAddress addr, Coord point) {
    if (bots_.empty()) throw std::invalid_argument("join: bootstrap the overlay first");
    if (bots_.count(addr)) return OverlayStatus::AlreadyExists;
    if (!geom_.inside(point)) throw std::domain_error("join: point outside the map");
    auto [gx, gy] = grid_index(point);
    NodeAddress owner_addr = owner_of_grid(gx, gy);
    RegionBot& owner = bots_.at(owner_addr);
    auto zit = std::find_if(owner.zones.begin(), owner.zones.end(),
                            [&](const Zone& z) { return z.contains(gx, gy); });
    Zone& zone = *zit;
    if (zone.w == 1 && zone.h == 1) return OverlayStatus::RetryAfterStabilization;

    Zone taken;
    if (zone.w >= zone.h) {
        int keep = (zone.w + 1) / 2;
        taken = {zone.x + keep, zone.y, zone.w - keep, zone.h};
        zone.w = keep;
    } else {
        int keep = (zone.h + 1) / 2;
        taken = {zone.x, zone.y + keep, zone.w, zone.h - keep};
        zone.h = keep;
    }

    RegionBot fresh;
    fresh.address = addr;
    fresh.zones.push_back(taken);
    move_contents_for_zone(owner, fresh, taken);
    bots_.emplace(addr, std::move(fresh));
    recompute_neighbors();
    return OverlayStatus::Ok;
}

void CanOverlay::move_contents_for_zone(RegionBot& from, RegionBot& to, const Zone& zone) {
    for (auto it = from.objects.begin(); it != from.objects.end();) {
        if (zone.contains(it->first.first, it->first.second)) {
            to.objects.emplace(it->first, std::move(it->second));
            it = from.objects.erase(it);
        } else {
            ++it;
        }
    }
    for (auto it = from.inventories.begin(); it != from.inventories.end();) {
        if (zone.contains(it->first.first, it->first.second)) {
            to.inventories.emplace(it->first, std::move(it->second));
            it = from.inventories.erase(it);
        } else {
            ++it;
        }
    }
}

void CanOverlay::leave(NodeAddress addr) {
    auto it = bots_.find(addr);
    if (it == bots_.end()) throw std::invalid_argument("leave: unknown address");
    if (bots_.size() == 1) throw std::invalid_argument("leave: cannot remove the last bot");

    lost_on_departure_ += it->second.handled + it->second.forwarded;
    RegionBot departing = std::move(it->second);
    bots_.erase(it);

    std::sort(departing.zones.begin(), departing.zones.end(), [](const Zone& a, const Zone& b) {
        return std::pair(a.x, a.y) < std::pair(b.x, b.y);
    });
    for (const Zone& frag : departing.zones) {
        // Prefer a neighbor whose zone extends the fragment into a rectangle;
        // the address-ordered scan makes the first hit the smallest address.
        NodeAddress best{};
        bool found = false;
        Zone* merge_into = nullptr;
        for (auto& [na, nb] : bots_) {
            for (auto& z : nb.zones) {
                bool horiz = z.h == frag.h && z.y == frag.y &&
                             (z.x + z.w == frag.x || frag.x + frag.w == z.x);
                bool vert = z.w == frag.w && z.x == frag.x &&
                            (z.y + z.h == frag.y || frag.y + frag.h == z.y);
                if (horiz || vert) {
                    best = na;
                    merge_into = &z;
                    found = true;
                    break;
                }
            }
            if (found) break;
        }
        if (found) {
            if (merge_into->x == frag.x && merge_into->w == frag.w) {
                merge_into->y = std::min(merge_into->y, frag.y);
                merge_into->h += frag.h;
            } else {
                merge_into->x = std::min(merge_into->x, frag.x);
                merge_into->w += frag.w;
            }
            move_contents_for_zone(departing, bots_.at(best), frag);
            continue;
        }
        // No rectangular merge: the smallest-addressed abutting bot holds the
        // fragment as an extra zone.
        bool have_holder = false;
        NodeAddress holder{};
        for (auto& [na, nb] : bots_) {
            for (auto& z : nb.zones) {
                if (zones_abut(z, frag)) {
                    holder = na;
                    have_holder = true;
                    break;
                }
            }
            if (have_holder) break;
        }
        if (!have_holder) throw std::logic_error("leave: fragment with no abutting bot");
        RegionBot& h = bots_.at(holder);
        h.zones.push_back(frag);
        move_contents_for_zone(departing, h, frag);
    }
    recompute_neighbors();
}

void CanOverlay::recompute_neighbors() {
    for (auto& [a, bot] : bots_) bot.neighbors.clear();
    for (auto ia = bots_.begin(); ia != bots_.end(); ++ia) {
        for (auto ib = std::next(ia); ib != bots_.end(); ++ib) {
            bool adjacent = false;
            for (const auto& za : ia->second.zones) {
                for (const auto& zb : ib->second.zones) {
                    if (zones_abut(za, zb)) {
                        adjacent = true;
                        break;
                    }
                }
                if (adjacent) break;
            }
            if (adjacent) {
                ia->second.neighbors.insert(ib->first);
                ib->second.neighbors.insert(ia->first);
            }
        }
    }
}

NodeAddress CanOverlay::owner_of_grid(int gx, int gy) const {
    for (const auto& [addr, bot] : bots_) {
        if (bot.covers(gx, gy)) return addr;
    }
    throw std::logic_error("owner_of_grid: tiling hole");
}

NodeAddress CanOverlay::owner_of_point(Coord p) const {
    auto [gx, gy] = grid_index(p);
    return owner_of_grid(gx, gy);
}

CanOverlay::RouteResult CanOverlay::route(NodeAddress entry, Coord target, Meter* m) {
    if (bots_.empty()) return {OverlayStatus::RetryAfterStabilization, {}, 0};
    if (!geom_.inside(target)) throw std::domain_error("route: target outside the map");
    if (!bots_.count(entry)) {
        // Stale entry bot: the delivery is accounted, then the client falls
        // back to the bootstrap address.
        if (m) {
            m->hop(HopKind::Direct, "region-entry");
            ++m->dead_deliveries;
        }
        entry = first_live();
    }
    if (m) m->hop(HopKind::Direct, "region-entry");
    auto [gx, gy] = grid_index(target);
    deliver(bots_.at(entry), bots_.at(entry).covers(gx, gy));
    RouteResult r = route_from_bot(entry, target, m);
    return r;
}

CanOverlay::RouteResult CanOverlay::route_from_bot(NodeAddress start, Coord target, Meter* m) {
    auto [gx, gy] = grid_index(target);
    double tx = target.x / geom_.grid_side;
    double ty = target.y / geom_.grid_side;
    std::set<NodeAddress> visited{start};
    NodeAddress cur = start;
    int forwards = 0;
    const int limit = 2 * static_cast<int>(bots_.size()) + 8;
    while (true) {
        const RegionBot& cb = bots_.at(cur);
        if (cb.covers(gx, gy)) return {OverlayStatus::Ok, cur, forwards};
        bool found = false;
        NodeAddress best{};
        double best_d = 0;
        for (NodeAddress na : cb.neighbors) {
            if (visited.count(na)) continue;
            for (const auto& z : bots_.at(na).zones) {
                double dx = z.center_x() - tx;
                double dy = z.center_y() - ty;
                double d = dx * dx + dy * dy;
                if (!found || d < best_d || (d == best_d && na < best)) {
                    found = true;
                    best = na;
                    best_d = d;
                }
            }
        }
        if (!found) return {OverlayStatus::RetryAfterStabilization, {}, forwards};
        ++forwards;
        if (m) m->hop(HopKind::RegionRouting, "region");
        RegionBot& nb = bots_.at(best);
        deliver(nb, nb.covers(gx, gy));
        visited.insert(best);
        cur = best;
        if (forwards > limit) return {OverlayStatus::RetryAfterStabilization, {}, forwards};
    }
}

CanOverlay::GridQueryResult CanOverlay::grid_query(NodeAddress addr, GridCoord grid, Meter* m) {
    if (m) m->hop(HopKind::Direct, "grid-query");
    auto it = bots_.find(addr);
    if (it == bots_.end()) {
        if (m) ++m->dead_deliveries;
        return {OverlayStatus::Unreachable, {}, {}};
    }
    RegionBot& bot = it->second;
    int gx = static_cast<int>(std::lround(grid.x / geom_.grid_side));
    int gy = static_cast<int>(std::lround(grid.y / geom_.grid_side));
    deliver(bot, true);
    if (!bot.covers(gx, gy)) {
        if (m) m->hop(HopKind::Direct, "grid-reply");
        return {OverlayStatus::WrongOwner, {}, {}};
    }
    GridQueryResult out;
    auto oit = bot.objects.find({gx, gy});
    if (oit != bot.objects.end()) out.records = oit->second;
    static constexpr int kDirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& d : kDirs) {
        int nx = gx + d[0];
        int ny = gy + d[1];
        if (nx < 0 || ny < 0 || nx >= geom_.grid_cols() || ny >= geom_.grid_rows()) continue;
        NodeAddress na = bot.covers(nx, ny) ? addr : NodeAddress{};
        if (na == NodeAddress{}) {
            for (NodeAddress cand : bot.neighbors) {
                if (bots_.at(cand).covers(nx, ny)) {
                    na = cand;
                    break;
                }
            }
        }
        out.neighbors.emplace_back(na, grid_coord({nx, ny}));
    }
    if (m) m->hop(HopKind::Direct, "grid-reply");
    return out;
}

Inventory& CanOverlay::inventory_slot(RegionBot& owner, RegionCoord rc) {
    auto key = grid_index({rc.x, rc.y});
    auto it = owner.inventories.find(key);
    if (it == owner.inventories.end()) {
        Inventory inv;
        inv.rid = "R" + std::to_string(key.first) + "x" + std::to_string(key.second);
        inv.rcoord = rc;
        it = owner.inventories.emplace(key, std::move(inv)).first;
    }
    return it->second;
}

OverlayStatus CanOverlay::object_create(NodeAddress entry, const ObjectLocationRecord& rec,
                                        const ObjectEntry& catalog_entry, Meter* m) {
    RouteResult r = route(entry, rec.ocoord, m);
    if (r.status != OverlayStatus::Ok) return r.status;
    RegionBot& owner = bots_.at(r.owner);
    auto key = grid_index(rec.ocoord);
    auto& records = owner.objects[key];
    auto dup = std::find_if(records.begin(), records.end(),
                            [&](const ObjectLocationRecord& e) { return e.oid == rec.oid; });
    if (m) m->hop(HopKind::Direct, "store-reply");
    if (dup != records.end()) return OverlayStatus::AlreadyExists;
    records.insert(std::upper_bound(records.begin(), records.end(), rec,
                                    [](const ObjectLocationRecord& a, const ObjectLocationRecord& b) {
                                        return a.oid < b.oid;
                                    }),
                   rec);

    // The catalog entry lands in the inventory of the object's region, owned
    // by whoever covers the region coordinate.
    RegionCoord rc = region_of(rec.ocoord, geom_.grid_side, geom_.grids_per_region);
    auto rkey = grid_index({rc.x, rc.y});
    NodeAddress inv_owner_addr = r.owner;
    if (!owner.covers(rkey.first, rkey.second)) {
        RouteResult r2 = route_from_bot(r.owner, {rc.x, rc.y}, m);
        if (r2.status != OverlayStatus::Ok) return r2.status;
        inv_owner_addr = r2.owner;
    }
    inventory_slot(bots_.at(inv_owner_addr), rc).upsert(catalog_entry);
    return OverlayStatus::Ok;
}

OverlayStatus CanOverlay::inventory_create(NodeAddress entry, Inventory inv, Meter* m) {
    RouteResult r = route(entry, {inv.rcoord.x, inv.rcoord.y}, m);
    if (r.status != OverlayStatus::Ok) return r.status;
    if (m) m->hop(HopKind::Direct, "store-reply");
    auto key = grid_index({inv.rcoord.x, inv.rcoord.y});
    bots_.at(r.owner).inventories.insert_or_assign(key, std::move(inv));
    return OverlayStatus::Ok;
}

CanOverlay::LocationResult CanOverlay::object_location_retrieval(NodeAddress entry, Coord ocoord,
                                                                 Meter* m) {
    RouteResult r = route(entry, ocoord, m);
    if (r.status != OverlayStatus::Ok) return {r.status, {}};
    if (m) m->hop(HopKind::Direct, "fetch-reply");
    const RegionBot& owner = bots_.at(r.owner);
    auto it = owner.objects.find(grid_index(ocoord));
    if (it != owner.objects.end()) {
        for (const auto& rec : it->second) {
            if (rec.ocoord == ocoord) return {OverlayStatus::Ok, rec};
        }
    }
    return {OverlayStatus::NotFound, {}};
}

CanOverlay::InventoryResult CanOverlay::inventory_retrieval(NodeAddress entry, RegionCoord rcoord,
                                                            Meter* m) {
    RouteResult r = route(entry, {rcoord.x, rcoord.y}, m);
    if (r.status != OverlayStatus::Ok) return {r.status, {}};
    if (m) m->hop(HopKind::Direct, "fetch-reply");
    const RegionBot& owner = bots_.at(r.owner);
    auto it = owner.inventories.find(grid_index({rcoord.x, rcoord.y}));
    if (it == owner.inventories.end()) return {OverlayStatus::NotFound, {}};
    return {OverlayStatus::Ok, it->second};
}

std::size_t CanOverlay::cache_refresh(ChordRing& ring, Meter* m) {
    if (ring.empty()) return 0;
    std::size_t rewrites = 0;
    for (auto& [addr, bot] : bots_) {
        for (auto& [grid, records] : bot.objects) {
            for (auto& rec : records) {
                LookupResult lr = ring.lookup(ring.first_live(), ring.key_of(rec.lcid), m);
                if (lr.status != OverlayStatus::Ok) continue; // retry later, stay stale
                if (m) m->hop(HopKind::Direct, "refresh-reply");
                if (lr.owner_address != rec.cached_addressing_bot) {
                    rec.cached_addressing_bot = lr.owner_address;
                    ++rec.cache_version;
                    ++rewrites;
                }
            }
        }
    }
    return rewrites;
}

std::vector<std::pair<NodeAddress, std::uint64_t>> CanOverlay::collect_window_loads() {
    std::vector<std::pair<NodeAddress, std::uint64_t>> out;
    out.reserve(bots_.size());
    for (auto& [addr, bot] : bots_) {
        std::uint64_t load = bot.handled + bot.forwarded;
        out.emplace_back(addr, load);
        sampled_deliveries_ += load;
        bot.handled = 0;
        bot.forwarded = 0;
    }
    return out;
}

} // namespace vwsim
