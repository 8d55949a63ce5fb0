#include "vwsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace vwsim {

namespace {
const char* kTypeNames[] = {"Texture", "Sound", "Script", "Animation", "Geometry"};

std::string zero_padded(int v, int width) {
    std::string s = std::to_string(v);
    if (static_cast<int>(s.size()) < width) s.insert(0, width - s.size(), '0');
    return s;
}
} // namespace

GeometryParams SimConfig::geometry() const {
    GeometryParams g;
    g.grid_side = grid_side;
    g.grids_per_region = grids_per_region;
    g.velocity = velocity;
    int side = 0;
    int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(grids_per_region))));
    if (r * r == grids_per_region) side = r;
    g.x_map = regions_w * side * grid_side;
    g.y_map = regions_h * side * grid_side;
    return g;
}

double SimConfig::effective_r_search() const {
    if (r_search > 0) return r_search;
    return search_radius(grid_side, grids_per_region);
}

double SimConfig::effective_perception() const {
    return perception_range > 0 ? perception_range : grid_side;
}

long SimConfig::effective_retrieval_period() const {
    if (retrieval_period > 0) return retrieval_period;
    if (velocity > 0) return cycle_period(search_radius(grid_side, grids_per_region), velocity);
    return 1;
}

std::vector<std::string> SimConfig::validate() const {
    std::vector<std::string> v;
    if (addressing_bots < 1) v.push_back("addressing_bots must be >= 1");
    if (region_bots < 1) v.push_back("region_bots must be >= 1");
    if (regions_w < 1 || regions_h < 1) v.push_back("regions_w and regions_h must be >= 1");
    int r = grids_per_region >= 1
                ? static_cast<int>(std::lround(std::sqrt(static_cast<double>(grids_per_region))))
                : 0;
    if (grids_per_region < 1 || r * r != grids_per_region)
        v.push_back("grids_per_region must be a perfect square");
    if (grid_side <= 0) v.push_back("grid_side must be > 0");
    if (objects < 0) v.push_back("objects must be >= 0");
    if (velocity < 0) v.push_back("velocity must be >= 0");
    if (r_search < 0) v.push_back("r_search must be >= 0");
    if (perception_range < 0) v.push_back("perception_range must be >= 0");
    if (cache_refresh_period < 1) v.push_back("cache_refresh_period must be >= 1");
    if (retrieval_period < 0) v.push_back("retrieval_period must be >= 0");
    if (dynamics_period < 1) v.push_back("dynamics_period must be >= 1");
    if (p_join < 0 || p_join > 1) v.push_back("p_join out of [0,1]");
    if (p_leave < 0 || p_leave > 1) v.push_back("p_leave out of [0,1]");
    if (cycles < 1) v.push_back("cycles must be >= 1");
    if (file_types_per_object < 1 ||
        file_types_per_object > static_cast<int>(std::size(kTypeNames)))
        v.push_back("file_types_per_object must be in [1,5]");
    if (files_per_type < 1) v.push_back("files_per_type must be >= 1");
    if (file_size < 1) v.push_back("file_size must be >= 1");
    if (grids_per_region >= 1 && r * r == grids_per_region) {
        long grids = static_cast<long>(regions_w) * r * regions_h * r;
        if (region_bots > grids) v.push_back("region_bots exceeds the grid count");
    }
    if (sample_window > 0 && cycles % sample_window != 0)
        v.push_back("sample_window must divide cycles");
    return v;
}

Simulation::Simulation(SimConfig cfg)
    : cfg_(cfg), geom_(cfg.geometry()), rng_(cfg.seed), ring_(ChordConfig{}), can_(cfg.geometry()) {
    auto violations = cfg_.validate();
    if (!violations.empty()) {
        std::ostringstream os;
        os << "invalid config:";
        for (const auto& s : violations) os << "\n  " << s;
        throw std::invalid_argument(os.str());
    }
    params_.r_search = cfg_.effective_r_search();
    params_.perception_range = cfg_.effective_perception();
    params_.strategy = cfg_.strategy;
}

World Simulation::world() { return World{ring_, can_, lcs_, rng_}; }

NodeAddress Simulation::alloc_address() { return NodeAddress{next_address_++}; }

double Simulation::draw() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
}

void Simulation::setup() {
    if (ready_) return;
    // Ring of addressing bots, fingers converged before the run starts.
    while (ring_.size() < static_cast<std::size_t>(cfg_.addressing_bots)) {
        std::uint64_t id = rng_() & ring_.key_mask();
        if (ring_.contains(id)) continue;
        ring_.join(id, alloc_address());
    }
    ring_.rebuild_all_fingers();

    // Region overlay: bootstrap plus random-point joins.
    can_.bootstrap(alloc_address());
    std::uniform_real_distribution<double> ux(0.0, geom_.x_map);
    std::uniform_real_distribution<double> uy(0.0, geom_.y_map);
    while (can_.size() < static_cast<std::size_t>(cfg_.region_bots)) {
        NodeAddress addr = alloc_address();
        bool placed = false;
        for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
            placed = can_.join(addr, {ux(rng_), uy(rng_)}) == OverlayStatus::Ok;
        }
        if (!placed) break; // overlay saturated (every zone is a single grid)
    }

    // Logical computers with their mapping records.
    int n_lc = cfg_.objects > 0 ? (cfg_.objects + kObjectsPerLc - 1) / kObjectsPerLc : 0;
    std::vector<LogicalComputerId> lc_ids;
    for (int i = 0; i < n_lc; ++i) {
        LogicalComputerId lcid = "LC-" + zero_padded(i, 3);
        std::vector<NodeAddress> replicas;
        for (int rep = 0; rep < kReplicasPerLc; ++rep) replicas.push_back(alloc_address());
        lcs_.create(lcid, replicas);
        if (ring_.mapping_create(ring_.first_live(), lcid, replicas, nullptr) != OverlayStatus::Ok)
            throw std::logic_error("setup: mapping_create failed");
        lc_ids.push_back(lcid);
    }

    // Objects, uniformly placed, round-robin across the logical computers.
    for (int i = 0; i < cfg_.objects; ++i) {
        ObjectEntry entry;
        entry.oid = "obj-" + zero_padded(i, 4);
        entry.ocoord = {ux(rng_), uy(rng_)};
        entry.lcid = lc_ids[i % lc_ids.size()];
        entry.properties.fields = {{"Name", "Object " + std::to_string(i)},
                                   {"Author", entry.lcid},
                                   {"Version", "1"}};
        for (int t = 0; t < cfg_.file_types_per_object; ++t) {
            FileTypeGroup g;
            g.type_name = kTypeNames[t];
            for (int f = 0; f < cfg_.files_per_type; ++f) {
                FileEntry fe;
                fe.properties = {{"Name", "f" + std::to_string(f) + ".dat"},
                                 {"Author", entry.lcid},
                                 {"Version", "1"}};
                std::string content(cfg_.file_size, '\0');
                for (auto& c : content) c = static_cast<char>(rng_() & 0xff);
                fe.content = std::move(content);
                g.files.push_back(std::move(fe));
            }
            entry.file_types.push_back(std::move(g));
        }
        entry = recompute_hashes(std::move(entry));

        LookupResult owner = ring_.lookup(ring_.first_live(), ring_.key_of(entry.lcid), nullptr);
        ObjectLocationRecord rec;
        rec.oid = entry.oid;
        rec.ocoord = entry.ocoord;
        rec.lcid = entry.lcid;
        rec.cached_addressing_bot = owner.owner_address;
        rec.cache_version = 1;

        ObjectEntry catalog = entry;
        for (auto& g : catalog.file_types) {
            for (auto& f : g.files) f.content.clear();
        }
        if (can_.object_create(can_.first_live(), rec, catalog, nullptr) != OverlayStatus::Ok)
            throw std::logic_error("setup: object_create failed");
        lcs_.at(entry.lcid).store.emplace(entry.oid, std::move(entry));
        registry_.emplace(rec.oid, std::move(rec));
    }

    client_.pos = {ux(rng_), uy(rng_)};
    client_.velocity = cfg_.velocity;
    client_.cache_capacity = cfg_.cache_capacity;
    client_.entry_region_bot = can_.owner_of_point(client_.pos);
    client_.has_entry = true;
    ready_ = true;
}

void Simulation::churn_step() {
    setup();
    // Two independent draws per overlay, then the replica-change draw.
    if (draw() < cfg_.p_join) {
        std::uint64_t id;
        do {
            id = rng_() & ring_.key_mask();
        } while (ring_.contains(id));
        ring_.join(id, alloc_address());
        ++report_.ring_joins;
    }
    if (draw() < cfg_.p_leave && ring_.size() > 1) {
        auto ids = ring_.ids();
        std::uint64_t victim = ids[std::uniform_int_distribution<std::size_t>(0, ids.size() - 1)(rng_)];
        ring_.leave(victim);
        ++report_.ring_leaves;
    }
    std::uniform_real_distribution<double> ux(0.0, geom_.x_map);
    std::uniform_real_distribution<double> uy(0.0, geom_.y_map);
    if (draw() < cfg_.p_join) {
        NodeAddress addr = alloc_address();
        for (int attempt = 0; attempt < 64; ++attempt) {
            if (can_.join(addr, {ux(rng_), uy(rng_)}) == OverlayStatus::Ok) {
                ++report_.region_joins;
                break;
            }
        }
    }
    if (draw() < cfg_.p_leave && can_.size() > 1) {
        auto addrs = can_.addresses();
        NodeAddress victim = addrs[std::uniform_int_distribution<std::size_t>(0, addrs.size() - 1)(rng_)];
        can_.leave(victim);
        ++report_.region_leaves;
    }
    if (lcs_.size() > 0 && draw() < cfg_.p_join) {
        std::uniform_int_distribution<int> lc_pick(0, static_cast<int>(lcs_.size()) - 1);
        LogicalComputerId lcid = "LC-" + zero_padded(lc_pick(rng_), 3);
        LogicalComputer& lc = lcs_.at(lcid);
        std::size_t slot = std::uniform_int_distribution<std::size_t>(0, lc.replicas.size() - 1)(rng_);
        NodeAddress fresh = alloc_address();
        lcs_.replace_replica(lcid, lc.replicas[slot], fresh);
        Meter mm;
        ring_.mapping_update(ring_.first_live(), lcid, lc.replicas, &mm);
        accumulate(mm);
        ++report_.replica_changes;
    }
}

void Simulation::random_walk_step() {
    setup();
    if (client_.velocity <= 0) return;
    double heading = std::uniform_real_distribution<double>(0.0, 2 * std::numbers::pi)(rng_);
    double nx = client_.pos.x + client_.velocity * std::cos(heading);
    double ny = client_.pos.y + client_.velocity * std::sin(heading);
    for (int guard = 0; guard < 64; ++guard) {
        if (nx < 0) {
            nx = -nx;
        } else if (nx >= geom_.x_map) {
            nx = 2 * geom_.x_map - nx;
        } else if (ny < 0) {
            ny = -ny;
        } else if (ny >= geom_.y_map) {
            ny = 2 * geom_.y_map - ny;
        } else {
            break;
        }
    }
    // Half-open map: the reflected point may land exactly on the far edge.
    if (nx >= geom_.x_map) nx = std::nextafter(geom_.x_map, 0.0);
    if (ny >= geom_.y_map) ny = std::nextafter(geom_.y_map, 0.0);
    if (nx < 0) nx = 0;
    if (ny < 0) ny = 0;
    client_.pos = {nx, ny};
}

void Simulation::accumulate(const Meter& m) {
    report_.total_ring += m.ring;
    report_.total_region += m.region;
    report_.total_direct += m.direct;
    report_.total_transfers += m.transfers;
    report_.dead_deliveries += m.dead_deliveries;
}

void Simulation::retrieval_step() {
    Meter m;
    m.trace = trace_;
    m.trace_cycle = cycle_;
    World w = world();
    CycleStats stats = content_retrieval_cycle(client_, w, params_, m);

    // Liveness bound for one retrieval cycle.
    std::uint64_t bound = 10ull * static_cast<std::uint64_t>(geom_.grid_cols()) *
                          geom_.grid_rows() * (can_.size() + ring_.size() + 1);
    if (m.hops() + m.transfers > bound)
        throw std::logic_error("retrieval cycle exceeded its event bound");

    RetrievalCycleMetrics row;
    row.cycle = cycle_;
    row.ring = m.ring;
    row.region = m.region;
    row.direct = m.direct;
    row.transfers = m.transfers;
    row.total_delay = stats.total_delay;
    row.perceived_delay = stats.perceived_delay;
    row.loaded = stats.loaded_order.size();
    row.partial = stats.partial;
    report_.retrievals.push_back(row);
    accumulate(m);
}

void Simulation::refresh_step() {
    Meter mm;
    can_.cache_refresh(ring_, &mm);
    accumulate(mm);
}

void Simulation::sample_step() {
    auto loads = can_.collect_window_loads();
    LoadSample s;
    s.cycle = cycle_;
    for (const auto& [addr, load] : loads) {
        s.total += load;
        s.max = std::max(s.max, load);
    }
    s.mean = loads.empty() ? 0.0 : static_cast<double>(s.total) / loads.size();
    report_.load_samples.push_back(s);
}

void Simulation::step_cycle() {
    setup();
    if (cfg_.dynamics && cycle_ % static_cast<std::uint64_t>(cfg_.dynamics_period) == 0)
        churn_step();
    ring_.stabilize_tick(cycle_);
    random_walk_step();
    if (cycle_ % static_cast<std::uint64_t>(cfg_.effective_retrieval_period()) == 0)
        retrieval_step();
    if (cycle_ > 0 && cycle_ % static_cast<std::uint64_t>(cfg_.cache_refresh_period) == 0)
        refresh_step();
    if (cfg_.sample_window > 0 && (cycle_ + 1) % cfg_.sample_window == 0) sample_step();
    ++cycle_;
}

void Simulation::run_cycles(std::uint64_t n) {
    setup();
    for (std::uint64_t i = 0; i < n; ++i) step_cycle();
}

MetricsReport Simulation::run() {
    setup();
    while (cycle_ < cfg_.cycles) step_cycle();
    return report_;
}

const ObjectEntry& Simulation::catalog(const ObjectId& oid) const {
    const auto& rec = registry_.at(oid);
    return lcs_.at(rec.lcid).store.at(oid);
}

std::pair<std::string, std::string> Simulation::mutate_one_file(const ObjectId& oid) {
    setup();
    const ObjectLocationRecord& rec = registry_.at(oid);
    LogicalComputer& lc = lcs_.at(rec.lcid);
    ObjectEntry entry = lc.store.at(oid);
    FileEntry& target = entry.file_types.front().files.front();
    std::string fresh(target.content.size(), '\0');
    do {
        for (auto& c : fresh) c = static_cast<char>(rng_() & 0xff);
    } while (fresh == target.content);
    target.content = std::move(fresh);
    entry = recompute_hashes(std::move(entry));

    ObjectEntry catalog = entry;
    for (auto& g : catalog.file_types) {
        for (auto& f : g.files) f.content.clear();
    }
    std::string type = entry.file_types.front().type_name;
    std::string fname = entry.file_types.front().files.front().name();
    lc.store[oid] = std::move(entry);

    // Refresh the region inventory wherever the region coordinate lives now.
    RegionCoord rc = region_of(rec.ocoord, geom_.grid_side, geom_.grids_per_region);
    NodeAddress owner = can_.owner_of_point({rc.x, rc.y});
    auto key = can_.grid_index({rc.x, rc.y});
    can_.bot_mut(owner).inventories.at(key).upsert(std::move(catalog));
    return {type, fname};
}

bool Simulation::world_consistent(std::string* why) const {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    std::map<ObjectId, int> seen;
    for (NodeAddress addr : can_.addresses()) {
        const RegionBot& bot = can_.bot(addr);
        for (const auto& [grid, records] : bot.objects) {
            if (!bot.covers(grid.first, grid.second))
                return fail("record stored outside the owning zone");
            for (const auto& rec : records) {
                ++seen[rec.oid];
                auto rit = registry_.find(rec.oid);
                if (rit == registry_.end()) return fail("record for unknown object " + rec.oid);
                if (rit->second.ocoord != rec.ocoord)
                    return fail("record coordinate drifted for " + rec.oid);
            }
        }
        for (const auto& [rkey, inv] : bot.inventories) {
            if (!bot.covers(rkey.first, rkey.second))
                return fail("inventory stored outside the owning zone");
        }
    }
    for (const auto& [oid, rec] : registry_) {
        if (seen[oid] != 1) return fail("object " + oid + " stored " + std::to_string(seen[oid]) + " times");
        RegionCoord rc = region_of(rec.ocoord, geom_.grid_side, geom_.grids_per_region);
        NodeAddress owner = can_.owner_of_point({rc.x, rc.y});
        auto key = can_.grid_index({rc.x, rc.y});
        const auto& invs = can_.bot(owner).inventories;
        auto iit = invs.find(key);
        if (iit == invs.end()) return fail("missing inventory for region of " + oid);
        const ObjectEntry* entry = iit->second.find(oid);
        if (!entry) return fail("inventory of region misses " + oid);
        if (entry->ohash != lcs_.at(rec.lcid).store.at(oid).ohash)
            return fail("inventory hash stale for " + oid);
    }
    return true;
}

} // namespace vwsim
