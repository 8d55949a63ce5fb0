#pragma once

#include "vwsim/can.hpp"
#include "vwsim/chord.hpp"
#include "vwsim/client.hpp"
#include "vwsim/geometry.hpp"
#include "vwsim/logical_computer.hpp"
#include "vwsim/metrics.hpp"

#include <cstdint>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace vwsim {

/// Whole-run parameters. Zeros in r_search / perception_range /
/// retrieval_period mean "derive from the geometry".
struct SimConfig {
    int addressing_bots = 100;
    int region_bots = 100;
    int regions_w = 5;
    int regions_h = 4;
    int grids_per_region = 9; // m
    double grid_side = 100;   // l
    int objects = 100;        // k
    double velocity = 30;     // v, world units per cycle
    double r_search = 0;
    double perception_range = 0;
    std::uint64_t cache_capacity = 1ull << 30;
    int cache_refresh_period = 50;
    int retrieval_period = 0; // T
    bool dynamics = false;
    int dynamics_period = 10;
    double p_join = 0.1;
    double p_leave = 0.1;
    std::uint64_t cycles = 1000;
    std::uint64_t seed = 1;
    RetrievalStrategy strategy = RetrievalStrategy::Proximity;
    int file_types_per_object = 2;
    int files_per_type = 2;
    int file_size = 1024;
    std::uint64_t sample_window = 0; // 0 = no load sampling

    GeometryParams geometry() const;
    double effective_r_search() const;
    double effective_perception() const;
    long effective_retrieval_period() const;

    /// Empty when the configuration is usable; otherwise one line per
    /// violated constraint.
    std::vector<std::string> validate() const;
};

/// Deterministic cycle-driven simulation: overlays, logical computers, one
/// random-walking client, probabilistic graceful churn, cache refresh and
/// metric sampling. Every run with the same config (seed included) produces
/// the same MetricsReport.
class Simulation {
public:
    static constexpr int kReplicasPerLc = 3;
    static constexpr int kObjectsPerLc = 10;

    /// Throws std::invalid_argument listing every violated config field.
    explicit Simulation(SimConfig cfg);

    MetricsReport run();
    /// Step API for tests: run a fixed number of cycles, inspect, continue.
    void run_cycles(std::uint64_t n);
    std::uint64_t cycle() const { return cycle_; }
    const MetricsReport& report() const { return report_; }
    const SimConfig& config() const { return cfg_; }

    ChordRing& ring() { return ring_; }
    CanOverlay& can() { return can_; }
    LogicalComputerRegistry& lcs() { return lcs_; }
    ClientState& client() { return client_; }
    World world();

    /// oid -> authoritative location (the oracle registry).
    const std::map<ObjectId, ObjectLocationRecord>& registry() const { return registry_; }
    const ObjectEntry& catalog(const ObjectId& oid) const;

    /// Scripted single-file mutation: regenerates one payload, recomputes the
    /// hash cascade, refreshes the replica store and the region inventory.
    /// Returns (type, file name).
    std::pair<std::string, std::string> mutate_one_file(const ObjectId& oid);

    /// Union of the region bots' stores equals the registry, with the region
    /// inventories in agreement.
    bool world_consistent(std::string* why = nullptr) const;

    void set_trace(std::ostream* out) { trace_ = out; }

    // Exposed for targeted unit tests.
    void churn_step();
    void random_walk_step();

private:
    void setup();
    void step_cycle();
    void retrieval_step();
    void refresh_step();
    void sample_step();
    NodeAddress alloc_address();
    double draw();
    void accumulate(const Meter& m);

    SimConfig cfg_;
    GeometryParams geom_;
    std::mt19937_64 rng_;
    ChordRing ring_;
    CanOverlay can_;
    LogicalComputerRegistry lcs_;
    ClientState client_;
    ClientParams params_;
    std::map<ObjectId, ObjectLocationRecord> registry_;
    MetricsReport report_;
    std::uint64_t cycle_ = 0;
    std::uint32_t next_address_ = 1;
    bool ready_ = false;
    std::ostream* trace_ = nullptr;
};

} // namespace vwsim
