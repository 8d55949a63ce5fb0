#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace vwsim {

enum class HopKind { RingRouting, RegionRouting, Direct };

/// Counts message traversals for one execution context (a retrieval cycle or
/// the maintenance work of one simulation cycle). Every inter-node message
/// costs one hop; replies cost one hop; file payload transfers are counted
/// separately. `clock` is the virtual time inside the context: it advances by
/// one per hop and per transfer, so delays come out in cycles.
struct Meter {
    std::uint64_t ring = 0;
    std::uint64_t region = 0;
    std::uint64_t direct = 0;
    std::uint64_t transfers = 0;
    std::uint64_t clock = 0;
    std::uint64_t dead_deliveries = 0; // messages addressed to departed nodes

    std::ostream* trace = nullptr;
    std::uint64_t trace_cycle = 0;

    void hop(HopKind k, std::string_view actor = {}) {
        switch (k) {
        case HopKind::RingRouting: ++ring; break;
        case HopKind::RegionRouting: ++region; break;
        case HopKind::Direct: ++direct; break;
        }
        ++clock;
        if (trace) {
            const char* kind = k == HopKind::RingRouting   ? "ring"
                               : k == HopKind::RegionRouting ? "region"
                                                             : "direct";
            (*trace) << trace_cycle << ',' << actor << ',' << kind << ",1\n";
        }
    }

    void transfer(std::uint64_t n = 1) {
        transfers += n;
        clock += n;
        if (trace && n > 0) (*trace) << trace_cycle << ",,transfer," << n << '\n';
    }

    void dead_delivery(HopKind k) {
        hop(k, "dead");
        ++dead_deliveries;
    }

    std::uint64_t hops() const { return ring + region + direct; }
};

/// Metrics of one retrieval cycle, attributed to the initiating client.
struct RetrievalCycleMetrics {
    std::uint64_t cycle = 0;
    std::uint64_t ring = 0;
    std::uint64_t region = 0;
    std::uint64_t direct = 0;
    std::uint64_t transfers = 0;
    std::uint64_t total_delay = 0;     // cycles until the last object loaded
    std::uint64_t perceived_delay = 0; // cycles until the perception range was complete
    std::uint64_t loaded = 0;
    bool partial = false;

    std::uint64_t hops() const { return ring + region + direct; }
    auto operator<=>(const RetrievalCycleMetrics&) const = default;
};

/// One region-bot load sample: handled+forwarded counts accumulated since the
/// previous sample, reduced over the live bots.
struct LoadSample {
    std::uint64_t cycle = 0;
    std::uint64_t total = 0;
    double mean = 0;
    std::uint64_t max = 0;
    auto operator<=>(const LoadSample&) const = default;
};

struct MetricsReport {
    std::vector<RetrievalCycleMetrics> retrievals;
    std::vector<LoadSample> load_samples;

    // Whole-run totals, client work and maintenance work combined.
    std::uint64_t total_ring = 0;
    std::uint64_t total_region = 0;
    std::uint64_t total_direct = 0;
    std::uint64_t total_transfers = 0;
    std::uint64_t dead_deliveries = 0;

    std::uint64_t ring_joins = 0;
    std::uint64_t ring_leaves = 0;
    std::uint64_t region_joins = 0;
    std::uint64_t region_leaves = 0;
    std::uint64_t replica_changes = 0;

    std::uint64_t total_messages() const {
        return total_ring + total_region + total_direct;
    }
    bool operator==(const MetricsReport&) const = default;
};

} // namespace vwsim
