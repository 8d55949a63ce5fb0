#pragma once

#include "vwsim/engine.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vwsim {

enum class ScenarioKind { Overhead, Delay, Load, Custom };

const char* scenario_name(ScenarioKind k);
ScenarioKind scenario_from_name(const std::string& name);

/// A scenario expands into (strategy, dynamics, k, seed) sweep points,
/// each a full simulation run:
///  - overhead: k in {100..500} x {improved, basic} x dynamics {off, on}
///  - delay:    k in {100..500} x {improved, basic, distance_sorted}
///              x dynamics {off, on}
///  - load:     dynamics {off, on}, 20,000 cycles sampled every 200
///              (full_scale: 100,000 / 1,000)
///  - custom:   the base config as-is
struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::Custom;
    int repetitions = 0; // 0 = the scenario default (5; load: 3; custom: 1)
    std::uint64_t base_seed = 1;
    bool full_scale = false;
    SimConfig base;
};

struct ScenarioResult {
    std::string raw_csv;     // scenario,strategy,dynamics,k,seed,index,metric,value
    std::string summary_csv; // scenario,strategy,dynamics,k,metric,mean,stddev
};

/// Runs every sweep point deterministically (seeds base..base+reps-1) and
/// renders both CSVs. Same spec, same bytes.
ScenarioResult run_scenario(const ScenarioSpec& spec);

int resolved_repetitions(const ScenarioSpec& spec);

/// Config file handling. An empty (or whitespace-only) file resolves to the
/// defaults. Unknown fields and out-of-range values are reported as
/// violations, not exceptions; only malformed JSON throws.
SimConfig config_from_json_text(const std::string& text, std::vector<std::string>* violations);
std::string config_to_json_text(const SimConfig& cfg);

struct ValidationReport {
    SimConfig resolved;
    std::vector<std::string> violations;
    std::string rendered; // resolved config echoed as JSON
};
ValidationReport validate_config_text(const std::string& text);
ValidationReport validate_config_file(const std::string& path);

std::string shortest_double(double v);

} // namespace vwsim
