#include "vwsim/scenario.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace vwsim {

using ordered_json = nlohmann::ordered_json;

const char* scenario_name(ScenarioKind k) {
    switch (k) {
    case ScenarioKind::Overhead: return "overhead";
    case ScenarioKind::Delay: return "delay";
    case ScenarioKind::Load: return "load";
    case ScenarioKind::Custom: return "custom";
    }
    return "?";
}

ScenarioKind scenario_from_name(const std::string& name) {
    if (name == "overhead") return ScenarioKind::Overhead;
    if (name == "delay") return ScenarioKind::Delay;
    if (name == "load") return ScenarioKind::Load;
    if (name == "custom") return ScenarioKind::Custom;
    throw std::invalid_argument("unknown scenario: " + name);
}

std::string shortest_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("number formatting failed");
    return std::string(buf, ptr);
}

int resolved_repetitions(const ScenarioSpec& spec) {
    if (spec.repetitions > 0) return spec.repetitions;
    switch (spec.kind) {
    case ScenarioKind::Load: return 3;
    case ScenarioKind::Custom: return 1;
    default: return 5;
    }
}

namespace {

struct Row {
    std::string strategy;
    bool dynamics;
    int k;
    std::uint64_t seed;
    std::uint64_t index;
    std::string metric;
    double value;
};

void emit_run_rows(std::vector<Row>& rows, const SimConfig& cfg, const MetricsReport& rep,
                   bool with_delays) {
    const char* strat = strategy_name(cfg.strategy);
    for (std::size_t i = 0; i < rep.retrievals.size(); ++i) {
        const auto& r = rep.retrievals[i];
        auto push = [&](const char* metric, double value) {
            rows.push_back({strat, cfg.dynamics, cfg.objects, cfg.seed, i, metric, value});
        };
        push("hops", static_cast<double>(r.hops()));
        push("ring_hops", static_cast<double>(r.ring));
        push("region_hops", static_cast<double>(r.region));
        push("direct_hops", static_cast<double>(r.direct));
        push("transfers", static_cast<double>(r.transfers));
        if (with_delays) {
            push("total_delay", static_cast<double>(r.total_delay));
            push("perceived_delay", static_cast<double>(r.perceived_delay));
        }
    }
    for (std::size_t i = 0; i < rep.load_samples.size(); ++i) {
        const auto& s = rep.load_samples[i];
        rows.push_back({strat, cfg.dynamics, cfg.objects, cfg.seed, i, "mean_load", s.mean});
        rows.push_back(
            {strat, cfg.dynamics, cfg.objects, cfg.seed, i, "max_load", static_cast<double>(s.max)});
    }
}

} // namespace

ScenarioResult run_scenario(const ScenarioSpec& spec) {
    int reps = resolved_repetitions(spec);
    std::vector<Row> rows;

    auto run_point = [&](SimConfig cfg, bool with_delays) {
        for (int rep = 0; rep < reps; ++rep) {
            cfg.seed = spec.base_seed + static_cast<std::uint64_t>(rep);
            Simulation sim(cfg);
            MetricsReport report = sim.run();
            emit_run_rows(rows, cfg, report, with_delays);
        }
    };

    const std::vector<int> sweep{100, 200, 300, 400, 500};
    switch (spec.kind) {
    case ScenarioKind::Overhead:
        for (RetrievalStrategy strat : {RetrievalStrategy::Proximity, RetrievalStrategy::Basic}) {
            for (bool dyn : {false, true}) {
                for (int k : sweep) {
                    SimConfig cfg = spec.base;
                    cfg.strategy = strat;
                    cfg.dynamics = dyn;
                    cfg.objects = k;
                    cfg.sample_window = 0;
                    run_point(cfg, false);
                }
            }
        }
        break;
    case ScenarioKind::Delay:
        for (RetrievalStrategy strat : {RetrievalStrategy::Proximity, RetrievalStrategy::Basic,
                                        RetrievalStrategy::DistanceSorted}) {
            for (bool dyn : {false, true}) {
                for (int k : sweep) {
                    SimConfig cfg = spec.base;
                    cfg.strategy = strat;
                    cfg.dynamics = dyn;
                    cfg.objects = k;
                    cfg.sample_window = 0;
                    run_point(cfg, true);
                }
            }
        }
        break;
    case ScenarioKind::Load:
        for (bool dyn : {false, true}) {
            SimConfig cfg = spec.base;
            cfg.strategy = RetrievalStrategy::Proximity;
            cfg.dynamics = dyn;
            cfg.cycles = spec.full_scale ? 100000 : 20000;
            cfg.sample_window = cfg.cycles / 100;
            run_point(cfg, false);
        }
        break;
    case ScenarioKind::Custom:
        run_point(spec.base, true);
        break;
    }

    const char* scen = scenario_name(spec.kind);
    std::ostringstream raw;
    raw << "scenario,strategy,dynamics,k,seed,index,metric,value\n";
    for (const auto& r : rows) {
        raw << scen << ',' << r.strategy << ',' << (r.dynamics ? "on" : "off") << ',' << r.k << ','
            << r.seed << ',' << r.index << ',' << r.metric << ',' << shortest_double(r.value)
            << '\n';
    }

    // Per sweep point: mean and population standard deviation over every row
    // (all seeds and indices pooled).
    std::map<std::tuple<std::string, bool, int, std::string>, std::vector<double>> groups;
    for (const auto& r : rows) {
        groups[{r.strategy, r.dynamics, r.k, r.metric}].push_back(r.value);
    }
    std::ostringstream summary;
    summary << "scenario,strategy,dynamics,k,metric,mean,stddev\n";
    for (const auto& [key, values] : groups) {
        double mean = 0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0;
        for (double v : values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(values.size());
        summary << scen << ',' << std::get<0>(key) << ',' << (std::get<1>(key) ? "on" : "off")
                << ',' << std::get<2>(key) << ',' << std::get<3>(key) << ','
                << shortest_double(mean) << ',' << shortest_double(std::sqrt(var)) << '\n';
    }
    return {raw.str(), summary.str()};
}

namespace {

template <typename T>
void read_field(const ordered_json& j, const char* key, T& out, std::vector<std::string>* violations) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const std::exception&) {
        if (violations) violations->push_back(std::string(key) + ": wrong type");
    }
}

const char* kKnownFields[] = {
    "addressing_bots", "region_bots", "regions_w", "regions_h", "grids_per_region",
    "grid_side", "objects", "velocity", "r_search", "perception_range",
    "cache_capacity", "cache_refresh_period", "retrieval_period", "dynamics",
    "dynamics_period", "p_join", "p_leave", "cycles", "seed", "strategy",
    "file_types_per_object", "files_per_type", "file_size", "sample_window"};

} // namespace

SimConfig config_from_json_text(const std::string& text, std::vector<std::string>* violations) {
    SimConfig cfg;
    std::string trimmed = text;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r\n"));
    if (trimmed.empty()) return cfg; // empty file keeps every default
    ordered_json j = ordered_json::parse(text); // malformed JSON throws
    if (!j.is_object()) throw std::runtime_error("config: expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* f : kKnownFields) {
            if (it.key() == f) {
                known = true;
                break;
            }
        }
        if (!known && violations) violations->push_back(it.key() + ": unknown field");
    }
    read_field(j, "addressing_bots", cfg.addressing_bots, violations);
    read_field(j, "region_bots", cfg.region_bots, violations);
    read_field(j, "regions_w", cfg.regions_w, violations);
    read_field(j, "regions_h", cfg.regions_h, violations);
    read_field(j, "grids_per_region", cfg.grids_per_region, violations);
    read_field(j, "grid_side", cfg.grid_side, violations);
    read_field(j, "objects", cfg.objects, violations);
    read_field(j, "velocity", cfg.velocity, violations);
    read_field(j, "r_search", cfg.r_search, violations);
    read_field(j, "perception_range", cfg.perception_range, violations);
    read_field(j, "cache_capacity", cfg.cache_capacity, violations);
    read_field(j, "cache_refresh_period", cfg.cache_refresh_period, violations);
    read_field(j, "retrieval_period", cfg.retrieval_period, violations);
    read_field(j, "dynamics", cfg.dynamics, violations);
    read_field(j, "dynamics_period", cfg.dynamics_period, violations);
    read_field(j, "p_join", cfg.p_join, violations);
    read_field(j, "p_leave", cfg.p_leave, violations);
    read_field(j, "cycles", cfg.cycles, violations);
    read_field(j, "seed", cfg.seed, violations);
    read_field(j, "file_types_per_object", cfg.file_types_per_object, violations);
    read_field(j, "files_per_type", cfg.files_per_type, violations);
    read_field(j, "file_size", cfg.file_size, violations);
    read_field(j, "sample_window", cfg.sample_window, violations);
    if (auto it = j.find("strategy"); it != j.end()) {
        try {
            cfg.strategy = strategy_from_name(it->get<std::string>());
        } catch (const std::exception& e) {
            if (violations) violations->push_back(std::string("strategy: ") + e.what());
        }
    }
    return cfg;
}

std::string config_to_json_text(const SimConfig& cfg) {
    ordered_json j;
    j["addressing_bots"] = cfg.addressing_bots;
    j["region_bots"] = cfg.region_bots;
    j["regions_w"] = cfg.regions_w;
    j["regions_h"] = cfg.regions_h;
    j["grids_per_region"] = cfg.grids_per_region;
    j["grid_side"] = cfg.grid_side;
    j["objects"] = cfg.objects;
    j["velocity"] = cfg.velocity;
    j["r_search"] = cfg.r_search;
    j["perception_range"] = cfg.perception_range;
    j["cache_capacity"] = cfg.cache_capacity;
    j["cache_refresh_period"] = cfg.cache_refresh_period;
    j["retrieval_period"] = cfg.retrieval_period;
    j["dynamics"] = cfg.dynamics;
    j["dynamics_period"] = cfg.dynamics_period;
    j["p_join"] = cfg.p_join;
    j["p_leave"] = cfg.p_leave;
    j["cycles"] = cfg.cycles;
    j["seed"] = cfg.seed;
    j["strategy"] = strategy_name(cfg.strategy);
    j["file_types_per_object"] = cfg.file_types_per_object;
    j["files_per_type"] = cfg.files_per_type;
    j["file_size"] = cfg.file_size;
    j["sample_window"] = cfg.sample_window;
    return j.dump(2) + "\n";
}

ValidationReport validate_config_text(const std::string& text) {
    ValidationReport report;
    report.resolved = config_from_json_text(text, &report.violations);
    auto more = report.resolved.validate();
    report.violations.insert(report.violations.end(), more.begin(), more.end());
    report.rendered = config_to_json_text(report.resolved);
    return report;
}

ValidationReport validate_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return validate_config_text(buf.str());
}

} // namespace vwsim
