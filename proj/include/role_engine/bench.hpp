#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "role_engine/io.hpp"
#include "role_engine/scenario.hpp"

namespace role_engine {

struct BenchCell {
    std::string scenario_path;
    InitMode init = InitMode::emap;
    AssignMode assign = AssignMode::gra;
    SharingMode sharing = SharingMode::conflict_field;
    std::optional<double> sigma_obs;
    MetricsRow row;
    std::string error; // non-empty when the run failed before producing metrics
};

struct BenchAggregate {
    std::string mode;
    std::string sigma_obs; // the value, or "all"
    std::size_t runs = 0;
    double feasibility_pct = 0.0;
    double mean_total_cost = 0.0;  // over runs with a finite assignment cost
    double mean_iterations = 0.0;
    double min_dist = 0.0;         // smallest over runs
    double avg_jerk = 0.0;         // mean over runs
    std::size_t collision_frames = 0;
};

/// Plans (and optionally simulates) a scenario. Plan-only runs score the initial
/// roles as if they were executed.
RunResult run_cell(const Scenario& scenario, bool simulate);

/// Runs every scenario x mode x sigma_obs cell with the scenario's own seed.
/// Failing cells are recorded as infeasible rows and the suite continues.
std::vector<BenchCell> run_bench(const BenchSuite& suite, const ScenarioOverrides& overrides = {},
                                 const std::function<void(const BenchCell&)>& progress = {});

/// One row per (mode, sigma_obs) and one "all" row per mode.
std::vector<BenchAggregate> aggregate_bench(const std::vector<BenchCell>& cells);

void write_bench_csv(std::ostream& out, const std::vector<BenchAggregate>& rows);

} // namespace role_engine
