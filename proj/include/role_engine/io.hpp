#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "role_engine/engine.hpp"

namespace role_engine {

/// Nine significant digits; infinities print as "inf".
std::string format_number(double value);

void write_trajectories_csv(std::ostream& out, const std::vector<ProcessRole>& roles);

/// Header "agent_id,<role ids...>", then one row per agent; "inf" marks infeasible pairs.
void write_q_csv(std::ostream& out, const QualificationMatrix& q);

void write_assignment_csv(std::ostream& out, const QualificationMatrix& q, const Assignment& assignment);

void write_trace_csv(std::ostream& out, const SimulationTrace& trace);

struct MetricsRow {
    std::string scenario;
    std::string mode;
    bool feasible = false;
    double total_cost = 0.0;
    double iterations_mean = 0.0;
    double min_dist = 0.0;
    double avg_jerk = 0.0;
    std::size_t collision_frames = 0;
};

inline const char* kMetricsHeader = "scenario,mode,feasible,total_cost,iterations_mean,min_dist,avg_jerk,collision_frames";

inline const char* kBenchHeader =
    "mode,sigma_obs,runs,feasibility_pct,mean_total_cost,mean_iterations,min_dist,avg_jerk,collision_frames";

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);

/// "init/assign/sharing" label used in metric rows.
std::string mode_label(const Scenario& scenario);

MetricsRow metrics_row(const Scenario& scenario, const RunResult& result);

/// Structured run report (keys documented in README).
std::string run_report_json(const Scenario& scenario, const RunResult& result, const std::string& command);

/// Writes `content` to `path`, creating parent directories.
void write_text_file(const std::string& path, const std::string& content);

/// Known CSV schemas checked by --validate-schemas.
enum class CsvSchema { trajectory, q_matrix, assignment, trace, metrics, bench };

/// Checks header, column count and per-column value syntax. Returns an empty
/// string when the file conforms, else a description of the first violation.
std::string validate_csv(const std::string& path, CsvSchema schema);

} // namespace role_engine
