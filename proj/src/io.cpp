#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "role_engine/io.hpp"

namespace role_engine {

std::string format_number(double value) {
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    if (std::isnan(value))
        return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

void write_trajectories_csv(std::ostream& out, const std::vector<ProcessRole>& roles) {
    out << "agent_id,k,t,x,y,vx,vy\n";
    for (const ProcessRole& r : roles)
        for (std::size_t k = 0; k < r.states.size(); ++k) {
            const State& s = r.states[k];
            out << r.agent_id << ',' << k << ',' << format_number(static_cast<double>(k) * r.dt) << ','
                << format_number(s(0)) << ',' << format_number(s(1)) << ',' << format_number(s(2)) << ','
                << format_number(s(3)) << '\n';
        }
}

void write_q_csv(std::ostream& out, const QualificationMatrix& q) {
    out << "agent_id";
    for (const std::string& id : q.role_ids)
        out << ',' << id;
    out << '\n';
    for (std::size_t a = 0; a < q.m(); ++a) {
        out << q.agent_ids[a];
        for (std::size_t r = 0; r < q.n(); ++r)
            out << ',' << format_number(q.q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(r)));
        out << '\n';
    }
}

void write_assignment_csv(std::ostream& out, const QualificationMatrix& q, const Assignment& assignment) {
    out << "agent_id,role_id,cost\n";
    for (std::size_t i = 0; i < assignment.t_r.size(); ++i) {
        const std::size_t a = assignment.t_r[i];
        const std::size_t r = assignment.t_c[i];
        out << q.agent_ids[a] << ',' << q.role_ids[r] << ','
            << format_number(q.q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(r))) << '\n';
    }
}

void write_trace_csv(std::ostream& out, const SimulationTrace& trace) {
    out << "step,agent_id,x,y,vx,vy,published_version\n";
    for (const TraceRow& row : trace.rows)
        out << row.step << ',' << row.agent_id << ',' << format_number(row.state(0)) << ','
            << format_number(row.state(1)) << ',' << format_number(row.state(2)) << ','
            << format_number(row.state(3)) << ',' << row.published_version << '\n';
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
    out << kMetricsHeader << '\n';
    for (const MetricsRow& r : rows)
        out << r.scenario << ',' << r.mode << ',' << (r.feasible ? "true" : "false") << ','
            << format_number(r.total_cost) << ',' << format_number(r.iterations_mean) << ','
            << format_number(r.min_dist) << ',' << format_number(r.avg_jerk) << ',' << r.collision_frames << '\n';
}

std::string mode_label(const Scenario& scenario) {
    return to_string(scenario.init) + "/" + to_string(scenario.assign) + "/" + to_string(scenario.conflict.sharing);
}

MetricsRow metrics_row(const Scenario& scenario, const RunResult& result) {
    MetricsRow row;
    row.scenario = scenario.name;
    row.mode = mode_label(scenario);
    row.feasible = !result.aborted && result.feasible;
    row.total_cost = result.assignment ? result.total_cost : kInfeasible;
    row.iterations_mean = result.iterations_mean;
    if (result.metrics) {
        row.min_dist = result.metrics->min_inter_robot_distance;
        row.avg_jerk = result.metrics->avg_jerk;
        row.collision_frames = result.metrics->collision_frames;
    } else {
        row.min_dist = kInfeasible;
    }
    return row;
}

namespace {

nlohmann::json number_json(double v) {
    if (std::isfinite(v))
        return v;
    return format_number(v);
}

} // namespace

std::string run_report_json(const Scenario& scenario, const RunResult& result, const std::string& command) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["scenario"] = scenario.name;
    j["mode"] = {{"init", to_string(scenario.init)},
                 {"assign", to_string(scenario.assign)},
                 {"sharing", to_string(scenario.conflict.sharing)}};
    j["seed"] = scenario.seed;
    j["feasible"] = result.negotiation.feasible;
    j["uncoverable_roles"] = result.negotiation.uncoverable_roles;
    j["aborted"] = result.aborted;
    j["abort_reason"] = result.abort_reason;
    j["trajectories_clear"] = result.feasible;
    nlohmann::ordered_json types = nlohmann::ordered_json::array();
    for (const TypeEnvironment& t : result.negotiation.types)
        types.push_back({{"type_id", t.robot.id},
                         {"radius", t.robot.radius},
                         {"emap_nodes", t.emap.nodes.size()},
                         {"emap_edges", t.emap.edges.size()}});
    j["robot_types"] = types;
    nlohmann::ordered_json assignment = nlohmann::ordered_json::array();
    if (result.assignment && result.qualification) {
        const QualificationMatrix& q = *result.qualification;
        for (std::size_t i = 0; i < result.assignment->t_r.size(); ++i) {
            const std::size_t a = result.assignment->t_r[i];
            const std::size_t r = result.assignment->t_c[i];
            assignment.push_back({{"agent_id", q.agent_ids[a]},
                                  {"role_id", q.role_ids[r]},
                                  {"cost", number_json(q.q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(r)))}});
        }
        j["total_cost"] = number_json(result.total_cost);
        j["iterations_mean"] = result.iterations_mean;
    }
    j["assignment"] = assignment;
    nlohmann::ordered_json finals = nlohmann::ordered_json::object();
    const std::vector<ProcessRole>& roles =
        result.trace ? result.trace->final_roles : result.initial_roles;
    for (const ProcessRole& r : roles)
        finals[r.agent_id] = number_json(r.cost);
    j["final_cost"] = finals;
    if (result.metrics) {
        j["metrics"] = {{"min_inter_robot_distance", number_json(result.metrics->min_inter_robot_distance)},
                        {"avg_jerk", result.metrics->avg_jerk},
                        {"collision_frames", result.metrics->collision_frames}};
        j["replans"] = result.replans;
        j["solver_failures"] = result.trace ? result.trace->solver_failures : 0;
    }
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path())
        std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write '" + path + "'");
    out << content;
    if (!out)
        throw InputError("failed writing '" + path + "'");
}

namespace {

enum class Col { id, integer, number, boolean, text };

bool matches(const std::string& v, Col c) {
    if (v.empty())
        return c == Col::text;
    switch (c) {
    case Col::id:
    case Col::text:
        return v.find(',') == std::string::npos;
    case Col::boolean:
        return v == "true" || v == "false";
    case Col::integer:
        return v.find_first_not_of("0123456789") == std::string::npos;
    case Col::number: {
        if (v == "inf" || v == "-inf" || v == "nan")
            return true;
        char* end = nullptr;
        std::strtod(v.c_str(), &end);
        return end != nullptr && *end == '\0';
    }
    }
    return false;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

} // namespace

std::string validate_csv(const std::string& path, CsvSchema schema) {
    std::ifstream in(path);
    if (!in)
        return "cannot open " + path;
    std::string header;
    if (!std::getline(in, header))
        return path + ": empty file";
    std::vector<Col> cols;
    std::string expected;
    switch (schema) {
    case CsvSchema::trajectory:
        expected = "agent_id,k,t,x,y,vx,vy";
        cols = {Col::id, Col::integer, Col::number, Col::number, Col::number, Col::number, Col::number};
        break;
    case CsvSchema::assignment:
        expected = "agent_id,role_id,cost";
        cols = {Col::id, Col::id, Col::number};
        break;
    case CsvSchema::trace:
        expected = "step,agent_id,x,y,vx,vy,published_version";
        cols = {Col::integer, Col::id, Col::number, Col::number, Col::number, Col::number, Col::integer};
        break;
    case CsvSchema::metrics:
        expected = kMetricsHeader;
        cols = {Col::text, Col::text, Col::boolean, Col::number, Col::number, Col::number, Col::number, Col::integer};
        break;
    case CsvSchema::bench:
        expected = kBenchHeader;
        cols = {Col::text, Col::text, Col::integer, Col::number, Col::number,
                Col::number, Col::number, Col::number, Col::integer};
        break;
    case CsvSchema::q_matrix: {
        const auto head = split_csv(header);
        if (head.size() < 2 || head[0] != "agent_id")
            return path + ": header must start with agent_id and list at least one role";
        cols.assign(head.size(), Col::number);
        cols[0] = Col::id;
        expected = header;
        break;
    }
    }
    if (header != expected)
        return path + ": header '" + header + "' != '" + expected + "'";
    std::string line;
    int number = 1;
    while (std::getline(in, line)) {
        ++number;
        const auto cells = split_csv(line);
        if (cells.size() != cols.size())
            return path + ":" + std::to_string(number) + ": expected " + std::to_string(cols.size()) + " columns";
        for (std::size_t i = 0; i < cells.size(); ++i)
            if (!matches(cells[i], cols[i]))
                return path + ":" + std::to_string(number) + ": bad value '" + cells[i] + "' in column " +
                       std::to_string(i + 1);
    }
    return "";
}

} // namespace role_engine
