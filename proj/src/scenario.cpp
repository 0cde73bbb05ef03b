#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "role_engine/scenario.hpp"

namespace role_engine {

namespace fs = std::filesystem;

ParseError::ParseError(const std::string& source, int line, const std::string& message)
    : InputError(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep))
        out.push_back(trim(item));
    return out;
}

std::vector<std::string> words(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string w;
    while (in >> w)
        out.push_back(w);
    return out;
}

struct LineContext {
    const std::string& source;
    int line;

    [[noreturn]] void fail(const std::string& message) const { throw ParseError(source, line, message); }

    double number(const std::string& text, const std::string& key) const {
        try {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used != text.size())
                fail("'" + key + "' expects a number, got '" + text + "'");
            return v;
        } catch (const std::logic_error&) {
            fail("'" + key + "' expects a number, got '" + text + "'");
        }
    }

    long long integer(const std::string& text, const std::string& key) const {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(text, &used);
            if (used != text.size())
                fail("'" + key + "' expects an integer, got '" + text + "'");
            return v;
        } catch (const std::logic_error&) {
            fail("'" + key + "' expects an integer, got '" + text + "'");
        }
    }

    bool boolean(const std::string& text, const std::string& key) const {
        if (text == "true" || text == "1" || text == "yes")
            return true;
        if (text == "false" || text == "0" || text == "no")
            return false;
        fail("'" + key + "' expects true or false, got '" + text + "'");
    }

    Vec2 point(const std::string& text, const std::string& key) const {
        const auto parts = split(text, ',');
        if (parts.size() != 2)
            fail("'" + key + "' expects x,y");
        return {number(parts[0], key), number(parts[1], key)};
    }

    std::map<std::string, std::string> attributes(const std::vector<std::string>& tokens, std::size_t from) const {
        std::map<std::string, std::string> out;
        for (std::size_t i = from; i < tokens.size(); ++i) {
            const auto eq = tokens[i].find('=');
            if (eq == std::string::npos || eq == 0)
                fail("expected key=value, got '" + tokens[i] + "'");
            out[tokens[i].substr(0, eq)] = tokens[i].substr(eq + 1);
        }
        return out;
    }

    template <typename F>
    auto mode(const std::string& text, F&& parse) const {
        try {
            return parse(text);
        } catch (const InputError& e) {
            fail(e.what());
        }
    }
};

struct PendingAgent {
    AgentSpec spec;
    std::optional<double> v_max, sigma_obs, epsilon;
    int line = 0;
};

} // namespace

Scenario parse_scenario(std::istream& in, const std::string& base_dir, const std::string& source_name) {
    Scenario sc;
    std::string map_file;
    double resolution = 0.0;
    bool has_lambda = false;
    int threshold = 128;
    double default_v_max = 0.5, default_sigma_obs = 0.1, default_epsilon = 0.05;
    std::vector<PendingAgent> agents;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const LineContext ctx{source_name, number};
        const auto tokens = words(line);
        const std::string& head = tokens.front();
        if (head == "agent") {
            if (tokens.size() < 2)
                ctx.fail("agent line needs an id");
            const auto attrs = ctx.attributes(tokens, 2);
            PendingAgent a;
            a.spec.id = tokens[1];
            a.line = number;
            bool has_start = false, has_radius = false;
            for (const auto& [key, value] : attrs) {
                if (key == "radius") {
                    a.spec.robot.radius = ctx.number(value, key);
                    has_radius = true;
                } else if (key == "start") {
                    a.spec.start = ctx.point(value, key);
                    has_start = true;
                } else if (key == "v_max") {
                    a.v_max = ctx.number(value, key);
                } else if (key == "sigma_obs") {
                    a.sigma_obs = ctx.number(value, key);
                } else if (key == "epsilon") {
                    a.epsilon = ctx.number(value, key);
                } else {
                    ctx.fail("unknown agent attribute '" + key + "'");
                }
            }
            if (!has_start || !has_radius)
                ctx.fail("agent '" + a.spec.id + "' needs radius= and start=");
            agents.push_back(a);
            continue;
        }
        if (head == "role") {
            if (tokens.size() < 2)
                ctx.fail("role line needs an id");
            const auto attrs = ctx.attributes(tokens, 2);
            RoleSpec r;
            r.id = tokens[1];
            const auto it = attrs.find("dest");
            if (it == attrs.end() || attrs.size() != 1)
                ctx.fail("role '" + r.id + "' needs exactly dest=x,y");
            r.destination = ctx.point(it->second, "dest");
            sc.roles.push_back(r);
            continue;
        }
        if (head == "map_event") {
            const auto attrs = ctx.attributes(tokens, 1);
            if (!attrs.count("step") || !attrs.count("box") || attrs.size() != 2)
                ctx.fail("map_event needs step=<k> box=x0,y0,x1,y1");
            const auto box = split(attrs.at("box"), ',');
            if (box.size() != 4)
                ctx.fail("map_event box needs four numbers");
            MapEvent ev;
            const long long step = ctx.integer(attrs.at("step"), "step");
            if (step < 0)
                ctx.fail("map_event step must be non-negative");
            ev.step = static_cast<std::size_t>(step);
            ev.lo = {ctx.number(box[0], "box"), ctx.number(box[1], "box")};
            ev.hi = {ctx.number(box[2], "box"), ctx.number(box[3], "box")};
            sc.map_events.push_back(ev);
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            ctx.fail("expected 'key = value', 'agent', 'role' or 'map_event'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty())
            ctx.fail("'" + key + "' has no value");
        if (key == "name")
            sc.name = value;
        else if (key == "map")
            map_file = value;
        else if (key == "resolution")
            resolution = ctx.number(value, key);
        else if (key == "threshold")
            threshold = static_cast<int>(ctx.integer(value, key));
        else if (key == "lambda") {
            sc.lambda = ctx.number(value, key);
            has_lambda = true;
        }
        else if (key == "qc")
            sc.qc = ctx.number(value, key) * Eigen::Matrix2d::Identity();
        else if (key == "steps")
            sc.steps = static_cast<int>(ctx.integer(value, key));
        else if (key == "total_time")
            sc.total_time = ctx.number(value, key);
        else if (key == "v_max")
            default_v_max = ctx.number(value, key);
        else if (key == "sigma_obs")
            default_sigma_obs = ctx.number(value, key);
        else if (key == "epsilon")
            default_epsilon = ctx.number(value, key);
        else if (key == "init")
            sc.init = ctx.mode(value, parse_init_mode);
        else if (key == "assign")
            sc.assign = ctx.mode(value, parse_assign_mode);
        else if (key == "sharing")
            sc.conflict.sharing = ctx.mode(value, parse_sharing_mode);
        else if (key == "schedule") {
            if (value == "round_robin")
                sc.schedule = Schedule::round_robin;
            else if (value == "concurrent")
                sc.schedule = Schedule::concurrent;
            else
                ctx.fail("schedule must be round_robin or concurrent");
        } else if (key == "horizon") {
            if (value == "all")
                sc.conflict.horizon.reset();
            else {
                const long long h = ctx.integer(value, key);
                if (h < 0)
                    ctx.fail("horizon must be non-negative");
                sc.conflict.horizon = static_cast<std::size_t>(h);
            }
        } else if (key == "time_window") {
            const long long w = ctx.integer(value, key);
            if (w < 0)
                ctx.fail("time_window must be non-negative");
            sc.conflict.time_window = static_cast<std::size_t>(w);
        } else if (key == "sigma_pairwise")
            sc.conflict.sigma_pairwise = ctx.number(value, key);
        else if (key == "replan_every_step")
            sc.replan_every_step = ctx.boolean(value, key);
        else if (key == "distress_after")
            sc.distress_after = static_cast<int>(ctx.integer(value, key));
        else if (key == "noise")
            sc.noise_std = ctx.number(value, key);
        else if (key == "seed") {
            const long long s = ctx.integer(value, key);
            if (s < 0)
                ctx.fail("seed must be non-negative");
            sc.seed = static_cast<std::uint64_t>(s);
        } else if (key == "max_iterations")
            sc.solver.max_iterations = static_cast<int>(ctx.integer(value, key));
        else if (key == "rel_tol")
            sc.solver.rel_tol = ctx.number(value, key);
        else if (key == "step_tol")
            sc.solver.step_tol = ctx.number(value, key);
        else if (key == "velocity_limit")
            sc.problem.velocity_limit = ctx.boolean(value, key);
        else if (key == "sigma_velocity")
            sc.problem.sigma_velocity = ctx.number(value, key);
        else if (key == "sigma_fix")
            sc.problem.sigma_fix = ctx.number(value, key);
        else if (key == "conf_factor")
            sc.conf_factor = ctx.number(value, key);
        else if (key == "conf_floor")
            sc.conf_floor = ctx.number(value, key);
        else if (key == "output")
            sc.output_dir = value;
        else
            ctx.fail("unknown key '" + key + "'");
    }

    if (map_file.empty())
        throw ParseError(source_name, number, "scenario has no 'map' entry");
    if (!(resolution > 0.0))
        throw ParseError(source_name, number, "scenario needs a positive 'resolution'");
    if (!has_lambda)
        throw ParseError(source_name, number, "scenario has no 'lambda' entry");
    fs::path map_path(map_file);
    if (map_path.is_relative())
        map_path = fs::path(base_dir) / map_path;
    sc.map_path = map_path.lexically_normal().string();
    sc.grid = load_grid(read_pgm(sc.map_path), resolution, threshold);
    if (sc.name.empty())
        sc.name = fs::path(source_name).stem().string();

    for (PendingAgent& a : agents) {
        a.spec.robot.v_max = a.v_max.value_or(default_v_max);
        a.spec.robot.sigma_obs = a.sigma_obs.value_or(default_sigma_obs);
        a.spec.robot.epsilon_safe = a.epsilon.value_or(default_epsilon);
        a.spec.robot.id = a.spec.id;
        try {
            a.spec.robot.validate();
        } catch (const InputError& e) {
            throw ParseError(source_name, a.line, e.what());
        }
        sc.agents.push_back(a.spec);
    }
    try {
        sc.validate();
    } catch (const ParseError&) {
        throw;
    } catch (const InputError& e) {
        throw ParseError(source_name, number, e.what());
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open scenario file '" + path + "'");
    return parse_scenario(in, fs::path(path).parent_path().string(), path);
}

void apply_overrides(Scenario& scenario, const ScenarioOverrides& o) {
    if (o.seed)
        scenario.seed = *o.seed;
    if (o.output_dir)
        scenario.output_dir = *o.output_dir;
    if (o.init)
        scenario.init = *o.init;
    if (o.assign)
        scenario.assign = *o.assign;
    if (o.sharing)
        scenario.conflict.sharing = *o.sharing;
    if (o.sigma_obs) {
        if (!(*o.sigma_obs > 0.0))
            throw InputError("sigma_obs must be positive");
        for (AgentSpec& a : scenario.agents)
            a.robot.sigma_obs = *o.sigma_obs;
    }
}

BenchSuite parse_suite(std::istream& in, const std::string& base_dir, const std::string& source_name) {
    BenchSuite suite;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const LineContext ctx{source_name, number};
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            ctx.fail("expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty())
            ctx.fail("'" + key + "' has no value");
        if (key == "name") {
            suite.name = value;
        } else if (key == "scenario") {
            fs::path p(value);
            if (p.is_relative())
                p = fs::path(base_dir) / p;
            suite.scenario_paths.push_back(p.lexically_normal().string());
        } else if (key == "init") {
            suite.inits.clear();
            for (const auto& v : split(value, ','))
                suite.inits.push_back(ctx.mode(v, parse_init_mode));
        } else if (key == "assign") {
            suite.assigns.clear();
            for (const auto& v : split(value, ','))
                suite.assigns.push_back(ctx.mode(v, parse_assign_mode));
        } else if (key == "sharing") {
            suite.sharings.clear();
            for (const auto& v : split(value, ','))
                suite.sharings.push_back(ctx.mode(v, parse_sharing_mode));
        } else if (key == "sigma_obs") {
            suite.sigma_obs.clear();
            for (const auto& v : split(value, ',')) {
                const double s = ctx.number(v, key);
                if (!(s > 0.0))
                    ctx.fail("sigma_obs values must be positive");
                suite.sigma_obs.push_back(s);
            }
        } else if (key == "simulate") {
            suite.simulate = ctx.boolean(value, key);
        } else {
            ctx.fail("unknown key '" + key + "'");
        }
    }
    if (suite.scenario_paths.empty())
        throw ParseError(source_name, number, "suite lists no scenarios");
    if (suite.name.empty())
        suite.name = fs::path(source_name).stem().string();
    return suite;
}

BenchSuite load_suite(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open suite file '" + path + "'");
    return parse_suite(in, fs::path(path).parent_path().string(), path);
}

} // namespace role_engine
