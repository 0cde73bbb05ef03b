#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "role_engine/engine.hpp"

namespace role_engine {

/// Scenario or suite syntax error; what() carries "source:line: message".
class ParseError : public InputError {
public:
    ParseError(const std::string& source, int line, const std::string& message);
    int line() const { return line_; }

private:
    int line_;
};

/// Command-line overrides applied after parsing.
struct ScenarioOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::optional<InitMode> init;
    std::optional<AssignMode> assign;
    std::optional<SharingMode> sharing;
    std::optional<double> sigma_obs;
};

/// Parses the key-value scenario format documented in docs/scenario-format.md.
/// Relative map paths resolve against `base_dir`.
Scenario parse_scenario(std::istream& in, const std::string& base_dir, const std::string& source_name = "<input>");
Scenario load_scenario(const std::string& path);

void apply_overrides(Scenario& scenario, const ScenarioOverrides& overrides);

struct BenchSuite {
    std::string name;
    std::vector<std::string> scenario_paths; // resolved
    std::vector<InitMode> inits{InitMode::emap};
    std::vector<AssignMode> assigns{AssignMode::gra};
    std::vector<SharingMode> sharings{SharingMode::conflict_field};
    std::vector<double> sigma_obs;  // empty: keep each scenario's value
    bool simulate = false;          // false: plan only, metrics over the initial roles
};

BenchSuite parse_suite(std::istream& in, const std::string& base_dir, const std::string& source_name = "<input>");
BenchSuite load_suite(const std::string& path);

} // namespace role_engine
