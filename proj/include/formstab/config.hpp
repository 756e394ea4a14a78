#pragma once

#include "formstab/formsim.hpp"
#include "formstab/hinfsynth.hpp"

#include <map>
#include <string>

namespace formstab {

/// Sectioned key-value text ("INI"). Physical quantities carry unit suffixes in the key.
struct ScenarioConfig {
    FormationScenario scenario;
    std::string model_spec = "builtin";
    int output_stride = 10;         ///< trace CSV keeps every n-th step
    double transient_skip = 10.0;   ///< s, excluded from amplification ratios
    double energy_window = 30.0;    ///< s
    /// Resolved key/value pairs, for the run manifest.
    std::map<std::string, std::string> resolved;
};

struct ProblemConfig {
    SynthesisProblem problem;
    std::string controller_spec = "structured";
    std::string model_spec = "builtin";
    double kp_scale = 1.0;
    double kd_scale = 1.0;
    std::map<std::string, std::string> resolved;
};

/// Throws ConfigError with "<source>:<line>" for syntax errors and "<source>: [section] key"
/// for bad or unknown fields.
ScenarioConfig parse_scenario(const std::string& text, const std::string& source = "<string>");
ScenarioConfig load_scenario(const std::string& path);

ProblemConfig parse_problem(const std::string& text, const std::string& source = "<string>");
ProblemConfig load_problem(const std::string& path);

} // namespace formstab
