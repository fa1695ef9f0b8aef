#pragma once

#include "policy_zoom/evi.hpp"
#include "policy_zoom/policy_space.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pz {

/// Minimal TOML reader covering the config surface: [sections], bare keys,
/// strings, numbers, booleans and flat arrays of numbers. Comments with #.
struct TomlValue {
    enum class Kind { string, number, boolean, number_array } kind;
    std::string str;
    double num = 0.0;
    bool boolean = false;
    std::vector<double> nums;
};

using TomlTable = std::map<std::string, TomlValue>;

struct TomlDoc {
    std::map<std::string, TomlTable> sections;
};

TomlDoc parse_toml(const std::string& text);
TomlDoc parse_toml_file(const std::string& path);

struct OracleBudget {
    double grid_resolution = 0.05;
    std::int64_t rollout_length = 20000;
    int replications = 5;
};

/// Full experiment description. Absent constants default to the
/// environment's declared values; L_phi always comes from the family.
struct ExperimentConfig {
    std::string env_name = "riverswim";
    std::map<std::string, double> env_params;

    std::string agent = "pzrl_mf";  // pzrl_mf | pzrl_mb | policy_ucb
    double epsilon = 0.1;           // policy_ucb net parameter

    std::string family_name = "riverswim_affine";
    MetricMode metric_mode = MetricMode::param_euclid;
    double metric_grid_resolution = 0.01;

    std::int64_t horizon = 10000;
    double delta = 0.1;
    std::vector<std::uint64_t> seeds = {1};

    // constants overrides; unset values fall back to env defaults
    std::optional<double> C, alpha, L_r, L_p;
    double c_d_f = 1.0;
    double c_d_b = 1.0;
    double C_p = 0.0;
    double kappa = 1.0;
    double kappa_prime = 1.0;
    double evi_tol = 1e-6;

    OracleBudget oracle;
    std::string out_dir = "out";
};

ExperimentConfig config_from_toml(const TomlDoc& doc);
ExperimentConfig load_config(const std::string& path);
void validate_config(const ExperimentConfig& cfg);

} // namespace pz
