#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cnls/energy.hpp"
#include "cnls/experiments.hpp"
#include "cnls/solver.hpp"
#include "json.hpp"

namespace cnls::cli {

/// Malformed config: parse error, missing field, unknown key, wrong type.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Mode { Solve, Scalar, Thresholds, Sweep, Flatwell, LimitHomogeneous, LimitDirichlet, Selftest };

const char* mode_name(Mode m);

struct RunConfig {
    Mode mode = Mode::Selftest;
    Problem problem;
    SolverParams solver;
    Component component = Component::U;
    std::vector<double> eps_list;
    std::optional<GridSpec> limit_grid;
    GridPolicy policy = GridPolicy::PhysicalBox;
    bool track_sobolev = false;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;
    bool strict = false;
    int max_parallel = 1;
    /// Normalized config, echoed into manifest.txt.
    nlohmann::json echo;
};

/// Parses a config document. `base_dir` resolves relative file references.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".");

/// Reads and parses a config file; throws ConfigError on any problem.
RunConfig load_config(const std::filesystem::path& path);

PotentialSpec parse_potential(const nlohmann::json& j, int dim, const std::string& where,
                              const std::filesystem::path& base_dir = ".");

}  // namespace cnls::cli
