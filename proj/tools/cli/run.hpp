#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "config.hpp"

namespace cnls::cli {

enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kConfig = 2,
    kPrecondition = 3,
    kNotConverged = 4,
    kIo = 5,
};

/// Command-line overrides; unset fields keep the config values.
struct Overrides {
    std::optional<std::filesystem::path> output_dir;
    bool strict = false;
    std::optional<int> max_parallel;
    /// Takes precedence over GPE_SEED, which takes precedence over the config.
    std::optional<std::uint64_t> seed;
};

/**
 * Loads the config, runs its mode and writes manifest.txt plus the mode's
 * artifacts into the output directory. Failures print one line
 * `error code=<n> kind=<kind> message=<text>` to err and return the code.
 */
int run(const std::filesystem::path& config_path, const Overrides& overrides, std::ostream& out, std::ostream& err);

/// Runs an already parsed config.
int run_config(RunConfig cfg, std::ostream& out, std::ostream& err);

/**
 * Built-in checks of exactly known identities; prints `PASS n/m` and returns
 * the failure count. Plot-data checks write into scratch_dir.
 */
int run_selftest(std::ostream& out, const std::filesystem::path& scratch_dir);

}  // namespace cnls::cli
