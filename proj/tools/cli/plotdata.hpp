#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cnls/experiments.hpp"

namespace cnls::cli {

/// Writes `scaling_loglog.dat` (log eps, log c_eps), one row per record with c_eps > 0.
std::filesystem::path emit_loglog(const std::filesystem::path& dir, const std::vector<SweepRecord>& records);

/// One `x y` profile per axis through the peak: `<stem>_x.dat`, `<stem>_y.dat`, ...
std::vector<std::filesystem::path> emit_profiles(const std::filesystem::path& dir, const std::string& stem,
                                                 const Field& f);

}  // namespace cnls::cli
