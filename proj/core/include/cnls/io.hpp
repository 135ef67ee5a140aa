#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cnls/grid.hpp"

namespace cnls {

/// Raised when an output file or directory cannot be written or an input file read.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip form with 17 significant digits ("%.17g").
std::string format_double(double x);

/// Field dump: line `dim n L`, then one value per line in storage order.
void write_field(std::ostream& os, const Field& f);
Field read_field(std::istream& is);

void write_field_file(const std::filesystem::path& path, const Field& f);
Field read_field_file(const std::filesystem::path& path);

using Curve = std::vector<std::pair<double, double>>;

/// Two-column `x y` text file.
void write_curve(const std::filesystem::path& path, const Curve& curve);

/**
 * Axis slices of f through its discrete maximum, one curve per axis. A 1D
 * field gives a single curve.
 */
std::vector<Curve> profile_slices(const Field& f);

/**
 * Writes `<stem>_x.dat`, `<stem>_y.dat`, ... (one per axis) into dir and returns
 * the paths written. Throws std::invalid_argument for an empty field.
 */
std::vector<std::filesystem::path> write_profiles(const std::filesystem::path& dir, const std::string& stem,
                                                  const Field& f);

/// Creates dir (and parents) or throws IoError.
void ensure_directory(const std::filesystem::path& dir);

/// Opens path for writing or throws IoError.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace cnls
