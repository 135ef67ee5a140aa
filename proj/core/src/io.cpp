#include "cnls/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace cnls {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_field(std::ostream& os, const Field& f) {
    const GridSpec& g = f.grid();
    os << g.dim() << ' ' << g.points_per_axis() << ' ' << format_double(g.half_width()) << '\n';
    for (double v : f.values()) os << format_double(v) << '\n';
}

Field read_field(std::istream& is) {
    int dim = 0, n = 0;
    double L = 0.0;
    if (!(is >> dim >> n >> L)) throw IoError("field dump: malformed header");
    GridSpec g(dim, L, n);
    std::vector<double> values(g.size());
    for (auto& v : values) {
        if (!(is >> v)) throw IoError("field dump: expected " + std::to_string(g.size()) + " values");
    }
    return Field(g, std::move(values));
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    return os;
}

void write_field_file(const std::filesystem::path& path, const Field& f) {
    auto os = open_output(path);
    write_field(os, f);
    if (!os) throw IoError("write failed: " + path.string());
}

Field read_field_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read " + path.string());
    return read_field(is);
}

void write_curve(const std::filesystem::path& path, const Curve& curve) {
    auto os = open_output(path);
    for (const auto& [x, y] : curve) os << format_double(x) << ' ' << format_double(y) << '\n';
    if (!os) throw IoError("write failed: " + path.string());
}

std::vector<Curve> profile_slices(const Field& f) {
    const GridSpec& g = f.grid();
    const auto vals = f.values();
    const auto best = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
    const NodeIndex peak = g.index(best);
    std::vector<Curve> out;
    for (int a = 0; a < g.dim(); ++a) {
        Curve c;
        NodeIndex idx = peak;
        for (int i = 0; i < g.points_per_axis(); ++i) {
            idx[static_cast<std::size_t>(a)] = i;
            c.emplace_back(g.coord(i), f[g.flat(idx)]);
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<std::filesystem::path> write_profiles(const std::filesystem::path& dir, const std::string& stem,
                                                  const Field& f) {
    if (f.size() == 0) throw std::invalid_argument("write_profiles: empty field");
    static constexpr const char* kAxis[] = {"x", "y", "z"};
    std::vector<std::filesystem::path> written;
    const auto curves = profile_slices(f);
    for (std::size_t a = 0; a < curves.size(); ++a) {
        auto path = dir / (stem + "_" + kAxis[a] + ".dat");
        write_curve(path, curves[a]);
        written.push_back(std::move(path));
    }
    return written;
}

void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

}  // namespace cnls
