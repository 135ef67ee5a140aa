#include "plotdata.hpp"

#include <cmath>
#include <stdexcept>

#include "cnls/io.hpp"

namespace cnls::cli {

std::filesystem::path emit_loglog(const std::filesystem::path& dir, const std::vector<SweepRecord>& records) {
    if (records.empty()) throw std::invalid_argument("emit_loglog: no records");
    Curve c;
    for (const auto& r : records) {
        if (r.c_eps > 0.0) c.emplace_back(std::log(r.eps), std::log(r.c_eps));
    }
    auto path = dir / "scaling_loglog.dat";
    write_curve(path, c);
    return path;
}

std::vector<std::filesystem::path> emit_profiles(const std::filesystem::path& dir, const std::string& stem,
                                                 const Field& f) {
    return write_profiles(dir, stem, f);
}

}  // namespace cnls::cli
