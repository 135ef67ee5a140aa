#include "config.hpp"

#include <fstream>
#include <set>

#include "cnls/io.hpp"

namespace cnls::cli {

using nlohmann::json;

namespace {

/// Object reader that records which keys were consumed so leftovers can be rejected.
class Obj {
public:
    Obj(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError("'" + where_ + "' must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& get(const std::string& key) {
        if (!j_.contains(key)) throw ConfigError("missing required field '" + path(key) + "'");
        used_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key) {
        const json& v = get(key);
        if (!v.is_number()) throw ConfigError("field '" + path(key) + "' must be a number");
        return v.get<double>();
    }
    double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    long long integer(const std::string& key) {
        const json& v = get(key);
        if (!v.is_number_integer()) throw ConfigError("field '" + path(key) + "' must be an integer");
        return v.get<long long>();
    }
    long long integer_or(const std::string& key, long long fallback) { return has(key) ? integer(key) : fallback; }

    bool boolean_or(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = get(key);
        if (!v.is_boolean()) throw ConfigError("field '" + path(key) + "' must be true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key) {
        const json& v = get(key);
        if (!v.is_string()) throw ConfigError("field '" + path(key) + "' must be a string");
        return v.get<std::string>();
    }
    std::string string_or(const std::string& key, const std::string& fallback) {
        return has(key) ? string(key) : fallback;
    }

    std::vector<double> numbers(const std::string& key) {
        const json& v = get(key);
        if (!v.is_array()) throw ConfigError("field '" + path(key) + "' must be an array of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) throw ConfigError("field '" + path(key) + "' must be an array of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    Point point(const std::string& key, int dim) {
        const auto xs = numbers(key);
        if (static_cast<int>(xs.size()) != dim)
            throw ConfigError("field '" + path(key) + "' must have " + std::to_string(dim) + " coordinates");
        Point p{0.0, 0.0, 0.0};
        for (std::size_t i = 0; i < xs.size(); ++i) p[i] = xs[i];
        return p;
    }

    Obj sub(const std::string& key) { return Obj(get(key), path(key)); }

    std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }
    const std::string& where() const { return where_; }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!used_.count(key)) throw ConfigError("unknown key '" + path(key) + "'");
        }
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> used_;
};

Mode parse_mode(const std::string& s) {
    if (s == "solve") return Mode::Solve;
    if (s == "scalar") return Mode::Scalar;
    if (s == "thresholds") return Mode::Thresholds;
    if (s == "sweep") return Mode::Sweep;
    if (s == "flatwell") return Mode::Flatwell;
    if (s == "limit_homogeneous") return Mode::LimitHomogeneous;
    if (s == "limit_dirichlet") return Mode::LimitDirichlet;
    if (s == "selftest") return Mode::Selftest;
    throw ConfigError("unknown mode '" + s + "'");
}

GridSpec parse_grid(Obj o, int dim) {
    const double L = o.number("half_width");
    const long long n = o.integer("points_per_axis");
    o.finish();
    try {
        return GridSpec(dim, L, static_cast<int>(n));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("'" + o.where() + "': " + e.what());
    }
}

void parse_problem(Obj o, RunConfig& cfg, const std::filesystem::path& base_dir) {
    Problem& p = cfg.problem;
    const long long dim = o.integer_or("dim", 1);
    if (dim < 1 || dim > 3) throw ConfigError("field 'problem.dim' must be 1, 2 or 3");
    const int d = static_cast<int>(dim);
    p.mu1 = o.number("mu1");
    p.mu2 = o.number("mu2");
    p.beta = o.number("beta");
    p.eps = o.number_or("eps", 1.0);
    p.grid = parse_grid(o.sub("grid"), d);
    p.a = parse_potential(o.get("a"), d, o.path("a"), base_dir);
    const bool b_optional = cfg.mode == Mode::LimitHomogeneous;
    if (!b_optional || o.has("b")) p.b = parse_potential(o.get("b"), d, o.path("b"), base_dir);
    else p.b = p.a;

    std::string form_default = "scaled";
    if (cfg.mode == Mode::LimitHomogeneous) form_default = "limit";
    const std::string form = o.string_or("form", form_default);
    if (form == "scaled") p.form = ProblemForm::Scaled;
    else if (form == "limit") p.form = ProblemForm::Limit;
    else throw ConfigError("field 'problem.form' must be \"scaled\" or \"limit\"");

    if (cfg.mode == Mode::Scalar) {
        const std::string c = o.string_or("component", "u");
        if (c == "u") cfg.component = Component::U;
        else if (c == "v") cfg.component = Component::V;
        else throw ConfigError("field 'problem.component' must be \"u\" or \"v\"");
    }
    o.finish();
}

void parse_solver(Obj o, SolverParams& s) {
    if (o.has("dt")) s.dt = o.number("dt");
    s.max_iters = static_cast<int>(o.integer_or("max_iters", s.max_iters));
    s.tol_residual = o.number_or("tol_residual", s.tol_residual);
    s.tol_energy = o.number_or("tol_energy", s.tol_energy);
    s.restarts = static_cast<int>(o.integer_or("restarts", s.restarts));
    s.init_width = o.number_or("init_width", s.init_width);
    s.record_trace = o.boolean_or("trace", s.record_trace);
    const std::string init = o.string_or("init", "gaussian");
    if (init == "gaussian") s.init = GaussianAtMin{};
    else if (init == "random") s.init = RandomPositive{0};
    else throw ConfigError("field 'solver.init' must be \"gaussian\" or \"random\"");
    if (s.dt && !(*s.dt > 0.0)) throw ConfigError("field 'solver.dt' must be > 0");
    if (s.max_iters < 0) throw ConfigError("field 'solver.max_iters' must be >= 0");
    if (s.restarts < 0) throw ConfigError("field 'solver.restarts' must be >= 0");
    if (!(s.tol_residual >= 0.0)) throw ConfigError("field 'solver.tol_residual' must be >= 0");
    o.finish();
}

void parse_sweep(Obj o, RunConfig& cfg) {
    cfg.eps_list = o.numbers("eps");
    if (cfg.eps_list.empty()) throw ConfigError("field 'sweep.eps' must not be empty");
    if (o.has("limit_grid")) cfg.limit_grid = parse_grid(o.sub("limit_grid"), cfg.problem.grid.dim());
    const std::string policy = o.string_or("policy", "physical");
    if (policy == "physical") cfg.policy = GridPolicy::PhysicalBox;
    else if (policy == "scaled") cfg.policy = GridPolicy::ScaledBox;
    else throw ConfigError("field 'sweep.policy' must be \"physical\" or \"scaled\"");
    cfg.track_sobolev = o.boolean_or("track_sobolev", false);
    o.finish();
}

bool needs_problem(Mode m) { return m != Mode::Selftest; }
bool needs_sweep(Mode m) { return m == Mode::Sweep || m == Mode::Flatwell; }

}  // namespace

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::Solve: return "solve";
        case Mode::Scalar: return "scalar";
        case Mode::Thresholds: return "thresholds";
        case Mode::Sweep: return "sweep";
        case Mode::Flatwell: return "flatwell";
        case Mode::LimitHomogeneous: return "limit_homogeneous";
        case Mode::LimitDirichlet: return "limit_dirichlet";
        case Mode::Selftest: return "selftest";
    }
    return "unknown";
}

PotentialSpec parse_potential(const json& j, int dim, const std::string& where,
                              const std::filesystem::path& base_dir) {
    Obj o(j, where);
    const std::string kind = o.string("kind");
    PotentialSpec spec;
    if (kind == "constant") {
        spec = ConstantPotential{o.number("tau")};
    } else if (kind == "radial_homogeneous") {
        RadialHomogeneous r;
        r.nu = o.number("nu");
        r.gamma = o.number("gamma");
        r.x0 = o.has("x0") ? o.point("x0", dim) : Point{0.0, 0.0, 0.0};
        spec = r;
    } else if (kind == "envelope") {
        EnvelopePotential e;
        e.mu = o.number("mu");
        e.nu = o.number("nu");
        e.gamma = o.number("gamma");
        const json& cs = o.get("centers");
        if (!cs.is_array() || cs.empty()) throw ConfigError("field '" + o.path("centers") + "' must be a nonempty array");
        for (const auto& c : cs) {
            json wrapper = {{"c", c}};
            Obj w(wrapper, o.path("centers"));
            e.centers.push_back(w.point("c", dim));
        }
        if (o.has("center_nu")) e.center_nu = o.numbers("center_nu");
        spec = e;
    } else if (kind == "flat_well") {
        FlatWell f;
        f.ramp = o.number("ramp");
        f.margin = o.number("margin");
        Obj z = o.sub("zero_set");
        const std::string shape = z.string("kind");
        if (shape == "box") {
            f.zero_set = ZeroBox{z.point("lo", dim), z.point("hi", dim)};
        } else if (shape == "ball") {
            f.zero_set = ZeroBall{z.point("center", dim), z.number("radius")};
        } else {
            throw ConfigError("field '" + z.path("kind") + "' must be \"box\" or \"ball\"");
        }
        z.finish();
        spec = f;
    } else if (kind == "tabulated") {
        const std::filesystem::path file = base_dir / o.string("file");
        try {
            Field values = read_field_file(file);
            if (values.grid().dim() != dim) throw ConfigError("tabulated potential '" + file.string() + "' has wrong dimension");
            spec = TabulatedPotential{std::move(values)};
        } catch (const IoError& e) {
            throw ConfigError(std::string("field '") + o.path("file") + "': " + e.what());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("field '") + o.path("file") + "': " + e.what());
        }
    } else {
        throw ConfigError("field '" + o.path("kind") + "' has unknown potential kind '" + kind + "'");
    }
    o.finish();
    try {
        validate(spec);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("'" + where + "': " + e.what());
    }
    return spec;
}

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    Obj top(doc, "");
    cfg.mode = parse_mode(top.string("mode"));
    const long long seed = top.integer_or("seed", 0);
    if (seed < 0) throw ConfigError("field 'seed' must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.output_dir = top.string_or("output_dir", "out");
    cfg.strict = top.boolean_or("strict", false);
    cfg.max_parallel = static_cast<int>(top.integer_or("max_parallel", 1));
    if (cfg.max_parallel < 1) throw ConfigError("field 'max_parallel' must be >= 1");

    if (needs_problem(cfg.mode)) parse_problem(top.sub("problem"), cfg, base_dir);
    else if (top.has("problem")) throw ConfigError("mode 'selftest' takes no 'problem'");
    if (top.has("solver")) parse_solver(top.sub("solver"), cfg.solver);
    if (needs_sweep(cfg.mode)) {
        parse_sweep(top.sub("sweep"), cfg);
    } else if (top.has("sweep")) {
        if (cfg.mode != Mode::Thresholds) throw ConfigError("mode '" + std::string(mode_name(cfg.mode)) + "' takes no 'sweep'");
        parse_sweep(top.sub("sweep"), cfg);
    }
    top.finish();

    cfg.solver.seed = cfg.seed;
    if (std::holds_alternative<RandomPositive>(cfg.solver.init)) cfg.solver.init = RandomPositive{cfg.seed};
    cfg.echo = doc;
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path.string());
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(doc, path.parent_path());
}

}  // namespace cnls::cli
