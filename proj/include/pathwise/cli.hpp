#pragma once

// Batch front-end: configuration parsing, run dispatch and the named
// verification suites. A run is deterministic given (config, seed): outputs
// are written with 17 significant digits, Monte Carlo loops derive one
// stream per trial from the base seed, and every artifact carries a
// provenance sidecar with the config hash.
//
// Exit codes: 0 success/PASS, 1 verification FAIL, 2 configuration error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathwise/area.hpp"
#include "pathwise/io.hpp"
#include "pathwise/levy.hpp"
#include "pathwise/parametrise.hpp"
#include "pathwise/pvar.hpp"
#include "pathwise/rough.hpp"
#include "pathwise/sidecar.hpp"
#include "pathwise/solver.hpp"
#include "pathwise/vector_field.hpp"
#include "pathwise/young.hpp"

namespace pathwise::cli {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericConfig {
    double p = 1.5;
    double q = 1.5;
    double delta = 1.0;
    double epsilon = 1e-3;
    double tol = 1e-10;
    int max_level = 14;
    std::size_t trials = 10000;
    double horizon = 1.0;
    std::size_t grid_points = 1025;
    double s = 0.0, t = 1.0;  // area interval
};

struct FieldConfig {
    std::string preset = "constant";  // constant | linear | rotation | tabulated
    std::vector<Mat> matrices;        // linear / constant
    double truncation_radius = 10.0;
    std::vector<double> table_y, table_f;  // tabulated
};

struct RunConfig {
    std::string command;  // simulate | solve | area | pvar | verify
    std::optional<LevyModel> model;
    FieldConfig field;
    NumericConfig numeric;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir = ".";
    std::string format = "csv";
    std::string input_path;      // driver CSV for solve/pvar
    std::string suite;           // verify suite name
    std::string solve_mode = "geometric";  // geometric | forward | corrective
    std::size_t corrective_count = 0;
    Vec initial_state;
};

namespace detail {

inline void require_keys(const json& j, const std::vector<std::string>& allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

inline Mat mat_from_json(const json& j) {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw ConfigError("empty matrix");
    Mat m(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size()) throw ConfigError("ragged matrix");
        for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    }
    return m;
}

inline LevyMeasureSpec measure_from_json(const json& j, int dim) {
    require_keys(j, {"kind", "alpha", "scale", "rate", "r_min", "r_max", "atoms", "m_max",
                     "isotropic", "table_r", "table_g"},
                 "model.measure");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "zero") return zero_measure(dim);
    if (kind == "alpha_stable")
        return stable_measure(j.at("alpha").get<double>(), j.value("scale", 1.0), dim);
    if (kind == "compound_poisson") {
        if (j.contains("atoms")) {
            std::vector<Atom> atoms;
            for (const auto& a : j.at("atoms")) {
                Atom at;
                at.weight = a.at("weight").get<double>();
                at.value = a.at("value").get<Vec>();
                atoms.push_back(at);
            }
            return compound_poisson_atoms(j.at("rate").get<double>(), atoms, dim);
        }
        return compound_poisson_ring(j.at("rate").get<double>(), j.value("r_min", 0.0),
                                     j.at("r_max").get<double>(), dim);
    }
    if (kind == "eta_example")
        return eta_measure(j.value("m_max", 40), dim, j.value("isotropic", false));
    if (kind == "tabulated")
        return tabulated_measure(j.at("table_r").get<std::vector<double>>(),
                                 j.at("table_g").get<std::vector<double>>(), dim,
                                 j.value("isotropic", true));
    throw ConfigError("unknown measure kind '" + kind + "'");
}

inline LevyModel model_from_json(const json& j) {
    require_keys(j, {"dimension", "drift", "gaussian_cov", "measure"}, "model");
    LevyModel m;
    m.dimension = j.at("dimension").get<int>();
    m.drift = j.value("drift", Vec(m.dimension, 0.0));
    if (j.contains("gaussian_cov"))
        m.gaussian_cov = mat_from_json(j.at("gaussian_cov"));
    else
        m.gaussian_cov = Mat(m.dimension, m.dimension);
    m.measure = j.contains("measure") ? measure_from_json(j.at("measure"), m.dimension)
                                      : zero_measure(m.dimension);
    m.validate();
    return m;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
    detail::require_keys(j, {"command", "model", "field", "numeric", "seed", "output", "input",
                             "suite", "mode", "corrective_count", "initial_state"},
                         "config");
    RunConfig c;
    c.command = j.value("command", "");
    if (j.contains("model")) c.model = detail::model_from_json(j.at("model"));
    if (j.contains("field")) {
        const json& f = j.at("field");
        detail::require_keys(f, {"preset", "matrices", "truncation_radius", "table_y", "table_f"},
                             "field");
        c.field.preset = f.value("preset", "constant");
        if (f.contains("matrices"))
            for (const auto& m : f.at("matrices")) c.field.matrices.push_back(detail::mat_from_json(m));
        c.field.truncation_radius = f.value("truncation_radius", 10.0);
        if (f.contains("table_y")) c.field.table_y = f.at("table_y").get<std::vector<double>>();
        if (f.contains("table_f")) c.field.table_f = f.at("table_f").get<std::vector<double>>();
    }
    if (j.contains("numeric")) {
        const json& n = j.at("numeric");
        detail::require_keys(n, {"p", "q", "delta", "epsilon", "tol", "max_level", "trials",
                                 "horizon", "grid_points", "s", "t"},
                             "numeric");
        c.numeric.p = n.value("p", 1.5);
        c.numeric.q = n.value("q", 1.5);
        c.numeric.delta = n.value("delta", 1.0);
        c.numeric.epsilon = n.value("epsilon", 1e-3);
        c.numeric.tol = n.value("tol", 1e-10);
        c.numeric.max_level = n.value("max_level", 14);
        c.numeric.trials = n.value("trials", std::size_t{10000});
        c.numeric.horizon = n.value("horizon", 1.0);
        c.numeric.grid_points = n.value("grid_points", std::size_t{1025});
        c.numeric.s = n.value("s", 0.0);
        c.numeric.t = n.value("t", 1.0);
    }
    if (j.contains("seed")) {
        c.seed = j.at("seed").get<std::uint64_t>();
        c.seed_set = true;
    }
    if (j.contains("output")) {
        const json& o = j.at("output");
        detail::require_keys(o, {"dir", "format"}, "output");
        c.out_dir = o.value("dir", ".");
        c.format = o.value("format", "csv");
        if (c.format != "csv" && c.format != "json") throw ConfigError("output.format must be csv or json");
    }
    c.input_path = j.value("input", "");
    c.suite = j.value("suite", "");
    c.solve_mode = j.value("mode", "geometric");
    c.corrective_count = j.value("corrective_count", std::size_t{0});
    if (j.contains("initial_state")) c.initial_state = j.at("initial_state").get<Vec>();

    // range validation
    const NumericConfig& n = c.numeric;
    if (n.p < 1.0 || n.p >= 3.0) throw ConfigError("numeric.p must lie in [1, 3)");
    if (n.q < 1.0) throw ConfigError("numeric.q must be >= 1");
    if (n.delta <= 0.0) throw ConfigError("numeric.delta must be positive");
    if (n.epsilon <= 0.0 || n.epsilon > 1.0) throw ConfigError("numeric.epsilon must lie in (0, 1]");
    if (n.max_level < 1 || n.max_level > 24) throw ConfigError("numeric.max_level must lie in [1, 24]");
    if (n.grid_points < 2) throw ConfigError("numeric.grid_points must be >= 2");
    if (!(n.horizon > 0.0)) throw ConfigError("numeric.horizon must be positive");
    return c;
}

inline VectorField field_from_config(const FieldConfig& f, int driver_dim) {
    if (f.preset == "constant") {
        if (!f.matrices.empty()) return constant_field(f.matrices[0]);
        return constant_field(Mat::identity(driver_dim));
    }
    if (f.preset == "linear") {
        std::vector<Mat> ms = f.matrices;
        if (ms.empty()) ms.assign(driver_dim, Mat::identity(1));
        return linear_field(ms, f.truncation_radius);
    }
    if (f.preset == "rotation") return rotation_field(f.truncation_radius);
    if (f.preset == "tabulated") {
        if (driver_dim != 1) throw ConfigError("tabulated field preset is scalar only");
        return tabulated_field(f.table_y, f.table_f);
    }
    throw ConfigError("unknown field preset '" + f.preset + "'");
}

// ---------------------------------------------------------------------------
// Verification suites
// ---------------------------------------------------------------------------

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string stats;
};

using Suite = std::function<std::vector<CheckResult>(std::uint64_t seed)>;

namespace suites {

inline SamplePath random_small_path(Rng& rng, std::size_t n, std::size_t dim) {
    SamplePath p;
    p.times = uniform_grid(1.0, n);
    p.values.assign(n, Vec(dim, 0.0));
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t k = 0; k < dim; ++k) p.values[i][k] = p.values[i - 1][k] + rng.normal();
    return p;
}

inline SamplePath random_jump_driver(Rng& rng, std::size_t n_jumps, double cap = 0.5) {
    std::vector<double> jt;
    std::vector<Vec> jd;
    double t = 0.0;
    for (std::size_t k = 0; k < n_jumps; ++k) {
        t += rng.uniform(0.02, 0.8 / static_cast<double>(n_jumps));
        jt.push_back(t);
        jd.push_back(Vec{cap * (2.0 * rng.uniform() - 1.0)});
    }
    return make_step_path(1.0, jt, jd, Vec{0.0});
}

inline std::vector<CheckResult> pvar_oracle(std::uint64_t seed) {
    Rng rng(seed, "pvar-oracle");
    std::size_t worst_trial = 0;
    double worst = 0.0;
    bool ok = true;
    const std::size_t trials = 300;
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t n = 3 + rng.next_u64() % 10;
        const std::size_t d = 1 + rng.next_u64() % 3;
        const double p = 1.0 + 1.7 * rng.uniform();
        SamplePath path = random_small_path(rng, n, d);
        const double a = pvar_exact(path, p).value;
        const double b = pvar_brute(path, p).value;
        const double rel = std::abs(a - b) / std::max(1e-300, b);
        if (rel > worst) {
            worst = rel;
            worst_trial = t;
        }
        if (rel > 1e-12) ok = false;
    }
    std::ostringstream s;
    s << "trials=" << trials << " worst_rel=" << worst << " at trial " << worst_trial;
    return {{"pvar exact equals brute oracle", ok, s.str()}};
}

inline std::vector<CheckResult> param_invariance(std::uint64_t seed) {
    Rng rng(seed, "param-invariance");
    double worst = 0.0;
    bool ok = true;
    for (int t = 0; t < 40; ++t) {
        SamplePath p = random_jump_driver(rng, 3 + rng.next_u64() % 5);
        const double pe = 1.0 + rng.uniform();
        for (double delta : {0.1, 1.0, 10.0}) {
            auto [ext, par] = parametrise(p, delta, pe);
            const double v0 = pvar_exact(p, pe).value;
            const double v1 = pvar_exact(ext, pe).value;
            const double rel = std::abs(v0 - v1) / std::max(v0, 1e-300);
            worst = std::max(worst, rel);
            if (rel > 1e-10) ok = false;
        }
    }
    std::ostringstream s;
    s << "worst_rel=" << worst;
    return {{"parametrisation preserves p-variation", ok, s.str()}};
}

inline std::vector<CheckResult> jump_dichotomy(std::uint64_t seed) {
    Rng rng(seed, "jump-dichotomy");
    VectorField f = scalar_identity_field(1e5);
    double worst_f = 0.0, worst_g = 0.0;
    bool ok = true;
    for (int t = 0; t < 30; ++t) {
        SamplePath driver = random_jump_driver(rng, 4 + rng.next_u64() % 8);
        double pf = 1.0, pg = 1.0;
        for (const Jump& j : driver.jumps) {
            pf *= 1.0 + j.delta()[0];
            pg *= std::exp(j.delta()[0]);
        }
        const double vf = solve_forward(f, driver, Vec{1.0}, 1.0).path.values.back()[0];
        const double vg = solve_geometric(f, driver, Vec{1.0}, 1.0).path.values.back()[0];
        worst_f = std::max(worst_f, std::abs(vf - pf) / std::abs(pf));
        worst_g = std::max(worst_g, std::abs(vg - pg) / std::abs(pg));
        if (worst_f > 1e-8 || worst_g > 1e-8) ok = false;
    }
    std::ostringstream s;
    s << "worst_forward_rel=" << worst_f << " worst_geometric_rel=" << worst_g;
    return {{"pure-jump product dichotomy", ok, s.str()}};
}

inline std::vector<CheckResult> young_props(std::uint64_t seed) {
    Rng rng(seed, "young");
    std::vector<CheckResult> out;
    SamplePath g = random_small_path(rng, 257, 1);
    SamplePath f = random_small_path(rng, 257, 1);
    const double whole = young_integral_range(f, g, 1.5, 1.5, 0, 256, false).value(0, 0);
    const double a = young_integral_range(f, g, 1.5, 1.5, 0, 128, false).value(0, 0);
    const double b = young_integral_range(f, g, 1.5, 1.5, 128, 256, false).value(0, 0);
    const double gap = std::abs(a + b - whole);
    std::ostringstream s1;
    s1 << "additivity_gap=" << gap;
    out.push_back({"young additivity over subintervals", gap < 1e-12, s1.str()});
    bool rejected = false;
    try {
        young_integral(f, g, 2.5, 2.5, false);
    } catch (const std::invalid_argument&) {
        rejected = true;
    }
    out.push_back({"young condition rejection", rejected, "1/p+1/q<=1 rejected"});
    return out;
}

inline std::vector<CheckResult> chen(std::uint64_t seed) {
    Rng rng(seed, "chen");
    SamplePath p = random_small_path(rng, 129, 2);
    AreaTable table(p);
    double worst = 0.0;
    for (int t = 0; t < 2000; ++t) {
        std::size_t s = rng.next_u64() % 127, m = rng.next_u64() % 127, u = rng.next_u64() % 127;
        std::size_t lo = std::min({s, m, u}), hi = std::max({s, m, u});
        std::size_t mid = s + m + u - lo - hi;
        if (lo == mid || mid == hi) continue;
        Mat lhs = table.between(lo, hi);
        Mat rhs = table.between(lo, mid) + table.between(mid, hi);
        Mat br = commutator(sub(p.values[mid], p.values[lo]), sub(p.values[hi], p.values[mid]));
        br *= 0.5;
        rhs += br;
        worst = std::max(worst, max_abs(lhs - rhs));
    }
    std::ostringstream s;
    s << "worst_residual=" << worst;
    return {{"chen identity on grid triples", worst < 1e-12, s.str()}};
}

inline std::vector<CheckResult> area_moment(std::uint64_t seed) {
    LevyModel cp;
    cp.dimension = 2;
    cp.drift = Vec{0.0, 0.0};
    cp.gaussian_cov = Mat(2, 2);
    cp.measure = compound_poisson_ring(6.0, 0.2, 1.0, 2);
    AreaMomentOptions opts;
    opts.levels = 8;
    const AreaMomentReport rep = area_moment_check(cp, 0.0, 1.0, 2000, seed, opts);
    std::ostringstream s;
    s << "mean_sq=" << rep.mean_sq << " bound=" << rep.bound << " se=" << rep.se_sq;
    std::ostringstream s2;
    s2 << "mean=" << rep.mean << " se=" << rep.se;
    return {{"area second moment bound", rep.pass, s.str()},
            {"area mean is centred", std::abs(rep.mean) <= 3.0 * rep.se, s2.str()}};
}

inline std::vector<CheckResult> eta_index(std::uint64_t) {
    const BgIndex b = bg_index(eta_measure(40));
    std::ostringstream s;
    s << "index=" << b.value;
    const bool ok = b.status == IndexStatus::ok && b.value >= 1.95 && b.value <= 2.0;
    std::vector<CheckResult> out{{"eta measure has index two", ok, s.str()}};
    double prev = 0.0;
    bool mono = true;
    for (int m : {1, 2, 4, 8, 16, 32}) {
        const double v = eta_partial_integrals(m, 2.0);
        if (v < prev) mono = false;
        prev = v;
    }
    std::ostringstream s2;
    s2 << "partial_sum(32)=" << prev << " divergent(1.9, m=30)=" << eta_partial_integrals(30, 1.9);
    out.push_back({"eta partial integrals: alpha=2 bounded, alpha=1.9 divergent",
                   mono && prev < 3.3 && eta_partial_integrals(30, 1.9) > 1e6, s2.str()});
    return out;
}

}  // namespace suites

inline const std::map<std::string, Suite>& verify_suites() {
    static const std::map<std::string, Suite> table = {
        {"pvar-oracle", suites::pvar_oracle},
        {"param-invariance", suites::param_invariance},
        {"jump-dichotomy", suites::jump_dichotomy},
        {"young-props", suites::young_props},
        {"chen", suites::chen},
        {"area-moment", suites::area_moment},
        {"eta-index", suites::eta_index},
    };
    return table;
}

// ---------------------------------------------------------------------------
// Run dispatch
// ---------------------------------------------------------------------------

namespace detail {

inline void write_provenance(const RunConfig& c, const json& config_json, const std::string& file) {
    json prov;
    prov["command"] = c.command;
    prov["seed"] = c.seed;
    prov["config_hash"] = fnv1a(config_json.dump());
    prov["config"] = config_json;
    prov["version"] = "1.0";
    std::ofstream out(file, std::ios::binary);
    out << prov.dump(2) << "\n";
}

inline std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

inline json solution_provenance(const Solution& s) {
    json j;
    j["kind"] = s.kind == SolutionKind::geometric ? "geometric" : "forward";
    j["picard_iterations"] = s.picard_iterations;
    j["residual"] = s.residual;
    j["delta"] = s.driver_ref.delta;
    j["p"] = s.driver_ref.p;
    j["truncation_radius"] = s.driver_ref.truncation_radius;
    return j;
}

}  // namespace detail

/// Execute a parsed run. Returns the process exit code.
inline int run(const RunConfig& c, const json& config_json, std::ostream& out = std::cout) {
    namespace fs = std::filesystem;
    const bool stochastic = c.command == "simulate" || c.command == "area" || c.command == "verify";
    if (c.command.empty()) throw ConfigError("missing command");
    if (stochastic && !c.seed_set) throw ConfigError("seed is mandatory for stochastic commands");
    fs::create_directories(c.out_dir);

    if (c.command == "simulate") {
        if (!c.model) throw ConfigError("simulate requires a model");
        SamplePath p = sample_path(*c.model, c.numeric.horizon, c.numeric.grid_points,
                                   c.numeric.epsilon, c.seed);
        const std::string file = detail::join_path(c.out_dir, "path.csv");
        write_path_csv(file, p);
        detail::write_provenance(c, config_json, detail::join_path(c.out_dir, "path.provenance.json"));
        out << "wrote " << file << " (" << p.size() << " rows, " << p.jumps.size() << " jumps)\n";
        return 0;
    }

    if (c.command == "pvar") {
        if (c.input_path.empty()) throw ConfigError("pvar requires an input path");
        if (!fs::exists(c.input_path)) throw ConfigError("input path not found: " + c.input_path);
        SamplePath p = read_path_csv(c.input_path);
        const PVarResult r = pvar_exact(p, c.numeric.p);
        json rep;
        rep["p"] = c.numeric.p;
        rep["value"] = r.value;
        rep["witness"] = r.witness;
        const std::string file = detail::join_path(c.out_dir, "pvar.json");
        std::ofstream f(file, std::ios::binary);
        f << rep.dump(2) << "\n";
        detail::write_provenance(c, config_json, detail::join_path(c.out_dir, "pvar.provenance.json"));
        out << "pvar value " << format_double(r.value) << "\n";
        return 0;
    }

    if (c.command == "solve") {
        SamplePath driver;
        if (!c.input_path.empty()) {
            if (!fs::exists(c.input_path)) throw ConfigError("input path not found: " + c.input_path);
            driver = read_path_csv(c.input_path);
        } else if (c.model) {
            if (!c.seed_set) throw ConfigError("seed is mandatory when simulating the driver");
            driver = sample_path(*c.model, c.numeric.horizon, c.numeric.grid_points,
                                 c.numeric.epsilon, c.seed);
        } else {
            throw ConfigError("solve requires an input path or a model");
        }
        VectorField field = field_from_config(c.field, static_cast<int>(driver.dim()));
        Vec a = c.initial_state.empty() ? Vec(field.dim_state, 1.0) : c.initial_state;
        SolveOptions opts;
        opts.picard_tol = c.numeric.tol;
        Solution s;
        if (c.numeric.p < 2.0) {
            if (c.solve_mode == "geometric")
                s = solve_geometric(field, driver, a, c.numeric.p, c.numeric.delta, opts);
            else if (c.solve_mode == "forward")
                s = solve_forward(field, driver, a, c.numeric.p,
                                  std::numeric_limits<std::size_t>::max(), opts);
            else if (c.solve_mode == "corrective")
                s = solve_forward(field, driver, a, c.numeric.p, c.corrective_count, opts);
            else
                throw ConfigError("unknown solve mode '" + c.solve_mode + "'");
        } else {
            if (c.solve_mode == "geometric")
                s = solve_geometric_rough(field, driver, {}, a, c.numeric.p, c.numeric.delta, opts);
            else if (c.solve_mode == "forward")
                s = solve_forward_rough(field, driver, a, c.numeric.p, opts);
            else
                throw ConfigError("solve mode '" + c.solve_mode + "' needs p < 2");
        }
        const std::string file = detail::join_path(c.out_dir, "solution.csv");
        write_path_csv(file, s.path);
        if (c.solve_mode == "geometric" && !driver.jumps.empty()) {
            // audit record of the fictitious-time map used by the solve
            auto [ext, par] = parametrise(driver, c.numeric.delta, c.numeric.p);
            write_parametrisation_json(detail::join_path(c.out_dir, "parametrisation.json"), par);
        }
        json prov = detail::solution_provenance(s);
        prov["seed"] = c.seed;
        prov["config_hash"] = detail::fnv1a(config_json.dump());
        prov["config"] = config_json;
        std::ofstream pf(detail::join_path(c.out_dir, "solution.provenance.json"), std::ios::binary);
        pf << prov.dump(2) << "\n";
        out << "wrote " << file << " (iterations " << s.picard_iterations << ", residual "
            << format_double(s.residual) << ")\n";
        return 0;
    }

    if (c.command == "area") {
        if (!c.model) throw ConfigError("area requires a model");
        AreaMomentOptions opts;
        opts.levels = c.numeric.max_level;
        opts.cutoff = c.numeric.epsilon;
        const AreaMomentReport rep =
            area_moment_check(*c.model, c.numeric.s, c.numeric.t, c.numeric.trials, c.seed, opts);
        json j;
        j["mean"] = rep.mean_sq;
        j["se"] = rep.se_sq;
        j["bound"] = rep.bound;
        j["pass"] = rep.pass;
        j["mean_area"] = rep.mean;
        j["se_area"] = rep.se;
        j["trials"] = rep.trials;
        const std::string file = detail::join_path(c.out_dir, "area.json");
        std::ofstream f(file, std::ios::binary);
        f << j.dump(2) << "\n";
        detail::write_provenance(c, config_json, detail::join_path(c.out_dir, "area.provenance.json"));
        out << (rep.pass ? "PASS" : "FAIL") << " mean_sq " << format_double(rep.mean_sq) << " bound "
            << format_double(rep.bound) << " se " << format_double(rep.se_sq) << "\n";
        return rep.pass ? 0 : 1;
    }

    if (c.command == "verify") {
        const auto& table = verify_suites();
        std::vector<std::string> names;
        if (c.suite == "all") {
            for (const auto& [k, v] : table) names.push_back(k);
        } else if (table.count(c.suite)) {
            names.push_back(c.suite);
        } else {
            throw ConfigError("unknown verify suite '" + c.suite + "'");
        }
        bool all_pass = true;
        json report;
        report["suite"] = c.suite;
        report["seed"] = c.seed;
        json checks = json::array();
        for (const auto& name : names) {
            for (const CheckResult& r : table.at(name)(c.seed)) {
                all_pass = all_pass && r.pass;
                out << (r.pass ? "PASS" : "FAIL") << " " << r.name << " [" << r.stats << "]\n";
                json cj;
                cj["name"] = r.name;
                cj["pass"] = r.pass;
                cj["stats"] = r.stats;
                checks.push_back(cj);
            }
        }
        report["checks"] = checks;
        report["pass"] = all_pass;
        const std::string file = detail::join_path(c.out_dir, "verify.json");
        std::ofstream f(file, std::ios::binary);
        f << report.dump(2) << "\n";
        out << (all_pass ? "PASS" : "FAIL") << " (" << checks.size() << " checks)\n";
        return all_pass ? 0 : 1;
    }

    throw ConfigError("unknown command '" + c.command + "'");
}

}  // namespace pathwise::cli
