#pragma once

// Degree-2 multiplicative functionals (path increments plus level-2 tensor),
// classical signatures of piecewise-linear paths, control-function bounds,
// the compensated-sum rough integral, and the geometric solver for
// 2 < p < 3.
//
// Functionals are stored per grid cell; the value over any interval follows
// from the Chen relation, so multiplicativity is structural. The geometric
// convention fixes the symmetric part of level 2 at (1/2) lv1 (x) lv1; the
// antisymmetric part is the area.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pathwise/area.hpp"
#include "pathwise/io.hpp"
#include "pathwise/parametrise.hpp"
#include "pathwise/pvar.hpp"
#include "pathwise/sample_path.hpp"
#include "pathwise/solver.hpp"
#include "pathwise/vector_field.hpp"

namespace pathwise {

/// Degree-2 functional (1, X^(1), X^(2)) over a time grid, stored per cell.
struct Functional2 {
    std::vector<double> times;
    std::vector<Vec> values;  // underlying level-1 path values at grid points
    std::vector<Vec> lv1;     // per-cell increments
    std::vector<Mat> lv2;     // per-cell level-2 tensors
    double p = 2.5;

    std::size_t dim() const { return values.empty() ? 0 : values.front().size(); }
    std::size_t cells() const { return lv1.size(); }

    /// Chen composition of cells [i, j): (a1,a2)*(b1,b2) =
    /// (a1+b1, a2+b2+a1 (x) b1).
    std::pair<Vec, Mat> over(std::size_t i, std::size_t j) const {
        const std::size_t d = dim();
        Vec one(d, 0.0);
        Mat two(d, d);
        for (std::size_t k = i; k < j; ++k) {
            two += lv2[k];
            two += outer(one, lv1[k]);
            axpy(1.0, lv1[k], one);
        }
        return {one, two};
    }

    void validate_shape() const {
        if (times.size() != values.size() || times.size() != lv1.size() + 1 ||
            lv1.size() != lv2.size())
            throw std::invalid_argument("Functional2: inconsistent shapes");
    }
};

/// Classical degree-2 signature of a continuous piecewise-linear path:
/// per segment level2 = 1/2 increment (x) increment, composed by Chen.
inline Functional2 signature2_linear(const SamplePath& path, double p = 2.5) {
    if (!path.jumps.empty())
        throw std::invalid_argument("signature2_linear: path must be continuous");
    Functional2 f;
    f.p = p;
    f.times = path.times;
    f.values = path.values;
    f.lv1.reserve(path.size() - 1);
    f.lv2.reserve(path.size() - 1);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        Vec inc = sub(path.values[i + 1], path.values[i]);
        Mat half = outer(inc, inc);
        half *= 0.5;
        f.lv1.push_back(std::move(inc));
        f.lv2.push_back(std::move(half));
    }
    return f;
}

/// Geometric enhancement of a sampled path: symmetric part of level 2 is
/// 1/2 lv1 (x) lv1, the antisymmetric part is the supplied per-cell area
/// (zero when absent, the piecewise-linear convention).
inline Functional2 enhance_path(const SamplePath& path, const std::vector<Mat>& cell_areas, double p) {
    Functional2 f = signature2_linear(path, p);
    if (!cell_areas.empty()) {
        if (cell_areas.size() != f.cells())
            throw std::invalid_argument("enhance_path: one area matrix per cell required");
        for (std::size_t i = 0; i < f.cells(); ++i) f.lv2[i] += cell_areas[i];
    }
    return f;
}

/// Rescale level 1 by phi and level 2 by phi^2 (the homogeneous dilation).
inline Functional2 rescale_functional(const Functional2& f, double phi) {
    Functional2 out = f;
    for (auto& v : out.lv1)
        for (double& x : v) x *= phi;
    for (auto& m : out.lv2) m *= phi * phi;
    for (std::size_t i = 1; i < out.values.size(); ++i) {
        Vec inc = sub(f.values[i], f.values[0]);
        out.values[i] = f.values[0];
        axpy(phi, inc, out.values[i]);
    }
    return out;
}

/// Largest normalized magnitude max |X^(i)_{st}| (i/p)! / omega(s,t)^{i/p}
/// over all grid pairs and i = 1,2: the infimum of the constants beta for
/// which |X^(i)| <= beta omega^{i/p} / (i/p)! holds everywhere. Zero path
/// reports 0.
inline double check_pvar_bound(const Functional2& f, const ControlFunction& omega) {
    if (omega.grid_size() != f.times.size())
        throw std::invalid_argument("check_pvar_bound: control grid mismatch");
    const double p = f.p;
    const double fact1 = std::tgamma(1.0 / p + 1.0);
    const double fact2 = std::tgamma(2.0 / p + 1.0);
    double beta = 0.0;
    const std::size_t n = f.times.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        Vec one(f.dim(), 0.0);
        Mat two(f.dim(), f.dim());
        for (std::size_t j = i + 1; j < n; ++j) {
            two += f.lv2[j - 1];
            two += outer(one, f.lv1[j - 1]);
            axpy(1.0, f.lv1[j - 1], one);
            const double w = omega(i, j);
            const double n1 = norm2(one), n2 = frobenius(two);
            if (w > 0.0) {
                beta = std::max(beta, n1 * fact1 / std::pow(w, 1.0 / p));
                beta = std::max(beta, n2 * fact2 / std::pow(w, 2.0 / p));
            } else if (n1 > 0.0 || n2 > 0.0) {
                throw std::runtime_error("check_pvar_bound: control vanishes on a moving increment");
            }
        }
    }
    return beta;
}

// ---------------------------------------------------------------------------
// Rough integral of a one-form against a degree-2 functional
// ---------------------------------------------------------------------------

struct RoughIntegralOptions {
    int max_levels = 16;
    double atol = 1e-9;
    double rtol = 1e-7;
};

namespace roughdetail {

// local almost-multiplicative step of theta against (lv1, lv2) at base x:
//   y1 = theta(x) lv1 + Dtheta(x) : lv2   (contraction over (k, j))
//   y2 = (theta (x) theta)(lv2)
// theta.jacobian returns one matrix per differentiation coordinate of the
// path value; the contraction only consumes the first d of them.
inline void local_step(const VectorField& theta, const Vec& x, const Vec& lv1, const Mat& lv2, Vec& y1,
                       Mat& y2) {
    const Mat th = theta.eval(x);
    const std::vector<Mat> dth = theta.jacobian(x);
    const std::size_t n = th.rows, d = th.cols;
    const std::size_t kmax = std::min(dth.size(), d);
    y1.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += th(i, j) * lv1[j];
        for (std::size_t k = 0; k < kmax; ++k)
            for (std::size_t j = 0; j < d; ++j) acc += dth[k](i, j) * lv2(k, j);
        y1[i] = acc;
    }
    y2 = Mat(n, n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j)
                for (std::size_t k = 0; k < d; ++k) acc += th(a, j) * th(b, k) * lv2(j, k);
            y2(a, b) = acc;
        }
}

inline std::vector<std::size_t> coarsening(std::size_t cells, std::size_t pieces) {
    std::vector<std::size_t> idx;
    std::size_t last = std::numeric_limits<std::size_t>::max();
    for (std::size_t k = 0; k <= pieces; ++k) {
        const std::size_t i = static_cast<std::size_t>(
            std::llround(static_cast<double>(k) * static_cast<double>(cells) / static_cast<double>(pieces)));
        if (i != last) idx.push_back(i);
        last = i;
    }
    return idx;
}

}  // namespace roughdetail

/// Integral of the 1-form theta against X over the cell range [lo, hi):
/// compensated sums on dyadic coarsenings until successive levels stabilize,
/// then the finest-grid per-cell functional is returned.
inline Functional2 rough_integral_deg2(const VectorField& theta, const Functional2& X, std::size_t lo,
                                       std::size_t hi, const RoughIntegralOptions& opts = {}) {
    X.validate_shape();
    if (!(X.p >= 2.0 && X.p < 3.0))
        throw std::invalid_argument("rough_integral_deg2: need 2 <= p < 3");
    if (theta.dim_driver != static_cast<int>(X.dim()))
        throw std::invalid_argument("rough_integral_deg2: driver dimension mismatch");
    if (lo >= hi || hi > X.cells()) throw std::invalid_argument("rough_integral_deg2: bad cell range");

    const std::size_t cells = hi - lo;
    const std::size_t n = theta.dim_state;

    // stabilization pass over dyadic coarsenings
    Vec prev1;
    double prev_gap = std::numeric_limits<double>::infinity();
    int grew = 0;
    for (int level = 0; level < opts.max_levels; ++level) {
        const std::size_t pieces = std::min<std::size_t>(cells, static_cast<std::size_t>(1) << level);
        const auto idx = roughdetail::coarsening(cells, pieces);
        Vec one(n, 0.0);
        for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
            const auto [l1, l2] = X.over(lo + idx[k], lo + idx[k + 1]);
            Vec y1;
            Mat y2;
            roughdetail::local_step(theta, X.values[lo + idx[k]], l1, l2, y1, y2);
            axpy(1.0, y1, one);
        }
        if (!prev1.empty()) {
            const double gap = dist2(one, prev1);
            const double scale = std::max(1.0, norm2(one));
            if (gap <= opts.atol || gap <= opts.rtol * scale) break;
            if (gap > prev_gap * 1.5) {
                if (++grew >= 3) throw std::runtime_error("divergent rough sum");
            } else {
                grew = 0;
            }
            prev_gap = gap;
        }
        prev1 = one;
        if (pieces >= cells) break;
    }

    // finest-grid per-cell outputs
    Functional2 out;
    out.p = X.p;
    out.times.assign(X.times.begin() + lo, X.times.begin() + hi + 1);
    out.values.assign(cells + 1, Vec(n, 0.0));
    out.lv1.resize(cells);
    out.lv2.resize(cells);
    for (std::size_t k = 0; k < cells; ++k) {
        roughdetail::local_step(theta, X.values[lo + k], X.lv1[lo + k], X.lv2[lo + k], out.lv1[k],
                                out.lv2[k]);
        out.values[k + 1] = out.values[k];
        axpy(1.0, out.lv1[k], out.values[k + 1]);
    }
    return out;
}

inline Functional2 rough_integral_deg2(const VectorField& theta, const Functional2& X,
                                       const RoughIntegralOptions& opts = {}) {
    return rough_integral_deg2(theta, X, 0, X.cells(), opts);
}

// ---------------------------------------------------------------------------
// Geometric solver for 2 < p < 3
// ---------------------------------------------------------------------------

namespace roughdetail {

// the joint one-form on R^{d+n}: h(x,y) dz = (dx, f(y) dx)
inline VectorField joint_form(const VectorField& f, int d) {
    const int n = f.dim_state;
    const int D = d + n;
    VectorField h;
    h.dim_state = D;
    h.dim_driver = D;
    h.lip_alpha = f.lip_alpha;
    h.f_inf = f.f_inf + std::sqrt(static_cast<double>(d));
    h.grad_inf = f.grad_inf;
    h.truncation_radius = f.truncation_radius;
    h.eval = [f, d, n, D](const Vec& z) {
        Mat out(D, D);
        for (int i = 0; i < d; ++i) out(i, i) = 1.0;
        Vec y(z.begin() + d, z.end());
        const Mat fy = f.eval(y);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) out(d + i, j) = fy(i, j);
        return out;
    };
    h.jacobian = [f, d, n, D](const Vec& z) {
        std::vector<Mat> J(D, Mat(D, D));
        Vec y(z.begin() + d, z.end());
        const std::vector<Mat> fj = f.jacobian(y);
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j) J[d + k](d + i, j) = fj[k](i, j);
        return J;
    };
    return h;
}

struct RoughEngineResult {
    std::vector<Vec> y_values;
    int iterations = 0;
    double residual = 0.0;
};

// Picard iteration of the joint functional Z = (X, Y): each sweep replaces
// the per-cell data by the local rough step of the joint one-form evaluated
// on the previous iterate, then reads the Y values off level 1.
inline RoughEngineResult rough_picard(const VectorField& f, const Functional2& X, const Vec& a,
                                      const SolveOptions& opts) {
    const std::size_t d = X.dim();
    const std::size_t n = a.size();
    const std::size_t D = d + n;
    const std::size_t cells = X.cells();
    const VectorField h = joint_form(f, static_cast<int>(d));

    // joint state: per-cell (lv1, lv2) and grid values
    std::vector<Vec> z1(cells, Vec(D, 0.0));
    std::vector<Mat> z2(cells, Mat(D, D));
    std::vector<Vec> zval(cells + 1, Vec(D, 0.0));
    for (std::size_t k = 0; k < cells; ++k)
        for (std::size_t i = 0; i < d; ++i) z1[k][i] = X.lv1[k][i];
    for (std::size_t k = 0; k < cells; ++k)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) z2[k](i, j) = X.lv2[k](i, j);
    for (std::size_t k = 0; k <= cells; ++k) {
        for (std::size_t i = 0; i < d; ++i) zval[k][i] = X.values[k][i];
        for (std::size_t i = 0; i < n; ++i) zval[k][d + i] = a[i];
    }

    RoughEngineResult res;

    // blocks by control budget on the driver data
    std::vector<double> budget(cells, 0.0);
    for (std::size_t k = 0; k < cells; ++k)
        budget[k] = std::max(f.grad_inf, 1e-12) *
                    (norm2(X.lv1[k]) + std::sqrt(frobenius(X.lv2[k])));

    // each block attempt starts from the constant-Y iterate so retries are
    // deterministic
    auto init_block = [&](std::size_t lo, std::size_t hi) {
        const Vec entry = zval[lo];
        for (std::size_t k = lo; k < hi; ++k) {
            z1[k].assign(D, 0.0);
            z2[k] = Mat(D, D);
            for (std::size_t i = 0; i < d; ++i) z1[k][i] = X.lv1[k][i];
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) z2[k](i, j) = X.lv2[k](i, j);
            for (std::size_t i = 0; i < d; ++i) zval[k + 1][i] = X.values[k + 1][i];
            for (std::size_t i = 0; i < n; ++i) zval[k + 1][d + i] = entry[d + i];
        }
    };

    auto attempt = [&](std::size_t lo, std::size_t hi) -> double {
        init_block(lo, hi);
        double resid = std::numeric_limits<double>::infinity();
        for (int it = 0; it < opts.max_picard_iters; ++it) {
            ++res.iterations;
            std::vector<Vec> n1(hi - lo);
            std::vector<Mat> n2(hi - lo);
            for (std::size_t k = lo; k < hi; ++k)
                local_step(h, zval[k], z1[k], z2[k], n1[k - lo], n2[k - lo]);
            resid = 0.0;
            Vec run = zval[lo];
            for (std::size_t k = lo; k < hi; ++k) {
                z1[k] = n1[k - lo];
                z2[k] = n2[k - lo];
                Vec next = run;
                axpy(1.0, z1[k], next);
                // driver coordinates stay exact
                for (std::size_t i = 0; i < d; ++i) next[i] = X.values[k + 1][i];
                resid = std::max(resid, dist2(next, zval[k + 1]));
                zval[k + 1] = next;
                run = next;
            }
            if (resid < opts.picard_tol) break;
        }
        return resid;
    };

    std::size_t lo = 0;
    while (lo < cells) {
        std::size_t hi = lo;
        double acc = 0.0;
        while (hi < cells) {
            if (hi > lo && acc + budget[hi] > opts.contraction_budget) break;
            acc += budget[hi];
            ++hi;
        }
        while (true) {
            const double resid = attempt(lo, hi);
            if (resid < opts.picard_tol) {
                res.residual = std::max(res.residual, resid);
                break;
            }
            if (hi - lo <= 1) throw std::runtime_error("no contraction");
            hi = lo + (hi - lo) / 2;
        }
        lo = hi;
    }

    res.y_values.assign(cells + 1, Vec(n, 0.0));
    for (std::size_t k = 0; k <= cells; ++k)
        for (std::size_t i = 0; i < n; ++i) res.y_values[k][i] = zval[k][d + i];
    return res;
}

}  // namespace roughdetail

/// Geometric solution of dY = f(Y) dX for 2 < p < 3 from a driver enhanced
/// with per-cell areas. The driver is parametrised first; fictitious
/// segments carry the linear (zero-area) enhancement. Per-cell areas are
/// supported for continuous drivers; jump drivers take the polygon
/// convention on their cells.
inline Solution solve_geometric_rough(const VectorField& field, const SamplePath& driver,
                                      const std::vector<Mat>& cell_areas, const Vec& a, double p,
                                      double delta = 1.0, const SolveOptions& opts = {}) {
    if (!(p > 2.0 && p < 3.0)) throw std::invalid_argument("solve_geometric_rough: need p in (2,3)");
    if (!(field.lip_alpha > p))
        throw std::invalid_argument("solve: field regularity insufficient (need lip_alpha > p)");
    if (field.dim_driver != static_cast<int>(driver.dim()))
        throw std::invalid_argument("solve: field driver dimension mismatch");
    if (static_cast<int>(a.size()) != field.dim_state)
        throw std::invalid_argument("solve: initial state dimension mismatch");
    if (!cell_areas.empty() && !driver.jumps.empty())
        throw std::invalid_argument("solve_geometric_rough: per-cell areas require a continuous driver");

    auto [ext, par] = parametrise(driver, delta, p);
    std::vector<Mat> ext_areas;
    if (!cell_areas.empty()) ext_areas = cell_areas;  // continuous: grid unchanged
    Functional2 X = enhance_path(ext, ext_areas, p);

    const auto eng = roughdetail::rough_picard(field, X, a, opts);

    SamplePath ext_solution;
    ext_solution.times = ext.times;
    ext_solution.values = eng.y_values;

    Solution out;
    out.kind = SolutionKind::geometric;
    out.picard_iterations = eng.iterations;
    out.residual = eng.residual;
    out.driver_ref.delta = delta;
    out.driver_ref.p = p;
    out.driver_ref.truncation_radius = field.truncation_radius;
    out.path = deparametrise(ext_solution, par);
    return out;
}

/// Forward solution for 2 < p < 3: rough geometric solves on the continuous
/// pieces, f(Y-) dx at the jumps.
inline Solution solve_forward_rough(const VectorField& field, const SamplePath& driver, const Vec& a,
                                    double p, const SolveOptions& opts = {}) {
    if (!(p > 2.0 && p < 3.0)) throw std::invalid_argument("solve_forward_rough: need p in (2,3)");
    std::vector<std::size_t> jump_rows;
    for (const Jump& j : driver.jumps) jump_rows.push_back(j.index);
    std::sort(jump_rows.begin(), jump_rows.end());

    Solution out;
    out.kind = SolutionKind::forward;
    out.driver_ref.p = p;
    out.driver_ref.truncation_radius = field.truncation_radius;
    out.path.times = driver.times;
    out.path.values.assign(driver.size(), Vec(a.size(), 0.0));
    out.path.values[0] = a;

    Vec state = a;
    std::size_t piece_lo = 0;
    auto solve_piece = [&](std::size_t lo, std::size_t hi, const Vec& end_left) {
        // continuous piece from row lo to hi, final value replaced by the
        // left limit when hi is a jump row
        SamplePath piece;
        piece.times.reserve(hi - lo + 1);
        for (std::size_t i = lo; i <= hi; ++i) piece.times.push_back(driver.times[i] - driver.times[lo]);
        piece.values.assign(driver.values.begin() + lo, driver.values.begin() + hi + 1);
        piece.values.back() = end_left;
        if (piece.size() < 2) return;
        Solution s = solve_geometric_rough(field, piece, {}, state, p, 1.0, opts);
        out.picard_iterations += s.picard_iterations;
        out.residual = std::max(out.residual, s.residual);
        for (std::size_t i = lo; i <= hi; ++i) out.path.values[i] = s.path.values[i - lo];
        state = s.path.values.back();
    };

    for (std::size_t jr : jump_rows) {
        const Jump* j = driver.jump_at(jr);
        solve_piece(piece_lo, jr, j->left);
        Jump sj;
        sj.index = jr;
        sj.left = state;
        axpy(1.0, matvec(field.eval(state), j->delta()), state);
        sj.right = state;
        out.path.values[jr] = state;
        if (norm2(sj.delta()) > 0.0) out.path.jumps.push_back(sj);
        piece_lo = jr;
    }
    if (piece_lo + 1 < driver.size())
        solve_piece(piece_lo, driver.size() - 1, driver.values.back());
    out.path.sort_jump_registry();
    out.path.validate();
    return out;
}

// ---------------------------------------------------------------------------
// Enhanced-path files: CSV path + JSON sidecar of level-2 tensors on the
// dyadic grid, keyed "level,index"
// ---------------------------------------------------------------------------

inline void save_enhanced_path(const std::string& csv_file, const std::string& sidecar_file,
                               const Functional2& f) {
    f.validate_shape();
    SamplePath path;
    path.times = f.times;
    path.values = f.values;
    write_path_csv(csv_file, path);

    const std::size_t cells = f.cells();
    int max_level = 0;
    while ((static_cast<std::size_t>(1) << (max_level + 1)) <= cells) ++max_level;
    if ((static_cast<std::size_t>(1) << max_level) != cells)
        throw std::invalid_argument("save_enhanced_path: cell count must be a power of two");

    nlohmann::json j;
    j["dim"] = f.dim();
    j["p"] = f.p;
    j["max_level"] = max_level;
    nlohmann::json areas = nlohmann::json::object();
    for (int level = 0; level <= max_level; ++level) {
        const std::size_t pieces = static_cast<std::size_t>(1) << level;
        const std::size_t stride = cells / pieces;
        for (std::size_t i = 0; i < pieces; ++i) {
            const auto [one, two] = f.over(i * stride, (i + 1) * stride);
            std::vector<std::vector<double>> rows(f.dim(), std::vector<double>(f.dim()));
            for (std::size_t r = 0; r < f.dim(); ++r)
                for (std::size_t c = 0; c < f.dim(); ++c) rows[r][c] = two(r, c);
            areas[std::to_string(level) + "," + std::to_string(i)] = rows;
        }
    }
    j["level2"] = areas;
    std::ofstream out(sidecar_file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + sidecar_file);
    out << j.dump(2) << "\n";
}

/// Load an enhanced path; coarser levels are validated against the Chen
/// composition of the finest level ("not multiplicative" on mismatch).
inline Functional2 load_enhanced_path(const std::string& csv_file, const std::string& sidecar_file,
                                      double chen_tol = 1e-10) {
    SamplePath path = read_path_csv(csv_file);
    std::ifstream in(sidecar_file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for read: " + sidecar_file);
    nlohmann::json j;
    in >> j;
    const std::size_t d = j.at("dim").get<std::size_t>();
    const int max_level = j.at("max_level").get<int>();
    const double p = j.value("p", 2.5);
    const std::size_t cells = static_cast<std::size_t>(1) << max_level;
    if (path.size() != cells + 1 || path.dim() != d)
        throw std::invalid_argument("load_enhanced_path: csv/sidecar shape mismatch");

    auto read_mat = [&](const std::string& key) {
        const auto rows = j.at("level2").at(key).get<std::vector<std::vector<double>>>();
        Mat m(d, d);
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c) m(r, c) = rows.at(r).at(c);
        return m;
    };

    Functional2 f;
    f.p = p;
    f.times = path.times;
    f.values = path.values;
    f.lv1.resize(cells);
    f.lv2.resize(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        f.lv1[i] = sub(path.values[i + 1], path.values[i]);
        f.lv2[i] = read_mat(std::to_string(max_level) + "," + std::to_string(i));
    }
    // validate every provided coarser level against composition
    for (int level = 0; level < max_level; ++level) {
        const std::size_t pieces = static_cast<std::size_t>(1) << level;
        const std::size_t stride = cells / pieces;
        for (std::size_t i = 0; i < pieces; ++i) {
            const std::string key = std::to_string(level) + "," + std::to_string(i);
            if (!j.at("level2").contains(key)) continue;
            const Mat stored = read_mat(key);
            const auto [one, two] = f.over(i * stride, (i + 1) * stride);
            if (max_abs(stored - two) > chen_tol * std::max(1.0, max_abs(stored)))
                throw std::runtime_error("not multiplicative");
        }
    }
    return f;
}

}  // namespace pathwise
