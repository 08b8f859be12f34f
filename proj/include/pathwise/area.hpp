#pragma once

// The dyadic construction of the Levy area, its moment estimates, the Chen
// identity, dyadic covers, and the (p/2)-variation bound of the area
// process.
//
// The area over [s,t] at level n is the telescoped triangle sum
//   A(n) = 1/2 sum_k (X(u_k) - X(s)) ^ (X(u_{k+1}) - X(u_k)),
// u_k = s + k 2^{-n} (t-s), with ^ the antisymmetrised outer product. The
// same value decomposes into per-level triangle sums (the martingale
// increments); both orders are computed and agree to roundoff. Evaluation at
// a registered jump time uses the left limit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

#include "pathwise/levy.hpp"
#include "pathwise/linalg.hpp"
#include "pathwise/rng.hpp"
#include "pathwise/sample_path.hpp"

namespace pathwise {

struct AreaMatrix {
    double s = 0.0, t = 0.0;
    Mat matrix;
    int levels_used = 0;
};

namespace areadetail {

// w(a,b) = a (x) b - b (x) a
inline void add_wedge(Mat& acc, const Vec& a, const Vec& b, double scale) {
    const std::size_t d = a.size();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) acc(i, j) += scale * (a[i] * b[j] - a[j] * b[i]);
}

inline std::size_t locate_time(const SamplePath& path, double t) {
    const double tol = 1e-9 * std::max(1.0, path.horizon());
    auto it = std::lower_bound(path.times.begin(), path.times.end(), t - tol);
    if (it == path.times.end() || std::abs(*it - t) > tol)
        throw std::invalid_argument("area: insufficient resolution");
    return static_cast<std::size_t>(it - path.times.begin());
}

// path value with the left-limit convention at jump times
inline const Vec& eval_left(const SamplePath& path, std::size_t idx) {
    if (const Jump* j = path.jump_at(idx)) return j->left;
    return path.values[idx];
}

}  // namespace areadetail

/// Dyadic evaluation points of [s,t] at level n, as grid indices. Throws
/// "insufficient resolution" when a point is missing from the grid.
inline std::vector<std::size_t> dyadic_points(const SamplePath& path, double s, double t, int levels) {
    if (!(s < t)) throw std::invalid_argument("area: need s < t");
    if (levels < 0) throw std::invalid_argument("area: negative level");
    const std::size_t pieces = static_cast<std::size_t>(1) << levels;
    std::vector<std::size_t> idx(pieces + 1);
    for (std::size_t k = 0; k <= pieces; ++k) {
        const double u = s + (t - s) * static_cast<double>(k) / static_cast<double>(pieces);
        idx[k] = areadetail::locate_time(path, u);
    }
    return idx;
}

/// Telescoped triangle sum for the area over [s,t] at dyadic level n.
inline AreaMatrix area_dyadic(const SamplePath& path, double s, double t, int levels) {
    const auto idx = dyadic_points(path, s, t, levels);
    const std::size_t d = path.dim();
    AreaMatrix out;
    out.s = s;
    out.t = t;
    out.levels_used = levels;
    out.matrix = Mat(d, d);
    const Vec& base = areadetail::eval_left(path, idx[0]);
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
        const Vec a = sub(areadetail::eval_left(path, idx[k]), base);
        const Vec b = sub(areadetail::eval_left(path, idx[k + 1]), areadetail::eval_left(path, idx[k]));
        areadetail::add_wedge(out.matrix, a, b, 0.5);
    }
    return out;
}

/// Per-level triangle sums L_m, m = 1..n: A(n) = sum_m L_m (level 0 is the
/// empty sum). L_m is the martingale increment between levels m-1 and m.
inline std::vector<Mat> area_dyadic_levels(const SamplePath& path, double s, double t, int levels) {
    const auto idx = dyadic_points(path, s, t, levels);
    const std::size_t d = path.dim();
    std::vector<Mat> out;
    const std::size_t total = idx.size() - 1;  // 2^levels
    for (int m = 1; m <= levels; ++m) {
        Mat lm(d, d);
        const std::size_t stride = total >> m;            // cells per level-m piece
        for (std::size_t k = 1; k < (static_cast<std::size_t>(1) << m); k += 2) {
            const Vec& P = areadetail::eval_left(path, idx[(k - 1) * stride]);
            const Vec& Q = areadetail::eval_left(path, idx[(k + 1) * stride]);
            const Vec& M = areadetail::eval_left(path, idx[k * stride]);
            Vec md(d);
            for (std::size_t i = 0; i < d; ++i) md[i] = M[i] - 0.5 * (P[i] + Q[i]);
            areadetail::add_wedge(lm, md, sub(Q, P), 0.5);
        }
        out.push_back(lm);
    }
    return out;
}

/// Chen composition A_su = A_st + A_tu + 1/2 [X_st, X_tu] for abutting
/// intervals.
inline AreaMatrix chen_compose(const AreaMatrix& A_st, const AreaMatrix& A_tu, const Vec& X_st,
                               const Vec& X_tu) {
    if (std::abs(A_st.t - A_tu.s) > 1e-9 * std::max(1.0, std::abs(A_st.t)))
        throw std::invalid_argument("chen_compose: intervals do not abut");
    AreaMatrix out;
    out.s = A_st.s;
    out.t = A_tu.t;
    out.levels_used = std::max(A_st.levels_used, A_tu.levels_used);
    out.matrix = A_st.matrix + A_tu.matrix;
    Mat bracket = commutator(X_st, X_tu);
    bracket *= 0.5;
    out.matrix += bracket;
    return out;
}

/// Prefix areas A_{0,j} over the expanded cadlag polygon (jump legs split
/// into left-limit arrival and jump). Arbitrary pairs follow from the Chen
/// identity in O(1).
class AreaTable {
public:
    explicit AreaTable(const SamplePath& path) : path_(&path) {
        const std::size_t d = path.dim();
        prefix_.assign(path.size(), Mat(d, d));
        Mat acc(d, d);
        Vec base = path.values[0];
        Vec prev = path.values[0];
        for (std::size_t i = 1; i < path.size(); ++i) {
            if (const Jump* j = path.jump_at(i)) {
                areadetail::add_wedge(acc, sub(prev, base), sub(j->left, prev), 0.5);
                areadetail::add_wedge(acc, sub(j->left, base), j->delta(), 0.5);
            } else {
                areadetail::add_wedge(acc, sub(prev, base), sub(path.values[i], prev), 0.5);
            }
            prev = path.values[i];
            prefix_[i] = acc;
        }
    }

    /// A over grid index pair (i, j).
    Mat between(std::size_t i, std::size_t j) const {
        const SamplePath& p = *path_;
        Mat a = prefix_[j];
        a -= prefix_[i];
        // A_{i,j} = A_{0,j} - A_{0,i} - 1/2 [X_{0,i}, X_{i,j}]
        Mat br = commutator(sub(p.values[i], p.values[0]), sub(p.values[j], p.values[i]));
        br *= 0.5;
        a -= br;
        return a;
    }

private:
    const SamplePath* path_;
    std::vector<Mat> prefix_;
};

// ---------------------------------------------------------------------------
// Dyadic covers
// ---------------------------------------------------------------------------

struct DyadicPiece {
    int level = 0;          // 0 = whole interval, max_level = single cell
    std::size_t index = 0;  // position of the piece at its level
    std::size_t cell_lo = 0, cell_hi = 0;  // as grid cells at max_level
};

struct DyadicCover {
    double u = 0.0, v = 0.0;
    int max_level = 0;
    std::vector<DyadicPiece> pieces;  // ordered left to right
};

/// Greedy maximal dyadic decomposition of [u,v] inside [0,T] at resolution
/// 2^{-max_level} T: the largest dyadic interval first, then maximal dyadic
/// extensions to either side.
inline DyadicCover dyadic_cover(double u, double v, double T, int max_level) {
    if (!(0.0 <= u && u < v && v <= T)) throw std::invalid_argument("dyadic_cover: need 0 <= u < v <= T");
    if (max_level < 0 || max_level > 40) throw std::invalid_argument("dyadic_cover: bad max_level");
    const std::size_t cells = static_cast<std::size_t>(1) << max_level;
    auto snap = [&](double x) {
        return static_cast<std::size_t>(std::llround(x / T * static_cast<double>(cells)));
    };
    std::size_t a = snap(u), b = snap(v);
    if (a >= b) throw std::invalid_argument("dyadic_cover: interval below grid resolution");

    DyadicCover cover;
    cover.u = u;
    cover.v = v;
    cover.max_level = max_level;

    auto push_piece = [&](std::size_t lo, std::size_t size) {
        DyadicPiece piece;
        piece.cell_lo = lo;
        piece.cell_hi = lo + size;
        int lvl = max_level;
        std::size_t s = size;
        while (s > 1) {
            s >>= 1;
            --lvl;
        }
        piece.level = lvl;
        piece.index = lo / size;
        cover.pieces.push_back(piece);
    };

    // the largest aligned dyadic block inside [a, b]
    std::size_t best_size = 0, best_lo = 0;
    for (std::size_t size = 1; size <= b - a; size <<= 1) {
        const std::size_t m = (a + size - 1) / size;  // first aligned start >= a
        if (m * size + size <= b) {
            best_size = size;
            best_lo = m * size;
        }
    }
    push_piece(best_lo, best_size);

    // extend right: the largest aligned block starting at r
    std::size_t r = best_lo + best_size;
    while (r < b) {
        std::size_t align = r & (~r + 1);  // lowest set bit
        if (align == 0) align = cells;
        std::size_t size = 1;
        while ((size << 1) <= std::min(align, b - r)) size <<= 1;
        push_piece(r, size);
        r += size;
    }
    // extend left: the largest aligned block ending at l
    std::size_t l = best_lo;
    std::vector<DyadicPiece> left_pieces;
    while (l > a) {
        std::size_t align = l & (~l + 1);
        if (align == 0) align = cells;
        std::size_t size = 1;
        while ((size << 1) <= std::min(align, l - a)) size <<= 1;
        DyadicPiece piece;
        piece.cell_lo = l - size;
        piece.cell_hi = l;
        int lvl = max_level;
        std::size_t s = size;
        while (s > 1) {
            s >>= 1;
            --lvl;
        }
        piece.level = lvl;
        piece.index = (l - size) / size;
        left_pieces.push_back(piece);
        l -= size;
    }
    // assemble in left-to-right order
    std::vector<DyadicPiece> ordered(left_pieces.rbegin(), left_pieces.rend());
    for (const auto& piece : cover.pieces) ordered.push_back(piece);
    cover.pieces = std::move(ordered);
    return cover;
}

// ---------------------------------------------------------------------------
// Moment constants and Monte Carlo checks
// ---------------------------------------------------------------------------

/// The paper's constant C0(nu) for the first two coordinates:
/// int |x_1|^2 nu int |x_2|^2 nu - (int x_1 x_2 nu)^2, over |x| <= 1.
inline double area_c0(const LevyMeasureSpec& spec) {
    if (spec.dimension < 2) throw std::invalid_argument("area_c0: need dimension >= 2");
    const Mat m = measure_second_moments(spec);
    return m(0, 0) * m(1, 1) - m(0, 1) * m(0, 1);
}

/// Limit constant of the dyadic second-moment series:
/// E[A(n)^2] = (1/4) C0 (t-s)^2 sum_{m=1..n} 2^{-m}  ->  C(nu) = C0 / 4.
/// (Per triangle E[A_{k,m}^2] = 2 C0 2^{-2m} (t-s)^2, there are 2^{m-1} odd
/// k per level, and the outer 1/2 contributes 1/4.)
inline double area_moment_constant(double c0) { return 0.25 * c0; }

struct AreaMomentOptions {
    int levels = 10;          // dyadic depth of the sampling grid
    double cutoff = 1e-3;     // small-jump truncation for sampling
};

struct AreaMomentReport {
    double mean_sq = 0.0;   // Monte Carlo mean of (A^{12})^2
    double se_sq = 0.0;
    double mean = 0.0;      // Monte Carlo mean of A^{12}
    double se = 0.0;
    double c_nu = 0.0;      // C(nu) = C0_eff / 4, Gaussian part included
    double bound = 0.0;     // C(nu) (t-s)^2
    bool pass = false;
    std::size_t trials = 0;
};

/// Monte Carlo check of E[(A^{12}_{s,t})^2] <= C(nu)(t-s)^2 for a model in
/// the reduced form (no drift, no jumps above 1).
inline AreaMomentReport area_moment_check(const LevyModel& model, double s, double t,
                                          std::size_t trials, std::uint64_t seed,
                                          const AreaMomentOptions& opts = {}) {
    model.validate();
    if (model.dimension < 2) throw std::invalid_argument("area_moment_check: need dimension >= 2");
    if (!model.reduced_form())
        throw std::invalid_argument("area_moment_check: model must have zero drift and jumps <= 1");
    if (!(0.0 <= s && s < t)) throw std::invalid_argument("area_moment_check: need 0 <= s < t");

    // effective second-moment rates include the Gaussian part
    Mat rates = measure_second_moments(model.measure);
    rates += model.gaussian_cov;
    const double c0_eff = rates(0, 0) * rates(1, 1) - rates(0, 1) * rates(0, 1);

    AreaMomentReport rep;
    rep.trials = trials;
    rep.c_nu = area_moment_constant(c0_eff);
    rep.bound = rep.c_nu * (t - s) * (t - s);

    const std::size_t grid = (static_cast<std::size_t>(1) << opts.levels) + 1;
    // [s,t] must cover a whole number of grid cells; its dyadic depth is the
    // largest power of two dividing that count
    const double cells_f = (t - s) / t * static_cast<double>(grid - 1);
    const long long cells_st = std::llround(cells_f);
    if (cells_st < 1 || std::abs(cells_f - static_cast<double>(cells_st)) > 1e-9)
        throw std::invalid_argument("area_moment_check: s must sit on the sampling grid");
    int sub_levels = 0;
    for (long long c = cells_st; c % 2 == 0 && sub_levels < opts.levels; c /= 2) ++sub_levels;
    sub_levels = std::max(1, sub_levels);

    double sum = 0.0, sum2 = 0.0, sum_sq = 0.0, sum_sq2 = 0.0;
    for (std::size_t i = 0; i < trials; ++i) {
        SamplePath path = sample_path(model, t, grid, opts.cutoff, derive_seed(seed, "trial", i));
        const AreaMatrix A = area_dyadic(path, s, t, std::max(1, sub_levels));
        const double a = A.matrix(0, 1);
        sum += a;
        sum2 += a * a;
        sum_sq += a * a;
        sum_sq2 += a * a * a * a;
    }
    const double n = static_cast<double>(trials);
    rep.mean = sum / n;
    rep.se = std::sqrt(std::max(sum2 / n - rep.mean * rep.mean, 0.0) / n);
    rep.mean_sq = sum_sq / n;
    rep.se_sq = std::sqrt(std::max(sum_sq2 / n - rep.mean_sq * rep.mean_sq, 0.0) / n);
    rep.pass = rep.mean_sq <= rep.bound + 3.0 * rep.se_sq;
    return rep;
}

// ---------------------------------------------------------------------------
// (p/2)-variation of the area
// ---------------------------------------------------------------------------

struct AreaPvarBound {
    double bound = 0.0;       // C1 area term + C2 increment term
    double area_term = 0.0;
    double increment_term = 0.0;
    double c1 = 0.0, c2 = 0.0;
    double lower_estimate = 0.0;  // randomized-partition search (lower bound)
};

namespace areadetail {

inline double series_sum(double exponent) {
    // sum n^{-exponent}, exponent > 1; head sum plus integral tail
    double s = 0.0;
    const int N = 20000;
    for (int n = 1; n <= N; ++n) s += std::pow(static_cast<double>(n), -exponent);
    s += std::pow(static_cast<double>(N), 1.0 - exponent) / (exponent - 1.0);
    return s;
}

}  // namespace areadetail

/// Holder-weighted dyadic bound on sup_pi sum |A|^{p/2} plus a
/// randomized-partition direct lower estimate. Requires a grid resolving
/// 2^max_level cells.
inline AreaPvarBound area_pvar_bound(const SamplePath& path, double p, double gamma, int max_level,
                                     std::uint64_t seed = 1, std::size_t proposals = 10000) {
    if (!(p > 2.0)) throw std::invalid_argument("area_pvar_bound: need p > 2");
    if (!(gamma > p - 1.0))
        throw std::invalid_argument("area_pvar_bound: Holder exponent invalid (need gamma > p - 1)");
    const std::size_t cells = path.size() - 1;
    const std::size_t need = static_cast<std::size_t>(1) << max_level;
    if (cells % need != 0) throw std::invalid_argument("area_pvar_bound: grid does not resolve max_level");

    AreaTable table(path);
    const double T = path.horizon();
    const double s_half = p / 2.0;

    AreaPvarBound out;
    out.c1 = std::pow(2.0, s_half - 1.0) *
             std::pow(areadetail::series_sum(gamma / (s_half - 1.0)), s_half - 1.0);
    out.c2 = std::pow(2.0, s_half - 2.0) * std::pow(areadetail::series_sum(gamma / (p - 1.0)), p - 1.0);

    for (int n = 1; n <= max_level; ++n) {
        const std::size_t pieces = static_cast<std::size_t>(1) << n;
        const std::size_t stride = cells / pieces;
        double a_sum = 0.0, x_sum = 0.0;
        for (std::size_t i = 0; i < pieces; ++i) {
            const std::size_t lo = i * stride, hi = (i + 1) * stride;
            a_sum += std::pow(frobenius(table.between(lo, hi)), s_half);
            x_sum += std::pow(dist2(path.values[hi], path.values[lo]), p);
        }
        const double w = std::pow(static_cast<double>(n), gamma);
        out.area_term += w * a_sum;
        out.increment_term += w * x_sum;
    }
    out.bound = out.c1 * out.area_term + out.c2 * out.increment_term;

    // direct lower estimate: simulated annealing over partition points with
    // incremental toggle moves (only the adjacent terms change)
    auto piece = [&](std::size_t lo, std::size_t hi) {
        return std::pow(frobenius(table.between(lo, hi)), s_half);
    };
    auto energy = [&](const std::vector<std::size_t>& part) {
        double e = 0.0;
        for (std::size_t k = 1; k < part.size(); ++k) e += piece(part[k - 1], part[k]);
        return e;
    };
    double best = 0.0;
    std::vector<std::size_t> seed_part{0, cells};
    for (int n = 0; n <= max_level; ++n) {
        const std::size_t pieces = static_cast<std::size_t>(1) << n;
        const std::size_t stride = cells / pieces;
        std::vector<std::size_t> part;
        for (std::size_t i = 0; i <= pieces; ++i) part.push_back(i * stride);
        const double e = energy(part);
        if (e > best) {
            best = e;
            seed_part = part;
        }
    }
    Rng rng(seed, "anneal");
    std::set<std::size_t> cur(seed_part.begin(), seed_part.end());
    double cur_e = best;
    double temp = 0.25 * std::max(cur_e, 1e-12);
    for (std::size_t it = 0; it < proposals; ++it) {
        const std::size_t pos = 1 + (rng.next_u64() % (cells - 1));
        auto where = cur.lower_bound(pos);
        double delta;
        bool removing;
        if (where != cur.end() && *where == pos) {
            if (cur.size() <= 2) continue;
            const std::size_t right = *std::next(where);
            const std::size_t left = *std::prev(where);
            delta = piece(left, right) - piece(left, pos) - piece(pos, right);
            removing = true;
        } else {
            const std::size_t right = *where;
            const std::size_t left = *std::prev(where);
            delta = piece(left, pos) + piece(pos, right) - piece(left, right);
            removing = false;
        }
        if (delta >= 0.0 || rng.uniform() < std::exp(delta / std::max(temp, 1e-300))) {
            if (removing)
                cur.erase(pos);
            else
                cur.insert(pos);
            cur_e += delta;
            if (cur_e > best) best = cur_e;
        }
        temp *= 0.9995;
    }
    out.lower_estimate = best;
    (void)T;
    return out;
}

}  // namespace pathwise
