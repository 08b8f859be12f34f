#pragma once

// Young integration of one discrete path against another under the
// 1/p + 1/q > 1 condition. Left-point Riemann-Stieltjes sums on dyadic
// coarsenings of the shared grid; the finest-mesh sum is the value (the
// sampled grid is ground truth, so "convergence" means stabilisation across
// coarsenings). The recorded error bound is the Young-Loeve constant
// 2^{1/p+1/q} zeta(1/p+1/q) times the p- and q-variation norms.

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pathwise/pvar.hpp"
#include "pathwise/sample_path.hpp"

namespace pathwise {

struct YoungEstimate {
    Mat value;                                          // rows: dim f, cols: dim g
    std::vector<std::pair<std::size_t, Mat>> mesh_levels;  // (cells, partial sum)
    double error_bound = 0.0;
};

namespace youngdetail {

inline double zeta(double s) {
    // Euler-Maclaurin with a short head sum; plenty for a recorded bound
    const int N = 64;
    double sum = 0.0;
    for (int n = 1; n <= N; ++n) sum += std::pow(static_cast<double>(n), -s);
    sum += std::pow(static_cast<double>(N), 1.0 - s) / (s - 1.0) - 0.5 * std::pow(static_cast<double>(N), -s);
    return sum;
}

inline Mat left_sum(const SamplePath& f, const SamplePath& g, const std::vector<std::size_t>& idx) {
    Mat acc(f.dim(), g.dim());
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
        const Vec& fv = f.values[idx[k]];
        const Vec& g0 = g.values[idx[k]];
        const Vec& g1 = g.values[idx[k + 1]];
        for (std::size_t a = 0; a < fv.size(); ++a)
            for (std::size_t b = 0; b < g0.size(); ++b) acc(a, b) += fv[a] * (g1[b] - g0[b]);
    }
    return acc;
}

inline std::vector<std::size_t> dyadic_indices(std::size_t n, std::size_t pieces) {
    std::vector<std::size_t> idx;
    idx.reserve(pieces + 1);
    std::size_t last = static_cast<std::size_t>(-1);
    for (std::size_t k = 0; k <= pieces; ++k) {
        const std::size_t i =
            static_cast<std::size_t>(std::llround(static_cast<double>(k) * static_cast<double>(n - 1) /
                                                  static_cast<double>(pieces)));
        if (i != last) idx.push_back(i);
        last = i;
    }
    return idx;
}

}  // namespace youngdetail

/// Integrate f against g over the index window [lo, hi] of their shared
/// grid.
inline YoungEstimate young_integral_range(const SamplePath& f, const SamplePath& g, double p, double q,
                                          std::size_t lo, std::size_t hi, bool with_error_bound = true) {
    if (p < 1.0 || q < 1.0) throw std::invalid_argument("young_integral: p, q must be >= 1");
    if (1.0 / p + 1.0 / q <= 1.0) throw std::invalid_argument("Young condition violated");
    if (f.size() != g.size() || f.times != g.times)
        throw std::invalid_argument("young_integral: paths must share a common grid");
    if (lo >= hi || hi >= f.size()) throw std::invalid_argument("young_integral: bad index window");
    for (const Jump& jf : f.jumps)
        for (const Jump& jg : g.jumps)
            if (jf.index == jg.index && jf.index > lo && jf.index <= hi)
                throw std::invalid_argument("young_integral: common discontinuities");

    YoungEstimate out;
    const std::size_t cells = hi - lo;
    std::vector<std::size_t> window(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) window[i] = lo + i;

    // dyadic coarsenings from a single cell down to the full grid
    for (std::size_t pieces = 1;; pieces *= 2) {
        std::vector<std::size_t> idx;
        if (pieces >= cells) {
            idx = window;
        } else {
            for (std::size_t k : youngdetail::dyadic_indices(cells + 1, pieces)) idx.push_back(lo + k);
        }
        out.mesh_levels.emplace_back(idx.size() - 1, youngdetail::left_sum(f, g, idx));
        if (pieces >= cells) break;
    }
    out.value = out.mesh_levels.back().second;

    if (with_error_bound) {
        const double s = 1.0 / p + 1.0 / q;
        const double c = std::pow(2.0, s) * youngdetail::zeta(s);
        out.error_bound = c * pvar_exact_range(f, p, lo, hi).value * pvar_exact_range(g, q, lo, hi).value;
    }
    return out;
}

inline YoungEstimate young_integral(const SamplePath& f, const SamplePath& g, double p, double q,
                                    bool with_error_bound = true) {
    return young_integral_range(f, g, p, q, 0, f.size() - 1, with_error_bound);
}

}  // namespace pathwise
