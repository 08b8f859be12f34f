#pragma once

// Strong p-variation of discrete cadlag paths. Partitions range over the
// path's own data: its samples plus the registered left limits at jump times
// (a partition of the underlying interval can sample arbitrarily close to a
// jump, so the left limit is attainable). Continuum refinement between
// samples is out of scope. pvar_exact is a dynamic program that is exact for
// p >= 1 because merging increments never decreases the p-sum; pvar_brute
// enumerates every subset and serves as the oracle at small sizes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "pathwise/sample_path.hpp"

namespace pathwise {

struct PVarResult {
    double value = 0.0;                  // ||x||_p over the window
    std::vector<std::size_t> witness;    // indices into the expanded sequence
};

/// The expanded point sequence of an index window [lo, hi]: every sample
/// value in order, with the left limit inserted ahead of each jump row in
/// (lo, hi]. `origin[k]` is the sample index a point belongs to.
struct ExpandedPoints {
    std::vector<Vec> pts;
    std::vector<std::size_t> origin;
};

inline ExpandedPoints expand_points(const SamplePath& path, std::size_t lo, std::size_t hi) {
    ExpandedPoints e;
    for (std::size_t i = lo; i <= hi; ++i) {
        if (i > lo) {
            if (const Jump* j = path.jump_at(i)) {
                e.pts.push_back(j->left);
                e.origin.push_back(i);
            }
        }
        e.pts.push_back(path.values[i]);
        e.origin.push_back(i);
    }
    return e;
}

namespace detail {

// |u|^p, i.e. exp(p log u); u is a norm so u >= 0, and the zero guard keeps
// the log path out of pow's domain edge.
inline double pow_p(double u, double p) {
    if (u == 0.0) return 0.0;
    return std::pow(u, p);
}

inline double pt_dist(const std::vector<Vec>& pts, std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t k = 0; k < pts[i].size(); ++k) {
        const double d = pts[j][k] - pts[i][k];
        s += d * d;
    }
    return std::sqrt(s);
}

// DP over a candidate subsequence of the expanded points (ascending,
// first/last included). Ties prefer the smaller predecessor so the witness
// is deterministic.
inline PVarResult pvar_dp(const std::vector<Vec>& pts, double p, const std::vector<std::size_t>& cand) {
    const std::size_t m = cand.size();
    std::vector<double> best(m, 0.0);
    std::vector<std::size_t> prev(m, 0);
    for (std::size_t j = 1; j < m; ++j) {
        double bj = -1.0;
        std::size_t pj = 0;
        for (std::size_t i = 0; i < j; ++i) {
            const double v = best[i] + pow_p(pt_dist(pts, cand[i], cand[j]), p);
            if (v > bj) {
                bj = v;
                pj = i;
            }
        }
        best[j] = bj;
        prev[j] = pj;
    }
    PVarResult r;
    r.value = std::pow(best[m - 1], 1.0 / p);
    std::size_t k = m - 1;
    r.witness.push_back(cand[k]);
    while (k != 0) {
        k = prev[k];
        r.witness.push_back(cand[k]);
    }
    std::reverse(r.witness.begin(), r.witness.end());
    return r;
}

// For scalar paths only points where the direction changes (or endpoints)
// can appear in an optimal partition: any other chosen point can be moved to
// the enclosing monotone run's endpoint without decreasing the p-sum.
inline std::vector<std::size_t> scalar_candidates(const std::vector<Vec>& pts) {
    std::vector<std::size_t> cand;
    cand.push_back(0);
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        const double a = pts[i][0] - pts[i - 1][0];
        const double b = pts[i + 1][0] - pts[i][0];
        if (a * b <= 0.0) cand.push_back(i);
    }
    cand.push_back(pts.size() - 1);
    return cand;
}

inline PVarResult pvar_points(const std::vector<Vec>& pts, double p) {
    if (pts.size() == 1) return PVarResult{0.0, {0}};
    std::vector<std::size_t> cand;
    if (pts.front().size() == 1) {
        cand = scalar_candidates(pts);
    } else {
        cand.resize(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) cand[i] = i;
    }
    return pvar_dp(pts, p, cand);
}

}  // namespace detail

/// Exact strong p-variation over the index window [lo, hi] (inclusive).
inline PVarResult pvar_exact_range(const SamplePath& path, double p, std::size_t lo, std::size_t hi) {
    if (p < 1.0) throw std::invalid_argument("pvar: p must be >= 1");
    if (path.size() == 0) throw std::invalid_argument("pvar: empty path");
    if (lo > hi || hi >= path.size()) throw std::invalid_argument("pvar: bad index window");
    return detail::pvar_points(expand_points(path, lo, hi).pts, p);
}

inline PVarResult pvar_exact(const SamplePath& path, double p) {
    return pvar_exact_range(path, p, 0, path.size() - 1);
}

/// Exhaustive-subset oracle; rejects inputs with more than 14 expanded
/// points.
inline PVarResult pvar_brute(const SamplePath& path, double p) {
    if (p < 1.0) throw std::invalid_argument("pvar: p must be >= 1");
    if (path.size() == 0) throw std::invalid_argument("pvar: empty path");
    const auto e = expand_points(path, 0, path.size() - 1);
    const std::size_t n = e.pts.size();
    if (n > 14) throw std::invalid_argument("pvar_brute: oracle scale exceeded");
    if (n == 1) return PVarResult{0.0, {0}};
    const std::size_t interior = n - 2;
    const std::size_t total = static_cast<std::size_t>(1) << interior;
    double best = -1.0;
    std::size_t best_mask = 0;
    for (std::size_t mask = 0; mask < total; ++mask) {
        double sum = 0.0;
        std::size_t prev = 0;
        for (std::size_t b = 0; b < interior; ++b) {
            if (mask & (static_cast<std::size_t>(1) << b)) {
                sum += detail::pow_p(detail::pt_dist(e.pts, prev, b + 1), p);
                prev = b + 1;
            }
        }
        sum += detail::pow_p(detail::pt_dist(e.pts, prev, n - 1), p);
        if (sum > best) {
            best = sum;
            best_mask = mask;
        }
    }
    PVarResult r;
    r.value = std::pow(best, 1.0 / p);
    r.witness.push_back(0);
    for (std::size_t b = 0; b < interior; ++b)
        if (best_mask & (static_cast<std::size_t>(1) << b)) r.witness.push_back(b + 1);
    r.witness.push_back(n - 1);
    return r;
}

/// p-sum evaluated on a chain of expanded-point indices, to 1/p. Used to
/// audit witnesses.
inline double pvar_on_partition(const SamplePath& path, double p, const std::vector<std::size_t>& part) {
    const auto e = expand_points(path, 0, path.size() - 1);
    double s = 0.0;
    for (std::size_t k = 1; k < part.size(); ++k)
        s += detail::pow_p(detail::pt_dist(e.pts, part[k - 1], part[k]), p);
    return std::pow(s, 1.0 / p);
}

/// One DP sweep from a fixed left sample index: returns ||x||_{p,[s,j]}^p
/// for every sample j >= s. This is what makes all-pairs control tables
/// affordable.
inline std::vector<double> pvar_prefix_from(const SamplePath& path, double p, std::size_t s) {
    if (p < 1.0) throw std::invalid_argument("pvar: p must be >= 1");
    const std::size_t n = path.size();
    if (s >= n) throw std::invalid_argument("pvar: bad start index");
    const auto e = expand_points(path, s, n - 1);
    const std::size_t m = e.pts.size();
    std::vector<double> best(m, 0.0);
    for (std::size_t j = 1; j < m; ++j) {
        double bj = 0.0;
        for (std::size_t i = 0; i < j; ++i) {
            const double v = best[i] + detail::pow_p(detail::pt_dist(e.pts, i, j), p);
            if (v > bj) bj = v;
        }
        best[j] = bj;
    }
    // per sample index, the DP value at its right-limit point
    std::vector<double> out(n - s, 0.0);
    for (std::size_t k = 0; k < m; ++k) out[e.origin[k] - s] = best[k];
    return out;
}

/// Control function omega(s,t) = ||x||_{p,[s,t]}^p on the path's grid.
/// Superadditive with vanishing diagonal. Rows are computed lazily, one DP
/// sweep per queried left index.
class ControlFunction {
public:
    ControlFunction() = default;
    ControlFunction(SamplePath path, double p)
        : path_(std::make_shared<SamplePath>(std::move(path))), p_(p),
          rows_(std::make_shared<std::map<std::size_t, std::vector<double>>>()) {
        if (p < 1.0) throw std::invalid_argument("pvar_control: p must be >= 1");
    }

    double p() const { return p_; }
    std::size_t grid_size() const { return path_ ? path_->size() : 0; }
    const SamplePath& path() const { return *path_; }

    /// omega over grid index pair (i <= j).
    double operator()(std::size_t i, std::size_t j) const {
        if (!path_) throw std::logic_error("ControlFunction: empty");
        if (j < i) throw std::invalid_argument("ControlFunction: j < i");
        if (i == j) return 0.0;
        auto it = rows_->find(i);
        if (it == rows_->end()) it = rows_->emplace(i, pvar_prefix_from(*path_, p_, i)).first;
        return it->second[j - i];
    }

private:
    std::shared_ptr<SamplePath> path_;
    double p_ = 1.0;
    std::shared_ptr<std::map<std::size_t, std::vector<double>>> rows_;
};

inline ControlFunction pvar_control(const SamplePath& path, double p) {
    return ControlFunction(path, p);
}

}  // namespace pathwise
