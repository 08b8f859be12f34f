#pragma once

// Levy driving paths: drift + Gaussian part + jumps. Small jumps below the
// cutoff epsilon are dropped and compensated; jumps in (epsilon, 1] are
// compensated compound-Poisson; jumps above 1 are added as they come. Jump
// times are drawn exactly (uniform order statistics) and merged into the
// sampling grid, so every jump above the cutoff sits in the registry with
// its true time.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathwise/linalg.hpp"
#include "pathwise/rng.hpp"
#include "pathwise/sample_path.hpp"

namespace pathwise {

// ---------------------------------------------------------------------------
// Measure specification
// ---------------------------------------------------------------------------

enum class MeasureKind { zero, alpha_stable, compound_poisson, eta_example, tabulated };

struct Atom {
    double weight = 0.0;
    Vec value;
};

struct LevyMeasureSpec {
    MeasureKind kind = MeasureKind::zero;
    int dimension = 1;

    // alpha_stable: radial density scale * r^{-1-alpha}, isotropic direction
    double alpha = 1.5;
    double scale = 1.0;

    // compound_poisson: total rate times a jump distribution
    double rate = 0.0;
    double ring_r0 = 0.0, ring_r1 = 0.0;  // uniform ring radius range (0 => atoms)
    std::vector<Atom> atoms;

    // eta_example: number of bands
    int m_max = 40;
    // eta/tabulated embedding into d >= 2: per-coordinate or isotropic radial
    bool isotropic = false;

    // tabulated: piecewise-linear radial density (r ascending, r > 0)
    std::vector<double> table_r, table_g;
};

inline LevyMeasureSpec zero_measure(int dim) {
    LevyMeasureSpec s;
    s.kind = MeasureKind::zero;
    s.dimension = dim;
    return s;
}

inline LevyMeasureSpec stable_measure(double alpha, double scale, int dim) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("stable_measure: alpha must be in (0,2)");
    if (scale <= 0.0) throw std::invalid_argument("stable_measure: scale must be positive");
    LevyMeasureSpec s;
    s.kind = MeasureKind::alpha_stable;
    s.dimension = dim;
    s.alpha = alpha;
    s.scale = scale;
    return s;
}

inline LevyMeasureSpec compound_poisson_ring(double rate, double r0, double r1, int dim) {
    if (rate <= 0.0) throw std::invalid_argument("compound_poisson: rate must be positive");
    if (!(0.0 <= r0 && r0 < r1)) throw std::invalid_argument("compound_poisson: bad radius range");
    LevyMeasureSpec s;
    s.kind = MeasureKind::compound_poisson;
    s.dimension = dim;
    s.rate = rate;
    s.ring_r0 = r0;
    s.ring_r1 = r1;
    return s;
}

inline LevyMeasureSpec compound_poisson_atoms(double rate, std::vector<Atom> atoms, int dim) {
    if (rate <= 0.0) throw std::invalid_argument("compound_poisson: rate must be positive");
    if (atoms.empty()) throw std::invalid_argument("compound_poisson: no atoms");
    double w = 0.0;
    for (auto& a : atoms) {
        if (a.weight <= 0.0 || static_cast<int>(a.value.size()) != dim)
            throw std::invalid_argument("compound_poisson: bad atom");
        w += a.weight;
    }
    for (auto& a : atoms) a.weight /= w;
    LevyMeasureSpec s;
    s.kind = MeasureKind::compound_poisson;
    s.dimension = dim;
    s.rate = rate;
    s.atoms = std::move(atoms);
    return s;
}

inline LevyMeasureSpec eta_measure(int m_max, int dim = 1, bool isotropic = false) {
    if (m_max < 1) throw std::invalid_argument("eta_measure: m_max must be >= 1");
    LevyMeasureSpec s;
    s.kind = MeasureKind::eta_example;
    s.dimension = dim;
    s.m_max = m_max;
    s.isotropic = isotropic;
    return s;
}

inline LevyMeasureSpec tabulated_measure(std::vector<double> r, std::vector<double> g, int dim,
                                         bool isotropic = true) {
    if (r.size() != g.size() || r.size() < 2) throw std::invalid_argument("tabulated_measure: bad table");
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] <= 0.0 || g[i] < 0.0 || (i > 0 && r[i] <= r[i - 1]))
            throw std::invalid_argument("tabulated_measure: table must have ascending r > 0, g >= 0");
    }
    LevyMeasureSpec s;
    s.kind = MeasureKind::tabulated;
    s.dimension = dim;
    s.table_r = std::move(r);
    s.table_g = std::move(g);
    s.isotropic = isotropic;
    return s;
}

// ---------------------------------------------------------------------------
// The eta example measure: nu_k(dx) = |x|^{-3+1/k} dx on J_k, both signs,
// J_k = ((k+1)^{-3(k+1)}, k^{-3k}]. Bands tile ((m+1)^{-3(m+1)}, 1].
// ---------------------------------------------------------------------------

namespace etadetail {

inline double band_lower(int k) { return std::exp(-3.0 * (k + 1) * std::log(static_cast<double>(k + 1))); }
inline double band_upper(int k) {
    return k == 1 ? 1.0 : std::exp(-3.0 * k * std::log(static_cast<double>(k)));
}

// integral of r^{alpha - 3 + 1/k} dr over (lo, hi], evaluated in log space;
// saturates near 1e300 instead of overflowing.
inline double band_integral(int k, double alpha, double lo, double hi) {
    if (!(lo < hi)) return 0.0;
    const double e = alpha - 2.0 + 1.0 / static_cast<double>(k);
    const double llo = std::log(lo), lhi = std::log(hi);
    if (std::abs(e) < 1e-14) return lhi - llo;
    auto powe = [&](double lr) {
        const double x = e * lr;
        if (x > 690.0) return 1e300;
        return std::exp(x);
    };
    const double v = (powe(lhi) - powe(llo)) / e;
    return std::min(v, 1e300);
}

}  // namespace etadetail

/// Partial sums of int |x|^alpha eta_m(dx): closed-form bracket evaluation
/// band by band. Bounded in m for alpha = 2, unbounded for alpha < 2.
/// Values saturate near 1e300.
inline double eta_partial_integrals(int m, double alpha) {
    if (m < 1) throw std::invalid_argument("eta_partial_integrals: m must be >= 1");
    double sum = 0.0;
    for (int k = 1; k <= m; ++k) {
        const double lo = etadetail::band_lower(k), hi = etadetail::band_upper(k);
        sum += 2.0 * etadetail::band_integral(k, alpha, lo, hi);
        if (sum >= 1e300) return 1e300;
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Measure analytics: masses, ring mean (compensator), second moments
// ---------------------------------------------------------------------------

namespace measdetail {

// tabulated densities: int r^alpha g(r) dr over [a,b] by composite Simpson on
// each table segment
inline double tab_integral(const LevyMeasureSpec& s, double alpha, double a, double b) {
    if (!(a < b)) return 0.0;
    auto g_at = [&](double r) {
        const auto& R = s.table_r;
        if (r <= R.front() || r >= R.back()) {
            if (r == R.front()) return s.table_g.front();
            if (r == R.back()) return s.table_g.back();
            return 0.0;
        }
        std::size_t i = std::upper_bound(R.begin(), R.end(), r) - R.begin() - 1;
        const double w = (r - R[i]) / (R[i + 1] - R[i]);
        return (1.0 - w) * s.table_g[i] + w * s.table_g[i + 1];
    };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < s.table_r.size(); ++i) {
        const double lo = std::max(a, s.table_r[i]);
        const double hi = std::min(b, s.table_r[i + 1]);
        if (!(lo < hi)) continue;
        const int n = 64;
        const double h = (hi - lo) / n;
        double acc = 0.0;
        for (int j = 0; j <= n; ++j) {
            const double r = lo + j * h;
            const double f = std::pow(r, alpha) * g_at(r);
            const double w = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
            acc += w * f;
        }
        total += acc * h / 3.0;
    }
    return total;
}

// int_{a<|x|<=b} |x|^alpha nu(dx) along the radial profile (both signs /
// full sphere already included)
inline double radial_integral(const LevyMeasureSpec& s, double alpha, double a, double b) {
    if (!(a < b)) return 0.0;
    switch (s.kind) {
        case MeasureKind::zero:
            return 0.0;
        case MeasureKind::alpha_stable: {
            const double e = alpha - s.alpha;
            if (b == std::numeric_limits<double>::infinity()) {
                if (e >= 0.0) return 1e300;
                return s.scale * (-std::pow(a, e)) / e;
            }
            if (std::abs(e) < 1e-14) return s.scale * std::log(b / a);
            return s.scale * (std::pow(b, e) - std::pow(a, e)) / e;
        }
        case MeasureKind::compound_poisson: {
            if (!s.atoms.empty()) {
                double acc = 0.0;
                for (const auto& at : s.atoms) {
                    const double r = norm2(at.value);
                    if (r > a && r <= b) acc += at.weight * std::pow(r, alpha);
                }
                return s.rate * acc;
            }
            const double lo = std::max(a, s.ring_r0);
            const double hi = std::min(b, s.ring_r1);
            if (!(lo < hi)) return 0.0;
            const double width = s.ring_r1 - s.ring_r0;
            const double e = alpha + 1.0;
            return s.rate * (std::pow(hi, e) - std::pow(lo, e)) / (e * width);
        }
        case MeasureKind::eta_example: {
            double acc = 0.0;
            for (int k = 1; k <= s.m_max; ++k) {
                const double lo = std::max(a, etadetail::band_lower(k));
                const double hi = std::min(b, etadetail::band_upper(k));
                acc += 2.0 * etadetail::band_integral(k, alpha, lo, hi);
                if (acc >= 1e300) return 1e300;
            }
            return acc;
        }
        case MeasureKind::tabulated:
            return tab_integral(s, alpha, a, std::min(b, s.table_r.back()));
    }
    return 0.0;
}

}  // namespace measdetail

/// nu({a < |x| <= b}).
inline double measure_mass(const LevyMeasureSpec& s, double a, double b) {
    return measdetail::radial_integral(s, 0.0, a, b);
}

/// int_{a<|x|<=b} x nu(dx); zero for the symmetric kinds, generally nonzero
/// for atom lists.
inline Vec measure_mean_ring(const LevyMeasureSpec& s, double a, double b) {
    Vec m(s.dimension, 0.0);
    if (s.kind == MeasureKind::compound_poisson && !s.atoms.empty()) {
        for (const auto& at : s.atoms) {
            const double r = norm2(at.value);
            if (r > a && r <= b) axpy(s.rate * at.weight, at.value, m);
        }
    }
    return m;
}

/// Second-moment matrix int_{|x|<=1} x_i x_j nu(dx).
inline Mat measure_second_moments(const LevyMeasureSpec& s) {
    const int d = s.dimension;
    Mat m(d, d);
    if (s.kind == MeasureKind::zero) return m;
    if (s.kind == MeasureKind::compound_poisson && !s.atoms.empty()) {
        for (const auto& at : s.atoms) {
            if (norm2(at.value) > 1.0) continue;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) m(i, j) += s.rate * at.weight * at.value[i] * at.value[j];
        }
        return m;
    }
    const double r2 = measdetail::radial_integral(s, 2.0, 0.0, 1.0);
    const bool per_coordinate = (s.kind == MeasureKind::eta_example && !s.isotropic);
    for (int i = 0; i < d; ++i) m(i, i) = per_coordinate ? r2 : r2 / d;
    return m;
}

/// Numerical check that int (|x|^2 ^ 1) nu(dx) is finite at the working
/// truncation.
inline void validate_measure(const LevyMeasureSpec& s) {
    const double small = measdetail::radial_integral(s, 2.0, 0.0, 1.0);
    const double big = measure_mass(s, 1.0, std::numeric_limits<double>::infinity());
    if (!(small < 1e300) || !(big < 1e300))
        throw std::invalid_argument("LevyMeasureSpec: int (|x|^2 ^ 1) nu(dx) diverges");
}

// ---------------------------------------------------------------------------
// Blumenthal-Getoor index
// ---------------------------------------------------------------------------

enum class IndexStatus { ok, indeterminate };

struct BgIndex {
    double value = 0.0;
    IndexStatus status = IndexStatus::ok;
};

struct BgIndexOptions {
    double divergence_threshold = 1e6;
    int eta_bands = 400;       // truncation depth for the eta probe
    int ladder_steps = 16;     // epsilon ladder for tabulated probes
    double tol = 1e-3;         // bisection width
};

namespace bgdetail {

enum class Probe { divergent, convergent, ambiguous };

inline Probe probe_eta(const LevyMeasureSpec& s, double alpha, const BgIndexOptions& o) {
    double sum = 0.0, last = 0.0;
    const int depth = std::max(s.m_max, o.eta_bands);
    for (int k = 1; k <= depth; ++k) {
        last = 2.0 * etadetail::band_integral(k, alpha, etadetail::band_lower(k), etadetail::band_upper(k));
        sum += last;
        if (sum > o.divergence_threshold) return Probe::divergent;
    }
    if (last <= 1e-9 * std::max(1.0, sum)) return Probe::convergent;
    return Probe::ambiguous;
}

// Truncated integrals on a shrinking cutoff ladder; classified by whether
// the values blow past the threshold, are still growing per ladder step at
// the bottom of the table, or have flattened out.
inline Probe probe_tabulated(const LevyMeasureSpec& s, double alpha, const BgIndexOptions& o) {
    const double rmin = s.table_r.front();
    double prev = 0.0;
    double val = 0.0;
    for (int j = 0; j <= o.ladder_steps; ++j) {
        const double eps = std::pow(rmin, static_cast<double>(j) / o.ladder_steps);
        val = measdetail::radial_integral(s, alpha, eps, 1.0);
        if (val > o.divergence_threshold) return Probe::divergent;
        if (j == o.ladder_steps) {
            const double growth = (val - prev) / std::max(val, 1e-300);
            if (growth > 0.10) return Probe::divergent;
            if (growth < 0.01) return Probe::convergent;
            return Probe::ambiguous;
        }
        prev = val;
    }
    return Probe::ambiguous;
}

}  // namespace bgdetail

/// beta = inf{ alpha > 0 : int_{|y|<=1} |y|^alpha nu(dy) < infinity }.
/// Analytic for stable and compound Poisson; bisection with truncated
/// integral growth detection otherwise.
inline BgIndex bg_index(const LevyMeasureSpec& s, const BgIndexOptions& opts = {}) {
    BgIndex out;
    switch (s.kind) {
        case MeasureKind::zero:
        case MeasureKind::compound_poisson:
            out.value = 0.0;
            return out;
        case MeasureKind::alpha_stable:
            out.value = s.alpha;
            return out;
        default:
            break;
    }
    auto probe = [&](double alpha) {
        return s.kind == MeasureKind::eta_example ? bgdetail::probe_eta(s, alpha, opts)
                                                  : bgdetail::probe_tabulated(s, alpha, opts);
    };
    bool ambiguous = false;
    double lo = 0.0, hi = 2.0;
    if (probe(hi) == bgdetail::Probe::divergent) {
        // index at the upper edge of the admissible range
        out.value = 2.0;
        return out;
    }
    while (hi - lo > opts.tol) {
        const double mid = 0.5 * (lo + hi);
        const auto r = probe(mid);
        if (r == bgdetail::Probe::divergent) {
            lo = mid;
        } else {
            if (r == bgdetail::Probe::ambiguous) ambiguous = true;
            hi = mid;
        }
    }
    out.value = 0.5 * (lo + hi);
    out.status = ambiguous ? IndexStatus::indeterminate : IndexStatus::ok;
    return out;
}

// ---------------------------------------------------------------------------
// Model and path sampling
// ---------------------------------------------------------------------------

struct LevyModel {
    int dimension = 1;
    Vec drift;           // per unit time
    Mat gaussian_cov;    // d x d, symmetric PSD
    LevyMeasureSpec measure;
    // jumps above this threshold are uncompensated; fixed at 1
    static constexpr double big_jump_threshold = 1.0;

    void validate() const {
        if (dimension < 1) throw std::invalid_argument("LevyModel: dimension must be >= 1");
        if (static_cast<int>(drift.size()) != dimension) throw std::invalid_argument("LevyModel: drift size");
        if (gaussian_cov.rows != static_cast<std::size_t>(dimension) ||
            gaussian_cov.cols != static_cast<std::size_t>(dimension))
            throw std::invalid_argument("LevyModel: covariance shape");
        cholesky_psd(gaussian_cov);  // throws when not PSD
        if (measure.dimension != dimension) throw std::invalid_argument("LevyModel: measure dimension");
        validate_measure(measure);
    }

    /// The reduced form used by the moment estimates: no drift, no jumps
    /// above 1.
    bool reduced_form() const {
        for (double d : drift)
            if (d != 0.0) return false;
        return measure_mass(measure, 1.0, std::numeric_limits<double>::infinity()) == 0.0;
    }
};

inline LevyModel brownian_model(int dim) {
    LevyModel m;
    m.dimension = dim;
    m.drift = Vec(dim, 0.0);
    m.gaussian_cov = Mat::identity(dim);
    m.measure = zero_measure(dim);
    return m;
}

namespace sampledetail {

inline Vec unit_direction(Rng& rng, int d) {
    if (d == 1) return Vec{rng.uniform() < 0.5 ? -1.0 : 1.0};
    while (true) {
        Vec v(d);
        double n2 = 0.0;
        for (auto& x : v) {
            x = rng.normal();
            n2 += x * x;
        }
        if (n2 > 1e-20) {
            const double inv = 1.0 / std::sqrt(n2);
            for (auto& x : v) x *= inv;
            return v;
        }
    }
}

// draw a jump conditioned on |x| in (a, b]
inline Vec sample_jump(const LevyMeasureSpec& s, Rng& rng, double a, double b) {
    switch (s.kind) {
        case MeasureKind::alpha_stable: {
            double r;
            const double al = s.alpha;
            if (b == std::numeric_limits<double>::infinity()) {
                r = a * std::pow(rng.uniform(), -1.0 / al);
            } else {
                const double pa = std::pow(a, -al), pb = std::pow(b, -al);
                r = std::pow(pa - rng.uniform() * (pa - pb), -1.0 / al);
            }
            return scaled(unit_direction(rng, s.dimension), r);
        }
        case MeasureKind::compound_poisson: {
            if (!s.atoms.empty()) {
                double total = 0.0;
                for (const auto& at : s.atoms) {
                    const double r = norm2(at.value);
                    if (r > a && r <= b) total += at.weight;
                }
                double u = rng.uniform() * total;
                for (const auto& at : s.atoms) {
                    const double r = norm2(at.value);
                    if (r > a && r <= b) {
                        u -= at.weight;
                        if (u <= 0.0) return at.value;
                    }
                }
                return s.atoms.back().value;
            }
            const double lo = std::max(a, s.ring_r0);
            const double hi = std::min(b, s.ring_r1);
            const double r = rng.uniform(lo, hi);
            return scaled(unit_direction(rng, s.dimension), r);
        }
        case MeasureKind::eta_example: {
            // band selection proportional to restricted band mass
            std::vector<double> mass(s.m_max + 1, 0.0);
            double total = 0.0;
            for (int k = 1; k <= s.m_max; ++k) {
                const double lo = std::max(a, etadetail::band_lower(k));
                const double hi = std::min(b, etadetail::band_upper(k));
                mass[k] = 2.0 * etadetail::band_integral(k, 0.0, lo, hi);
                total += mass[k];
            }
            double u = rng.uniform() * total;
            int band = 1;
            for (int k = 1; k <= s.m_max; ++k) {
                u -= mass[k];
                if (u <= 0.0) {
                    band = k;
                    break;
                }
                if (k == s.m_max) band = k;
            }
            const double lo = std::max(a, etadetail::band_lower(band));
            const double hi = std::min(b, etadetail::band_upper(band));
            // inverse CDF of r^{-3+1/band} on (lo, hi]
            const double e = -2.0 + 1.0 / band;
            const double plo = std::pow(lo, e), phi = std::pow(hi, e);
            const double r = std::pow(plo + rng.uniform() * (phi - plo), 1.0 / e);
            if (s.isotropic) return scaled(unit_direction(rng, s.dimension), r);
            Vec v(s.dimension, 0.0);
            const std::size_t coord = rng.next_u64() % s.dimension;
            v[coord] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * r;
            return v;
        }
        case MeasureKind::tabulated: {
            // numeric inverse CDF on a fine radius grid
            const int n = 512;
            const double lo = std::max(a, s.table_r.front());
            const double hi = std::min(b, s.table_r.back());
            std::vector<double> cdf(n + 1, 0.0);
            for (int i = 1; i <= n; ++i) {
                const double r0 = lo + (hi - lo) * (i - 1) / n;
                const double r1 = lo + (hi - lo) * i / n;
                cdf[i] = cdf[i - 1] + measdetail::tab_integral(s, 0.0, r0, r1);
            }
            const double u = rng.uniform() * cdf[n];
            const std::size_t i = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
            const double r = lo + (hi - lo) * static_cast<double>(i) / n;
            return scaled(unit_direction(rng, s.dimension), r);
        }
        default:
            throw std::logic_error("sample_jump: zero measure has no jumps");
    }
}

}  // namespace sampledetail

/// Symmetric alpha-stable increment by the Chambers-Mallows-Stuck transform
/// (one coordinate, unit scale).
inline double stable_increment_cms(double alpha, Rng& rng) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("stable_increment_cms: bad alpha");
    const double V = rng.uniform(-1.5707963267948966, 1.5707963267948966);
    const double W = rng.exponential(1.0);
    if (std::abs(alpha - 1.0) < 1e-12) return std::tan(V);
    const double num = std::sin(alpha * V);
    const double den = std::pow(std::cos(V), 1.0 / alpha);
    const double tail = std::pow(std::cos(V - alpha * V) / W, (1.0 - alpha) / alpha);
    return num / den * tail;
}

/// Sample a cadlag path of the model over [0, horizon] on a uniform grid of
/// `grid_points` points merged with the exact jump times.
inline SamplePath sample_path(const LevyModel& model, double horizon, std::size_t grid_points,
                              double small_jump_cutoff, std::uint64_t seed) {
    model.validate();
    const double eps = small_jump_cutoff;
    if (!(eps > 0.0 && eps <= 1.0))
        throw std::invalid_argument("sample_path: cutoff must lie in (0, 1]");
    if (grid_points < 2) throw std::invalid_argument("sample_path: need at least 2 grid points");
    if (!(horizon > 0.0)) throw std::invalid_argument("sample_path: horizon must be positive");

    const int d = model.dimension;
    const double inf = std::numeric_limits<double>::infinity();

    // jump stream is independent of the grid so refining the grid never
    // changes the sampled jumps
    Rng jrng(seed, "jumps");
    struct PlannedJump {
        double time;
        Vec delta;
    };
    std::vector<PlannedJump> planned;
    const double small_rate = measure_mass(model.measure, eps, 1.0);
    const double big_rate = measure_mass(model.measure, 1.0, inf);
    const std::uint64_t n_small = jrng.poisson(small_rate * horizon);
    const std::uint64_t n_big = jrng.poisson(big_rate * horizon);
    for (std::uint64_t i = 0; i < n_small; ++i) planned.push_back({jrng.uniform(0.0, horizon), Vec{}});
    for (std::uint64_t i = 0; i < n_big; ++i) planned.push_back({jrng.uniform(0.0, horizon), Vec{}});
    for (std::uint64_t i = 0; i < n_small; ++i)
        planned[i].delta = sampledetail::sample_jump(model.measure, jrng, eps, 1.0);
    for (std::uint64_t i = 0; i < n_big; ++i)
        planned[n_small + i].delta = sampledetail::sample_jump(model.measure, jrng, 1.0, inf);
    std::sort(planned.begin(), planned.end(),
              [](const PlannedJump& a, const PlannedJump& b) { return a.time < b.time; });

    // merged time grid
    std::vector<double> grid = uniform_grid(horizon, grid_points);
    std::vector<double> times;
    std::vector<int> jump_of_time;  // index into planned, or -1
    std::size_t gi = 0;
    for (std::size_t ji = 0; ji <= planned.size(); ++ji) {
        const double next_jump = ji < planned.size() ? planned[ji].time : inf;
        while (gi < grid.size() && grid[gi] < next_jump) {
            if (times.empty() || grid[gi] > times.back()) {
                times.push_back(grid[gi]);
                jump_of_time.push_back(-1);
            }
            ++gi;
        }
        if (ji == planned.size()) break;
        double tj = next_jump;
        while (!times.empty() && tj <= times.back()) tj = std::nextafter(tj, inf);
        times.push_back(tj);
        jump_of_time.push_back(static_cast<int>(ji));
    }
    if (times.back() < horizon) {
        times.push_back(horizon);
        jump_of_time.push_back(-1);
    }

    // effective drift: declared drift minus the small-jump compensator
    Vec drift_eff = model.drift;
    axpy(-1.0, measure_mean_ring(model.measure, eps, 1.0), drift_eff);

    const Mat chol = cholesky_psd(model.gaussian_cov);
    Rng grng(seed, "gauss");

    SamplePath path;
    path.times = times;
    path.values.assign(times.size(), Vec(d, 0.0));
    Vec cur(d, 0.0);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double dt = times[i] - times[i - 1];
        Vec z(d);
        for (auto& x : z) x = grng.normal();
        Vec gauss = matvec(chol, z);
        axpy(std::sqrt(dt), gauss, cur);
        axpy(dt, drift_eff, cur);
        if (jump_of_time[i] >= 0) {
            Jump j;
            j.index = i;
            j.left = cur;
            axpy(1.0, planned[static_cast<std::size_t>(jump_of_time[i])].delta, cur);
            j.right = cur;
            path.jumps.push_back(j);
        }
        path.values[i] = cur;
    }
    path.sort_jump_registry();
    path.validate();
    return path;
}

/// Coupled truncation: remove registered jumps with size <= new_cutoff and
/// undo their compensation, leaving the rest of the randomness untouched.
inline SamplePath strip_small_jumps(const SamplePath& path, const LevyModel& model, double old_cutoff,
                                    double new_cutoff) {
    if (!(new_cutoff >= old_cutoff)) throw std::invalid_argument("strip_small_jumps: cutoff must grow");
    SamplePath out = path;
    Vec comp = measure_mean_ring(model.measure, old_cutoff, new_cutoff);
    for (const Jump& j : out.jumps) {
        if (j.size() > new_cutoff) continue;
        const Vec d = j.delta();
        for (std::size_t i = j.index; i < out.values.size(); ++i) axpy(-1.0, d, out.values[i]);
    }
    // removed jumps were compensated by -t * mean; add the compensation back
    for (std::size_t i = 0; i < out.values.size(); ++i) axpy(out.times[i], comp, out.values[i]);
    // rebuild left/right limits for the kept jumps
    out.jumps.clear();
    for (const Jump& j : path.jumps) {
        if (j.size() <= new_cutoff) continue;
        Jump nj;
        nj.index = j.index;
        nj.right = out.values[j.index];
        nj.left = sub(nj.right, j.delta());
        out.jumps.push_back(nj);
    }
    out.sort_jump_registry();
    out.validate();
    return out;
}

}  // namespace pathwise
