#pragma once

// Shared test fixtures: random path generators and independent reference
// integrators used as oracles. Everything here is test-only and must stay
// independent of the code paths it checks.

#include <cmath>
#include <functional>
#include <vector>

#include "pathwise/rng.hpp"
#include "pathwise/sample_path.hpp"

namespace testutil {

using pathwise::Rng;
using pathwise::SamplePath;
using pathwise::Vec;

/// Random continuous path with standard-normal increments.
inline SamplePath random_walk_path(std::size_t n, std::size_t dim, std::uint64_t seed,
                                   double horizon = 1.0, double step_scale = 1.0) {
    Rng rng(seed);
    SamplePath p;
    p.times = pathwise::uniform_grid(horizon, n);
    p.values.assign(n, Vec(dim, 0.0));
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t k = 0; k < dim; ++k)
            p.values[i][k] = p.values[i - 1][k] + step_scale * rng.normal();
    return p;
}

/// Brownian skeleton on a uniform grid: increments N(0, dt I).
inline SamplePath brownian_path(std::size_t n, std::size_t dim, std::uint64_t seed, double horizon = 1.0) {
    Rng rng(seed);
    SamplePath p;
    p.times = pathwise::uniform_grid(horizon, n);
    p.values.assign(n, Vec(dim, 0.0));
    const double sd = std::sqrt(horizon / static_cast<double>(n - 1));
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t k = 0; k < dim; ++k)
            p.values[i][k] = p.values[i - 1][k] + sd * rng.normal();
    return p;
}

/// Random cadlag path: a mild continuous part plus `n_jumps` registered jumps.
inline SamplePath random_jump_path(std::size_t n_grid, std::size_t n_jumps, std::size_t dim,
                                   std::uint64_t seed, double horizon = 1.0, double jump_scale = 0.5) {
    Rng rng(seed);
    std::vector<double> jt;
    std::vector<Vec> jd;
    for (std::size_t k = 0; k < n_jumps; ++k) {
        jt.push_back(rng.uniform(0.02 * horizon, 0.98 * horizon));
        Vec d(dim);
        for (auto& x : d) x = jump_scale * (rng.uniform() - 0.5) * 2.0;
        jd.push_back(d);
    }
    SamplePath steps = pathwise::make_step_path(horizon, jt, jd, Vec(dim, 0.0));
    // overlay a piecewise-smooth continuous part on a merged grid
    SamplePath p;
    std::vector<double> grid = pathwise::uniform_grid(horizon, n_grid);
    std::vector<double> merged;
    std::size_t gi = 0;
    for (std::size_t si = 0; si < steps.times.size(); ++si) {
        while (gi < grid.size() && grid[gi] < steps.times[si] - 1e-15) {
            if (merged.empty() || grid[gi] > merged.back()) merged.push_back(grid[gi]);
            ++gi;
        }
        while (gi < grid.size() && std::abs(grid[gi] - steps.times[si]) <= 1e-15) ++gi;
        merged.push_back(steps.times[si]);
    }
    double phase = rng.uniform(0.0, 6.28);
    double amp = 0.3 * rng.uniform();
    auto smooth = [&](double t) { return amp * std::sin(4.0 * t + phase); };
    auto step_value = [&](double t) {
        // right-continuous lookup in the step path
        std::size_t lo = 0;
        for (std::size_t i = 0; i < steps.times.size(); ++i)
            if (steps.times[i] <= t + 1e-15) lo = i;
        return steps.values[lo];
    };
    p.times = merged;
    for (double t : merged) {
        Vec v = step_value(t);
        for (auto& x : v) x += smooth(t);
        p.values.push_back(v);
    }
    // carry the jump registry over to the merged grid
    for (const auto& j : steps.jumps) {
        pathwise::Jump jj;
        const double tj = steps.times[j.index];
        for (std::size_t i = 0; i < p.times.size(); ++i)
            if (p.times[i] == tj) jj.index = i;
        jj.right = p.values[jj.index];
        jj.left = jj.right;
        const Vec d = pathwise::sub(j.right, j.left);
        for (std::size_t k = 0; k < d.size(); ++k) jj.left[k] -= d[k];
        p.jumps.push_back(jj);
    }
    p.sort_jump_registry();
    p.validate();
    return p;
}

/// Dense-output reference ODE integrator (classic RK4 with many substeps),
/// used as an oracle for solves driven by smooth paths:
///   y' = F(t, y).
inline Vec rk4_reference(const std::function<Vec(double, const Vec&)>& F, Vec y0, double t0, double t1,
                         std::size_t steps) {
    Vec y = std::move(y0);
    const double h = (t1 - t0) / static_cast<double>(steps);
    double t = t0;
    for (std::size_t s = 0; s < steps; ++s) {
        const Vec k1 = F(t, y);
        Vec y2 = y;
        pathwise::axpy(0.5 * h, k1, y2);
        const Vec k2 = F(t + 0.5 * h, y2);
        Vec y3 = y;
        pathwise::axpy(0.5 * h, k2, y3);
        const Vec k3 = F(t + 0.5 * h, y3);
        Vec y4 = y;
        pathwise::axpy(h, k3, y4);
        const Vec k4 = F(t + h, y4);
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        t += h;
    }
    return y;
}

/// Adaptive Simpson quadrature oracle.
inline double simpson_adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                               int depth = 40) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double x0, double x2, double f0, double f1, double f2, double whole, int d) -> double {
        const double x1l = 0.5 * (x0 + 0.5 * (x0 + x2));
        const double xm = 0.5 * (x0 + x2);
        const double x1r = 0.5 * (xm + x2);
        const double fl = f(x1l), fr = f(x1r);
        const double left = (xm - x0) / 6.0 * (f0 + 4.0 * fl + f1);
        const double right = (x2 - xm) / 6.0 * (f1 + 4.0 * fr + f2);
        if (d <= 0 || std::abs(left + right - whole) < 15.0 * tol)
            return left + right + (left + right - whole) / 15.0;
        return rec(x0, xm, f0, fl, f1, left, d - 1) + rec(xm, x2, f1, fr, f2, right, d - 1);
    };
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return rec(a, b, fa, fm, fb, whole, depth);
}

}  // namespace testutil
