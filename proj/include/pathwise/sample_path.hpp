#pragma once

// Cadlag discrete paths. A path stores one value per sample time; a jump at
// time t occupies a single row holding the right limit, with the left limit
// kept in the jump registry. The registry is ordered by jump size
// (descending), ties broken by earlier time.

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathwise/linalg.hpp"

namespace pathwise {

struct Jump {
    std::size_t index = 0;  // row carrying the right limit
    Vec left;
    Vec right;

    Vec delta() const { return sub(right, left); }
    double size() const { return norm2(sub(right, left)); }
};

struct SamplePath {
    std::vector<double> times;
    std::vector<Vec> values;
    std::vector<Jump> jumps;

    std::size_t size() const { return times.size(); }
    std::size_t dim() const { return values.empty() ? 0 : values.front().size(); }
    double horizon() const { return times.empty() ? 0.0 : times.back(); }

    bool has_jump_at(std::size_t index) const {
        for (const Jump& j : jumps)
            if (j.index == index) return true;
        return false;
    }

    const Jump* jump_at(std::size_t index) const {
        for (const Jump& j : jumps)
            if (j.index == index) return &j;
        return nullptr;
    }

    /// Left limit at a sample index (differs from values[i] only at jumps).
    Vec value_left(std::size_t i) const {
        if (const Jump* j = jump_at(i)) return j->left;
        return values[i];
    }

    /// Sum of squared jump sizes over the registry.
    double jump_square_sum() const {
        double s = 0.0;
        for (const Jump& j : jumps) {
            const double d = j.size();
            s += d * d;
        }
        return s;
    }

    void sort_jump_registry() {
        std::stable_sort(jumps.begin(), jumps.end(), [&](const Jump& a, const Jump& b) {
            const double sa = a.size(), sb = b.size();
            if (sa != sb) return sa > sb;
            return times[a.index] < times[b.index];
        });
    }

    void validate() const {
        if (times.empty()) throw std::invalid_argument("SamplePath: empty path");
        if (times.front() != 0.0) throw std::invalid_argument("SamplePath: first time must be 0");
        if (times.size() != values.size())
            throw std::invalid_argument("SamplePath: times/values size mismatch");
        const std::size_t d = dim();
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i].size() != d) throw std::invalid_argument("SamplePath: ragged values");
            if (i > 0 && !(times[i] > times[i - 1]))
                throw std::invalid_argument("SamplePath: times not strictly increasing");
        }
        double prev_size = -1.0;
        double prev_time = -1.0;
        for (const Jump& j : jumps) {
            if (j.index >= values.size()) throw std::invalid_argument("SamplePath: jump index out of range");
            if (j.left.size() != d || j.right.size() != d)
                throw std::invalid_argument("SamplePath: jump dimension mismatch");
            if (j.right != values[j.index])
                throw std::invalid_argument("SamplePath: jump right limit disagrees with stored value");
            const double s = j.size();
            if (s == 0.0) throw std::invalid_argument("SamplePath: registered jump with equal limits");
            if (prev_size >= 0.0) {
                if (s > prev_size) throw std::invalid_argument("SamplePath: jump registry not size-sorted");
                if (s == prev_size && times[j.index] < prev_time)
                    throw std::invalid_argument("SamplePath: jump registry tie not time-sorted");
            }
            prev_size = s;
            prev_time = times[j.index];
        }
    }
};

/// Scalar path from plain samples on a given time grid, no jumps.
inline SamplePath make_scalar_path(const std::vector<double>& times, const std::vector<double>& xs) {
    SamplePath p;
    p.times = times;
    p.values.reserve(xs.size());
    for (double x : xs) p.values.push_back(Vec{x});
    p.validate();
    return p;
}

/// Path from d-dimensional samples on a time grid, no jumps.
inline SamplePath make_path(const std::vector<double>& times, const std::vector<Vec>& values) {
    SamplePath p;
    p.times = times;
    p.values = values;
    p.validate();
    return p;
}

/// Uniform grid on [0, horizon] with n points.
inline std::vector<double> uniform_grid(double horizon, std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = horizon * static_cast<double>(i) / static_cast<double>(n - 1);
    t.back() = horizon;
    return t;
}

/// Pure-jump step path: flat between jumps, one jump per entry of `deltas`
/// at the supplied interior times. Starts at `start`.
inline SamplePath make_step_path(double horizon, const std::vector<double>& jump_times,
                                 const std::vector<Vec>& deltas, const Vec& start) {
    if (jump_times.size() != deltas.size())
        throw std::invalid_argument("make_step_path: times/deltas size mismatch");
    std::vector<std::size_t> order(jump_times.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return jump_times[a] < jump_times[b]; });
    SamplePath p;
    p.times.push_back(0.0);
    p.values.push_back(start);
    Vec cur = start;
    for (std::size_t k : order) {
        const double t = jump_times[k];
        if (!(t > 0.0 && t < horizon)) throw std::invalid_argument("make_step_path: jump time outside (0, horizon)");
        if (t <= p.times.back()) throw std::invalid_argument("make_step_path: duplicate jump time");
        Jump j;
        j.left = cur;
        cur = add(cur, deltas[k]);
        j.right = cur;
        j.index = p.times.size();
        p.times.push_back(t);
        p.values.push_back(cur);
        p.jumps.push_back(j);
    }
    p.times.push_back(horizon);
    p.values.push_back(cur);
    p.sort_jump_registry();
    p.validate();
    return p;
}

}  // namespace pathwise
