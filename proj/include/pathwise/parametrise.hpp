#pragma once

// Fictitious-time parametrisation: tau(t) = t + delta * sum |j(t_n)|^p over
// jumps up to t. Each jump is traversed by a linear segment of extended
// length delta |j|^p, which turns a cadlag path into a continuous one with
// the same p-variation. Deparametrisation evaluates back at tau(t) and
// re-registers jumps from segment endpoints.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pathwise/sample_path.hpp"

namespace pathwise {

struct Segment {
    double ext_start = 0.0;        // tau(t_n-)
    double ext_end = 0.0;          // tau(t_n)
    std::size_t jump_index = 0;    // index into the original jump registry
    std::size_t ext_start_idx = 0; // extended-grid index of the segment start
    std::size_t ext_end_idx = 0;   // extended-grid index of the segment end
};

struct Parametrisation {
    double delta = 1.0;
    double p = 1.0;
    std::vector<double> original_times;
    std::vector<double> extended_times;        // tau(t_i) per original sample
    std::vector<std::size_t> ext_index_of_orig;
    std::vector<Segment> segments;

    double extended_horizon() const { return extended_times.empty() ? 0.0 : extended_times.back(); }
};

/// Total fictitious time delta * sum |j|^p over the registry.
inline double fictitious_budget(const SamplePath& path, double delta, double p) {
    double s = 0.0;
    for (const Jump& j : path.jumps) s += std::pow(j.size(), p);
    return delta * s;
}

struct ParametriseResult {
    SamplePath path;  // continuous, on [0, tau(T)]
    Parametrisation par;
};

inline ParametriseResult parametrise(const SamplePath& path, double delta, double p) {
    if (!(delta > 0.0)) throw std::invalid_argument("parametrise: delta must be positive");
    if (p < 1.0) throw std::invalid_argument("parametrise: p must be >= 1");
    path.validate();

    // jump weight per original index
    std::vector<double> weight(path.size(), 0.0);
    std::vector<int> jump_at(path.size(), -1);
    for (std::size_t k = 0; k < path.jumps.size(); ++k) {
        const Jump& j = path.jumps[k];
        weight[j.index] = delta * std::pow(j.size(), p);
        jump_at[j.index] = static_cast<int>(k);
    }

    // ambient step h: median positive cell width of the original grid
    double h = 1.0;
    if (path.size() > 1) {
        std::vector<double> widths;
        widths.reserve(path.size() - 1);
        for (std::size_t i = 1; i < path.size(); ++i) widths.push_back(path.times[i] - path.times[i - 1]);
        std::nth_element(widths.begin(), widths.begin() + widths.size() / 2, widths.end());
        h = widths[widths.size() / 2];
        if (!(h > 0.0)) h = 1.0;
    }

    ParametriseResult out;
    out.par.delta = delta;
    out.par.p = p;
    out.par.original_times = path.times;
    out.par.extended_times.resize(path.size());
    out.par.ext_index_of_orig.resize(path.size());

    SamplePath& ext = out.path;
    double shift = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const double t = path.times[i];
        if (jump_at[i] >= 0) {
            const Jump& j = path.jumps[static_cast<std::size_t>(jump_at[i])];
            Segment seg;
            seg.jump_index = static_cast<std::size_t>(jump_at[i]);
            seg.ext_start = t + shift;
            shift += weight[i];
            seg.ext_end = t + shift;

            // segment start carries the left limit; it is a fresh sample
            // unless the previous original sample already sits there (only
            // possible for a jump at t = 0)
            if (ext.times.empty() || seg.ext_start > ext.times.back()) {
                ext.times.push_back(seg.ext_start);
                ext.values.push_back(j.left);
            }
            seg.ext_start_idx = ext.times.size() - 1;

            // interior samples of the linear traversal so integrators see it
            const double seg_len = seg.ext_end - seg.ext_start;
            const std::size_t interior =
                std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(seg_len / h)));
            const Vec d = j.delta();
            for (std::size_t k = 1; k <= interior; ++k) {
                const double frac = static_cast<double>(k) / static_cast<double>(interior + 1);
                Vec v = j.left;
                axpy(frac, d, v);
                ext.times.push_back(seg.ext_start + frac * seg_len);
                ext.values.push_back(v);
            }

            ext.times.push_back(seg.ext_end);
            ext.values.push_back(j.right);
            seg.ext_end_idx = ext.times.size() - 1;
            out.par.segments.push_back(seg);
        } else {
            ext.times.push_back(t + shift);
            ext.values.push_back(path.values[i]);
        }
        out.par.extended_times[i] = t + shift;
        out.par.ext_index_of_orig[i] = ext.times.size() - 1;
    }
    ext.validate();
    return out;
}

/// Undo a parametrisation: sample the extended path at tau(t_i), discard
/// traversal interiors, and re-register jumps from segment endpoints.
inline SamplePath deparametrise(const SamplePath& extended, const Parametrisation& par) {
    if (extended.size() == 0) throw std::invalid_argument("deparametrise: empty path");
    if (!extended.jumps.empty())
        throw std::invalid_argument("deparametrise: extended path must be continuous");
    if (par.ext_index_of_orig.empty() ||
        par.ext_index_of_orig.back() >= extended.size() ||
        std::abs(extended.times.back() - par.extended_horizon()) >
            1e-9 * std::max(1.0, std::abs(par.extended_horizon())))
        throw std::invalid_argument("deparametrise: mismatched horizons");

    SamplePath out;
    out.times = par.original_times;
    out.values.reserve(out.times.size());
    for (std::size_t i = 0; i < out.times.size(); ++i)
        out.values.push_back(extended.values[par.ext_index_of_orig[i]]);

    // jumps: the value increment across each fictitious segment
    std::vector<std::size_t> orig_index_of_ext(extended.size(), 0);
    for (std::size_t i = 0; i < par.ext_index_of_orig.size(); ++i)
        orig_index_of_ext[par.ext_index_of_orig[i]] = i;
    for (const Segment& seg : par.segments) {
        Jump j;
        j.index = orig_index_of_ext[seg.ext_end_idx];
        j.left = extended.values[seg.ext_start_idx];
        j.right = extended.values[seg.ext_end_idx];
        if (norm2(sub(j.right, j.left)) > 0.0) out.jumps.push_back(j);
    }
    out.sort_jump_registry();
    out.validate();
    return out;
}

}  // namespace pathwise
