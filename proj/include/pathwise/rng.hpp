#pragma once

// Counter-based random number generation. Every stream is a pure function of
// (seed, stream tag, counter), so paths are reproducible bit-for-bit given a
// seed and Monte Carlo trials can be assigned independent streams without
// sharing state.

#include <cmath>
#include <cstdint>
#include <string_view>

namespace pathwise {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
inline std::uint64_t hash_tag(std::string_view tag) {
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}
}  // namespace detail

/// Derive a child seed for an independent stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
    std::uint64_t h = detail::splitmix64(seed ^ detail::hash_tag(tag));
    return detail::splitmix64(h ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
}

/// Counter-based generator: output k is splitmix64(key + k).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : key_(detail::splitmix64(seed)), counter_(0) {}
    Rng(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0)
        : Rng(derive_seed(seed, tag, index)) {}

    std::uint64_t next_u64() { return detail::splitmix64(key_ + ++counter_); }

    /// Uniform on (0, 1) (never exactly 0 or 1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; the spare value is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u = uniform(), v = uniform();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double a = 6.283185307179586476925286766559 * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    /// Poisson by inversion for small means, PTRS-free simple loop otherwise.
    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean < 30.0) {
            const double l = std::exp(-mean);
            double p = 1.0;
            std::uint64_t k = 0;
            do {
                ++k;
                p *= uniform();
            } while (p > l);
            return k - 1;
        }
        // sum of exponential gaps
        double t = exponential(1.0);
        std::uint64_t k = 0;
        while (t < mean) {
            ++k;
            t += exponential(1.0);
        }
        return k;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace pathwise
