#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "pathwise/levy.hpp"

using namespace pathwise;
using testutil::simpson_adaptive;

TEST_CASE("eta partial integrals: bounded for alpha = 2, divergent below") {
    double prev = 0.0;
    for (int m : {1, 2, 4, 8, 16, 32, 64, 128}) {
        const double s = eta_partial_integrals(m, 2.0);
        REQUIRE(s >= prev);
        prev = s;
    }
    // term_k = 2k(k^-3 - (k+1)^{-3(1+1/k)}) <= 2 k^-2, so the sum stays
    // below 2 zeta(2)
    REQUIRE(prev < 2.0 * 1.6449340668482264);

    REQUIRE(eta_partial_integrals(30, 1.9) > 1e6);
}

TEST_CASE("eta band integral matches adaptive quadrature at m = 1") {
    const double alpha = 1.3;
    const double lo = std::pow(2.0, -6.0);
    const double direct = 2.0 * simpson_adaptive(
        [&](double r) { return std::pow(r, alpha - 3.0 + 1.0); }, lo, 1.0, 1e-12);
    REQUIRE(eta_partial_integrals(1, alpha) == Catch::Approx(direct).epsilon(1e-9));
}

TEST_CASE("index of stable and compound Poisson measures is analytic") {
    REQUIRE(bg_index(stable_measure(1.5, 1.0, 1)).value == 1.5);
    REQUIRE(bg_index(stable_measure(0.7, 2.0, 2)).value == 0.7);
    REQUIRE(bg_index(compound_poisson_ring(2.0, 0.2, 1.0, 2)).value == 0.0);
    REQUIRE(bg_index(zero_measure(1)).value == 0.0);
}

TEST_CASE("index of the eta measure is two") {
    const BgIndex b = bg_index(eta_measure(40));
    REQUIRE(b.status == IndexStatus::ok);
    REQUIRE(b.value >= 1.95);
    REQUIRE(b.value <= 2.0);
}

TEST_CASE("index ordering follows declared activity") {
    const double a05 = bg_index(stable_measure(0.5, 1.0, 1)).value;
    const double a15 = bg_index(stable_measure(1.5, 1.0, 1)).value;
    const double eta = bg_index(eta_measure(40)).value;
    REQUIRE(a05 < a15);
    REQUIRE(a15 < eta);
}

TEST_CASE("index of a tabulated power-law table") {
    // radial density r^{-2.5} tabulated down to 1e-8: index 1.5
    std::vector<double> r, g;
    for (int i = 0; i <= 400; ++i) {
        const double x = std::pow(10.0, -8.0 + 8.0 * i / 400.0);
        r.push_back(x);
        g.push_back(std::pow(x, -2.5));
    }
    BgIndexOptions opts;
    opts.ladder_steps = 24;
    const BgIndex b = bg_index(tabulated_measure(r, g, 2), opts);
    REQUIRE(b.value > 1.2);
    REQUIRE(b.value < 1.8);
}

TEST_CASE("indeterminate report when growth detection cannot resolve") {
    // a shallow table: probes neither clear the divergence threshold nor
    // flatten within the ladder
    std::vector<double> r, g;
    for (int i = 0; i <= 50; ++i) {
        const double x = std::pow(10.0, -2.0 + 2.0 * i / 50.0);
        r.push_back(x);
        g.push_back(std::pow(x, -1.8));
    }
    BgIndexOptions opts;
    opts.ladder_steps = 6;
    const BgIndex b = bg_index(tabulated_measure(r, g, 1), opts);
    REQUIRE(b.status == IndexStatus::indeterminate);
}

TEST_CASE("brownian skeleton variance") {
    LevyModel m = brownian_model(1);
    const int trials = 10000;
    double s2 = 0.0;
    for (int t = 0; t < trials; ++t) {
        SamplePath p = sample_path(m, 1.0, 2, 1.0, derive_seed(500, "trial", t));
        s2 += p.values.back()[0] * p.values.back()[0];
    }
    const double var = s2 / trials;
    const double se = std::sqrt(2.0 / trials);  // Var(X^2) = 2 for X ~ N(0,1)
    REQUIRE(std::abs(var - 1.0) <= 3.0 * se);
}

TEST_CASE("compound Poisson jump count") {
    LevyModel m;
    m.dimension = 2;
    m.drift = Vec{0.0, 0.0};
    m.gaussian_cov = Mat(2, 2);
    m.measure = compound_poisson_ring(2.0, 0.2, 1.0, 2);
    const int trials = 10000;
    double count = 0.0;
    for (int t = 0; t < trials; ++t) {
        SamplePath p = sample_path(m, 1.0, 2, 0.1, derive_seed(901, "trial", t));
        count += static_cast<double>(p.jumps.size());
    }
    const double mean = count / trials;
    const double se = std::sqrt(2.0 / trials);
    REQUIRE(std::abs(mean - 2.0) <= 3.0 * se);
}

TEST_CASE("eta jumps land in permitted bands") {
    LevyModel m;
    m.dimension = 1;
    m.drift = Vec{0.0};
    m.gaussian_cov = Mat(1, 1);
    m.measure = eta_measure(12);
    SamplePath p = sample_path(m, 1.0, 64, 1e-3, 7777);
    REQUIRE(!p.jumps.empty());
    for (const Jump& j : p.jumps) {
        const double r = j.size();
        bool in_band = false;
        for (int k = 1; k <= 12; ++k) {
            const double lo = std::exp(-3.0 * (k + 1) * std::log(k + 1.0));
            const double hi = k == 1 ? 1.0 : std::exp(-3.0 * k * std::log(static_cast<double>(k)));
            if (r > lo && r <= hi) in_band = true;
        }
        REQUIRE(in_band);
        REQUIRE(r > 1e-3);
    }
}

TEST_CASE("compensation keeps the sample mean on the drift line") {
    // asymmetric atoms force a nonzero compensator
    LevyModel m;
    m.dimension = 1;
    m.drift = Vec{0.25};
    m.gaussian_cov = Mat(1, 1);
    m.measure = compound_poisson_atoms(3.0, {Atom{1.0, Vec{0.4}}}, 1);
    const int trials = 10000;
    double s = 0.0, s2 = 0.0;
    for (int t = 0; t < trials; ++t) {
        SamplePath p = sample_path(m, 1.0, 2, 0.05, derive_seed(11, "trial", t));
        const double x = p.values.back()[0];
        s += x;
        s2 += x * x;
    }
    const double mean = s / trials;
    const double sd = std::sqrt(std::max(s2 / trials - mean * mean, 0.0));
    REQUIRE(std::abs(mean - 0.25) <= 3.0 * sd / std::sqrt(static_cast<double>(trials)));
}

TEST_CASE("disjoint increments are uncorrelated") {
    LevyModel m;
    m.dimension = 1;
    m.drift = Vec{0.0};
    m.gaussian_cov = Mat::identity(1);
    m.measure = compound_poisson_ring(1.5, 0.3, 1.0, 1);
    const int trials = 10000;
    double sa = 0.0, sb = 0.0, sab = 0.0, sa2 = 0.0, sb2 = 0.0;
    for (int t = 0; t < trials; ++t) {
        SamplePath p = sample_path(m, 1.0, 3, 0.1, derive_seed(13, "trial", t));
        // values at 0, 1/2, 1 are always on the grid
        double x_half = 0.0, x_one = 0.0;
        for (std::size_t i = 0; i < p.times.size(); ++i) {
            if (p.times[i] == 0.5) x_half = p.values[i][0];
            if (p.times[i] == 1.0) x_one = p.values[i][0];
        }
        const double a = x_half, b = x_one - x_half;
        sa += a; sb += b; sab += a * b; sa2 += a * a; sb2 += b * b;
    }
    const double n = trials;
    const double cov = sab / n - (sa / n) * (sb / n);
    const double va = sa2 / n - (sa / n) * (sa / n);
    const double vb = sb2 / n - (sb / n) * (sb / n);
    const double corr = cov / std::sqrt(va * vb);
    REQUIRE(std::abs(corr) <= 3.0 / std::sqrt(n));
}

TEST_CASE("jump registry is complete and stable under grid refinement") {
    LevyModel m;
    m.dimension = 2;
    m.drift = Vec{0.1, -0.2};
    m.gaussian_cov = Mat::identity(2);
    m.measure = stable_measure(1.2, 0.8, 2);
    SamplePath coarse = sample_path(m, 1.0, 65, 0.05, 2222);
    SamplePath fine = sample_path(m, 1.0, 257, 0.05, 2222);
    REQUIRE(coarse.jumps.size() == fine.jumps.size());
    for (std::size_t i = 0; i < coarse.jumps.size(); ++i) {
        REQUIRE(coarse.jumps[i].size() == Catch::Approx(fine.jumps[i].size()).epsilon(1e-12));
        REQUIRE(coarse.times[coarse.jumps[i].index] ==
                Catch::Approx(fine.times[fine.jumps[i].index]).margin(1e-15));
        REQUIRE(coarse.jumps[i].size() > 0.05);
    }
    REQUIRE(coarse.jump_square_sum() == Catch::Approx(fine.jump_square_sum()).epsilon(1e-12));
}

TEST_CASE("sampling rejects bad arguments") {
    LevyModel m = brownian_model(2);
    REQUIRE_THROWS_AS(sample_path(m, 1.0, 16, 0.0, 1), std::invalid_argument);
    LevyModel bad = m;
    bad.gaussian_cov(0, 1) = 2.0;
    bad.gaussian_cov(1, 0) = 2.0;  // indefinite
    REQUIRE_THROWS_AS(sample_path(bad, 1.0, 16, 0.5, 1), std::invalid_argument);
}

TEST_CASE("second moments and ring means") {
    // uniform ring in 2d: int x_i^2 nu = rate/2 * E[R^2 1_{R<=1}]
    auto s = compound_poisson_ring(2.0, 0.2, 1.0, 2);
    Mat mm = measure_second_moments(s);
    const double er2 = (1.0 - std::pow(0.2, 3.0)) / (3.0 * 0.8);
    REQUIRE(mm(0, 0) == Catch::Approx(2.0 * er2 / 2.0).epsilon(1e-12));
    REQUIRE(mm(0, 1) == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(norm2(measure_mean_ring(s, 0.0, 1.0)) == 0.0);

    auto a = compound_poisson_atoms(1.0, {Atom{1.0, Vec{0.3, 0.3}}}, 2);
    Mat am = measure_second_moments(a);
    REQUIRE(am(0, 1) == Catch::Approx(0.09).epsilon(1e-12));
    REQUIRE(measure_mean_ring(a, 0.0, 1.0)[0] == Catch::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("coupled truncation removes exactly the small jumps") {
    LevyModel m;
    m.dimension = 1;
    m.drift = Vec{0.0};
    m.gaussian_cov = Mat(1, 1);
    m.measure = stable_measure(1.0, 1.0, 1);
    SamplePath fine = sample_path(m, 1.0, 65, 0.02, 31);
    SamplePath coarse = strip_small_jumps(fine, m, 0.02, 0.2);
    for (const Jump& j : coarse.jumps) REQUIRE(j.size() > 0.2);
    // endpoints differ only by removed jumps and their compensation
    double removed = 0.0;
    for (const Jump& j : fine.jumps)
        if (j.size() <= 0.2) removed += j.delta()[0];
    const Vec comp = measure_mean_ring(m.measure, 0.02, 0.2);
    const double expect = fine.values.back()[0] - removed + comp[0] * 1.0;
    REQUIRE(coarse.values.back()[0] == Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("CMS stable increments: Cauchy quartiles at alpha = 1") {
    Rng rng(6060);
    const int n = 40000;
    std::vector<double> xs(n);
    for (auto& x : xs) x = stable_increment_cms(1.0, rng);
    std::sort(xs.begin(), xs.end());
    // quartiles of the standard Cauchy are +-1
    REQUIRE(xs[n / 4] == Catch::Approx(-1.0).margin(0.05));
    REQUIRE(xs[3 * n / 4] == Catch::Approx(1.0).margin(0.05));
    REQUIRE(xs[n / 2] == Catch::Approx(0.0).margin(0.05));
}
