#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "pathwise/pvar.hpp"
#include "pathwise/solver.hpp"

using namespace pathwise;
using testutil::random_jump_path;
using testutil::rk4_reference;

namespace {

SamplePath sine_driver(std::size_t n, double amp = 1.0, double freq = 6.28318530717958648) {
    std::vector<double> t = uniform_grid(1.0, n);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(freq * t[i]);
    return make_scalar_path(t, x);
}

// random pure-jump scalar driver with |h_i| <= cap
SamplePath random_pure_jump(std::size_t n_jumps, std::uint64_t seed, double cap = 0.5) {
    Rng rng(seed);
    std::vector<double> jt;
    std::vector<Vec> jd;
    double t = 0.0;
    for (std::size_t k = 0; k < n_jumps; ++k) {
        t += rng.uniform(0.02, 0.9 / n_jumps);
        jt.push_back(t);
        jd.push_back(Vec{cap * (2.0 * rng.uniform() - 1.0)});
    }
    return make_step_path(1.0, jt, jd, Vec{0.0});
}

}  // namespace

TEST_CASE("field presets pass the jacobian audit and bound domination") {
    Rng rng(1);
    std::vector<VectorField> fields = {scalar_identity_field(5.0), rotation_field(4.0),
                                       linear_field({Mat::identity(2), [] {
                                                         Mat m(2, 2);
                                                         m(0, 1) = 0.7;
                                                         m(1, 0) = -0.3;
                                                         return m;
                                                     }()},
                                                    3.0)};
    for (const auto& f : fields) {
        double sup_f = 0.0, sup_g = 0.0;
        for (int t = 0; t < 200; ++t) {
            Vec y(f.dim_state);
            for (auto& v : y) v = rng.uniform(-2.5 * std::max(f.truncation_radius, 1.0),
                                              2.5 * std::max(f.truncation_radius, 1.0));
            REQUIRE(jacobian_fd_error(f, y) < 1e-5);
            sup_f = std::max(sup_f, frobenius(f.eval(y)));
            const auto J = f.jacobian(y);
            double g2 = 0.0;
            for (const Mat& Jk : J) {
                const double fn = frobenius(Jk);
                g2 += fn * fn;
            }
            sup_g = std::max(sup_g, std::sqrt(g2));
        }
        REQUIRE(sup_f <= f.f_inf * (1.0 + 1e-9));
        REQUIRE(sup_g <= f.grad_inf * (1.0 + 1e-9));
    }
}

TEST_CASE("difference form reproduces field increments") {
    VectorField f = linear_field({Mat::identity(2)}, 2.0);
    Rng rng(7);
    auto check = [&](double box, double tol) {
        for (int t = 0; t < 50; ++t) {
            Vec x{rng.uniform(-box, box), rng.uniform(-box, box)};
            Vec y{rng.uniform(-box, box), rng.uniform(-box, box)};
            const auto g = difference_form(f, x, y);
            const Mat fx = f.eval(x), fy = f.eval(y);
            for (int i = 0; i < 2; ++i) {
                double lhs = fx(i, 0) - fy(i, 0);
                double rhs = 0.0;
                for (int k = 0; k < 2; ++k) rhs += g[k](i, 0) * (x[k] - y[k]);
                REQUIRE(lhs == Catch::Approx(rhs).margin(tol));
            }
        }
    };
    // smooth region: quadrature is exact; across the truncation shell the
    // integrand is only C^2 and accuracy drops to the quadrature order
    check(1.4, 1e-13);
    check(3.0, 2e-4);
}

TEST_CASE("constant field telescopes exactly") {
    Mat C(2, 2);
    C(0, 0) = 1.0; C(0, 1) = -0.5; C(1, 0) = 0.25; C(1, 1) = 2.0;
    VectorField f = constant_field(C);
    SamplePath driver = random_jump_path(40, 4, 2, 77);
    const Vec a{0.3, -0.2};
    for (auto kind : {0, 1}) {
        Solution s = kind == 0 ? solve_geometric(f, driver, a, 1.5)
                               : solve_forward(f, driver, a, 1.5);
        for (std::size_t i = 0; i < driver.size(); ++i) {
            const Vec dx = sub(driver.values[i], driver.values[0]);
            const Vec expect = add(a, matvec(C, dx));
            REQUIRE(dist2(s.path.values[i], expect) < 1e-11);
        }
    }
}

TEST_CASE("pure-jump dichotomy: products of (1+h) and exp(h)") {
    const double a0 = 1.0;
    VectorField f = scalar_identity_field(1e5);
    for (int t = 0; t < 25; ++t) {
        Rng rng(4000 + t);
        const std::size_t nj = 5 + (rng.next_u64() % 11);
        SamplePath driver = random_pure_jump(nj, 5000 + t);
        double prod_fwd = a0, prod_geo = a0;
        for (const Jump& j : driver.jumps) {
            prod_fwd *= 1.0 + j.delta()[0];
            prod_geo *= std::exp(j.delta()[0]);
        }
        Solution fwd = solve_forward(f, driver, Vec{a0}, 1.0);
        Solution geo = solve_geometric(f, driver, Vec{a0}, 1.0);
        REQUIRE(fwd.path.values.back()[0] == Catch::Approx(prod_fwd).epsilon(1e-8));
        REQUIRE(geo.path.values.back()[0] == Catch::Approx(prod_geo).epsilon(1e-8));
    }
}

TEST_CASE("smooth driver matches a dense ODE reference") {
    // dy = y dx with x = sin(2 pi t): reference solves y' = y x'(t)
    const std::size_t n = (1 << 14) + 1;
    SamplePath driver = sine_driver(n);
    VectorField f = scalar_identity_field(50.0);
    Solution s = solve_geometric(f, driver, Vec{1.0}, 1.2);
    const double w = 6.28318530717958648;
    const Vec ref = rk4_reference(
        [&](double t, const Vec& y) { return Vec{y[0] * w * std::cos(w * t)}; }, Vec{1.0}, 0.0, 1.0,
        1 << 15);
    REQUIRE(std::abs(s.path.values.back()[0] - ref[0]) < 1e-6);
    // and against the exact flow y_t = exp(sin(2 pi t))
    REQUIRE(s.path.values.back()[0] == Catch::Approx(std::exp(0.0)).epsilon(1e-6));

    // rotation field against the same reference machinery
    VectorField rot = rotation_field(10.0);
    Solution sr = solve_geometric(rot, driver, Vec{1.0, 0.0}, 1.2);
    const Vec ref2 = rk4_reference(
        [&](double t, const Vec& y) {
            const double dx = w * std::cos(w * t);
            return Vec{-y[1] * dx, y[0] * dx};
        },
        Vec{1.0, 0.0}, 0.0, 1.0, 1 << 15);
    REQUIRE(dist2(sr.path.values.back(), ref2) < 1e-6);
}

TEST_CASE("forward equals geometric on continuous drivers") {
    SamplePath driver = sine_driver(1 << 10, 0.7);
    VectorField f = scalar_identity_field(20.0);
    Solution geo = solve_geometric(f, driver, Vec{0.8}, 1.4);
    Solution fwd = solve_forward(f, driver, Vec{0.8}, 1.4);
    for (std::size_t i = 0; i < driver.size(); ++i)
        REQUIRE(std::abs(geo.path.values[i][0] - fwd.path.values[i][0]) < 1e-9);
}

TEST_CASE("forward jump identity holds exactly") {
    VectorField f = rotation_field(20.0);
    SamplePath driver2 = random_jump_path(60, 6, 1, 91);
    Solution s = solve_forward(f, driver2, Vec{1.0, 0.5}, 1.5);
    REQUIRE(!s.path.jumps.empty());
    for (const Jump& j : s.path.jumps) {
        const Jump* dj = driver2.jump_at(j.index);
        REQUIRE(dj != nullptr);
        const Vec expect = matvec(f.eval(j.left), dj->delta());
        REQUIRE(dist2(j.delta(), expect) < 1e-12);
    }
}

TEST_CASE("jump gap: closed forms, bound, quadratic scaling") {
    VectorField f = scalar_identity_field(10.0);
    const JumpGap g = jump_gap(f, Vec{1.0}, Vec{0.1});
    REQUIRE(g.geometric[0] == Catch::Approx(std::exp(0.1) - 1.0).epsilon(1e-10));
    REQUIRE(g.forward[0] == Catch::Approx(0.1));
    REQUIRE(norm2(sub(g.geometric, g.forward)) <= g.bound);
    REQUIRE(g.bound == Catch::Approx(0.5 * f.f_inf * f.grad_inf * 0.01));

    // zero jump
    const JumpGap z = jump_gap(f, Vec{1.0}, Vec{0.0});
    REQUIRE(norm2(z.geometric) == 0.0);
    REQUIRE(norm2(z.forward) == 0.0);

    // random linear fields: gap shrinks by 4 when the jump halves
    Rng rng(321);
    for (int t = 0; t < 40; ++t) {
        Mat M(2, 2);
        for (auto& v : M.a) v = rng.uniform(-1.0, 1.0);
        VectorField lf = linear_field({M, Mat::identity(2)}, 8.0);
        Vec a{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        Vec dx{rng.uniform(-0.18, 0.18), rng.uniform(-0.18, 0.18)};
        const JumpGap g1 = jump_gap(lf, a, dx);
        const JumpGap g2 = jump_gap(lf, a, scaled(dx, 0.5));
        const double gap1 = norm2(sub(g1.geometric, g1.forward));
        const double gap2 = norm2(sub(g2.geometric, g2.forward));
        REQUIRE(norm2(sub(g1.geometric, g1.forward)) <= g1.bound);
        if (gap1 > 1e-12) REQUIRE(gap2 / gap1 == Catch::Approx(0.25).epsilon(0.1));
    }
}

TEST_CASE("geometric solution jumps are segment flow increments") {
    VectorField f = scalar_identity_field(1e4);
    SamplePath driver = random_pure_jump(6, 17);
    Solution s = solve_geometric(f, driver, Vec{1.0}, 1.3);
    REQUIRE(s.path.jumps.size() == driver.jumps.size());
    for (const Jump& j : s.path.jumps) {
        const Jump* dj = driver.jump_at(j.index);
        REQUIRE(dj != nullptr);
        const Vec flowed = integrate_flow(f, j.left, dj->delta(), 1e-13);
        REQUIRE(dist2(j.right, flowed) < 1e-10);
    }
}

TEST_CASE("reparametrisation invariance: delta 0.5 vs 2") {
    VectorField f = rotation_field(30.0);
    for (int t = 0; t < 6; ++t) {
        SamplePath driver = random_jump_path(50, 5, 1, 700 + t);
        Solution a = solve_geometric(f, driver, Vec{1.0, 0.0}, 1.5, 0.5);
        Solution b = solve_geometric(f, driver, Vec{1.0, 0.0}, 1.5, 2.0);
        double sup = 0.0;
        for (std::size_t i = 0; i < driver.size(); ++i) sup = std::max(sup, dist2(a.path.values[i], b.path.values[i]));
        REQUIRE(sup < 1e-9);  // 10x the solver tolerance
    }
}

TEST_CASE("corrective scheme bridges geometric and forward") {
    VectorField f = scalar_identity_field(1e4);
    SamplePath driver = random_pure_jump(12, 23);
    Solution geo = solve_geometric(f, driver, Vec{1.0}, 1.0);
    Solution z0 = solve_forward(f, driver, Vec{1.0}, 1.0, 0);
    Solution zall = solve_forward(f, driver, Vec{1.0}, 1.0);
    Solution zfull = solve_forward(f, driver, Vec{1.0}, 1.0, driver.jumps.size());
    for (std::size_t i = 0; i < driver.size(); ++i) {
        REQUIRE(std::abs(z0.path.values[i][0] - geo.path.values[i][0]) < 1e-9);
        REQUIRE(zall.path.values[i][0] == zfull.path.values[i][0]);
    }
}

TEST_CASE("corrective differences are controlled by the jump tail") {
    VectorField f = scalar_identity_field(100.0);
    for (int t = 0; t < 5; ++t) {
        SamplePath driver = random_pure_jump(24, 900 + t, 0.45);
        std::vector<Solution> z;
        for (std::size_t m = 0; m <= driver.jumps.size(); ++m)
            z.push_back(solve_forward(f, driver, Vec{1.0}, 1.0, m));
        // tail sums of squared jump sizes, registry order
        std::vector<double> tail(driver.jumps.size() + 1, 0.0);
        for (std::size_t m = driver.jumps.size(); m-- > 0;) {
            const double s = driver.jumps[m].size();
            tail[m] = tail[m + 1] + s * s;
        }
        double max_ratio = 0.0;
        for (std::size_t m = 1; m + 1 < z.size(); ++m) {
            for (std::size_t r = m + 1; r < z.size(); ++r) {
                double sup = 0.0;
                for (std::size_t i = 0; i < driver.size(); ++i)
                    sup = std::max(sup, std::abs(z[m].path.values[i][0] - z[r].path.values[i][0]));
                if (tail[m] > 0.0) max_ratio = std::max(max_ratio, sup / tail[m]);
            }
        }
        // a single constant works across all m (Cauchy property)
        REQUIRE(max_ratio < 50.0);
    }
}

TEST_CASE("flow map: identical starts and translation invariance") {
    Mat C(1, 1);
    C(0, 0) = 2.0;
    VectorField f = constant_field(C);
    SamplePath driver = sine_driver(256);
    FlowReport rep = flow_map(f, driver, {Vec{0.0}, Vec{0.0}}, 1.2);
    REQUIRE(rep.max_ratio == 0.0);
    REQUIRE(dist2(rep.solutions[0].path.values.back(), rep.solutions[1].path.values.back()) == 0.0);

    FlowReport rep2 = flow_map(f, driver, {Vec{0.0}, Vec{0.5}}, 1.2);
    REQUIRE(rep2.max_ratio == Catch::Approx(1.0));  // translation flow
}

TEST_CASE("flow ratio is stable under halving of |a-b|") {
    VectorField f = rotation_field(25.0);
    SamplePath driver = random_jump_path(50, 4, 1, 321);
    double prev_ratio = -1.0;
    double gap = 0.4;
    for (int h = 0; h < 4; ++h) {
        FlowReport rep = flow_map(f, driver, {Vec{1.0, 0.0}, Vec{1.0 + gap, 0.0}}, 1.5);
        if (prev_ratio > 0.0) REQUIRE(rep.max_ratio == Catch::Approx(prev_ratio).epsilon(0.2));
        prev_ratio = rep.max_ratio;
        gap *= 0.5;
    }
}

TEST_CASE("flow composes over subintervals") {
    VectorField f = rotation_field(25.0);
    SamplePath driver = sine_driver(513, 0.8);
    Solution whole = solve_geometric(f, driver, Vec{0.4, -0.3}, 1.2);
    // split the driver at its midpoint and continue from the mid state
    const std::size_t mid = 256;
    SamplePath first, second;
    first.times.assign(driver.times.begin(), driver.times.begin() + mid + 1);
    first.values.assign(driver.values.begin(), driver.values.begin() + mid + 1);
    second.times.resize(driver.size() - mid);
    second.values.assign(driver.values.begin() + mid, driver.values.end());
    for (std::size_t i = 0; i < second.times.size(); ++i) second.times[i] = driver.times[mid + i] - driver.times[mid];
    Solution s1 = solve_geometric(f, first, Vec{0.4, -0.3}, 1.2);
    Solution s2 = solve_geometric(f, second, s1.path.values.back(), 1.2);
    REQUIRE(dist2(s2.path.values.back(), whole.path.values.back()) < 1e-10);
}

TEST_CASE("inverse flow via the reversed path returns to the start") {
    VectorField f = rotation_field(25.0);
    SamplePath driver = sine_driver(1025, 0.9, 9.0);
    const Vec a{0.6, 0.1};
    Solution fwd = solve_geometric(f, driver, a, 1.2);
    Solution back = solve_geometric(f, reverse_path(driver), fwd.path.values.back(), 1.2);
    REQUIRE(dist2(back.path.values.back(), a) < 1e-8);
}

TEST_CASE("forward solution p-variation obeys the splice bound") {
    VectorField f = tabulated_field({-6.0, -2.0, 0.0, 2.0, 6.0}, {0.4, 0.55, 0.8, 0.55, 0.4});
    for (int t = 0; t < 5; ++t) {
        SamplePath driver = random_jump_path(40, 5, 1, 60 + t, 1.0, 0.4);
        const double p = 1.5;
        Solution z = solve_forward(f, driver, Vec{0.0}, p);
        // empirical flow constant from nearby starts
        FlowReport rep = flow_map_with({Vec{0.0}, Vec{0.05}}, [&](const Vec& a) {
            return solve_forward(f, driver, a, p);
        });
        const double C = std::max(1.0, rep.max_ratio) * 0.5 * f.f_inf * f.grad_inf;
        const double jumps2 = driver.jump_square_sum();
        const double xvar = pvar_exact(driver, p).value;
        const double bound = std::pow(2.0, (p - 1.0) / p) *
                             std::pow(std::pow(C * jumps2, p) + std::pow(f.f_inf * xvar, p), 1.0 / p);
        REQUIRE(pvar_exact(z.path, p).value <= bound);
    }
}

TEST_CASE("rejects p >= 2 and insufficient field regularity") {
    SamplePath driver = sine_driver(64);
    VectorField f = scalar_identity_field(5.0);
    REQUIRE_THROWS_WITH(solve_geometric(f, driver, Vec{1.0}, 2.3),
                        Catch::Matchers::ContainsSubstring("Young condition violated"));
    VectorField weak = tabulated_field({-1.0, 1.0}, {0.5, 0.5}, 1.1);
    REQUIRE_THROWS_WITH(solve_geometric(weak, driver, Vec{0.0}, 1.5),
                        Catch::Matchers::ContainsSubstring("lip_alpha"));
}
