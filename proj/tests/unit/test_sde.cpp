#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "mlq/analysis.hpp"
#include "mlq/errors.hpp"
#include "mlq/sde.hpp"

using namespace mlq;

namespace {

CoefficientField constant_field(double b, double sigma) {
    return CoefficientField({1.0}, {0.0, b, b}, {sigma, sigma, sigma});
}

std::vector<double> gaussian_noise(std::size_t steps, double dt, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, std::sqrt(dt));
    std::vector<double> out(steps);
    for (auto& v : out) v = z(rng);
    return out;
}

}  // namespace

TEST_CASE("coefficients from the level structure") {
    const auto spec = fixtures::exponential();
    const auto c = make_coefficients(fixtures::two_level(1.0, 2.0), spec, spec);
    CHECK(c.pieces() == 3);
    CHECK(c.diffusion(0.3) == doctest::Approx(std::sqrt(2.0)));
    CHECK(c.diffusion(0.0) == 1.0);  // sqrt(lambda_0) sigma_A
    CHECK(c.drift(0.5) == -1.0);
    CHECK(c.drift(1.0) == -1.0);  // right-closed piece
    CHECK(c.drift(std::nextafter(1.0, 2.0)) == -2.0);
    CHECK(c.drift(0.0) == 0.0);
    CHECK(c.mirror_diffusion(-0.5) == -c.diffusion(0.5));
    CHECK(c.mirror_drift(-0.5) == 1.0);
    CHECK(c.mirror_drift(0.0) == -0.0);
    CHECK(c.mirror_diffusion(0.0) == -1.0);  // sgn(0) = -1

    auto lv = fixtures::two_level();
    lv.lambda = lv.mu = {1.0, 4.0};
    const auto g = make_coefficients(lv, make_renewal_spec(Family::gamma, {2.0}), spec);
    CHECK(g.diffusion(2.0) == doctest::Approx(std::sqrt(4.0 * 0.5 + 4.0 * 1.0)));
    CHECK(g.diffusion(0.0) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("coefficient validation") {
    CHECK_THROWS_AS(CoefficientField({1.0}, {0, 0, 0}, {1, 0, 1}), ParameterError);
    CHECK_NOTHROW(CoefficientField({1.0}, {0, 0, 0}, {1, 0, 1}, true));
    CHECK_THROWS_AS(CoefficientField({1.0}, {0, 0}, {1, 1}), ParameterError);
    CHECK_THROWS_AS(CoefficientField({-1.0}, {0, 0, 0}, {1, 1, 1}), ParameterError);
    CHECK_THROWS_AS(grid_steps(1.0, 0.0), ParameterError);
    CHECK_THROWS_AS(grid_steps(0.5, 1.0), ParameterError);
    CHECK_THROWS_AS(grid_steps(1.0, 0.3), ParameterError);
    CHECK(grid_steps(5.0, 1e-4) == 50000);
    CHECK(parse_boundary_mode("grid") == BoundaryMode::grid);
    CHECK_THROWS_AS(parse_boundary_mode("wall"), ParameterError);
}

TEST_CASE("projected scheme on deterministic fixtures") {
    SUBCASE("pure drift into the wall") {
        const CoefficientField c({1.0}, {-1.0, -1.0, -1.0}, {0.0, 0.0, 0.0}, true);
        const double dt = 0.01;
        const auto p = solve_projected(c, 1.0, dt, std::vector<double>(300, 0.0));
        for (std::size_t k = 0; k < p.x.size(); ++k) {
            CHECK(p.x[k] == doctest::Approx(std::max(0.0, 1.0 - k * dt)).epsilon(1e-12));
        }
        CHECK(p.l.back() == doctest::Approx(2.0));
    }
    SUBCASE("no noise and no drift") {
        const auto p = solve_projected(constant_field(0.0, 1.0), 0.4, 0.1, std::vector<double>(10, 0.0));
        for (std::size_t k = 0; k < p.x.size(); ++k) {
            CHECK(p.x[k] == 0.4);
            CHECK(p.l[k] == 0.0);
        }
    }
    SUBCASE("grid projection pushes exactly the overshoot") {
        const std::vector<double> dw{-0.3, 0.1, -0.5};
        const auto p = solve_projected(constant_field(0.0, 1.0), 0.2, 0.01, dw);
        CHECK(p.x == std::vector<double>{0.2, 0.0, 0.1, 0.0});
        CHECK(p.l[1] == doctest::Approx(0.1));
        CHECK(p.l[3] == doctest::Approx(0.5));
    }
    SUBCASE("bridge projection with a uniform near one only corrects crossings") {
        // U -> 1 makes the sampled bridge minimum the smaller endpoint
        const std::vector<double> dw{-0.3, 0.1};
        const std::vector<double> u{1.0 - 1e-16, 1.0 - 1e-16};
        const auto p = solve_projected(constant_field(0.0, 1.0), 0.2, 0.01, dw, BoundaryMode::bridge, u);
        CHECK(p.x[1] == doctest::Approx(0.0).epsilon(1e-7));
        CHECK(p.l[1] == doctest::Approx(0.1).epsilon(1e-7));
        CHECK(p.x[2] == doctest::Approx(0.1).epsilon(1e-7));
    }
}

TEST_CASE("mirror scheme without boundary contact is the free Euler path") {
    const double dt = 0.01;
    std::vector<double> dw(100);
    for (std::size_t k = 0; k < dw.size(); ++k) dw[k] = (k % 2 ? -1.0 : 1.0) * std::sqrt(dt);
    const auto p = solve_mirror(CoefficientField({1.0}, {0, 0, 0}, {1, 1, 1}), 1.0, dt, dw);
    for (std::size_t k = 0; k < p.x.size(); ++k) {
        CHECK(p.x[k] == std::abs(p.q[k]));
        CHECK(p.l[k] <= 1e-12);
    }
}

TEST_CASE("schemes agree pathwise away from the boundary under shared noise") {
    const double dt = 1e-3;
    const auto c = constant_field(-0.5, 1.3);
    const auto dw = gaussian_noise(2000, dt, 3);
    const auto p = solve_projected(c, 8.0, dt, dw);
    const auto m = solve_mirror(c, 8.0, dt, dw);
    bool positive = true;
    for (double x : p.x) positive = positive && x > 0.0;
    REQUIRE(positive);
    for (std::size_t k = 0; k < p.x.size(); ++k) CHECK(p.x[k] == doctest::Approx(m.x[k]).epsilon(1e-12));
}

TEST_CASE("both schemes keep X >= 0 and L nondecreasing") {
    const auto spec = fixtures::exponential();
    const auto c = make_coefficients(fixtures::two_level(1.0, 2.0), spec, spec);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        for (int mode = 0; mode < 3; ++mode) {
            Stream s(seed);
            const auto p = mode == 0   ? solve_projected(c, 0.0, 2.0, 1e-3, s, BoundaryMode::grid)
                           : mode == 1 ? solve_projected(c, 0.0, 2.0, 1e-3, s, BoundaryMode::bridge)
                                       : solve_mirror(c, 0.0, 2.0, 1e-3, s);
            CHECK(p.l.front() == 0.0);
            for (std::size_t k = 0; k < p.x.size(); ++k) {
                CHECK(p.x[k] >= 0.0);
                if (k > 0) CHECK(p.l[k] >= p.l[k - 1]);
            }
            if (mode == 0) {
                for (std::size_t k = 1; k < p.x.size(); ++k) {
                    if (p.l[k] > p.l[k - 1]) CHECK(p.x[k] == 0.0);
                }
            }
        }
    }
}

TEST_CASE("reflected Brownian motion has exponential stationary mean") {
    // b = -1, sigma^2 = 2: stationary law exponential with mean sigma^2 / (2|b|) = 1
    const auto c = constant_field(-1.0, std::sqrt(2.0));
    const SdeObservableSpec spec;
    std::vector<double> x;
    for (std::size_t r = 0; r < 4000; ++r) {
        x.push_back(observe_sde(Scheme::projected, c, 0.0, 12.0, 1e-2, Stream(1000 + r), spec).x_end);
    }
    CHECK(std::abs(fixtures::mean(x) - 1.0) <= 3.0 * fixtures::stderr_of(x));
}

TEST_CASE("ensemble observables match the stored-path estimators") {
    const auto spec = fixtures::exponential();
    const auto c = make_coefficients(fixtures::two_level(1.0, 2.0), spec, spec);
    SdeObservableSpec obs;
    obs.probe_times = {0.5, 1.0};
    obs.local_time_level = 0.0;
    obs.local_time_eps = {0.05, 0.1};
    obs.occupation_level = 1.0;
    obs.occupation_eps = {0.1, 0.05};
    for (Scheme scheme : {Scheme::projected, Scheme::mirror}) {
        Stream s(77);
        const auto p = scheme == Scheme::projected ? solve_projected(c, 0.0, 1.0, 1e-3, s)
                                                   : solve_mirror(c, 0.0, 1.0, 1e-3, s);
        const auto o = observe_sde(scheme, c, 0.0, 1.0, 1e-3, Stream(77), obs);
        CHECK(o.x_end == p.x.back());
        CHECK(o.l_end == p.l.back());
        CHECK(o.x_probe[0] == p.x[500]);
        CHECK(o.l_probe[1] == p.l.back());
        CHECK(o.local_time[0] == doctest::Approx(local_time_estimate(p, 0.0, 0.05, c)));
        CHECK(o.local_time[1] == doctest::Approx(local_time_estimate(p, 0.0, 0.1, c)));
        CHECK(o.occupation[0] == doctest::Approx(threshold_occupation(p, 1.0, 0.1, 1.0)));
        CHECK(o.occupation[1] == doctest::Approx(threshold_occupation(p, 1.0, 0.05, 1.0)));
    }
}

TEST_CASE("occupation and local-time estimators on simple paths") {
    const double T = 3.0;
    CHECK(threshold_occupation(CadlagPath::constant(1.0 + 10 * 0.1, T), 1.0, 0.1, T) == 0.0);
    CHECK(threshold_occupation(CadlagPath::constant(1.0, T), 1.0, 0.1, T) == T);
    // line through the band [0.9, 1.1] with slope 1
    CHECK(threshold_occupation(CadlagPath::linear(0.0, 1.0, T), 1.0, 0.1, T) == doctest::Approx(0.2));
    CHECK(threshold_occupation(CadlagPath::linear(3.0, -1.0, T), 1.0, 0.1, T) == doctest::Approx(0.2));
    CHECK_THROWS_AS(threshold_occupation(CadlagPath::constant(1.0, T), 1.0, 0.0, T), ParameterError);

    const auto c = constant_field(0.0, 2.0);
    const auto away = solve_projected(c, 3.0, 0.1, std::vector<double>(10, 0.0));
    CHECK(local_time_estimate(away, 0.0, 0.05, c) == 0.0);
    const auto at = solve_projected(c, 0.01, 0.1, std::vector<double>(10, 0.0));
    CHECK(local_time_estimate(at, 0.0, 0.05, c) == doctest::Approx(10 * 4.0 * 0.1 / 0.05));
    CHECK(threshold_occupation(at, 0.0, 0.05, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("halving dt moves the terminal law by no more than sampling noise") {
    const auto spec = fixtures::exponential();
    const auto c = make_coefficients(fixtures::two_level(1.0, 2.0), spec, spec);
    const SdeObservableSpec obs;
    const std::size_t R = 2000;
    for (Scheme scheme : {Scheme::projected, Scheme::mirror}) {
        std::vector<double> coarse, fine;
        for (std::size_t r = 0; r < R; ++r) {
            coarse.push_back(observe_sde(scheme, c, 0.0, 2.0, 1e-2, Stream(5000 + r), obs).x_end);
            fine.push_back(observe_sde(scheme, c, 0.0, 2.0, 5e-3, Stream(9000 + r), obs).x_end);
        }
        CAPTURE(scheme_name(scheme));
        // twice the 95% two-sample critical value
        CHECK(ks_distance(coarse, fine) <= 2.0 * 1.36 * std::sqrt(2.0 / R));
    }
}
