#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "mlq/analysis.hpp"
#include "mlq/errors.hpp"
#include "mlq/experiment.hpp"

using namespace mlq;

namespace {

/// sup over all sample points of |F1 - F2|, evaluated pointwise.
double ks_brute(const std::vector<double>& a, const std::vector<double>& b) {
    auto cdf = [](const std::vector<double>& s, double x) {
        return static_cast<double>(std::count_if(s.begin(), s.end(), [x](double v) { return v <= x; })) /
               static_cast<double>(s.size());
    };
    double d = 0.0;
    for (const auto* s : {&a, &b}) {
        for (double x : *s) d = std::max(d, std::abs(cdf(a, x) - cdf(b, x)));
    }
    return d;
}

std::vector<double> normals(std::size_t count, double shift, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(shift, 1.0);
    std::vector<double> out(count);
    for (auto& v : out) v = z(rng);
    return out;
}

}  // namespace

TEST_CASE("KS distance on small examples") {
    const std::vector<double> a{1, 2, 3};
    CHECK(ks_distance(a, a) == 0.0);
    CHECK(ks_distance(a, std::vector<double>{4, 5, 6}) == 1.0);
    CHECK(ks_distance(a, std::vector<double>{2, 3, 4}) == doctest::Approx(1.0 / 3.0));
    // ties across samples must be stepped through together
    CHECK(ks_distance(std::vector<double>{0, 0, 1, 1}, std::vector<double>{0, 1}) == 0.0);
    CHECK_THROWS_AS(ks_distance(std::vector<double>{}, a), ParameterError);
}

TEST_CASE("KS distance is a metric in [0, 1] and matches brute force") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> size(1, 60);
    std::uniform_int_distribution<int> lattice(0, 9);  // forces ties
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(size(rng)), b(size(rng)), c(size(rng));
        for (auto* s : {&a, &b, &c}) {
            for (auto& v : *s) v = trial % 2 ? lattice(rng) : std::normal_distribution<double>()(rng);
        }
        const double ab = ks_distance(a, b);
        CHECK(ab == doctest::Approx(ks_brute(a, b)).epsilon(1e-12));
        CHECK(ab == ks_distance(b, a));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK(ab <= ks_distance(a, c) + ks_distance(c, b) + 1e-12);
    }
}

TEST_CASE("summary statistics") {
    const std::vector<double> v{4, 1, 3, 2};
    const auto s = summarize(v);
    CHECK(s.sorted == std::vector<double>{1, 2, 3, 4});
    CHECK(s.mean == 2.5);
    CHECK(s.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(s.se == doctest::Approx(std::sqrt(5.0 / 12.0)));
    CHECK(s.ecdf(2.0) == 0.5);
    CHECK(s.ecdf(0.0) == 0.0);
    CHECK(s.quantile(0.5) == 2.5);
    CHECK(s.quantile(1.0) == 4.0);
    CHECK_THROWS_AS(summarize(std::vector<double>{1.0}), ParameterError);

    const MeanEstimate exact{0.0, 0.0};
    CHECK(exact.within(0.0, 3.0));
    CHECK_FALSE(MeanEstimate{1e-300, 0.0}.within(0.0, 3.0));
}

TEST_CASE("martingale battery") {
    const std::vector<double> probes{1.0, 3.0};
    SUBCASE("needs s < t") {
        const std::vector<MartingaleSample> m(4);
        CHECK_THROWS_AS(martingale_battery(m, 3.0, 3.0), ParameterError);
    }
    SUBCASE("the queue martingale passes") {
        const int n = 100;
        const auto sys = scale_system(fixtures::two_level(), n);
        const auto spec = make_renewal_spec(Family::gamma, {2.0});
        const auto obs = run_replications(1500, 1, [&](std::size_t r) {
            return observe_queue(sys, spec, spec, 3.0, probes, queue_streams(17, n, r));
        });
        std::vector<MartingaleSample> m;
        for (const auto& o : obs) m.push_back({o.x_hat_probe[0], o.m_probe[0], o.m_probe[1]});
        const auto rep = martingale_battery(m, 1.0, 3.0);
        CHECK(rep.entries.size() == 4);
        for (const auto& e : rep.entries) {
            CAPTURE(e.name);
            CHECK(e.pass);
        }
    }
    SUBCASE("a drifting process in place of M is rejected") {
        const CoefficientField c({1.0}, {0.0, -1.0, -1.0}, {1.0, 1.0, 1.0});
        SdeObservableSpec spec;
        spec.probe_times = {1.0, 2.0};
        std::vector<MartingaleSample> m;
        for (std::size_t r = 0; r < 500; ++r) {
            const auto o = observe_sde(Scheme::projected, c, 5.0, 2.0, 1e-2, Stream(300 + r), spec);
            m.push_back({o.x_probe[0], o.x_probe[0], o.x_probe[1]});
        }
        const auto rep = martingale_battery(m, 1.0, 2.0);
        CHECK_FALSE(rep.pass());
        CHECK_FALSE(rep.entries[0].pass);
    }
}

TEST_CASE("quadratic variation against the occupation surrogate") {
    const int n = 400;
    const double T = 5.0;
    const auto sys = scale_system(fixtures::two_level(), n);
    const auto spec = fixtures::exponential();
    std::vector<DecompositionRecord> records;
    std::vector<QueuePath> paths;
    for (std::size_t r = 0; r < 400; ++r) {
        paths.push_back(simulate_queue(sys, spec, spec, T, queue_streams(5, n, r)));
        records.push_back(build_record(paths.back(), spec, spec));
    }
    const double budget = 4.0 / n;

    const auto at_zero = qv_match_test(records, paths, 1.0, 1.0, 0.0, 0.0);
    CHECK(at_zero.difference.mean == 0.0);
    CHECK(at_zero.pass);

    const auto rep = qv_match_test(records, paths, 1.0, 1.0, T, budget);
    CHECK(rep.pass);

    std::vector<QvObservation> obs;
    for (std::size_t r = 0; r < records.size(); ++r) obs.push_back(qv_observation(records[r], paths[r], T));
    auto w = qv_weights(sys, 1.0, 1.0);
    CHECK(w[0] == doctest::Approx(1.0));
    CHECK(w[2] == doctest::Approx(2.0 + 2.0 / 20.0));
    for (auto& x : w) x *= 2.0;
    CHECK_FALSE(qv_match_test(obs, w, T, budget).pass);

    CHECK_THROWS_AS(qv_match_test(std::span(records).first(3), std::span(paths).first(2), 1.0, 1.0, T, budget),
                    ParameterError);
}

TEST_CASE("convergence report") {
    const std::size_t R = 2000;
    TerminalSamples sde{5.0, normals(R, 0.0, 1), normals(R, 1.0, 2)};
    std::map<int, TerminalSamples> queue;
    queue[10] = {5.0, normals(R, 0.5, 3), normals(R, 1.5, 4)};
    CHECK_THROWS_AS(convergence_report(queue, sde), ParameterError);

    queue[1000] = {5.0, normals(R, 0.0, 5), normals(R, 1.0, 6)};
    const auto rep = convergence_report(queue, sde);
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.rows[0].n == 10);
    CHECK(rep.monotone);
    // two independent samples of one law: the 95% KS critical value, with slack
    CHECK(rep.rows[1].ks <= 1.36 * std::sqrt(2.0 / R) * 1.5);
    CHECK(rep.rows[0].boundary_gap == doctest::Approx(0.5).epsilon(0.2));
    CHECK(rep.pass());

    queue[1000].horizon = 4.0;
    CHECK_THROWS_AS(convergence_report(queue, sde), ParameterError);
}
