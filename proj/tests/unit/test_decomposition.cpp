#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "mlq/decomposition.hpp"
#include "mlq/errors.hpp"
#include "mlq/experiment.hpp"

using namespace mlq;

TEST_CASE("centered marks") {
    CHECK(centered_marks(std::vector<double>{1, 1, 1}) == std::vector<double>{0, 0, 0});
    CHECK(centered_marks(std::vector<double>{0.5, 2.0}) == std::vector<double>{0.5, -1.0});

    const auto spec = make_renewal_spec(Family::gamma, {3.0});
    Stream s(1);
    std::vector<double> marks(1'000'000);
    for (auto& z : marks) z = spec.sample(s);
    const auto zeta = centered_marks(marks);
    CHECK(std::abs(fixtures::mean(zeta)) <= 4.0 * std::sqrt(spec.variance()) / 1e3);
}

TEST_CASE("no arrivals means a flat arrival martingale") {
    const auto sys = scale_system(fixtures::two_level(), 4);
    const EpochSequence arr({10.0, 1.0});
    const EpochSequence svc({1.0});
    const auto path = simulate_queue(sys, arr, svc, 2.0);
    const auto rec = build_record(path, arr, svc, 4, 1.0, 1.0);
    for (std::size_t k = 0; k < rec.size(); ++k) CHECK(rec.m_a[k] == 0.0);
    CHECK(martingale_path(rec)(2.0) == 0.0);
}

TEST_CASE("martingale jumps on a hand fixture start at the first counted mark") {
    // Z_A = (2, 0.5, 1, 1), n = 4: arrivals at t = 0.5 (rate 4 from U = 0) and t = 0.625.
    // Jumps are n^{-1/2} zeta(1) = 0.25 and n^{-1/2} zeta(2) = 0.
    const auto sys = scale_system(fixtures::two_level(0.0, 0.0), 4);
    const EpochSequence arr({2.0, 0.5, 1.0, 1.0});
    const EpochSequence svc({100.0});
    const auto path = simulate_queue(sys, arr, svc, 0.8);
    REQUIRE(path.events().size() == 3);
    CHECK(path.events()[1].time == 0.5);
    CHECK(path.events()[2].time == 0.625);
    const auto rec = build_record(path, arr, svc, 4, 1.0, 1.0);
    CHECK(rec.m_a[1] == doctest::Approx(0.25));
    CHECK(rec.m_a[2] == doctest::Approx(0.25));
    CHECK(rec.qv_a[2] == doctest::Approx(0.0625));
    CHECK(rec.pqv_a[2] == doctest::Approx(0.5));
    // at t = 0.7: U = 2.5 + 4 * 0.075 = 2.8, next epoch 3.5, so R_A = 0.7;
    // V runs only while busy: V = 4 * 0.2 = 0.8, R_S = 99.2
    const auto snap = snapshot(rec, path, 0.7);
    CHECK(snap.e == doctest::Approx((0.7 - 99.2 - 2.0 + 100.0) / 2.0));
    CHECK_THROWS_AS(build_record(path, EpochSequence({2.0, 0.5}), svc, 4, 1.0, 1.0), CoverageError);
}

TEST_CASE("residuals are bounded by the consumed marks and e(0) = 0") {
    const auto spec = make_renewal_spec(Family::uniform_shifted, {0.5, 1.5});
    const auto sys = scale_system(fixtures::two_level(), 100);
    const auto path = simulate_queue(sys, spec, spec, 3.0, queue_streams(4, 100, 0));
    const auto rec = build_record(path, spec, spec);
    const auto za = path.arrival_epochs().marks();
    const double max_mark = *std::max_element(za.begin(), za.end());
    for (std::size_t k = 0; k < rec.size(); ++k) {
        CHECK(rec.residual_a[k] > 0.0);
        CHECK(rec.residual_a[k] <= max_mark);
    }
    CHECK(rec.error(0) == 0.0);
    const auto e = error_processes(rec, path, 100);
    CHECK(e.e(0.0) == 0.0);
    for (double t : {0.3, 1.1, 2.9}) CHECK(e.e(t) == doctest::Approx(snapshot(rec, path, t).e).epsilon(1e-9));
}

TEST_CASE("the decomposition identity holds pathwise") {
    const std::vector<RenewalSpec> specs{
        fixtures::exponential(), make_renewal_spec(Family::gamma, {0.5}),
        make_renewal_spec(Family::lognormal, {1.0}), make_renewal_spec(Family::hyperexponential, {0.2, 0.3, 3.0})};
    for (const auto& spec : specs) {
        for (int n : {1, 400, 10000}) {
            const auto sys = scale_system(fixtures::two_level(), n);
            const auto path = simulate_queue(sys, spec, spec, 5.0, queue_streams(8, n, 0));
            const auto rec = build_record(path, spec, spec);
            const auto d = verify_dm_identity(rec, path, n);
            CAPTURE(n);
            CHECK(d.max() <= 1e-8 * (1.0 + static_cast<double>(path.events().back().a)));
        }
    }
}

TEST_CASE("unscaled identity for a bare renewal process") {
    Stream s(12);
    const auto seq = sample_epochs(make_renewal_spec(Family::gamma, {2.0}), 200.0, s);
    std::vector<double> times;
    for (int k = 0; k <= 2000; ++k) times.push_back(k * 0.1);
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) times.push_back(seq.epoch(i));
    CHECK(verify_dm_identity(seq, times) <= 1e-9 * 200.0);
}

TEST_CASE("a corrupted residual breaks the identity by at least the smallest mark") {
    const auto spec = fixtures::exponential();
    const auto sys = scale_system(fixtures::two_level(), 100);
    const auto path = simulate_queue(sys, spec, spec, 2.0, queue_streams(6, 100, 0));
    auto rec = build_record(path, spec, spec);
    const auto marks = path.arrival_epochs().marks();
    const double min_mark = *std::min_element(marks.begin(), marks.end());
    rec.residual_a[rec.size() / 2] += std::max(min_mark, 1e-3);
    CHECK(verify_dm_identity(rec, path, 100).arrival >= min_mark);
}

TEST_CASE("quadratic variations") {
    SUBCASE("square of the jumps") {
        // two arrivals with zeta = (0.5, -1): [M_A] = (0.25 + 1) / n
        const auto sys = scale_system(fixtures::two_level(0.0, 0.0), 1);
        const EpochSequence arr({1.0, 0.5, 2.0, 5.0});
        const EpochSequence svc({50.0});
        const auto path = simulate_queue(sys, arr, svc, 3.4);
        const auto rec = build_record(path, arr, svc, 1, 1.0, 1.0);
        REQUIRE(path.events().back().a == 2);
        CHECK(optional_qv(rec).qv_a(3.4) == doctest::Approx(1.25));
        CHECK(cross_variation(martingale_path(rec), martingale_path(rec), 3.4) == doctest::Approx(1.25));
    }
    SUBCASE("continuous laws never share jump times") {
        const auto spec = fixtures::exponential();
        const auto sys = scale_system(fixtures::two_level(), 400);
        for (std::size_t r = 0; r < 20; ++r) {
            const auto path = simulate_queue(sys, spec, spec, 5.0, queue_streams(1, 400, r));
            const auto rec = build_record(path, spec, spec);
            for (double c : rec.qv_cross) CHECK(c == 0.0);
            const auto q = optional_qv(rec);
            CHECK(q.total(5.0) == doctest::Approx(q.qv_a(5.0) + q.qv_s(5.0)));
        }
    }
    SUBCASE("a simultaneous event contributes the product of its jumps") {
        const auto sys = scale_system(fixtures::two_level(0.0, 0.0), 1);
        const EpochSequence arr({1.0, 1.0, 3.0, 1.0});
        const EpochSequence svc({1.0, 0.5, 1.0});
        const auto path = simulate_queue(sys, arr, svc, 2.4);
        REQUIRE(path.events().size() == 3);
        CHECK(path.events()[2].time == 2.0);
        CHECK(path.events()[2].arrivals == 1);
        CHECK(path.events()[2].departures == 1);
        const auto rec = build_record(path, arr, svc, 1, 1.0, 1.0);
        CHECK(rec.qv_cross[2] == -1.0);  // (1 - 3) * (1 - 0.5)
        CHECK(rec.qv(2) == doctest::Approx(0.0 + 4.0 + 0.25 + 2.0));
        const auto q = optional_qv(rec);
        CHECK(cross_variation(q.qv_a, q.qv_a, 2.4) >= 0.0);
    }
}

TEST_CASE("martingale moments over an ensemble") {
    const int n = 400;
    const auto spec = make_renewal_spec(Family::gamma, {2.0});
    const auto sys = scale_system(fixtures::two_level(), n);
    std::vector<double> m, m_a_sq, pqv_a, cross;
    const double t = 3.0;
    const std::vector<double> probes{t};
    for (std::size_t r = 0; r < 3000; ++r) {
        const auto path = simulate_queue(sys, spec, spec, t, queue_streams(21, n, r));
        const auto rec = build_record(path, spec, spec);
        const auto k = rec.index_at(t);
        m.push_back(rec.m[k]);
        m_a_sq.push_back(rec.m_a[k] * rec.m_a[k]);
        pqv_a.push_back(rec.pqv_a[k]);
        cross.push_back(rec.qv_cross[k]);
    }
    CHECK(std::abs(fixtures::mean(m)) <= 3.0 * fixtures::stderr_of(m));
    std::vector<double> diff(m_a_sq.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = m_a_sq[i] - pqv_a[i];
    CHECK(std::abs(fixtures::mean(diff)) <= 3.0 * fixtures::stderr_of(diff));
    CHECK(fixtures::mean(cross) == 0.0);
}
