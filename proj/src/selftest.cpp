#include "mlq/selftest.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "mlq/analysis.hpp"
#include "mlq/decomposition.hpp"
#include "mlq/errors.hpp"
#include "mlq/experiment.hpp"
#include "mlq/io.hpp"
#include "mlq/queue_sim.hpp"
#include "mlq/reflection.hpp"
#include "mlq/sde.hpp"

namespace mlq {

namespace {

bool near(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

template <class E, class F>
bool throws(F&& f) {
    try {
        f();
    } catch (const E&) {
        return true;
    }
    return false;
}

LevelStructure two_level(double mu_hat1, double mu_hat2) {
    LevelStructure l;
    l.thresholds = {1.0};
    l.lambda = {1.0, 1.0};
    l.mu = {1.0, 1.0};
    l.lambda0 = 1.0;
    l.lambda_hat = {0.0, 0.0};
    l.mu_hat = {mu_hat1, mu_hat2};
    return l;
}

/// Max |a(t) - b(t)| over a dense grid including left limits at breakpoints.
double grid_gap(const CadlagPath& a, std::function<double(double)> b, double horizon) {
    double worst = 0.0;
    for (int k = 0; k <= 1000; ++k) {
        const double t = horizon * k / 1000.0;
        worst = std::max(worst, std::abs(a(t) - b(t)));
    }
    return worst;
}

using Fixture = std::pair<const char*, std::function<bool(std::string&)>>;

std::vector<Fixture> fixtures() {
    std::vector<Fixture> f;

    f.emplace_back("renewal_spec_variances", [](std::string& d) {
        const auto e = make_renewal_spec(Family::exponential, {3.0});
        const auto g = make_renewal_spec(Family::gamma, {4.0});
        const auto l = make_renewal_spec(Family::lognormal, {0.5});
        d = "gamma " + format_double(g.variance()) + ", lognormal " + format_double(l.variance());
        return e.mean() == 1.0 && e.variance() == 1.0 && near(g.variance(), 0.25) &&
               near(l.variance(), std::expm1(0.25));
    });
    f.emplace_back("deterministic_rejected", [](std::string&) {
        return throws<ParameterError>([] { make_renewal_spec(Family::deterministic, {}); });
    });
    f.emplace_back("renewal_count_definition", [](std::string&) {
        EpochSequence ones(std::vector<double>(6, 1.0));
        EpochSequence uneven({0.75, 2.0});
        return renewal_count(uneven, 0.5) == 0 && renewal_count(uneven, 0.75) == 1 && renewal_count(ones, 2.5) == 2 &&
               throws<CoverageError>([&] { renewal_count(uneven, 3.0); });
    });
    f.emplace_back("sample_epochs_zero_horizon", [](std::string&) {
        Stream s(7);
        const auto seq = sample_epochs(make_renewal_spec(Family::exponential, {}), 0.0, s);
        return seq.size() == 1 && seq.epoch(0) > 0.0;
    });
    f.emplace_back("scale_system_substitution", [](std::string&) {
        const auto sys = scale_system(two_level(1.0, 1.0), 100);
        return sys.arrival_rate[1] == 100.0 && sys.service_rate[1] == 110.0 && sys.thresholds[1] == 10 &&
               sys.service_rate[0] == 0.0;
    });
    f.emplace_back("scale_system_negative_rate", [](std::string& d) {
        try {
            scale_system(two_level(-2.0, -2.0), 1);
        } catch (const ParameterError& e) {
            d = e.what();
            return e.key() == "mu_hat_1";
        }
        return false;
    });
    f.emplace_back("empty_system_run", [](std::string&) {
        const auto sys = scale_system(two_level(1.0, 1.0), 4);
        EpochSequence arr({10.0});
        EpochSequence svc({1.0});
        const auto path = simulate_queue(sys, arr, svc, 1.0);
        const auto h = occupation_times(path, 1.0);
        const auto s = diffusion_scale(path);
        return path.events().size() == 1 && h[0] == 1.0 && h[1] == 0.0 && path.arrivals_at(1.0) == 0 &&
               near(s.i_hat(1.0), 2.0) && s.x_hat(1.0) == 0.0;
    });
    f.emplace_back("seeded_path_invariants", [](std::string& d) {
        const auto levels = two_level(1.0, 2.0);
        const auto sys = scale_system(levels, 400);
        const auto spec = make_renewal_spec(Family::exponential, {});
        auto path = simulate_queue(sys, spec, spec, 5.0, queue_streams(42, 400, 0));
        const auto rec = build_record(path, spec, spec);
        const double dm = verify_dm_identity(rec, path, 400).max();
        const double bound = 1e-8 * (1.0 + static_cast<double>(path.events().back().a));
        const double flow = verify_flow_balance(path);
        auto& ev = path.mutable_events();
        ev.erase(ev.begin() + static_cast<long>(ev.size() / 2));
        const double mutated = verify_flow_balance(path);
        d = "dm defect " + format_double(dm) + ", mutated flow defect " + format_double(mutated);
        return dm <= bound && flow == 0.0 && mutated >= 1.0;
    });
    f.emplace_back("martingale_jumps_fixture", [](std::string& d) {
        // Z_A = (2, 0.5, 1, ...): the first two arrivals contribute zeta(1), zeta(2) = 0.5, 0
        const auto sys = scale_system(two_level(0.0, 0.0), 4);
        EpochSequence arr({2.0, 0.5, 1.0, 1.0});
        EpochSequence svc({100.0});
        const auto path = simulate_queue(sys, arr, svc, 0.8);
        const auto rec = build_record(path, arr, svc, 4, 1.0, 1.0);
        d = "M_A after events: " + format_double(rec.m_a[1]) + ", " + format_double(rec.m_a[2]);
        return path.events().back().a == 2 && near(rec.m_a[1], 0.25) && near(rec.m_a[2], 0.25) && rec.m_a[0] == 0.0;
    });
    f.emplace_back("cross_variation_tie", [](std::string& d) {
        const auto sys = scale_system(two_level(0.0, 0.0), 1);
        EpochSequence arr({1.0, 1.0, 3.0, 1.0});
        EpochSequence svc({1.0, 0.5, 1.0});
        const auto path = simulate_queue(sys, arr, svc, 2.5);
        const auto rec = build_record(path, arr, svc, 1, 1.0, 1.0);
        const double cross = rec.qv_cross.back();
        d = "cross variation " + format_double(cross);
        return path.events()[2].arrivals == 1 && path.events()[2].departures == 1 && near(cross, -1.0);
    });
    f.emplace_back("skorokhod_identity", [](std::string&) {
        const auto r = skorokhod_map(CadlagPath::linear(0.0, 1.0, 2.0));
        return grid_gap(r.phi, [](double t) { return t; }, 2.0) < 1e-12 &&
               grid_gap(r.eta, [](double) { return 0.0; }, 2.0) == 0.0;
    });
    f.emplace_back("skorokhod_decreasing", [](std::string&) {
        const auto r = skorokhod_map(CadlagPath::linear(0.0, -1.0, 2.0));
        return grid_gap(r.phi, [](double) { return 0.0; }, 2.0) < 1e-12 &&
               grid_gap(r.eta, [](double t) { return t; }, 2.0) < 1e-12;
    });
    f.emplace_back("skorokhod_v_shape", [](std::string&) {
        const CadlagPath psi({0.0, 1.0}, {1.0, -1.0}, {-2.0, 2.0}, 2.0);
        const auto r = skorokhod_map(psi);
        const auto eta = [](double t) { return t <= 1.0 ? std::max(0.0, 2.0 * t - 1.0) : 1.0; };
        return grid_gap(r.eta, eta, 2.0) < 1e-12 &&
               grid_gap(r.phi, [&](double t) { return psi(t) + eta(t); }, 2.0) < 1e-12;
    });
    f.emplace_back("complementarity_cases", [](std::string&) {
        const auto zero = CadlagPath::constant(0.0, 3.0);
        const auto ramp = CadlagPath::linear(0.0, 1.0, 3.0);
        const auto one = CadlagPath::constant(1.0, 3.0);
        return complementarity_defect(zero, ramp, 3.0) == 0.0 && complementarity_defect(ramp, zero, 3.0) == 0.0 &&
               near(complementarity_defect(one, ramp, 3.0), 3.0);
    });
    f.emplace_back("path_functionals_cases", [](std::string&) {
        const auto c = path_functionals(CadlagPath::constant(-2.0, 1.0), 1.0, 0.5);
        const auto j = path_functionals(CadlagPath::step({0.0, 1.0}, {0.0, 1.0}, 2.0), 2.0, 0.5);
        const auto l = path_functionals(CadlagPath::linear(0.0, 1.0, 1.0), 1.0, 0.25);
        return c.sup_norm == 2.0 && c.modulus == 0.0 && j.modulus == 1.0 && near(l.sup_norm, 1.0) &&
               near(l.modulus, 0.25);
    });
    f.emplace_back("coefficients_substitution", [](std::string&) {
        const auto spec = make_renewal_spec(Family::exponential, {});
        const auto c = make_coefficients(two_level(1.0, 1.0), spec, spec);
        return near(c.diffusion(0.5), std::sqrt(2.0)) && near(c.diffusion(3.0), std::sqrt(2.0)) &&
               c.drift(1.0) == -1.0 && c.mirror_diffusion(-0.5) == -c.diffusion(0.5) && c.mirror_drift(0.0) == 0.0;
    });
    f.emplace_back("projected_deterministic_drift", [](std::string& d) {
        const CoefficientField c({1.0}, {-1.0, -1.0, -1.0}, {0.0, 0.0, 0.0}, true);
        const double dt = 0.25;
        const std::vector<double> dw(12, 0.0);
        const auto p = solve_projected(c, 1.0, dt, dw);
        bool ok = true;
        for (std::size_t k = 0; k < p.x.size(); ++k) ok = ok && near(p.x[k], std::max(0.0, 1.0 - k * dt));
        d = "L(T) = " + format_double(p.l.back());
        return ok && near(p.l.back(), 2.0);
    });
    f.emplace_back("projected_zero_noise", [](std::string&) {
        const CoefficientField c({1.0}, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
        const std::vector<double> dw(20, 0.0);
        const auto p = solve_projected(c, 0.7, 0.1, dw);
        for (std::size_t k = 0; k < p.x.size(); ++k) {
            if (p.x[k] != 0.7 || p.l[k] != 0.0) return false;
        }
        return true;
    });
    f.emplace_back("mirror_away_from_boundary", [](std::string&) {
        const CoefficientField c({1.0}, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
        const double dt = 0.01;
        std::vector<double> dw(50);
        for (std::size_t k = 0; k < dw.size(); ++k) dw[k] = (k % 2 ? -1.0 : 1.0) * std::sqrt(dt);
        const auto p = solve_mirror(c, 1.0, dt, dw);
        for (std::size_t k = 0; k < p.x.size(); ++k) {
            if (p.x[k] != std::abs(p.q[k]) || p.l[k] > 1e-12) return false;
        }
        return true;
    });
    f.emplace_back("estimators_trivial", [](std::string&) {
        const CoefficientField c({1.0}, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
        const std::vector<double> dw(10, 0.0);
        const auto p = solve_projected(c, 2.0, 0.1, dw);
        const auto at = CadlagPath::constant(1.0, 3.0);
        const auto far = CadlagPath::constant(2.0, 3.0);
        return local_time_estimate(p, 0.0, 0.05, c) == 0.0 && threshold_occupation(far, 1.0, 0.1, 3.0) == 0.0 &&
               threshold_occupation(at, 1.0, 0.1, 3.0) == 3.0;
    });
    f.emplace_back("ks_examples", [](std::string&) {
        const std::vector<double> a{0.3, 0.1, 0.2};
        const std::vector<double> zeros(4, 0.0), ones(3, 1.0);
        const std::vector<double> s1{0.0, 1.0}, s2{0.5};
        return ks_distance(a, a) == 0.0 && ks_distance(zeros, ones) == 1.0 && ks_distance(s1, s2) == 0.5;
    });
    f.emplace_back("battery_constant_paths", [](std::string&) {
        const std::vector<MartingaleSample> s(10, MartingaleSample{1.0, 0.5, 0.5});
        const auto r = martingale_battery(s, 1.0, 2.0);
        for (const auto& e : r.entries) {
            if (e.estimate.mean != 0.0 || e.estimate.se != 0.0 || !e.pass) return false;
        }
        return true;
    });
    f.emplace_back("convergence_report_needs_grid", [](std::string&) {
        TerminalSamples sde{5.0, {0.1, 0.2}, {0.1, 0.2}};
        return throws<ParameterError>([&] { convergence_report({}, sde); });
    });
    return f;
}

}  // namespace

std::vector<SelftestResult> run_selftest() {
    std::vector<SelftestResult> out;
    for (auto& [name, check] : fixtures()) {
        SelftestResult r;
        r.name = name;
        try {
            r.pass = check(r.detail);
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("threw: ") + e.what();
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace mlq
