#include "mlq/sde.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mlq/errors.hpp"

namespace mlq {

CoefficientField::CoefficientField(std::vector<double> thresholds, std::vector<double> drift,
                                   std::vector<double> diffusion, bool allow_degenerate)
    : thresholds_(std::move(thresholds)), drift_(std::move(drift)), diffusion_(std::move(diffusion)) {
    if (drift_.size() != thresholds_.size() + 2 || diffusion_.size() != drift_.size()) {
        throw ParameterError("coefficients", "need K+1 drift and diffusion values for K-1 thresholds");
    }
    double prev = 0.0;
    for (double l : thresholds_) {
        if (!(l > prev) || !std::isfinite(l)) throw ParameterError("thresholds", "must be positive and increasing");
        prev = l;
    }
    for (std::size_t i = 0; i < drift_.size(); ++i) {
        if (!std::isfinite(drift_[i])) throw ParameterError("b_" + std::to_string(i), "drift must be finite");
        const double s = diffusion_[i];
        const bool ok = allow_degenerate ? s >= 0.0 : s > 0.0;
        if (!ok || !std::isfinite(s)) {
            throw ParameterError("sigma_" + std::to_string(i), "diffusion coefficient must be positive");
        }
    }
}

CoefficientField make_coefficients(const LevelStructure& levels, const RenewalSpec& arrivals,
                                   const RenewalSpec& services) {
    levels.validate();
    const int K = levels.levels();
    std::vector<double> drift(K + 1, 0.0);
    std::vector<double> diffusion(K + 1, 0.0);
    diffusion[0] = std::sqrt(levels.lambda0) * std::sqrt(arrivals.variance());
    for (int i = 1; i <= K; ++i) {
        drift[i] = levels.drift(i);
        diffusion[i] =
            std::sqrt(levels.lambda[i - 1] * arrivals.variance() + levels.mu[i - 1] * services.variance());
    }
    return CoefficientField(levels.thresholds, std::move(drift), std::move(diffusion));
}

std::string_view scheme_name(Scheme s) noexcept { return s == Scheme::projected ? "projected" : "mirror"; }

std::string_view boundary_mode_name(BoundaryMode m) noexcept { return m == BoundaryMode::grid ? "grid" : "bridge"; }

BoundaryMode parse_boundary_mode(std::string_view name) {
    if (name == "grid") return BoundaryMode::grid;
    if (name == "bridge") return BoundaryMode::bridge;
    throw ParameterError("projection", "expected 'grid' or 'bridge', got '" + std::string(name) + "'");
}

std::size_t grid_steps(double horizon, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("dt", "must be positive");
    if (!(horizon >= dt) || !std::isfinite(horizon)) throw ParameterError("horizon", "must be at least dt");
    const double ratio = horizon / dt;
    const double steps = std::round(ratio);
    if (std::abs(ratio - steps) > 1e-6) throw ParameterError("dt", "horizon must be a whole number of steps");
    return static_cast<std::size_t>(steps);
}

namespace {

struct StreamNoise {
    Stream& stream;
    double root_dt;
    std::normal_distribution<double> normal{0.0, 1.0};

    double increment(std::size_t) { return root_dt * normal(stream); }
    double uniform(std::size_t) { return stream.uniform_open(); }
};

struct FixedNoise {
    std::span<const double> dw;
    std::span<const double> u;

    double increment(std::size_t k) const { return dw[k]; }
    double uniform(std::size_t k) const { return u.empty() ? 0.5 : u[k]; }
};

template <class Noise, class Observer>
void run_projected(const CoefficientField& c, double x0, std::size_t steps, double dt, Noise& noise,
                   BoundaryMode mode, Observer& obs) {
    double x = x0;
    double l = 0.0;
    obs.state(0, x, l, x);
    for (std::size_t k = 0; k < steps; ++k) {
        const int lvl = c.level_of(x);
        const double b = c.drift_values()[lvl];
        const double s = c.diffusion_values()[lvl];
        const double dw = noise.increment(k);
        const double next = x + b * dt + s * dw;
        double push = 0.0;
        if (mode == BoundaryMode::grid) {
            push = next < 0.0 ? -next : 0.0;
        } else {
            const double u = noise.uniform(k);
            const double gap = next - x;
            const double low = 0.5 * (x + next - std::sqrt(gap * gap - 2.0 * s * s * dt * std::log(u)));
            push = low < 0.0 ? -low : 0.0;
        }
        x = push > 0.0 ? std::max(0.0, next + push) : next;
        l += push;
        obs.noise(k, dw);
        obs.state(k + 1, x, l, x);
    }
}

template <class Noise, class Observer>
void run_mirror(const CoefficientField& c, double x0, std::size_t steps, double dt, Noise& noise, Observer& obs) {
    double q = x0;
    double l = 0.0;
    obs.state(0, std::abs(q), l, q);
    for (std::size_t k = 0; k < steps; ++k) {
        const double x = std::abs(q);
        const int lvl = c.level_of(x);
        const double b = c.drift_values()[lvl];
        const double s = c.diffusion_values()[lvl];
        const double sg = CoefficientField::sgn(q);
        const double dw = noise.increment(k);
        q += sg * b * dt + sg * s * dw;
        const double xn = std::abs(q);
        // discrete Tanaka residual; negative values are rounding only
        const double inc = xn - x - b * dt - sg * s * dw;
        if (inc > 0.0) l += inc;
        obs.noise(k, dw);
        obs.state(k + 1, xn, l, q);
    }
}

struct PathRecorder {
    SdeGridPath& path;
    bool keep_q;
    void state(std::size_t k, double x, double l, double q) {
        path.x[k] = x;
        path.l[k] = l;
        if (keep_q) path.q[k] = q;
    }
    void noise(std::size_t k, double dw) { path.noise[k] = dw; }
};

SdeGridPath empty_path(Scheme scheme, double x0, double dt, std::size_t steps) {
    if (!(x0 >= 0.0) || !std::isfinite(x0)) throw ParameterError("x0", "initial value must be >= 0");
    SdeGridPath p;
    p.scheme = scheme;
    p.dt = dt;
    p.x0 = x0;
    p.x.resize(steps + 1);
    p.l.resize(steps + 1);
    p.noise.resize(steps);
    if (scheme == Scheme::mirror) p.q.resize(steps + 1);
    return p;
}

}  // namespace

SdeGridPath solve_projected(const CoefficientField& coeffs, double x0, double horizon, double dt, Stream& stream,
                            BoundaryMode mode) {
    const std::size_t steps = grid_steps(horizon, dt);
    SdeGridPath p = empty_path(Scheme::projected, x0, dt, steps);
    StreamNoise noise{stream, std::sqrt(dt)};
    PathRecorder rec{p, false};
    run_projected(coeffs, x0, steps, dt, noise, mode, rec);
    return p;
}

SdeGridPath solve_mirror(const CoefficientField& coeffs, double x0, double horizon, double dt, Stream& stream) {
    const std::size_t steps = grid_steps(horizon, dt);
    SdeGridPath p = empty_path(Scheme::mirror, x0, dt, steps);
    StreamNoise noise{stream, std::sqrt(dt)};
    PathRecorder rec{p, true};
    run_mirror(coeffs, x0, steps, dt, noise, rec);
    return p;
}

SdeGridPath solve_projected(const CoefficientField& coeffs, double x0, double dt, std::span<const double> noise,
                            BoundaryMode mode, std::span<const double> uniforms) {
    if (!(dt > 0.0)) throw ParameterError("dt", "must be positive");
    if (mode == BoundaryMode::bridge && !uniforms.empty() && uniforms.size() < noise.size()) {
        throw ParameterError("uniforms", "need one uniform per step");
    }
    SdeGridPath p = empty_path(Scheme::projected, x0, dt, noise.size());
    FixedNoise src{noise, uniforms};
    PathRecorder rec{p, false};
    run_projected(coeffs, x0, noise.size(), dt, src, mode, rec);
    return p;
}

SdeGridPath solve_mirror(const CoefficientField& coeffs, double x0, double dt, std::span<const double> noise) {
    if (!(dt > 0.0)) throw ParameterError("dt", "must be positive");
    SdeGridPath p = empty_path(Scheme::mirror, x0, dt, noise.size());
    FixedNoise src{noise, {}};
    PathRecorder rec{p, true};
    run_mirror(coeffs, x0, noise.size(), dt, src, rec);
    return p;
}

double local_time_estimate(const SdeGridPath& path, double a, double eps, const CoefficientField& coeffs) {
    if (!(eps > 0.0)) throw ParameterError("eps", "must be positive");
    double total = 0.0;
    for (std::size_t k = 0; k < path.steps(); ++k) {
        const double x = path.x[k];
        if (x >= a && x < a + eps) {
            const double s = coeffs.diffusion(x);
            total += s * s;
        }
    }
    return total * path.dt / eps;
}

double threshold_occupation(const SdeGridPath& path, double level, double eps, double horizon) {
    if (!(eps > 0.0)) throw ParameterError("eps", "must be positive");
    double total = 0.0;
    for (std::size_t k = 0; k < path.steps(); ++k) {
        const double t0 = path.time(k);
        if (t0 >= horizon) break;
        const double len = std::min(path.dt, horizon - t0);
        if (std::abs(path.x[k] - level) <= eps) total += len;
    }
    return total;
}

double threshold_occupation(const CadlagPath& path, double level, double eps, double horizon) {
    if (!(eps > 0.0)) throw ParameterError("eps", "must be positive");
    const double lo = level - eps;
    const double hi = level + eps;
    const double T = std::min(horizon, path.end());
    double total = 0.0;
    for (std::size_t k = 0; k < path.segments() && path.times()[k] < T; ++k) {
        const double t0 = path.times()[k];
        const double t1 = k + 1 < path.segments() ? std::min(path.times()[k + 1], T) : T;
        const double h = t1 - t0;
        const double v = path.values()[k];
        const double s = path.slopes()[k];
        if (s == 0.0) {
            if (v >= lo && v <= hi) total += h;
            continue;
        }
        // portion of [0, h] where v + s*tau lies in [lo, hi]
        double a = (lo - v) / s;
        double b = (hi - v) / s;
        if (a > b) std::swap(a, b);
        total += std::max(0.0, std::min(b, h) - std::max(a, 0.0));
    }
    return total;
}

namespace {

struct ObservableCollector {
    const CoefficientField& coeffs;
    const SdeObservableSpec& spec;
    std::vector<std::size_t> probe_steps;
    std::size_t steps;
    double dt;
    SdeObservables out;

    void state(std::size_t k, double x, double l, double) {
        for (std::size_t p = 0; p < probe_steps.size(); ++p) {
            if (probe_steps[p] == k) {
                out.x_probe[p] = x;
                out.l_probe[p] = l;
            }
        }
        if (k == steps) {
            out.x_end = x;
            out.l_end = l;
            return;
        }
        if (!spec.local_time_eps.empty() && x >= spec.local_time_level) {
            const double s = coeffs.diffusion(x);
            for (std::size_t e = 0; e < spec.local_time_eps.size(); ++e) {
                if (x < spec.local_time_level + spec.local_time_eps[e]) {
                    out.local_time[e] += s * s * dt / spec.local_time_eps[e];
                }
            }
        }
        for (std::size_t e = 0; e < spec.occupation_eps.size(); ++e) {
            if (std::abs(x - spec.occupation_level) <= spec.occupation_eps[e]) out.occupation[e] += dt;
        }
    }
    void noise(std::size_t, double) {}
};

}  // namespace

SdeObservables observe_sde(Scheme scheme, const CoefficientField& coeffs, double x0, double horizon, double dt,
                           Stream stream, const SdeObservableSpec& spec, BoundaryMode mode) {
    if (!(x0 >= 0.0)) throw ParameterError("x0", "initial value must be >= 0");
    const std::size_t steps = grid_steps(horizon, dt);
    for (double e : spec.local_time_eps) {
        if (!(e > 0.0)) throw ParameterError("eps", "must be positive");
    }
    ObservableCollector obs{coeffs, spec, {}, steps, dt, {}};
    for (double t : spec.probe_times) {
        if (t < 0.0 || t > horizon) throw ParameterError("probe_times", "probe outside [0, horizon]");
        obs.probe_steps.push_back(static_cast<std::size_t>(std::llround(t / dt)));
    }
    obs.out.x_probe.assign(spec.probe_times.size(), 0.0);
    obs.out.l_probe.assign(spec.probe_times.size(), 0.0);
    obs.out.local_time.assign(spec.local_time_eps.size(), 0.0);
    obs.out.occupation.assign(spec.occupation_eps.size(), 0.0);

    StreamNoise noise{stream, std::sqrt(dt)};
    if (scheme == Scheme::projected) {
        run_projected(coeffs, x0, steps, dt, noise, mode, obs);
    } else {
        run_mirror(coeffs, x0, steps, dt, noise, obs);
    }
    return std::move(obs.out);
}

}  // namespace mlq
