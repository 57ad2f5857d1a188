#include "mlq/queue_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mlq/errors.hpp"

namespace mlq {

namespace {

std::string level_key(const char* name, std::size_t i) { return std::string(name) + "_" + std::to_string(i + 1); }

}  // namespace

void LevelStructure::validate() const {
    const std::size_t K = lambda.size();
    if (K < 2) throw ParameterError("lambda", "at least two levels (K >= 2) are required");
    if (mu.size() != K) throw ParameterError("mu", "expected " + std::to_string(K) + " entries");
    if (lambda_hat.size() != K) throw ParameterError("lambda_hat", "expected " + std::to_string(K) + " entries");
    if (mu_hat.size() != K) throw ParameterError("mu_hat", "expected " + std::to_string(K) + " entries");
    if (thresholds.size() != K - 1) {
        throw ParameterError("thresholds", "expected K-1 = " + std::to_string(K - 1) + " entries");
    }
    double prev = 0.0;
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!std::isfinite(thresholds[i]) || !(thresholds[i] > prev)) {
            throw ParameterError(level_key("threshold", i), "thresholds must be positive and strictly increasing");
        }
        prev = thresholds[i];
    }
    if (!std::isfinite(lambda0) || !(lambda0 > 0.0)) throw ParameterError("lambda0", "must be positive");
    for (std::size_t i = 0; i < K; ++i) {
        if (!std::isfinite(lambda[i]) || !(lambda[i] > 0.0)) {
            throw ParameterError(level_key("lambda", i), "must be positive");
        }
        if (!std::isfinite(mu[i]) || !(mu[i] > 0.0)) throw ParameterError(level_key("mu", i), "must be positive");
        if (lambda[i] != mu[i]) {
            throw ParameterError(level_key("mu", i), "critical load requires lambda_i == mu_i at every level");
        }
        if (!std::isfinite(lambda_hat[i])) throw ParameterError(level_key("lambda_hat", i), "must be finite");
        if (!std::isfinite(mu_hat[i])) throw ParameterError(level_key("mu_hat", i), "must be finite");
    }
}

double ScaledSystem::scale() const noexcept { return std::sqrt(static_cast<double>(n)); }

ScaledSystem scale_system(const LevelStructure& levels, int n) {
    levels.validate();
    if (n < 1) throw ParameterError("n", "must be >= 1");
    const int K = levels.levels();
    const double root = std::sqrt(static_cast<double>(n));

    ScaledSystem sys;
    sys.n = n;
    sys.K = K;
    sys.thresholds.assign(K, 0);
    for (int i = 1; i < K; ++i) {
        sys.thresholds[i] = static_cast<std::int64_t>(std::ceil(root * levels.thresholds[i - 1]));
        if (sys.thresholds[i] <= sys.thresholds[i - 1]) {
            throw ParameterError("threshold_" + std::to_string(i),
                                 "scaled thresholds collapse at n = " + std::to_string(n));
        }
    }
    sys.arrival_rate.assign(K + 1, 0.0);
    sys.service_rate.assign(K + 1, 0.0);
    sys.arrival_rate[0] = n * levels.lambda0;
    for (int i = 1; i <= K; ++i) {
        const double la = n * levels.lambda[i - 1] + root * levels.lambda_hat[i - 1];
        const double mu = n * levels.mu[i - 1] + root * levels.mu_hat[i - 1];
        if (!(la > 0.0)) {
            throw ParameterError("lambda_hat_" + std::to_string(i),
                                 "scaled arrival rate lambda^n_" + std::to_string(i) + " = " + std::to_string(la) +
                                     " is not positive at n = " + std::to_string(n));
        }
        if (!(mu > 0.0)) {
            throw ParameterError("mu_hat_" + std::to_string(i),
                                 "scaled service rate mu^n_" + std::to_string(i) + " = " + std::to_string(mu) +
                                     " is not positive at n = " + std::to_string(n));
        }
        sys.arrival_rate[i] = la;
        sys.service_rate[i] = mu;
    }
    return sys;
}

QueuePath::QueuePath(ScaledSystem system, double horizon, std::vector<QueueEvent> events,
                     std::vector<double> occupation, EpochSequence arrival_epochs, EpochSequence service_epochs)
    : system_(std::move(system)),
      horizon_(horizon),
      events_(std::move(events)),
      occupation_(std::move(occupation)),
      arrival_epochs_(std::move(arrival_epochs)),
      service_epochs_(std::move(service_epochs)) {}

std::span<const double> QueuePath::occupation_at_event(std::size_t k) const {
    const std::size_t w = static_cast<std::size_t>(system_.K) + 1;
    return std::span<const double>(occupation_).subspan(k * w, w);
}

std::size_t QueuePath::event_index(double t) const {
    if (events_.empty()) throw CoverageError("empty queue path");
    if (t < 0.0 || t > horizon_) throw CoverageError("time outside the simulated horizon");
    const auto it = std::upper_bound(events_.begin(), events_.end(), t,
                                     [](double v, const QueueEvent& e) { return v < e.time; });
    return static_cast<std::size_t>(it - events_.begin()) - 1;
}

double QueuePath::u_at(double t) const {
    const auto& e = events_[event_index(t)];
    return e.u + system_.arrival_rate[system_.level_of(e.x)] * (t - e.time);
}

double QueuePath::v_at(double t) const {
    const auto& e = events_[event_index(t)];
    return e.v + system_.service_rate[system_.level_of(e.x)] * (t - e.time);
}

double QueuePath::arrival_residual_at(double t) const {
    const auto& e = events_[event_index(t)];
    return arrival_epochs_.epoch(static_cast<std::size_t>(e.a)) - u_at(t);
}

double QueuePath::service_residual_at(double t) const {
    const auto& e = events_[event_index(t)];
    return service_epochs_.epoch(static_cast<std::size_t>(e.d)) - v_at(t);
}

namespace {

class FixedEpochs {
public:
    explicit FixedEpochs(const EpochSequence& seq) : seq_(seq) {}
    double epoch(std::size_t i) const {
        if (i >= seq_.size()) throw CoverageError("epoch sequence exhausted before the horizon");
        return seq_.epochs()[i];
    }
    EpochSequence finish(std::size_t consumed) const {
        EpochSequence copy = seq_;
        copy.set_consumed(consumed);
        return copy;
    }

private:
    const EpochSequence& seq_;
};

template <class Arr, class Svc>
QueuePath run(const ScaledSystem& sys, Arr&& arr, Svc&& svc, double horizon) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ParameterError("horizon", "must be positive and finite");

    const std::size_t width = static_cast<std::size_t>(sys.K) + 1;
    constexpr double inf = std::numeric_limits<double>::infinity();

    std::vector<QueueEvent> events;
    std::vector<double> occupation;
    const double expected = horizon * (sys.arrival_rate[1] + sys.service_rate[1]);
    if (expected < 5e7) {
        events.reserve(static_cast<std::size_t>(expected * 1.1) + 16);
        occupation.reserve(events.capacity() * width);
    }

    std::vector<double> h(width, 0.0);
    QueueEvent state;
    events.push_back(state);
    occupation.insert(occupation.end(), h.begin(), h.end());

    double t = 0.0;
    while (true) {
        const int lvl = sys.level_of(state.x);
        const double la = sys.arrival_rate[lvl];
        const double mu = sys.service_rate[lvl];
        const double next_a = arr.epoch(static_cast<std::size_t>(state.a));
        const double dta = (next_a - state.u) / la;
        double next_d = inf;
        double dtd = inf;
        if (mu > 0.0) {
            next_d = svc.epoch(static_cast<std::size_t>(state.d));
            dtd = (next_d - state.v) / mu;
        }
        const double dt = std::min(dta, dtd);

        if (t + dt > horizon) {
            const double rest = horizon - t;
            h[lvl] += rest;
            break;
        }

        const bool fire_a = dta == dt;
        const bool fire_d = dtd == dt;
        t += dt;
        h[lvl] += dt;

        if (fire_a) {
            state.u = next_a;
        } else {
            state.u = std::min(state.u + la * dt, std::nextafter(next_a, -inf));
        }
        if (fire_d) {
            state.v = next_d;
        } else if (mu > 0.0) {
            state.v = std::min(state.v + mu * dt, std::nextafter(next_d, -inf));
        }
        state.time = t;
        state.arrivals = fire_a ? 1 : 0;
        state.departures = fire_d ? 1 : 0;
        state.a += state.arrivals;
        state.d += state.departures;
        state.x += static_cast<std::int64_t>(state.arrivals) - static_cast<std::int64_t>(state.departures);

        events.push_back(state);
        occupation.insert(occupation.end(), h.begin(), h.end());
    }

    const auto consumed_a = static_cast<std::size_t>(state.a) + 1;
    const auto consumed_d = static_cast<std::size_t>(state.d) + 1;
    // the service sequence is only guaranteed to exist up to the last queried epoch
    svc.epoch(static_cast<std::size_t>(state.d));
    return QueuePath(sys, horizon, std::move(events), std::move(occupation), arr.finish(consumed_a),
                     svc.finish(consumed_d));
}

}  // namespace

QueuePath simulate_queue(const ScaledSystem& sys, const RenewalSpec& arrivals, const RenewalSpec& services,
                         double horizon, StreamPair streams) {
    RenewalSource arr(arrivals, streams.arrivals);
    RenewalSource svc(services, streams.services);
    struct Adapter {
        RenewalSource& src;
        double epoch(std::size_t i) { return src.epoch(i); }
        EpochSequence finish(std::size_t c) { return std::move(src).finish(c); }
    };
    return run(sys, Adapter{arr}, Adapter{svc}, horizon);
}

QueuePath simulate_queue(const ScaledSystem& sys, const EpochSequence& arrival_epochs,
                         const EpochSequence& service_epochs, double horizon) {
    return run(sys, FixedEpochs(arrival_epochs), FixedEpochs(service_epochs), horizon);
}

std::vector<double> occupation_times(const QueuePath& path, double t) {
    const std::size_t k = path.event_index(t);
    const auto base = path.occupation_at_event(k);
    std::vector<double> out(base.begin(), base.end());
    const auto& e = path.events()[k];
    out[path.system().level_of(e.x)] += t - e.time;
    return out;
}

ScaledPath diffusion_scale(const QueuePath& path) {
    const auto& sys = path.system();
    const auto& events = path.events();
    if (events.empty()) throw CoverageError("empty queue path");

    const double inv_root = 1.0 / sys.scale();
    // n^{1/2} * lambda-bar^n_0 = n^{-1/2} lambda^n_0
    const double idle_slope = inv_root * sys.arrival_rate[0];

    std::vector<double> times, xv, iv, is;
    times.reserve(events.size());
    xv.reserve(events.size());
    iv.reserve(events.size());
    is.reserve(events.size());
    for (std::size_t k = 0; k < events.size(); ++k) {
        const auto& e = events[k];
        const double x = inv_root * static_cast<double>(e.x);
        const double idle = idle_slope * path.occupation_at_event(k)[0];
        const double slope = e.x == 0 ? idle_slope : 0.0;
        if (!times.empty() && e.time <= times.back()) {
            // same wall-clock instant after rounding: keep the later state
            xv.back() = x;
            iv.back() = idle;
            is.back() = slope;
            continue;
        }
        times.push_back(e.time);
        xv.push_back(x);
        iv.push_back(idle);
        is.push_back(slope);
    }
    std::vector<double> yv(times.size()), ys(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        yv[k] = xv[k] - iv[k];
        ys[k] = -is[k];
    }
    const double end = path.horizon();
    ScaledPath out{CadlagPath::step(times, std::move(xv), end), CadlagPath(times, std::move(iv), std::move(is), end),
                   CadlagPath(times, std::move(yv), std::move(ys), end)};
    return out;
}

double verify_flow_balance(const QueuePath& path) {
    double worst = 0.0;
    std::int64_t a = 0;
    std::int64_t d = 0;
    for (const auto& e : path.events()) {
        a += e.arrivals;
        d += e.departures;
        worst = std::max(worst, static_cast<double>(std::llabs(e.x - (a - d))));
        worst = std::max(worst, static_cast<double>(std::llabs(e.x - (e.a - e.d))));
        if (e.x < 0) worst = std::max(worst, static_cast<double>(-e.x));
    }
    return worst;
}

double clock_consistency_defect(const QueuePath& path) {
    const auto& sys = path.system();
    double worst = 0.0;
    for (std::size_t k = 0; k < path.events().size(); ++k) {
        const auto& e = path.events()[k];
        const auto h = path.occupation_at_event(k);
        double u = 0.0;
        double v = 0.0;
        for (int i = 0; i <= sys.K; ++i) {
            u += sys.arrival_rate[i] * h[i];
            v += sys.service_rate[i] * h[i];
        }
        const double scale = 1.0 + sys.n * e.time;
        worst = std::max({worst, std::abs(u - e.u) / scale, std::abs(v - e.v) / scale});
    }
    return worst;
}

}  // namespace mlq
