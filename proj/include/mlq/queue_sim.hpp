#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mlq/distributions.hpp"
#include "mlq/reflection.hpp"
#include "mlq/rng.hpp"

namespace mlq {

/// Limit-regime parameters of the multi-level queue. Level i = 1..K is stored
/// at index i-1 in the per-level vectors; level 0 is the empty state.
struct LevelStructure {
    std::vector<double> thresholds;  // l_1 < ... < l_{K-1}
    std::vector<double> lambda;      // lambda_i, i = 1..K
    std::vector<double> mu;          // mu_i, must equal lambda_i (critical load)
    double lambda0 = 1.0;
    std::vector<double> lambda_hat;  // second-order arrival perturbations
    std::vector<double> mu_hat;      // second-order service perturbations

    int levels() const noexcept { return static_cast<int>(lambda.size()); }
    /// b_i = lambda_hat_i - mu_hat_i, i = 1..K.
    double drift(int i) const { return lambda_hat.at(i - 1) - mu_hat.at(i - 1); }

    /// Throws ParameterError naming the offending key.
    void validate() const;
};

/// Rates and integer thresholds of the n-th system (o(1) corrections taken as zero).
struct ScaledSystem {
    int n = 1;
    int K = 2;
    std::vector<std::int64_t> thresholds;  // size K: 0 = l^n_0 < l^n_1 < ... < l^n_{K-1}
    std::vector<double> arrival_rate;      // size K+1: lambda^n_0 .. lambda^n_K
    std::vector<double> service_rate;      // size K+1: 0, mu^n_1 .. mu^n_K

    /// Unique i with x in S^n_i: {0}, (l_{i-1}, l_i], ..., (l_{K-1}, inf).
    int level_of(std::int64_t x) const noexcept {
        if (x <= 0) return 0;
        int i = 1;
        while (i < K && x > thresholds[i]) ++i;
        return i;
    }

    double scale() const noexcept;  // n^{1/2}
};

ScaledSystem scale_system(const LevelStructure& levels, int n);

/// One change point of the queue (or the initial state at t = 0).
struct QueueEvent {
    double time = 0.0;
    std::uint8_t arrivals = 0;    // jump of A^n, 0 or 1
    std::uint8_t departures = 0;  // jump of D^n, 0 or 1
    std::int64_t x = 0;           // X^n after the event
    std::int64_t a = 0;           // A^n after the event
    std::int64_t d = 0;           // D^n after the event
    double u = 0.0;               // U^n at the event
    double v = 0.0;               // V^n at the event
};

/// Event log of one simulated n-th system on [0, horizon].
class QueuePath {
public:
    QueuePath() = default;
    QueuePath(ScaledSystem system, double horizon, std::vector<QueueEvent> events, std::vector<double> occupation,
              EpochSequence arrival_epochs, EpochSequence service_epochs);

    const ScaledSystem& system() const noexcept { return system_; }
    double horizon() const noexcept { return horizon_; }
    const std::vector<QueueEvent>& events() const noexcept { return events_; }
    std::vector<QueueEvent>& mutable_events() noexcept { return events_; }
    const EpochSequence& arrival_epochs() const noexcept { return arrival_epochs_; }
    const EpochSequence& service_epochs() const noexcept { return service_epochs_; }
    /// Cumulative H^n_i at event k, i = 0..K.
    std::span<const double> occupation_at_event(std::size_t k) const;

    /// Index of the last event with time <= t.
    std::size_t event_index(double t) const;

    std::int64_t x_at(double t) const { return events_[event_index(t)].x; }
    std::int64_t arrivals_at(double t) const { return events_[event_index(t)].a; }
    std::int64_t departures_at(double t) const { return events_[event_index(t)].d; }
    double u_at(double t) const;
    double v_at(double t) const;
    /// R_A(U^n(t)) and R_S(V^n(t)).
    double arrival_residual_at(double t) const;
    double service_residual_at(double t) const;

private:
    ScaledSystem system_;
    double horizon_ = 0.0;
    std::vector<QueueEvent> events_;
    std::vector<double> occupation_;
    EpochSequence arrival_epochs_;
    EpochSequence service_epochs_;
};

struct StreamPair {
    Stream arrivals;
    Stream services;
};

QueuePath simulate_queue(const ScaledSystem& sys, const RenewalSpec& arrivals, const RenewalSpec& services,
                         double horizon, StreamPair streams);

/// Same dynamics driven by explicit epoch sequences (must cover what the run consumes).
QueuePath simulate_queue(const ScaledSystem& sys, const EpochSequence& arrival_epochs,
                         const EpochSequence& service_epochs, double horizon);

/// H^n_i(t), i = 0..K. Throws CoverageError for t outside [0, horizon].
std::vector<double> occupation_times(const QueuePath& path, double t);

/// Diffusion-scaled queue length, idleness and netput.
struct ScaledPath {
    CadlagPath x_hat;  // n^{-1/2} X^n
    CadlagPath i_hat;  // n^{1/2} lambda-bar^n_0 I^n
    CadlagPath y_hat;  // x_hat - i_hat
};

ScaledPath diffusion_scale(const QueuePath& path);

/// max over events of |X^n - (A^n - D^n)|, with A^n and D^n rebuilt from the
/// jump records as well as read from the stored counters.
double verify_flow_balance(const QueuePath& path);

/// max over events of |U^n - sum lambda^n_i H^n_i| and the V^n analogue, relative to 1 + n t.
double clock_consistency_defect(const QueuePath& path);

}  // namespace mlq
