#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mlq/decomposition.hpp"
#include "mlq/queue_sim.hpp"

namespace mlq {

/// Sample moments and sorted samples (the ECDF) of one marginal.
struct EnsembleSummary {
    std::vector<double> sorted;
    double mean = 0.0;
    double sd = 0.0;
    double se = 0.0;  // sd / sqrt(R)

    std::size_t count() const noexcept { return sorted.size(); }
    double ecdf(double x) const;
    double quantile(double p) const;
};

/// Requires at least two samples.
EnsembleSummary summarize(std::span<const double> samples);

/// Mean and standard error of a sample; R >= 2.
struct MeanEstimate {
    double mean = 0.0;
    double se = 0.0;
    bool within(double target, double k) const noexcept;
};

MeanEstimate mean_estimate(std::span<const double> samples);

/// Two-sample Kolmogorov-Smirnov statistic sup_x |F1(x) - F2(x)| by merge-scan.
double ks_distance(std::span<const double> a, std::span<const double> b);

/// One replication's contribution to the quadratic-variation check at time t:
/// [M-hat^n](t) and the occupation times H^n_i(t), i = 0..K.
struct QvObservation {
    double qv = 0.0;
    std::vector<double> occupation;
};

QvObservation qv_observation(const DecompositionRecord& rec, const QueuePath& path, double t);

/// sigma^n_i^2 = (lambda^n_i var_A + mu^n_i var_S) / n, the n-th system's level-i variance rate.
std::vector<double> qv_weights(const ScaledSystem& sys, double var_a, double var_s);

struct QvMatchReport {
    double t = 0.0;
    MeanEstimate difference;  // [M-hat](t) - sum_i sigma_i^2 H_i(t)
    double bias_budget = 0.0;
    bool pass = false;
};

QvMatchReport qv_match_test(std::span<const QvObservation> obs, std::span<const double> weights, double t,
                            double bias_budget);

/// Aligned record/path ensembles; uses qv_weights of the first path's system.
QvMatchReport qv_match_test(std::span<const DecompositionRecord> records, std::span<const QueuePath> paths,
                            double var_a, double var_s, double t, double bias_budget);

/// Per replication: X-hat(s), M-hat(s), M-hat(t).
struct MartingaleSample {
    double x_s = 0.0;
    double m_s = 0.0;
    double m_t = 0.0;
};

struct BatteryEntry {
    std::string name;
    MeanEstimate estimate;
    bool pass = false;
};

struct BatteryReport {
    double s = 0.0;
    double t = 0.0;
    double median_x = 0.0;
    std::vector<BatteryEntry> entries;
    bool pass() const noexcept;
};

/// h in {1, clip(X(s),0,10), clip(M(s),-10,10), 1{X(s) > median}}; pass iff |mean(h dM)| <= 3 SE.
/// A zero-variance statistic passes only if its mean is exactly zero.
BatteryReport martingale_battery(std::span<const MartingaleSample> samples, double s, double t);

/// Terminal samples for one ensemble.
struct TerminalSamples {
    double horizon = 0.0;
    std::vector<double> x;
    std::vector<double> boundary;  // I-hat^n(T) for queues, L(T) for the SDE
};

struct ConvergenceRow {
    int n = 0;
    double ks = 0.0;
    double mean_x = 0.0;
    double mean_boundary = 0.0;
    double boundary_gap = 0.0;  // |mean I-hat^n(T) - mean L(T)|
};

struct ConvergenceThresholds {
    double ks_max = 0.06;
    double boundary_gap_max = 0.1;
};

struct ConvergenceReport {
    double horizon = 0.0;
    std::vector<ConvergenceRow> rows;  // ascending n
    double sde_mean_x = 0.0;
    double sde_mean_boundary = 0.0;
    bool monotone = false;  // KS at largest n no larger than KS at smallest n
    bool ks_pass = false;
    bool boundary_pass = false;
    bool pass() const noexcept { return monotone && ks_pass && boundary_pass; }
};

/// Needs at least two n values and a common horizon.
ConvergenceReport convergence_report(const std::map<int, TerminalSamples>& queue, const TerminalSamples& sde,
                                     const ConvergenceThresholds& thresholds = {});

}  // namespace mlq
