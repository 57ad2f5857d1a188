#include "mlq/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "mlq/errors.hpp"
#include "mlq/numeric.hpp"

namespace mlq {

double EnsembleSummary::ecdf(double x) const {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

double EnsembleSummary::quantile(double p) const {
    if (sorted.empty()) throw ParameterError("samples", "empty ensemble");
    p = std::clamp(p, 0.0, 1.0);
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

MeanEstimate mean_estimate(std::span<const double> samples) {
    if (samples.size() < 2) throw ParameterError("replications", "need at least two samples");
    CompensatedSum s;
    for (double v : samples) s += v;
    const double r = static_cast<double>(samples.size());
    const double mean = s.value() / r;
    CompensatedSum ss;
    for (double v : samples) ss += (v - mean) * (v - mean);
    return MeanEstimate{mean, std::sqrt(ss.value() / (r - 1.0) / r)};
}

bool MeanEstimate::within(double target, double k) const noexcept {
    const double gap = std::abs(mean - target);
    return se > 0.0 ? gap <= k * se : gap == 0.0;
}

EnsembleSummary summarize(std::span<const double> samples) {
    const MeanEstimate m = mean_estimate(samples);
    EnsembleSummary out;
    out.sorted.assign(samples.begin(), samples.end());
    std::sort(out.sorted.begin(), out.sorted.end());
    out.mean = m.mean;
    out.se = m.se;
    out.sd = m.se * std::sqrt(static_cast<double>(samples.size()));
    return out;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ParameterError("samples", "KS distance needs two nonempty samples");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        // step past every copy of the smallest remaining value in both samples
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    return d;
}

QvObservation qv_observation(const DecompositionRecord& rec, const QueuePath& path, double t) {
    return QvObservation{rec.qv(rec.index_at(t)), occupation_times(path, t)};
}

std::vector<double> qv_weights(const ScaledSystem& sys, double var_a, double var_s) {
    std::vector<double> w(sys.K + 1);
    for (int i = 0; i <= sys.K; ++i) {
        w[i] = (sys.arrival_rate[i] * var_a + sys.service_rate[i] * var_s) / static_cast<double>(sys.n);
    }
    return w;
}

QvMatchReport qv_match_test(std::span<const QvObservation> obs, std::span<const double> weights, double t,
                            double bias_budget) {
    std::vector<double> diff;
    diff.reserve(obs.size());
    for (const auto& o : obs) {
        if (o.occupation.size() != weights.size()) {
            throw ParameterError("occupation", "occupation vector and weights differ in length");
        }
        CompensatedSum s;
        for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * o.occupation[i];
        diff.push_back(o.qv - s.value());
    }
    QvMatchReport r;
    r.t = t;
    r.bias_budget = bias_budget;
    r.difference = mean_estimate(diff);
    r.pass = std::abs(r.difference.mean) <= 3.0 * r.difference.se + bias_budget;
    return r;
}

QvMatchReport qv_match_test(std::span<const DecompositionRecord> records, std::span<const QueuePath> paths,
                            double var_a, double var_s, double t, double bias_budget) {
    if (records.size() != paths.size() || records.empty()) {
        throw ParameterError("replications", "record and path ensembles are not aligned");
    }
    std::vector<QvObservation> obs;
    obs.reserve(records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        if (records[r].n != paths[r].system().n || records[r].horizon != paths[r].horizon()) {
            throw ParameterError("replications", "record " + std::to_string(r) + " does not match its path");
        }
        obs.push_back(qv_observation(records[r], paths[r], t));
    }
    const auto w = qv_weights(paths.front().system(), var_a, var_s);
    return qv_match_test(obs, w, t, bias_budget);
}

bool BatteryReport::pass() const noexcept {
    return std::all_of(entries.begin(), entries.end(), [](const BatteryEntry& e) { return e.pass; });
}

BatteryReport martingale_battery(std::span<const MartingaleSample> samples, double s, double t) {
    if (!(s < t)) throw ParameterError("probe_times", "battery needs s < t");
    if (samples.size() < 2) throw ParameterError("replications", "need at least two samples");

    std::vector<double> xs;
    xs.reserve(samples.size());
    for (const auto& m : samples) xs.push_back(m.x_s);
    std::sort(xs.begin(), xs.end());
    const std::size_t mid = xs.size() / 2;
    const double median = xs.size() % 2 ? xs[mid] : 0.5 * (xs[mid - 1] + xs[mid]);

    const char* names[] = {"one", "clip_x", "clip_m", "x_above_median"};
    std::vector<std::vector<double>> stats(4);
    for (auto& v : stats) v.reserve(samples.size());
    for (const auto& m : samples) {
        const double dm = m.m_t - m.m_s;
        stats[0].push_back(dm);
        stats[1].push_back(std::clamp(m.x_s, 0.0, 10.0) * dm);
        stats[2].push_back(std::clamp(m.m_s, -10.0, 10.0) * dm);
        stats[3].push_back(m.x_s > median ? dm : 0.0);
    }

    BatteryReport r;
    r.s = s;
    r.t = t;
    r.median_x = median;
    for (int i = 0; i < 4; ++i) {
        BatteryEntry e;
        e.name = names[i];
        e.estimate = mean_estimate(stats[i]);
        e.pass = e.estimate.within(0.0, 3.0);
        r.entries.push_back(std::move(e));
    }
    return r;
}

ConvergenceReport convergence_report(const std::map<int, TerminalSamples>& queue, const TerminalSamples& sde,
                                     const ConvergenceThresholds& thresholds) {
    if (queue.size() < 2) throw ParameterError("n_grid", "convergence report needs at least two n values");
    ConvergenceReport r;
    r.horizon = sde.horizon;
    r.sde_mean_x = mean_estimate(sde.x).mean;
    r.sde_mean_boundary = mean_estimate(sde.boundary).mean;
    for (const auto& [n, q] : queue) {
        if (q.horizon != sde.horizon) {
            throw ParameterError("horizon", "ensemble at n = " + std::to_string(n) + " has a different horizon");
        }
        ConvergenceRow row;
        row.n = n;
        row.ks = ks_distance(q.x, sde.x);
        row.mean_x = mean_estimate(q.x).mean;
        row.mean_boundary = mean_estimate(q.boundary).mean;
        row.boundary_gap = std::abs(row.mean_boundary - r.sde_mean_boundary);
        r.rows.push_back(row);
    }
    const auto& first = r.rows.front();
    const auto& last = r.rows.back();
    r.monotone = last.ks <= first.ks;
    r.ks_pass = last.ks <= thresholds.ks_max;
    r.boundary_pass = last.boundary_gap <= thresholds.boundary_gap_max;
    return r;
}

}  // namespace mlq
