#include "mlq/decomposition.hpp"

#include <algorithm>
#include <cmath>

#include "mlq/errors.hpp"
#include "mlq/numeric.hpp"

namespace mlq {

std::vector<double> centered_marks(std::span<const double> marks) {
    std::vector<double> out(marks.size());
    std::transform(marks.begin(), marks.end(), out.begin(), [](double z) { return 1.0 - z; });
    return out;
}

double DecompositionRecord::error(std::size_t k) const {
    return (residual_a[k] - residual_s[k] - z_a0 + z_s0) / std::sqrt(static_cast<double>(n));
}

std::size_t DecompositionRecord::index_at(double t) const {
    if (times.empty() || t < 0.0 || t > horizon) throw CoverageError("time outside the decomposition record");
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    return static_cast<std::size_t>(it - times.begin()) - 1;
}

DecompositionRecord build_record(const QueuePath& path, const EpochSequence& arrival_marks,
                                 const EpochSequence& service_marks, int n, double var_a, double var_s) {
    const auto& events = path.events();
    if (events.empty()) throw CoverageError("empty queue path");
    const auto& last = events.back();
    if (arrival_marks.size() < static_cast<std::size_t>(last.a) + 1) {
        throw CoverageError("arrival marks do not cover the consumed arrivals");
    }
    if (service_marks.size() < static_cast<std::size_t>(last.d) + 1) {
        throw CoverageError("service marks do not cover the consumed services");
    }

    const double inv_root = 1.0 / std::sqrt(static_cast<double>(n));
    const double inv_n = 1.0 / static_cast<double>(n);
    const auto za = arrival_marks.marks();
    const auto zs = service_marks.marks();
    const auto ea = arrival_marks.epochs();
    const auto es = service_marks.epochs();

    DecompositionRecord rec;
    rec.n = n;
    rec.var_a = var_a;
    rec.var_s = var_s;
    rec.z_a0 = za[0];
    rec.z_s0 = zs[0];
    rec.horizon = path.horizon();

    const std::size_t m = events.size();
    for (auto* v : {&rec.times, &rec.m_a, &rec.m_s, &rec.m, &rec.qv_a, &rec.qv_s, &rec.qv_cross, &rec.pqv_a,
                    &rec.pqv_s, &rec.residual_a, &rec.residual_s}) {
        v->resize(m);
    }

    CompensatedSum sum_a, sum_s, sq_a, sq_s, cross;
    for (std::size_t k = 0; k < m; ++k) {
        const auto& e = events[k];
        double jump_a = 0.0;
        double jump_s = 0.0;
        if (e.arrivals) {
            jump_a = 1.0 - za[static_cast<std::size_t>(e.a)];
            sum_a += jump_a;
            sq_a += jump_a * jump_a;
        }
        if (e.departures) {
            jump_s = 1.0 - zs[static_cast<std::size_t>(e.d)];
            sum_s += jump_s;
            sq_s += jump_s * jump_s;
        }
        if (e.arrivals && e.departures) cross += jump_a * jump_s;

        rec.times[k] = e.time;
        rec.m_a[k] = inv_root * sum_a.value();
        rec.m_s[k] = inv_root * sum_s.value();
        rec.m[k] = rec.m_a[k] - rec.m_s[k];
        rec.qv_a[k] = inv_n * sq_a.value();
        rec.qv_s[k] = inv_n * sq_s.value();
        rec.qv_cross[k] = inv_n * cross.value();
        rec.pqv_a[k] = inv_n * var_a * static_cast<double>(e.a);
        rec.pqv_s[k] = inv_n * var_s * static_cast<double>(e.d);
        rec.residual_a[k] = ea[static_cast<std::size_t>(e.a)] - e.u;
        rec.residual_s[k] = es[static_cast<std::size_t>(e.d)] - e.v;
    }
    return rec;
}

DecompositionRecord build_record(const QueuePath& path, const RenewalSpec& arrivals, const RenewalSpec& services) {
    return build_record(path, path.arrival_epochs(), path.service_epochs(), path.system().n, arrivals.variance(),
                        services.variance());
}

DmDefect verify_dm_identity(const DecompositionRecord& rec, const QueuePath& path, int n) {
    const double root = std::sqrt(static_cast<double>(n));
    DmDefect out;
    const auto& events = path.events();
    const std::size_t m = std::min(events.size(), rec.size());
    for (std::size_t k = 0; k < m; ++k) {
        const auto& e = events[k];
        const double rhs_a = e.u + rec.residual_a[k] - rec.z_a0 + root * rec.m_a[k];
        const double rhs_d = e.v + rec.residual_s[k] - rec.z_s0 + root * rec.m_s[k];
        out.arrival = std::max(out.arrival, std::abs(static_cast<double>(e.a) - rhs_a));
        out.departure = std::max(out.departure, std::abs(static_cast<double>(e.d) - rhs_d));
    }
    return out;
}

double verify_dm_identity(const EpochSequence& epochs, std::span<const double> times) {
    const auto z = epochs.marks();
    const auto s = epochs.epochs();
    double worst = 0.0;
    for (double t : times) {
        const std::size_t count = renewal_count(epochs, t);
        const double residual = s[count] - t;
        CompensatedSum mart;
        for (std::size_t j = 1; j <= count; ++j) mart += 1.0 - z[j];
        const double rhs = t + residual - z[0] + mart.value();
        worst = std::max(worst, std::abs(static_cast<double>(count) - rhs));
    }
    return worst;
}

namespace {

CadlagPath step_from(const DecompositionRecord& rec, const std::vector<double>& values) {
    std::vector<double> times;
    std::vector<double> v;
    times.reserve(rec.size());
    v.reserve(rec.size());
    for (std::size_t k = 0; k < rec.size(); ++k) {
        if (!times.empty() && rec.times[k] <= times.back()) {
            v.back() = values[k];
            continue;
        }
        times.push_back(rec.times[k]);
        v.push_back(values[k]);
    }
    return CadlagPath::step(std::move(times), std::move(v), rec.horizon);
}

}  // namespace

QuadraticVariations optional_qv(const DecompositionRecord& rec) {
    std::vector<double> total(rec.size());
    for (std::size_t k = 0; k < rec.size(); ++k) total[k] = rec.qv(k);
    return QuadraticVariations{step_from(rec, rec.qv_a), step_from(rec, rec.qv_s), step_from(rec, rec.qv_cross),
                               step_from(rec, total)};
}

CadlagPath martingale_path(const DecompositionRecord& rec) { return step_from(rec, rec.m); }

ErrorPaths error_processes(const DecompositionRecord& rec, const QueuePath& path, int n) {
    const auto& sys = path.system();
    const auto& events = path.events();
    const double inv_root = 1.0 / std::sqrt(static_cast<double>(n));

    std::vector<double> times, ev, es, ea, ess;
    for (std::size_t k = 0; k < rec.size(); ++k) {
        const int lvl = sys.level_of(events[k].x);
        // residuals run down at the clock rates between events
        const double slope = inv_root * (-sys.arrival_rate[lvl] + sys.service_rate[lvl]);
        if (!times.empty() && rec.times[k] <= times.back()) {
            ev.back() = rec.error(k);
            es.back() = slope;
            ea.back() = rec.error_a(k);
            ess.back() = rec.error_s(k);
            continue;
        }
        times.push_back(rec.times[k]);
        ev.push_back(rec.error(k));
        es.push_back(slope);
        ea.push_back(rec.error_a(k));
        ess.push_back(rec.error_s(k));
    }
    CadlagPath e(times, std::move(ev), std::move(es), rec.horizon);
    return ErrorPaths{std::move(e), CadlagPath::step(times, std::move(ea), rec.horizon),
                      CadlagPath::step(times, std::move(ess), rec.horizon)};
}

DecompositionSnapshot snapshot(const DecompositionRecord& rec, const QueuePath& path, double t) {
    const std::size_t k = rec.index_at(t);
    DecompositionSnapshot s;
    s.m_a = rec.m_a[k];
    s.m_s = rec.m_s[k];
    s.m = rec.m[k];
    s.qv_a = rec.qv_a[k];
    s.qv_s = rec.qv_s[k];
    s.qv_cross = rec.qv_cross[k];
    s.qv = rec.qv(k);
    s.pqv_a = rec.pqv_a[k];
    s.pqv_s = rec.pqv_s[k];
    s.e_a = rec.error_a(k);
    s.e_s = rec.error_s(k);
    s.e = (path.arrival_residual_at(t) - path.service_residual_at(t) - rec.z_a0 + rec.z_s0) /
          std::sqrt(static_cast<double>(rec.n));
    return s;
}

double sup_abs_error_a(const DecompositionRecord& rec, double t) {
    double best = 0.0;
    for (std::size_t k = 0; k < rec.size() && rec.times[k] <= t; ++k) best = std::max(best, std::abs(rec.error_a(k)));
    return best;
}

}  // namespace mlq
