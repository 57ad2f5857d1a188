#pragma once

#include <span>
#include <vector>

#include "mlq/distributions.hpp"
#include "mlq/queue_sim.hpp"
#include "mlq/reflection.hpp"

namespace mlq {

/// zeta(j) = 1 - Z(j).
std::vector<double> centered_marks(std::span<const double> marks);

/// Daley-Miyazawa decomposition of A^n and D^n sampled at the event times of a
/// queue path (index k matches path.events()[k]). Martingale sums run over
/// j = 1..A^n(t) (resp. D^n(t)); Z(0) enters only through the residual.
struct DecompositionRecord {
    int n = 1;
    double var_a = 1.0;  // sigma_A^2
    double var_s = 1.0;  // sigma_S^2
    double z_a0 = 0.0;   // Z_A(0)
    double z_s0 = 0.0;   // Z_S(0)
    double horizon = 0.0;

    std::vector<double> times;
    std::vector<double> m_a;         // M-hat^n_A
    std::vector<double> m_s;         // M-hat^n_S
    std::vector<double> m;           // M-hat^n_A - M-hat^n_S
    std::vector<double> qv_a;        // [M-hat^n_A]
    std::vector<double> qv_s;        // [M-hat^n_S]
    std::vector<double> qv_cross;    // [M-hat^n_A, M-hat^n_S]
    std::vector<double> pqv_a;       // <M-hat^n_A> = sigma_A^2 A^n / n
    std::vector<double> pqv_s;       // <M-hat^n_S> = sigma_S^2 D^n / n
    std::vector<double> residual_a;  // R_A(U^n(t))
    std::vector<double> residual_s;  // R_S(V^n(t))

    std::size_t size() const noexcept { return times.size(); }
    double qv(std::size_t k) const { return qv_a[k] - 2.0 * qv_cross[k] + qv_s[k]; }
    double error_a(std::size_t k) const { return qv_a[k] - pqv_a[k]; }
    double error_s(std::size_t k) const { return qv_s[k] - pqv_s[k]; }
    /// e^n at event k.
    double error(std::size_t k) const;

    /// Index of the last event with time <= t.
    std::size_t index_at(double t) const;
};

/// Throws CoverageError when the mark sequences are shorter than what the path consumed.
DecompositionRecord build_record(const QueuePath& path, const EpochSequence& arrival_marks,
                                 const EpochSequence& service_marks, int n, double var_a, double var_s);

/// Uses the marks recorded on the path and n from its system.
DecompositionRecord build_record(const QueuePath& path, const RenewalSpec& arrivals, const RenewalSpec& services);

struct DmDefect {
    double arrival = 0.0;
    double departure = 0.0;
    double max() const noexcept { return arrival > departure ? arrival : departure; }
};

/// max over event times of |A^n - [U^n + R_A(U^n) - Z_A(0) + n^{1/2} M-hat^n_A]| and the departure analogue.
DmDefect verify_dm_identity(const DecompositionRecord& rec, const QueuePath& path, int n);

/// Unscaled identity A(t) = t + R_A(t) - Z_A(0) + M_A(t) for a bare renewal process at the given times.
double verify_dm_identity(const EpochSequence& epochs, std::span<const double> times);

struct QuadraticVariations {
    CadlagPath qv_a;
    CadlagPath qv_s;
    CadlagPath cross;
    CadlagPath total;
};

QuadraticVariations optional_qv(const DecompositionRecord& rec);

struct ErrorPaths {
    CadlagPath e;    // piecewise linear between events
    CadlagPath e_a;  // [M-hat_A] - <M-hat_A>
    CadlagPath e_s;
};

ErrorPaths error_processes(const DecompositionRecord& rec, const QueuePath& path, int n);

/// M-hat^n as a step path.
CadlagPath martingale_path(const DecompositionRecord& rec);

/// Values at an arbitrary time t (e^n uses the exact clocks between events).
struct DecompositionSnapshot {
    double m_a = 0.0, m_s = 0.0, m = 0.0;
    double qv_a = 0.0, qv_s = 0.0, qv_cross = 0.0, qv = 0.0;
    double pqv_a = 0.0, pqv_s = 0.0;
    double e = 0.0, e_a = 0.0, e_s = 0.0;
};

DecompositionSnapshot snapshot(const DecompositionRecord& rec, const QueuePath& path, double t);

/// sup_{s<=t} |e^n_A(s)|, exact over the event grid.
double sup_abs_error_a(const DecompositionRecord& rec, double t);

}  // namespace mlq
