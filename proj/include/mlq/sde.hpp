#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "mlq/distributions.hpp"
#include "mlq/queue_sim.hpp"
#include "mlq/reflection.hpp"
#include "mlq/rng.hpp"

namespace mlq {

/// Piecewise-constant drift and diffusion on S_0 = {0}, S_i = (l_{i-1}, l_i], S_K = (l_{K-1}, inf),
/// with the odd mirror extension to the whole line.
class CoefficientField {
public:
    /// `drift` and `diffusion` have K+1 entries, index 0 for the point {0}.
    /// With `allow_degenerate` a zero diffusion value is accepted (test fixtures only).
    CoefficientField(std::vector<double> thresholds, std::vector<double> drift, std::vector<double> diffusion,
                     bool allow_degenerate = false);

    int pieces() const noexcept { return static_cast<int>(drift_.size()); }  // K+1
    const std::vector<double>& thresholds() const noexcept { return thresholds_; }
    const std::vector<double>& drift_values() const noexcept { return drift_; }
    const std::vector<double>& diffusion_values() const noexcept { return diffusion_; }

    int level_of(double x) const noexcept {
        if (x <= 0.0) return 0;
        std::size_t i = 0;
        while (i < thresholds_.size() && x > thresholds_[i]) ++i;
        return static_cast<int>(i) + 1;
    }
    double drift(double x) const noexcept { return drift_[level_of(x)]; }
    double diffusion(double x) const noexcept { return diffusion_[level_of(x)]; }

    /// sgn(x) = 1 for x > 0 and -1 for x <= 0.
    static double sgn(double x) noexcept { return x > 0.0 ? 1.0 : -1.0; }
    double mirror_drift(double q) const noexcept { return sgn(q) * drift(q < 0.0 ? -q : q); }
    double mirror_diffusion(double q) const noexcept { return sgn(q) * diffusion(q < 0.0 ? -q : q); }

private:
    std::vector<double> thresholds_;
    std::vector<double> drift_;
    std::vector<double> diffusion_;
};

/// b_i = lambda_hat_i - mu_hat_i, sigma_i = (lambda_i var_A + mu_i var_S)^{1/2}, sigma_0 = lambda_0^{1/2} sigma_A, b = 0 on {0}.
CoefficientField make_coefficients(const LevelStructure& levels, const RenewalSpec& arrivals,
                                   const RenewalSpec& services);

enum class Scheme { projected, mirror };

/// How the projected scheme handles the boundary inside a step.
///   grid:   X' = max(0, x*), L += max(0, -x*)
///   bridge: the in-step Euler interpolant is reflected exactly, using the sampled
///           minimum of its Brownian bridge; removes the O(dt^{1/2}) boundary bias.
enum class BoundaryMode { grid, bridge };

std::string_view scheme_name(Scheme s) noexcept;
std::string_view boundary_mode_name(BoundaryMode m) noexcept;
BoundaryMode parse_boundary_mode(std::string_view name);

struct SdeGridPath {
    Scheme scheme = Scheme::projected;
    double dt = 0.0;
    double x0 = 0.0;
    std::vector<double> x;      // X_k, k = 0..N
    std::vector<double> l;      // L_k, L_0 = 0
    std::vector<double> noise;  // dW_k, k = 0..N-1
    std::vector<double> q;      // signed mirror state (mirror scheme only)

    std::size_t steps() const noexcept { return noise.size(); }
    double horizon() const noexcept { return dt * static_cast<double>(steps()); }
    double time(std::size_t k) const noexcept { return dt * static_cast<double>(k); }
};

/// Number of steps; throws unless dt > 0, horizon >= dt and horizon is a multiple of dt.
std::size_t grid_steps(double horizon, double dt);

SdeGridPath solve_projected(const CoefficientField& coeffs, double x0, double horizon, double dt, Stream& stream,
                            BoundaryMode mode = BoundaryMode::bridge);
SdeGridPath solve_mirror(const CoefficientField& coeffs, double x0, double horizon, double dt, Stream& stream);

/// Deterministic drivers for fixtures. `uniforms` (one per step, in (0,1)) is only read in bridge mode.
SdeGridPath solve_projected(const CoefficientField& coeffs, double x0, double dt, std::span<const double> noise,
                            BoundaryMode mode = BoundaryMode::grid, std::span<const double> uniforms = {});
SdeGridPath solve_mirror(const CoefficientField& coeffs, double x0, double dt, std::span<const double> noise);

/// (1/eps) sum_k 1{X_k in [a, a+eps)} sigma^2(X_k) dt.
double local_time_estimate(const SdeGridPath& path, double a, double eps, const CoefficientField& coeffs);

/// Time spent within eps of level over [0, T]; grid paths are read as step functions.
double threshold_occupation(const SdeGridPath& path, double level, double eps, double horizon);
double threshold_occupation(const CadlagPath& path, double level, double eps, double horizon);

/// Ensemble-friendly observables of one path, gathered without storing it.
struct SdeObservableSpec {
    std::vector<double> probe_times;
    double local_time_level = 0.0;
    std::vector<double> local_time_eps;
    double occupation_level = 0.0;
    std::vector<double> occupation_eps;
};

struct SdeObservables {
    double x_end = 0.0;
    double l_end = 0.0;
    std::vector<double> x_probe;
    std::vector<double> l_probe;
    std::vector<double> local_time;  // one per local_time_eps
    std::vector<double> occupation;  // one per occupation_eps
};

SdeObservables observe_sde(Scheme scheme, const CoefficientField& coeffs, double x0, double horizon, double dt,
                           Stream stream, const SdeObservableSpec& spec, BoundaryMode mode = BoundaryMode::bridge);

}  // namespace mlq
