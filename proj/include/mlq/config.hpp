#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mlq/distributions.hpp"
#include "mlq/queue_sim.hpp"
#include "mlq/sde.hpp"

namespace mlq {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct DistributionConfig {
    Family family = Family::exponential;
    std::vector<double> params;
};

/// One experiment, fully validated. Every field has a JSON key of the same name
/// (nested under "levels", "arrival_dist", "service_dist", "sde").
struct ExperimentConfig {
    LevelStructure levels;
    DistributionConfig arrival_dist;
    DistributionConfig service_dist;
    std::vector<int> n_grid{100, 10000};
    double horizon = 5.0;
    int replications = 4000;
    double sde_dt = 1e-4;
    BoundaryMode sde_projection = BoundaryMode::bridge;
    std::vector<double> probe_times;  // defaults to {T/2, T}
    std::uint64_t seed = 42;
    std::string output_dir = "mlq-out";
    int export_paths = 1;  // full paths written per ensemble
    double local_time_eps = 0.05;
    std::vector<double> occupation_eps{0.1, 0.05};
    double qv_bias_budget = -1.0;  // < 0: derived from the distributions

    RenewalSpec arrival_spec() const;
    RenewalSpec service_spec() const;
    CoefficientField coefficients() const;
    /// Checks every module precondition, including scale_system at each n.
    void validate() const;
};

/// Throws ParameterError naming the key for any malformed or invalid entry.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON (sorted keys, defaults filled in).
std::string canonical_json(const ExperimentConfig& cfg);

/// FNV-1a of the canonical JSON without output_dir, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// Bias allowance for the QV match at scale n: n^{-1} (var_A (1 + var_A) + var_S (1 + var_S)),
/// covering the residual-time term that separates A^n from U^n in expectation.
double default_qv_bias_budget(const ExperimentConfig& cfg, int n);

}  // namespace mlq
