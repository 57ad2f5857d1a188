#pragma once

#include <cmath>
#include <vector>

#include "mlq/distributions.hpp"
#include "mlq/queue_sim.hpp"

namespace fixtures {

/// K = 2, l_1 = 1, lambda = mu = (1, 1), lambda_0 = 1, lambda_hat = 0.
inline mlq::LevelStructure two_level(double mu_hat1 = 1.0, double mu_hat2 = 2.0) {
    mlq::LevelStructure l;
    l.thresholds = {1.0};
    l.lambda = {1.0, 1.0};
    l.mu = {1.0, 1.0};
    l.lambda0 = 1.0;
    l.lambda_hat = {0.0, 0.0};
    l.mu_hat = {mu_hat1, mu_hat2};
    return l;
}

inline mlq::RenewalSpec exponential() { return mlq::make_renewal_spec(mlq::Family::exponential, {}); }

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double stderr_of(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace fixtures
