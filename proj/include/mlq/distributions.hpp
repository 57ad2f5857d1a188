#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlq/numeric.hpp"
#include "mlq/rng.hpp"

namespace mlq {

enum class Family {
    exponential,
    gamma,
    lognormal,
    uniform_shifted,
    hyperexponential,
    deterministic,  // parsed so it can be rejected with a clear message
};

std::string_view family_name(Family f) noexcept;
Family parse_family(std::string_view name);

/// A positive inter-event law normalized to unit mean.
///
/// Raw parameters per family (anything scale-like is normalized away):
///   exponential       [rate]            (optional)
///   gamma             [shape, scale?]   variance 1/shape
///   lognormal         [sigma_log]       variance exp(sigma_log^2) - 1
///   uniform_shifted   [lo, hi]          0 <= lo < hi, rescaled to mean 1
///   hyperexponential  [p, rate1, rate2] two-phase mixture
class RenewalSpec {
public:
    Family family() const noexcept { return family_; }
    /// Normalized parameters (see make_renewal_spec).
    const std::vector<double>& params() const noexcept { return params_; }
    const std::vector<double>& raw_params() const noexcept { return raw_; }
    double mean() const noexcept { return 1.0; }
    double variance() const noexcept { return variance_; }

    /// One strictly positive draw.
    double sample(Stream& stream) const;

private:
    friend RenewalSpec make_renewal_spec(Family, std::span<const double>);

    Family family_ = Family::exponential;
    std::vector<double> params_;
    std::vector<double> raw_;
    double variance_ = 1.0;
};

RenewalSpec make_renewal_spec(Family family, std::span<const double> raw_params);

inline RenewalSpec make_renewal_spec(Family family, std::initializer_list<double> raw_params) {
    return make_renewal_spec(family, std::span<const double>(raw_params.begin(), raw_params.size()));
}

/// Marks Z(0), Z(1), ... and their partial sums Z(0)+...+Z(i).
class EpochSequence {
public:
    EpochSequence() = default;
    /// Builds partial sums from explicit marks (all must be > 0).
    explicit EpochSequence(std::vector<double> marks);

    void append(double mark);

    std::size_t size() const noexcept { return marks_.size(); }
    bool empty() const noexcept { return marks_.empty(); }
    std::span<const double> marks() const noexcept { return marks_; }
    std::span<const double> epochs() const noexcept { return epochs_; }
    double mark(std::size_t j) const { return marks_.at(j); }
    double epoch(std::size_t i) const { return epochs_.at(i); }
    double last_epoch() const;

    /// True when the last epoch strictly exceeds t.
    bool covers(double t) const noexcept { return !epochs_.empty() && t < epochs_.back(); }

    /// Marks actually used by the simulation that produced this sequence.
    std::size_t consumed() const noexcept { return consumed_; }
    void set_consumed(std::size_t c) noexcept { consumed_ = c; }

private:
    std::vector<double> marks_;
    std::vector<double> epochs_;
    CompensatedSum running_;
    std::size_t consumed_ = 0;
};

/// Draws marks until the partial sums cover [0, horizon].
EpochSequence sample_epochs(const RenewalSpec& spec, double horizon, Stream& stream);

/// inf{ i >= 0 : t < Z(0)+...+Z(i) }. Throws CoverageError if the epochs stop at or before t.
std::size_t renewal_count(const EpochSequence& epochs, double t);

/// Lazily extended epoch sequence driven by one stream; used by the simulator.
class RenewalSource {
public:
    RenewalSource(RenewalSpec spec, Stream stream, std::size_t block = 1024);

    /// i-th epoch, generating marks as needed.
    double epoch(std::size_t i);

    const RenewalSpec& spec() const noexcept { return spec_; }
    /// Hands over the generated marks; `consumed` is recorded on the result.
    EpochSequence finish(std::size_t consumed) &&;

private:
    void extend_to(std::size_t i);

    RenewalSpec spec_;
    Stream stream_;
    std::size_t block_;
    EpochSequence seq_;
};

}  // namespace mlq
