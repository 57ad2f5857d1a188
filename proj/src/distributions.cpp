#include "mlq/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mlq/errors.hpp"

namespace mlq {

namespace {

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ParameterError(key, what);
}

double param_or(std::span<const double> raw, std::size_t i, double fallback) {
    return raw.size() > i ? raw[i] : fallback;
}

}  // namespace

std::string_view family_name(Family f) noexcept {
    switch (f) {
        case Family::exponential: return "exponential";
        case Family::gamma: return "gamma";
        case Family::lognormal: return "lognormal";
        case Family::uniform_shifted: return "uniform_shifted";
        case Family::hyperexponential: return "hyperexponential";
        case Family::deterministic: return "deterministic";
    }
    return "unknown";
}

Family parse_family(std::string_view name) {
    for (Family f : {Family::exponential, Family::gamma, Family::lognormal, Family::uniform_shifted,
                     Family::hyperexponential, Family::deterministic}) {
        if (family_name(f) == name) return f;
    }
    throw ParameterError("family", "unknown distribution family '" + std::string(name) + "'");
}

RenewalSpec make_renewal_spec(Family family, std::span<const double> raw) {
    for (double v : raw) require(std::isfinite(v), "params", "parameters must be finite");

    RenewalSpec spec;
    spec.family_ = family;
    spec.raw_.assign(raw.begin(), raw.end());

    switch (family) {
        case Family::exponential: {
            require(param_or(raw, 0, 1.0) > 0.0, "params", "exponential rate must be positive");
            spec.params_ = {1.0};
            spec.variance_ = 1.0;
            break;
        }
        case Family::gamma: {
            require(!raw.empty(), "params", "gamma needs a shape parameter");
            const double k = raw[0];
            require(k > 0.0, "params", "gamma shape must be positive");
            require(param_or(raw, 1, 1.0) > 0.0, "params", "gamma scale must be positive");
            spec.params_ = {k, 1.0 / k};
            spec.variance_ = 1.0 / k;
            break;
        }
        case Family::lognormal: {
            require(!raw.empty(), "params", "lognormal needs sigma_log");
            const double s = raw[0];
            require(s > 0.0, "params", "lognormal sigma_log must be positive (zero is deterministic)");
            spec.params_ = {-0.5 * s * s, s};
            spec.variance_ = std::expm1(s * s);
            break;
        }
        case Family::uniform_shifted: {
            require(raw.size() == 2, "params", "uniform_shifted needs [lo, hi]");
            const double lo = raw[0];
            const double hi = raw[1];
            require(lo >= 0.0, "params", "uniform_shifted lower bound must be >= 0");
            require(hi > lo, "params", "uniform_shifted needs hi > lo (equal bounds are deterministic)");
            const double m = 0.5 * (lo + hi);
            const double a = lo / m;
            const double b = hi / m;
            spec.params_ = {a, b};
            spec.variance_ = (b - a) * (b - a) / 12.0;
            break;
        }
        case Family::hyperexponential: {
            require(raw.size() == 3, "params", "hyperexponential needs [p, rate1, rate2]");
            const double p = raw[0];
            require(p > 0.0 && p < 1.0, "params", "hyperexponential mixing weight must lie in (0, 1)");
            require(raw[1] > 0.0 && raw[2] > 0.0, "params", "hyperexponential rates must be positive");
            const double m = p / raw[1] + (1.0 - p) / raw[2];
            const double r1 = raw[1] * m;
            const double r2 = raw[2] * m;
            spec.params_ = {p, r1, r2};
            spec.variance_ = 2.0 * p / (r1 * r1) + 2.0 * (1.0 - p) / (r2 * r2) - 1.0;
            break;
        }
        case Family::deterministic:
            throw ParameterError("family", "deterministic inter-event times have zero variance; a positive variance is required");
    }
    require(spec.variance_ > 0.0 && std::isfinite(spec.variance_), "params",
            "normalized variance must be finite and positive");
    return spec;
}

double RenewalSpec::sample(Stream& stream) const {
    double z = 0.0;
    do {
        switch (family_) {
            case Family::exponential:
                z = std::exponential_distribution<double>(1.0)(stream);
                break;
            case Family::gamma:
                z = std::gamma_distribution<double>(params_[0], params_[1])(stream);
                break;
            case Family::lognormal:
                z = std::lognormal_distribution<double>(params_[0], params_[1])(stream);
                break;
            case Family::uniform_shifted:
                z = params_[0] + (params_[1] - params_[0]) * stream.uniform_open();
                break;
            case Family::hyperexponential: {
                const double rate = stream.uniform_open() < params_[0] ? params_[1] : params_[2];
                z = std::exponential_distribution<double>(rate)(stream);
                break;
            }
            case Family::deterministic:
                z = 1.0;
                break;
        }
    } while (!(z > 0.0));
    return z;
}

EpochSequence::EpochSequence(std::vector<double> marks) {
    marks_.reserve(marks.size());
    epochs_.reserve(marks.size());
    for (double m : marks) append(m);
}

void EpochSequence::append(double mark) {
    if (!(mark > 0.0) || !std::isfinite(mark)) {
        throw ParameterError("marks", "inter-event times must be finite and positive");
    }
    running_ += mark;
    double e = running_.value();
    if (!epochs_.empty() && !(e > epochs_.back())) {
        e = std::nextafter(epochs_.back(), HUGE_VAL);
    }
    marks_.push_back(mark);
    epochs_.push_back(e);
}

double EpochSequence::last_epoch() const {
    if (epochs_.empty()) throw CoverageError("empty epoch sequence");
    return epochs_.back();
}

EpochSequence sample_epochs(const RenewalSpec& spec, double horizon, Stream& stream) {
    if (!(horizon >= 0.0)) throw ParameterError("horizon", "must be >= 0");
    EpochSequence seq;
    do {
        seq.append(spec.sample(stream));
    } while (!seq.covers(horizon));
    return seq;
}

std::size_t renewal_count(const EpochSequence& epochs, double t) {
    if (!(t >= 0.0)) throw CoverageError("renewal_count: t must be >= 0");
    if (!epochs.covers(t)) throw CoverageError("renewal_count: epochs do not extend beyond t");
    const auto e = epochs.epochs();
    return static_cast<std::size_t>(std::upper_bound(e.begin(), e.end(), t) - e.begin());
}

RenewalSource::RenewalSource(RenewalSpec spec, Stream stream, std::size_t block)
    : spec_(std::move(spec)), stream_(stream), block_(std::max<std::size_t>(block, 1)) {}

void RenewalSource::extend_to(std::size_t i) {
    while (seq_.size() <= i) {
        const std::size_t target = seq_.size() + block_;
        while (seq_.size() < target) seq_.append(spec_.sample(stream_));
    }
}

double RenewalSource::epoch(std::size_t i) {
    if (i >= seq_.size()) extend_to(i);
    return seq_.epochs()[i];
}

EpochSequence RenewalSource::finish(std::size_t consumed) && {
    seq_.set_consumed(consumed);
    return std::move(seq_);
}

}  // namespace mlq
