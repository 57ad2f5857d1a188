#include "mlq/reflection.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "mlq/errors.hpp"

namespace mlq {

CadlagPath::CadlagPath(std::vector<double> times, std::vector<double> values, std::vector<double> slopes, double end)
    : times_(std::move(times)), values_(std::move(values)), slopes_(std::move(slopes)), end_(end) {
    if (times_.empty()) throw ParameterError("path", "a path needs at least one breakpoint");
    if (times_.size() != values_.size() || times_.size() != slopes_.size()) {
        throw ParameterError("path", "breakpoints, values and slopes differ in length");
    }
    if (times_.front() != 0.0) throw ParameterError("path", "first breakpoint must be 0");
    for (std::size_t k = 1; k < times_.size(); ++k) {
        if (!(times_[k] > times_[k - 1])) throw ParameterError("path", "breakpoints must be strictly increasing");
    }
    if (!(end_ >= times_.back())) throw ParameterError("path", "end precedes the last breakpoint");
}

CadlagPath CadlagPath::step(std::vector<double> times, std::vector<double> values, double end) {
    std::vector<double> slopes(times.size(), 0.0);
    return CadlagPath(std::move(times), std::move(values), std::move(slopes), end);
}

CadlagPath CadlagPath::constant(double value, double end) { return CadlagPath({0.0}, {value}, {0.0}, end); }

CadlagPath CadlagPath::linear(double value0, double slope, double end) {
    return CadlagPath({0.0}, {value0}, {slope}, end);
}

bool CadlagPath::piecewise_constant() const noexcept {
    return std::all_of(slopes_.begin(), slopes_.end(), [](double s) { return s == 0.0; });
}

std::size_t CadlagPath::segment_at(double t) const {
    if (t <= 0.0) return 0;
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return static_cast<std::size_t>(it - times_.begin()) - 1;
}

double CadlagPath::operator()(double t) const {
    t = std::clamp(t, 0.0, end_);
    const std::size_t k = segment_at(t);
    return values_[k] + slopes_[k] * (t - times_[k]);
}

double CadlagPath::left_limit(double t) const {
    t = std::clamp(t, 0.0, end_);
    if (t <= 0.0) return values_[0];
    const auto it = std::lower_bound(times_.begin(), times_.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times_.begin()) - 1;
    return values_[k] + slopes_[k] * (t - times_[k]);
}

double CadlagPath::segment_length(std::size_t k) const {
    const double right = k + 1 < times_.size() ? times_[k + 1] : end_;
    return right - times_[k];
}

double CadlagPath::segment_end_value(std::size_t k) const {
    return values_[k] + slopes_[k] * segment_length(k);
}

std::vector<double> merged_breakpoints(const CadlagPath& a, const CadlagPath& b) {
    const double end = std::min(a.end(), b.end());
    std::vector<double> out;
    out.reserve(a.segments() + b.segments());
    std::set_union(a.times().begin(), a.times().end(), b.times().begin(), b.times().end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    while (out.size() > 1 && out.back() > end) out.pop_back();
    return out;
}

CadlagPath resample(const CadlagPath& path, std::span<const double> times, double end) {
    std::vector<double> values(times.size());
    std::vector<double> slopes(times.size());
    std::size_t k = 0;
    const auto pt = path.times();
    for (std::size_t i = 0; i < times.size(); ++i) {
        while (k + 1 < pt.size() && pt[k + 1] <= times[i]) ++k;
        values[i] = path.values()[k] + path.slopes()[k] * (times[i] - pt[k]);
        slopes[i] = path.slopes()[k];
        // exact value on original breakpoints
        if (times[i] == pt[k]) values[i] = path.values()[k];
    }
    return CadlagPath(std::vector<double>(times.begin(), times.end()), std::move(values), std::move(slopes), end);
}

namespace {

template <class Op>
CadlagPath combine(const CadlagPath& a, const CadlagPath& b, Op op) {
    const auto times = merged_breakpoints(a, b);
    const double end = std::min(a.end(), b.end());
    const CadlagPath ra = resample(a, times, end);
    const CadlagPath rb = resample(b, times, end);
    std::vector<double> values(times.size());
    std::vector<double> slopes(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        values[i] = op(ra.values()[i], rb.values()[i]);
        slopes[i] = op(ra.slopes()[i], rb.slopes()[i]);
    }
    return CadlagPath(times, std::move(values), std::move(slopes), end);
}

}  // namespace

CadlagPath operator+(const CadlagPath& a, const CadlagPath& b) {
    return combine(a, b, [](double x, double y) { return x + y; });
}

CadlagPath operator-(const CadlagPath& a, const CadlagPath& b) {
    return combine(a, b, [](double x, double y) { return x - y; });
}

CadlagPath operator*(double c, const CadlagPath& a) {
    std::vector<double> values(a.values().begin(), a.values().end());
    std::vector<double> slopes(a.slopes().begin(), a.slopes().end());
    for (auto& v : values) v *= c;
    for (auto& s : slopes) s *= c;
    return CadlagPath(std::vector<double>(a.times().begin(), a.times().end()), std::move(values), std::move(slopes),
                      a.end());
}

ReflectedPair skorokhod_map(const CadlagPath& psi) {
    if (psi.values()[0] < 0.0) throw ParameterError("psi", "Skorokhod map needs psi(0) >= 0");

    const std::size_t n = psi.segments();
    std::vector<double> times, phi_v, phi_s, eta_v, eta_s;
    times.reserve(n + 8);
    phi_v.reserve(n + 8);
    phi_s.reserve(n + 8);
    eta_v.reserve(n + 8);
    eta_s.reserve(n + 8);

    auto push = [&](double t, double pv, double ps, double ev, double es) {
        times.push_back(t);
        phi_v.push_back(pv);
        phi_s.push_back(ps);
        eta_v.push_back(ev);
        eta_s.push_back(es);
    };

    double eta = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t0 = psi.times()[k];
        const double v = psi.values()[k];
        const double s = psi.slopes()[k];
        const double len = psi.segment_length(k);

        if (-v >= eta) {
            eta = -v;
            if (s < 0.0) {
                // pinned at zero for the whole segment
                push(t0, 0.0, 0.0, eta, -s);
                eta += -s * len;
            } else {
                push(t0, 0.0, s, eta, 0.0);
            }
            continue;
        }

        // psi(t0) + eta > 0
        if (s >= 0.0) {
            push(t0, v + eta, s, eta, 0.0);
            continue;
        }
        const double tau = (v + eta) / -s;
        const bool last = k + 1 == n;
        if (tau >= len || (!last && t0 + tau >= psi.times()[k + 1])) {
            push(t0, v + eta, s, eta, 0.0);
            continue;
        }
        push(t0, v + eta, s, eta, 0.0);
        const double t_hit = t0 + tau;
        if (t_hit > t0) {
            push(t_hit, 0.0, 0.0, eta, -s);
        } else {
            phi_v.back() = 0.0;
            phi_s.back() = 0.0;
            eta_s.back() = -s;
        }
        eta += -s * (len - tau);
    }

    const double end = psi.end();
    std::vector<double> eta_times = times;
    return ReflectedPair{CadlagPath(std::move(times), std::move(phi_v), std::move(phi_s), end),
                         CadlagPath(std::move(eta_times), std::move(eta_v), std::move(eta_s), end)};
}

namespace {

void check_nondecreasing(const CadlagPath& eta) {
    const double scale = 1.0 + sup_norm(eta, eta.end());
    for (std::size_t k = 0; k < eta.segments(); ++k) {
        if (eta.slopes()[k] < 0.0) throw ParameterError("eta", "regulator is decreasing");
        if (k > 0 && eta.values()[k] - eta.segment_end_value(k - 1) < -1e-12 * scale) {
            throw ParameterError("eta", "regulator jumps downward");
        }
    }
}

template <class Weight>
double integrate_against(const CadlagPath& phi, const CadlagPath& eta, double horizon, Weight weight) {
    check_nondecreasing(eta);
    const auto times = merged_breakpoints(phi, eta);
    const double end = std::min({phi.end(), eta.end(), horizon});
    const CadlagPath rp = resample(phi, times, std::min(phi.end(), eta.end()));
    const CadlagPath re = resample(eta, times, std::min(phi.end(), eta.end()));

    double total = weight(rp.values()[0], 0.0) * re.values()[0];
    for (std::size_t k = 0; k < times.size() && times[k] <= end; ++k) {
        if (k > 0) {
            const double jump = re.values()[k] - re.segment_end_value(k - 1);
            total += weight(rp.values()[k], 0.0) * jump;
        }
        const double right = k + 1 < times.size() ? std::min(times[k + 1], end) : end;
        const double h = right - times[k];
        const double q = re.slopes()[k];
        if (h > 0.0 && q != 0.0) total += q * weight(rp.values()[k], rp.slopes()[k] * h) * h;
    }
    return total;
}

}  // namespace

double complementarity_defect(const CadlagPath& phi, const CadlagPath& eta, double horizon) {
    // mean of a linear function over the segment: a + p h / 2
    return integrate_against(phi, eta, horizon, [](double a, double rise) { return a + 0.5 * rise; });
}

double boundary_push_away(const CadlagPath& phi, const CadlagPath& eta, double horizon, double threshold) {
    // fraction of a linear segment above the threshold
    return integrate_against(phi, eta, horizon, [threshold](double a, double rise) {
        const double b = a + rise;
        if (a > threshold && b > threshold) return 1.0;
        if (a <= threshold && b <= threshold) return rise == 0.0 ? (a > threshold ? 1.0 : 0.0) : 0.0;
        const double cross = (threshold - a) / rise;
        return rise > 0.0 ? 1.0 - cross : cross;
    });
}

double sup_norm(const CadlagPath& xi, double horizon) {
    double best = 0.0;
    for (std::size_t k = 0; k < xi.segments() && xi.times()[k] <= horizon; ++k) {
        best = std::max(best, std::abs(xi.values()[k]));
        const double right = k + 1 < xi.segments() ? std::min(xi.times()[k + 1], horizon) : std::min(xi.end(), horizon);
        best = std::max(best, std::abs(xi.values()[k] + xi.slopes()[k] * (right - xi.times()[k])));
    }
    return best;
}

double sup_distance(const CadlagPath& a, const CadlagPath& b, double horizon) { return sup_norm(a - b, horizon); }

PathFunctionals path_functionals(const CadlagPath& xi, double horizon, double delta) {
    if (!(delta > 0.0)) throw ParameterError("delta", "must be positive");
    const double T = std::min(horizon, xi.end());

    struct Item {
        double t;
        int side;  // 0 = left limit, 1 = value
        double v;
    };
    std::vector<Item> items;
    items.reserve(xi.segments() * 6 + 4);
    auto add_point = [&](double t) {
        if (t < 0.0 || t > T) return;
        if (t > 0.0) items.push_back({t, 0, xi.left_limit(t)});
        items.push_back({t, 1, xi(t)});
    };
    add_point(0.0);
    add_point(T);
    for (std::size_t k = 0; k < xi.segments() && xi.times()[k] <= T; ++k) {
        const double b = xi.times()[k];
        add_point(b);
        add_point(b + delta);
        add_point(b - delta);
    }
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        return a.t < b.t || (a.t == b.t && a.side < b.side);
    });

    const double tol = 1e-12 * std::max(1.0, T);
    auto admissible = [&](const Item& i, const Item& j) {
        const double d = j.t - i.t;
        if (d < delta - tol) return true;
        if (d > delta + tol) return false;
        return !(i.side == 0 && j.side == 1);
    };

    PathFunctionals out;
    std::deque<std::size_t> hi, lo;
    std::size_t start = 0;
    for (std::size_t j = 0; j < items.size(); ++j) {
        out.sup_norm = std::max(out.sup_norm, std::abs(items[j].v));
        while (!hi.empty() && items[hi.back()].v <= items[j].v) hi.pop_back();
        hi.push_back(j);
        while (!lo.empty() && items[lo.back()].v >= items[j].v) lo.pop_back();
        lo.push_back(j);
        while (!admissible(items[start], items[j])) ++start;
        while (hi.front() < start) hi.pop_front();
        while (lo.front() < start) lo.pop_front();
        out.modulus = std::max(out.modulus, items[hi.front()].v - items[lo.front()].v);
    }
    return out;
}

double cross_variation(const CadlagPath& a, const CadlagPath& b, double horizon) {
    double total = 0.0;
    std::size_t j = 1;
    for (std::size_t i = 1; i < a.segments() && a.times()[i] <= horizon; ++i) {
        const double t = a.times()[i];
        while (j < b.segments() && b.times()[j] < t) ++j;
        if (j < b.segments() && b.times()[j] == t) {
            const double da = a.values()[i] - a.segment_end_value(i - 1);
            const double db = b.values()[j] - b.segment_end_value(j - 1);
            total += da * db;
        }
    }
    return total;
}

}  // namespace mlq
