#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mlq {

/// Right-continuous path with left limits on [0, end], piecewise linear between
/// breakpoints and possibly jumping at them. Segment k covers [t_k, t_{k+1})
/// (the last one [t_last, end]) with value v_k + s_k (t - t_k).
/// Piecewise-constant paths are the special case of all-zero slopes.
class CadlagPath {
public:
    CadlagPath() = default;
    CadlagPath(std::vector<double> times, std::vector<double> values, std::vector<double> slopes, double end);

    static CadlagPath step(std::vector<double> times, std::vector<double> values, double end);
    static CadlagPath constant(double value, double end);
    static CadlagPath linear(double value0, double slope, double end);

    std::size_t segments() const noexcept { return times_.size(); }
    double end() const noexcept { return end_; }
    bool piecewise_constant() const noexcept;

    std::span<const double> times() const noexcept { return times_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> slopes() const noexcept { return slopes_; }

    /// Index of the segment containing t (clamped to [0, end]).
    std::size_t segment_at(double t) const;
    double operator()(double t) const;
    double left_limit(double t) const;
    /// Value approached at the right end of segment k.
    double segment_end_value(std::size_t k) const;
    double segment_length(std::size_t k) const;

private:
    std::vector<double> times_;
    std::vector<double> values_;
    std::vector<double> slopes_;
    double end_ = 0.0;
};

/// Union of both breakpoint sets restricted to [0, min(a.end, b.end)].
std::vector<double> merged_breakpoints(const CadlagPath& a, const CadlagPath& b);

/// Same path expressed on a breakpoint superset (must contain every original breakpoint <= end).
CadlagPath resample(const CadlagPath& path, std::span<const double> times, double end);

CadlagPath operator+(const CadlagPath& a, const CadlagPath& b);
CadlagPath operator-(const CadlagPath& a, const CadlagPath& b);
CadlagPath operator*(double c, const CadlagPath& a);

struct ReflectedPair {
    CadlagPath phi;  // regulated path, >= 0
    CadlagPath eta;  // regulator, nondecreasing, eta(0) = 0
};

/// One-sided Skorokhod map on [0, inf): eta(t) = sup_{s<=t} max(0, -psi(s)), phi = psi + eta.
/// Exact on piecewise-linear input; kinks inside linear segments become new breakpoints.
ReflectedPair skorokhod_map(const CadlagPath& psi);

/// Stieltjes integral of phi against eta over [0, T], jumps included (eta(0) counts as a jump at 0).
double complementarity_defect(const CadlagPath& phi, const CadlagPath& eta, double horizon);

/// Integral over [0, T] of 1{phi > threshold} d eta.
double boundary_push_away(const CadlagPath& phi, const CadlagPath& eta, double horizon, double threshold);

struct PathFunctionals {
    double sup_norm = 0.0;  // sup_{t<=T} |xi(t)|
    double modulus = 0.0;   // sup{|xi(t)-xi(s)| : s,t in [0,T], |s-t| <= delta}
};

PathFunctionals path_functionals(const CadlagPath& xi, double horizon, double delta);

double sup_norm(const CadlagPath& xi, double horizon);
double sup_distance(const CadlagPath& a, const CadlagPath& b, double horizon);

/// Sum over 0 < s <= T of the product of simultaneous jumps (exact time equality).
double cross_variation(const CadlagPath& a, const CadlagPath& b, double horizon);

}  // namespace mlq
