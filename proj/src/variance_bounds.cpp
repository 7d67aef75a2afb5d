#include "drte/variance_bounds.hpp"

#include "drte/errors.hpp"
#include "drte/point_estimation.hpp"
#include "drte/quantile_integral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace drte {

std::string_view to_string(BoundMethod m) noexcept {
    return m == BoundMethod::Sharp ? "sharp" : "neyman";
}

BoundMethod parse_bound_method(std::string_view s) {
    if (s == "sharp") return BoundMethod::Sharp;
    if (s == "neyman") return BoundMethod::Neyman;
    throw DomainError("unknown bound method '" + std::string(s) + "'");
}

VarianceBounds neyman_bounds(double sigma1_sq, double sigma0_sq) {
    if (!(sigma1_sq >= 0.0) || !(sigma0_sq >= 0.0)) {
        throw DomainError("arm variances must be nonnegative");
    }
    const double s1 = std::sqrt(sigma1_sq);
    const double s0 = std::sqrt(sigma0_sq);
    return {(s1 - s0) * (s1 - s0), (s1 + s0) * (s1 + s0), BoundMethod::Neyman};
}

namespace {

std::vector<double> centered_sorted(std::span<const double> xs) {
    std::vector<double> v(xs.begin(), xs.end());
    std::sort(v.begin(), v.end());
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    for (double& x : v) x -= m;
    return v;
}

// With centered quantiles, Var(Q1(U) - Q0(U)) is a plain second moment and
// cannot go negative; this is algebraically the variance-minus-covariance form.
double coupled_variance(std::span<const double> c1, std::span<const double> c0) {
    return integrate_step_pair(c1, c0, [](double a, double b) { return (a - b) * (a - b); });
}

}  // namespace

VarianceBounds sharp_bounds_from_arms(std::span<const double> treated,
                                      std::span<const double> control) {
    if (treated.size() < 2 || control.size() < 2) {
        throw InsufficientData("sharp bounds need at least two observations per arm");
    }
    const auto c1 = centered_sorted(treated);
    auto c0 = centered_sorted(control);
    VarianceBounds b;
    b.method = BoundMethod::Sharp;
    b.v_o = std::max(0.0, coupled_variance(c1, c0));
    // Q0(1-u) on the k-th step is the (n0-k+1)-th order statistic.
    std::reverse(c0.begin(), c0.end());
    b.v_p = std::max(b.v_o, coupled_variance(c1, c0));
    return b;
}

VarianceBounds sharp_bounds_empirical(const ExperimentalSample& sample) {
    return sharp_bounds_from_arms(sample.treated_outcomes(), sample.control_outcomes());
}

VarianceBounds sharp_bounds_population(const QuantileFunction& q1, const QuantileFunction& q0,
                                       std::size_t grid_size) {
    if (grid_size < 100) {
        throw DomainError("population quadrature needs grid_size >= 100, got " +
                          std::to_string(grid_size));
    }
    const auto n = static_cast<double>(grid_size);
    std::vector<double> a(grid_size), b(grid_size);
    for (std::size_t j = 0; j < grid_size; ++j) {
        const double u = (static_cast<double>(j) + 0.5) / n;
        a[j] = q1(u);
        b[j] = q0(u);
    }
    const double m1 = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double m0 = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double lo = 0.0, hi = 0.0;
    for (std::size_t j = 0; j < grid_size; ++j) {
        const double x = a[j] - m1;
        const double same = x - (b[j] - m0);
        const double opposite = x - (b[grid_size - 1 - j] - m0);
        lo += same * same;
        hi += opposite * opposite;
    }
    VarianceBounds out;
    out.method = BoundMethod::Sharp;
    out.v_o = std::max(0.0, lo / n);
    out.v_p = std::max(out.v_o, hi / n);
    return out;
}

VarianceBounds estimate_variance_bounds(const ExperimentalSample& sample, BoundMethod method) {
    if (method == BoundMethod::Sharp) return sharp_bounds_empirical(sample);
    const ArmMoments m = estimate_moments(sample);
    return neyman_bounds(m.sigma1_sq, m.sigma0_sq);
}

}  // namespace drte
