#pragma once

#include "drte/data_model.hpp"

#include <functional>
#include <span>
#include <string_view>

namespace drte {

enum class BoundMethod { Sharp, Neyman };

std::string_view to_string(BoundMethod m) noexcept;
/// Accepts "sharp" or "neyman"; throws DomainError otherwise.
BoundMethod parse_bound_method(std::string_view s);

/// Lower (optimistic) and upper (pessimistic) bounds on Var(Y(1) - Y(0)).
struct VarianceBounds {
    double v_o = 0.0;
    double v_p = 0.0;
    BoundMethod method = BoundMethod::Sharp;
};

/// Cauchy-Schwarz bounds (sigma1 -/+ sigma0)^2.
VarianceBounds neyman_bounds(double sigma1_sq, double sigma0_sq);

/// Frechet-Hoeffding bounds from the two empirical marginals. The comonotone
/// and antitone couplings are integrated exactly over the merged step grid.
/// Requires at least two observations per arm.
VarianceBounds sharp_bounds_empirical(const ExperimentalSample& sample);

/// Same as above from raw arm outcomes (any order).
VarianceBounds sharp_bounds_from_arms(std::span<const double> treated,
                                      std::span<const double> control);

using QuantileFunction = std::function<double(double)>;

/// Frechet-Hoeffding bounds for population marginals given by their quantile
/// functions, by the midpoint rule on a uniform u-grid (grid_size >= 100).
VarianceBounds sharp_bounds_population(const QuantileFunction& q1, const QuantileFunction& q0,
                                       std::size_t grid_size);

/// Bounds of the requested kind from a sample (Neyman uses 1/n_t variances).
VarianceBounds estimate_variance_bounds(const ExperimentalSample& sample, BoundMethod method);

}  // namespace drte
