#pragma once

#include "drte/variance_bounds.hpp"

#include <span>
#include <vector>

namespace drte {

/// Wasserstein radius and dual penalty order.
///
/// The ambiguity set uses the squared L_p transport cost; every formula works
/// with the conjugate order q = p / (p - 1), so p = infinity maps to q = 1.
class RobustConfig {
public:
    /// Throws DomainError unless delta >= 0 and 1 <= q < infinity.
    RobustConfig(double delta, double q);

    /// Builds the config from the cost-norm order p in (1, infinity].
    static RobustConfig from_p(double delta, double p);

    double delta() const noexcept { return delta_; }
    double q() const noexcept { return q_; }

    RobustConfig with_delta(double delta) const { return RobustConfig(delta, q_); }

private:
    double delta_;
    double q_;
};

/// M(tau) = A(tau) + delta * B(tau), with A = sqrt(V + (tau* - tau)^2) and
/// B = (2 + |tau|^q)^(1/q). This is the bracketed term of the dual of the
/// worst-case MSE; its square is the dual value, so both share a minimizer.
class DualObjective {
public:
    /// Throws DomainError if v < 0 or any input is not finite.
    DualObjective(double tau_star, double v, RobustConfig config);

    double tau_star() const noexcept { return tau_star_; }
    double v() const noexcept { return v_; }
    const RobustConfig& config() const noexcept { return config_; }

    double value(double tau) const;
    /// M'(tau); at tau = 0 with q = 1 this returns the right derivative.
    double derivative(double tau) const;
    /// M''(tau) for tau != 0 (and v > 0 or tau != tau*).
    double second_derivative(double tau) const;

    double loss(double tau) const;                 ///< A
    double loss_derivative(double tau) const;      ///< A'
    double loss_second_derivative(double tau) const;  ///< A''
    /// dA/dV and dA/dtau* at tau.
    double loss_dv(double tau) const;
    double loss_dtau_star(double tau) const;

private:
    double tau_star_;
    double v_;
    RobustConfig config_;
};

/// Penalty B(tau) = (2 + |tau|^q)^(1/q) and its derivatives in tau.
double penalty(double tau, double q);
double penalty_derivative(double tau, double q);
/// 2(q-1)|tau|^(q-2)(2+|tau|^q)^(1/q-2); requires tau != 0 unless q >= 2.
double penalty_second_derivative(double tau, double q);

/// Value of the unsquared dual objective at tau.
double dual_objective(double tau, double tau_star, double v, const RobustConfig& config);

/// The minimax predictor f(V, delta): the unique minimizer of the dual
/// objective. Lies between 0 and tau*; equals tau* when delta = 0 and 0 when
/// tau* = 0. With V = 0 and q > 1 it stays at tau* up to the homogeneous
/// threshold. With q = 1 it may be exactly 0.
double solve_minimax(double tau_star, double v, const RobustConfig& config);

/// Largest radius for which the homogeneous-effect predictor stays at tau*:
/// (2/|tau*|^q + 1)^(1 - 1/q). Requires tau* != 0 and q > 1.
double homogeneous_threshold(double tau_star, double q);

struct SweepRow {
    double delta = 0.0;
    double tau_p = 0.0;
    double tau_o = 0.0;
};

/// Pessimistic/optimistic predictors along a list of radii.
std::vector<SweepRow> sweep_delta(double tau_star, const VarianceBounds& bounds, double q,
                                  std::span<const double> deltas);

/// tau* with the minimax predictors under the pessimistic (v_p) and
/// optimistic (v_o) variance bounds.
struct BoundEstimates {
    double tau_star = 0.0;
    double tau_p = 0.0;
    double tau_o = 0.0;
    RobustConfig config{0.0, 2.0};
    VarianceBounds bounds;

    /// Endpoints in numeric order (they swap when tau* < 0).
    double lower() const noexcept { return tau_p < tau_o ? tau_p : tau_o; }
    double upper() const noexcept { return tau_p < tau_o ? tau_o : tau_p; }
};

BoundEstimates solve_bounds(double tau_star, const VarianceBounds& bounds,
                            const RobustConfig& config);

}  // namespace drte
