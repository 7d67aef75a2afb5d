#include "drte/robust_solver.hpp"

#include "drte/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace drte {

RobustConfig::RobustConfig(double delta, double q) : delta_(delta), q_(q) {
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
        throw DomainError("radius delta must be finite and >= 0, got " + std::to_string(delta));
    }
    if (!(q >= 1.0) || !std::isfinite(q)) {
        throw DomainError("penalty order q must be finite and >= 1, got " + std::to_string(q));
    }
}

RobustConfig RobustConfig::from_p(double delta, double p) {
    if (std::isinf(p) && p > 0.0) return RobustConfig(delta, 1.0);
    if (!(p > 1.0)) {
        throw DomainError("cost order p must lie in (1, inf], got " + std::to_string(p));
    }
    return RobustConfig(delta, p / (p - 1.0));
}

double penalty(double tau, double q) {
    const double x = std::fabs(tau);
    if (x > 1.0) return x * std::pow(1.0 + 2.0 * std::pow(x, -q), 1.0 / q);
    return std::pow(2.0 + std::pow(x, q), 1.0 / q);
}

double penalty_derivative(double tau, double q) {
    if (tau == 0.0) return q == 1.0 ? 1.0 : 0.0;
    // |tau|^(q-1) (2+|tau|^q)^(1/q-1) = (1 + 2|tau|^-q)^(1/q-1), which stays
    // finite at both ends of the range.
    const double r = 2.0 * std::pow(std::fabs(tau), -q);
    const double mag = std::pow(1.0 + r, 1.0 / q - 1.0);
    return tau > 0.0 ? mag : -mag;
}

double penalty_second_derivative(double tau, double q) {
    if (q == 1.0) return 0.0;
    const double x = std::fabs(tau);
    if (x == 0.0) {
        if (q == 2.0) return 2.0 * std::pow(2.0, 0.5 - 2.0);
        if (q > 2.0) return 0.0;
        return std::numeric_limits<double>::infinity();
    }
    const double xq = std::pow(x, q);
    return 2.0 * (q - 1.0) * std::pow(x, q - 2.0) * std::pow(2.0 + xq, 1.0 / q - 2.0);
}

DualObjective::DualObjective(double tau_star, double v, RobustConfig config)
    : tau_star_(tau_star), v_(v), config_(config) {
    if (!std::isfinite(tau_star)) throw DomainError("tau* must be finite");
    if (!(v >= 0.0) || !std::isfinite(v)) {
        throw DomainError("variance v must be finite and >= 0, got " + std::to_string(v));
    }
}

double DualObjective::loss(double tau) const {
    return std::hypot(std::sqrt(v_), tau_star_ - tau);
}

double DualObjective::loss_derivative(double tau) const {
    const double a = loss(tau);
    return a == 0.0 ? 0.0 : (tau - tau_star_) / a;
}

double DualObjective::loss_second_derivative(double tau) const {
    const double a = loss(tau);
    return v_ / (a * a * a);
}

double DualObjective::loss_dv(double tau) const { return 0.5 / loss(tau); }

double DualObjective::loss_dtau_star(double tau) const {
    return (tau_star_ - tau) / loss(tau);
}

double DualObjective::value(double tau) const {
    return loss(tau) + config_.delta() * penalty(tau, config_.q());
}

double DualObjective::derivative(double tau) const {
    return loss_derivative(tau) + config_.delta() * penalty_derivative(tau, config_.q());
}

double DualObjective::second_derivative(double tau) const {
    return loss_second_derivative(tau) +
           config_.delta() * penalty_second_derivative(tau, config_.q());
}

double dual_objective(double tau, double tau_star, double v, const RobustConfig& config) {
    return DualObjective(tau_star, v, config).value(tau);
}

double homogeneous_threshold(double tau_star, double q) {
    if (tau_star == 0.0 || !std::isfinite(tau_star)) {
        throw DomainError("homogeneous threshold needs a finite nonzero tau*");
    }
    if (!(q > 1.0) || !std::isfinite(q)) {
        throw DomainError("homogeneous threshold needs finite q > 1, got " + std::to_string(q));
    }
    // Equals 1 / B'(|tau*|).
    return std::pow(2.0 * std::pow(std::fabs(tau_star), -q) + 1.0, 1.0 - 1.0 / q);
}

namespace {

constexpr int kMaxIterations = 200;

// Root of a nondecreasing g on [lo, hi] with g(lo) < 0 < g(hi).
//
// Stops once the bracket is narrower than 1e-12 (relative to max(1, hi)) and
// |g| <= 1e-10 there, or when the bracket cannot shrink further. For q near 1
// the first-order condition behaves like x^(q-1) close to zero, so roots can
// sit many decades below hi; the midpoint then switches to geometric steps.
template <class G>
double bisect(G&& g, double lo, double hi) {
    const double tol = 1e-12 * std::fmax(1.0, std::fabs(hi));
    const double scale = hi;
    for (int it = 0; it < kMaxIterations; ++it) {
        double mid;
        if (lo == 0.0 && hi < 1e-8 * scale) {
            mid = hi * 1e-8;
        } else if (lo > 0.0 && hi > 4.0 * lo) {
            mid = std::sqrt(lo) * std::sqrt(hi);
        } else {
            mid = 0.5 * (lo + hi);
        }
        if (mid <= lo || mid >= hi) return mid;
        const double gm = g(mid);
        if (hi - lo <= tol && std::fabs(gm) <= 1e-10) return mid;
        if (gm < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    throw ConvergenceError("bisection did not reach tolerance in " +
                           std::to_string(kMaxIterations) + " iterations");
}

// Minimizer for tau* = t > 0 and delta > 0. The objective is symmetric under
// (tau, tau*) -> (-tau, -tau*), so the caller mirrors negative tau*.
double solve_positive(double t, double v, const RobustConfig& config) {
    const double delta = config.delta();
    const double q = config.q();

    if (v == 0.0) {
        // M = |t - x| + delta B(x): kink at x = t, where the left derivative is
        // -1 + delta B'(t).
        if (q == 1.0) return delta <= 1.0 ? t : 0.0;
        if (delta <= homogeneous_threshold(t, q)) return t;
        return bisect([&](double x) { return -1.0 + delta * penalty_derivative(x, q); }, 0.0, t);
    }

    const DualObjective m(t, v, config);
    // Right derivative at 0: -t/sqrt(v+t^2) + delta [q = 1].
    if (m.derivative(0.0) >= 0.0) return 0.0;
    const double x = bisect([&](double y) { return m.derivative(y); }, 0.0, t);
    if (q == 1.0 && x < 1e-10 && m.value(0.0) <= m.value(x)) return 0.0;
    return x;
}

}  // namespace

double solve_minimax(double tau_star, double v, const RobustConfig& config) {
    if (!std::isfinite(tau_star)) throw DomainError("tau* must be finite");
    if (!(v >= 0.0) || !std::isfinite(v)) {
        throw DomainError("variance v must be finite and >= 0, got " + std::to_string(v));
    }
    if (config.delta() == 0.0) return tau_star;
    if (tau_star == 0.0) return 0.0;
    const double x = solve_positive(std::fabs(tau_star), v, config);
    return tau_star > 0.0 ? x : -x;
}

std::vector<SweepRow> sweep_delta(double tau_star, const VarianceBounds& bounds, double q,
                                  std::span<const double> deltas) {
    if (deltas.empty()) throw DomainError("sweep needs at least one radius");
    std::vector<SweepRow> rows;
    rows.reserve(deltas.size());
    for (double d : deltas) {
        const RobustConfig cfg(d, q);
        rows.push_back({d, solve_minimax(tau_star, bounds.v_p, cfg),
                        solve_minimax(tau_star, bounds.v_o, cfg)});
    }
    return rows;
}

BoundEstimates solve_bounds(double tau_star, const VarianceBounds& bounds,
                            const RobustConfig& config) {
    BoundEstimates b;
    b.tau_star = tau_star;
    b.tau_p = solve_minimax(tau_star, bounds.v_p, config);
    b.tau_o = solve_minimax(tau_star, bounds.v_o, config);
    b.config = config;
    b.bounds = bounds;
    return b;
}

}  // namespace drte
