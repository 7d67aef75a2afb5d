#include "drte/inference.hpp"

#include "drte/errors.hpp"
#include "drte/point_estimation.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace drte {

std::string_view to_string(IntervalMethod m) noexcept {
    return m == IntervalMethod::IM ? "IM" : "IM-Bonferroni";
}

double normal_quantile(double p) {
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double normal_cdf(double x) {
    return boost::math::cdf(boost::math::normal_distribution<double>(), x);
}

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("alpha must lie in (0, 1), got " + std::to_string(alpha));
    }
}

}  // namespace

double im_critical_value(double scaled_width, double alpha) {
    check_alpha(alpha);
    if (!(scaled_width >= 0.0)) throw DomainError("IM width must be nonnegative");
    double lo = normal_quantile(1.0 - alpha);
    double hi = normal_quantile(1.0 - alpha / 2.0);
    if (std::isinf(scaled_width)) return lo;
    const auto coverage = [&](double c) { return normal_cdf(c + scaled_width) - normal_cdf(-c); };
    // coverage is increasing in c; coverage(lo) <= 1 - alpha <= coverage(hi).
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (coverage(mid) < 1.0 - alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

IntervalEstimate im_interval(double lo_hat, double hi_hat, double sd_lo, double sd_hi,
                             std::size_t n, double alpha) {
    check_alpha(alpha);
    if (n == 0) throw DomainError("sample size must be positive");
    if (!(sd_lo >= 0.0) || !(sd_hi >= 0.0)) throw DomainError("standard deviations must be >= 0");
    IntervalEstimate out;
    out.alpha = alpha;
    out.method = IntervalMethod::IM;
    if (lo_hat > hi_hat) {
        if (lo_hat - hi_hat >= 1e-10) {
            std::ostringstream msg;
            msg << "interval bounds inverted: lower " << lo_hat << " > upper " << hi_hat;
            throw OrderError(msg.str());
        }
        std::swap(lo_hat, hi_hat);
        std::swap(sd_lo, sd_hi);
        out.diagnostics.warnings.emplace_back("bounds inverted by < 1e-10; swapped");
    }
    const double rn = std::sqrt(static_cast<double>(n));
    const double sd_max = std::max(sd_lo, sd_hi);
    const double width = sd_max > 0.0 ? rn * (hi_hat - lo_hat) / sd_max
                                      : std::numeric_limits<double>::infinity();
    const double c = im_critical_value(width, alpha);
    out.lower = lo_hat - c * sd_lo / rn;
    out.upper = hi_hat + c * sd_hi / rn;
    out.diagnostics.c_min = out.diagnostics.c_max = c;
    return out;
}

PointEstimates estimate_points(const ExperimentalSample& sample, BoundMethod method) {
    PointEstimates e;
    e.n = sample.n();
    e.tau_star = estimate_ate_diff_means(sample);
    e.bounds = estimate_variance_bounds(sample, method);
    e.sigma = estimate_sigma(sample, method);
    return e;
}

namespace {

// Endpoints and SDs ordered numerically (tau_p and tau_o swap when tau* < 0).
struct OrderedBounds {
    double lo, hi, sd_lo, sd_hi;
};

OrderedBounds order(double tau_p, double tau_o, const BoundSds& sds) {
    if (tau_p <= tau_o) return {tau_p, tau_o, sds.sd_p, sds.sd_o};
    return {tau_o, tau_p, sds.sd_o, sds.sd_p};
}

}  // namespace

IntervalEstimate plain_im_interval(const PointEstimates& est, const BoundEstimates& b,
                                   double alpha) {
    const Loadings l = loadings(b.tau_star, b.bounds, b.tau_p, b.tau_o, b.config);
    const OrderedBounds o = order(b.tau_p, b.tau_o, bound_sds(l, est.sigma, false));
    return im_interval(o.lo, o.hi, o.sd_lo, o.sd_hi, est.n, alpha);
}

TwoStepResult two_step_interval(const PointEstimates& est, const RobustConfig& config,
                                const TwoStepOptions& opt) {
    if (!(config.q() > 1.0)) {
        throw UnsupportedConfig("two-step inference requires q > 1 (p < infinity)");
    }
    check_alpha(opt.alpha);
    if (!(opt.beta >= 0.0 && opt.beta < opt.alpha)) {
        throw DomainError("beta must satisfy 0 <= beta < alpha");
    }
    if (opt.grid_points < 25) throw DomainError("two-step grid needs at least 25 points");

    TwoStepResult res;
    IntervalDiagnostics& diag = res.diagnostics;
    diag.grid_points = opt.grid_points;
    diag.warnings = est.sigma.warnings();
    const double rn = std::sqrt(static_cast<double>(est.n));
    const double half = opt.beta > 0.0
                            ? normal_quantile(1.0 - opt.beta / 2.0) * est.sigma.sigma_tau() / rn
                            : std::numeric_limits<double>::infinity();
    diag.first_step_lower = est.tau_star - half;
    diag.first_step_upper = est.tau_star + half;
    if (!(diag.first_step_lower > 0.0 || diag.first_step_upper < 0.0)) {
        diag.rejected_first_step = false;
        return res;
    }

    const double level = opt.alpha - opt.beta;
    IntervalEstimate out;
    out.alpha = opt.alpha;
    out.method = IntervalMethod::IMBonferroni;
    out.lower = std::numeric_limits<double>::infinity();
    out.upper = -std::numeric_limits<double>::infinity();
    diag.c_min = std::numeric_limits<double>::infinity();
    diag.c_max = -std::numeric_limits<double>::infinity();
    const double step =
        (diag.first_step_upper - diag.first_step_lower) / static_cast<double>(opt.grid_points - 1);
    for (std::size_t k = 0; k < opt.grid_points; ++k) {
        const double t = k + 1 == opt.grid_points ? diag.first_step_upper
                                                  : diag.first_step_lower + step * static_cast<double>(k);
        const double tp = solve_minimax(t, est.bounds.v_p, config);
        const double to = solve_minimax(t, est.bounds.v_o, config);
        const Loadings l = loadings(t, est.bounds, tp, to, config);
        const OrderedBounds o = order(tp, to, bound_sds(l, est.sigma, true));
        const IntervalEstimate piece = im_interval(o.lo, o.hi, o.sd_lo, o.sd_hi, est.n, level);
        out.lower = std::min(out.lower, piece.lower);
        out.upper = std::max(out.upper, piece.upper);
        diag.c_min = std::min(diag.c_min, piece.diagnostics.c_min);
        diag.c_max = std::max(diag.c_max, piece.diagnostics.c_max);
    }
    out.diagnostics = diag;
    res.interval = out;
    return res;
}

TwoStepResult two_step_interval(const ExperimentalSample& sample, const RobustConfig& config,
                                BoundMethod method, const TwoStepOptions& options) {
    if (!(config.q() > 1.0)) {
        throw UnsupportedConfig("two-step inference requires q > 1 (p < infinity)");
    }
    return two_step_interval(estimate_points(sample, method), config, options);
}

Analysis analyze(const ExperimentalSample& sample, const RobustConfig& config, BoundMethod method,
                 const TwoStepOptions& options, bool with_intervals) {
    if (with_intervals && !(config.q() > 1.0)) {
        throw UnsupportedConfig("interval estimation requires q > 1 (p < infinity)");
    }
    Analysis a;
    a.moments = estimate_moments(sample);
    a.points = estimate_points(sample, method);
    a.warnings = a.points.sigma.warnings();
    a.bounds = solve_bounds(a.points.tau_star, a.points.bounds, config);
    try {
        const Loadings l = loadings(a.bounds.tau_star, a.bounds.bounds, a.bounds.tau_p,
                                    a.bounds.tau_o, config);
        a.sds = bound_sds(l, a.points.sigma, false);
    } catch (const ZeroTauError& e) {
        a.warnings.emplace_back(e.what());
    }
    if (with_intervals) {
        if (a.sds) a.im = plain_im_interval(a.points, a.bounds, options.alpha);
        a.two_step = two_step_interval(a.points, config, options);
    }
    return a;
}

}  // namespace drte
