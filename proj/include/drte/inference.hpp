#pragma once

#include "drte/covariance.hpp"
#include "drte/data_model.hpp"
#include "drte/robust_solver.hpp"
#include "drte/variance_bounds.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace drte {

enum class IntervalMethod { IM, IMBonferroni };

std::string_view to_string(IntervalMethod m) noexcept;

struct IntervalDiagnostics {
    /// First-step interval for tau* (two-step only).
    double first_step_lower = 0.0;
    double first_step_upper = 0.0;
    std::size_t grid_points = 0;
    /// Smallest and largest critical value used (equal for a single IM interval).
    double c_min = 0.0;
    double c_max = 0.0;
    bool rejected_first_step = true;
    std::vector<std::string> warnings;
};

struct IntervalEstimate {
    double lower = 0.0;
    double upper = 0.0;
    double alpha = 0.05;
    IntervalMethod method = IntervalMethod::IM;
    IntervalDiagnostics diagnostics;

    double length() const noexcept { return upper - lower; }
    bool contains(double x) const noexcept { return lower <= x && x <= upper; }
};

/// Standard normal quantile and CDF.
double normal_quantile(double p);
double normal_cdf(double x);

/// Critical value c solving Phi(c + width) - Phi(-c) = 1 - alpha, where width
/// is sqrt(n)(hi - lo) / max(sd_lo, sd_hi). Lies in [z_{1-alpha}, z_{1-alpha/2}].
double im_critical_value(double scaled_width, double alpha);

/// Imbens-Manski interval [lo - c sd_lo / sqrt(n), hi + c sd_hi / sqrt(n)].
/// Bounds inverted by less than 1e-10 are swapped with a warning; larger
/// inversions throw OrderError.
IntervalEstimate im_interval(double lo_hat, double hi_hat, double sd_lo, double sd_hi,
                             std::size_t n, double alpha);

struct TwoStepOptions {
    double alpha = 0.05;
    double beta = 0.045;
    std::size_t grid_points = 101;
};

/// Estimates that the interval procedures share.
struct PointEstimates {
    std::size_t n = 0;
    double tau_star = 0.0;
    VarianceBounds bounds;
    SigmaMatrix sigma{Eigen::Matrix3d::Zero(), SigmaMethod::NeymanAnalytic};
};

PointEstimates estimate_points(const ExperimentalSample& sample, BoundMethod method);

/// Result of the two-step procedure. `interval` is empty when the first-step
/// interval for tau* contains zero.
struct TwoStepResult {
    IntervalDiagnostics diagnostics;
    std::optional<IntervalEstimate> interval;
};

/// Two-step Bonferroni interval. Step one is tau*-hat +/- z_{1-beta/2} sd / sqrt(n);
/// if it contains zero the procedure stops. Otherwise, for each t on a uniform
/// grid over that interval, the bounds are re-solved at tau* = t and an IM
/// interval at level 1 - alpha + beta is built from conditional SDs; the result
/// is the union. Requires q > 1, 0 <= beta < alpha and grid_points >= 25.
TwoStepResult two_step_interval(const PointEstimates& est, const RobustConfig& config,
                                const TwoStepOptions& options = {});

TwoStepResult two_step_interval(const ExperimentalSample& sample, const RobustConfig& config,
                                BoundMethod method, const TwoStepOptions& options = {});

/// Plain IM interval at level 1 - alpha around (tau_p, tau_o) with
/// unconditional SDs. Throws ZeroTauError when a bound estimate is zero.
IntervalEstimate plain_im_interval(const PointEstimates& est, const BoundEstimates& bounds,
                                   double alpha);

/// Everything the estimate and infer commands report for one sample.
struct Analysis {
    PointEstimates points;
    ArmMoments moments;
    BoundEstimates bounds;
    std::optional<BoundSds> sds;  ///< empty when a bound estimate is zero
    std::optional<IntervalEstimate> im;
    std::optional<TwoStepResult> two_step;
    std::vector<std::string> warnings;
};

/// Point estimates, SDs and (when `with_intervals`) the plain IM and two-step
/// intervals. Interval construction requires q > 1.
Analysis analyze(const ExperimentalSample& sample, const RobustConfig& config, BoundMethod method,
                 const TwoStepOptions& options, bool with_intervals);

}  // namespace drte
