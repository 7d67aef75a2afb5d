#pragma once

#include "drte/data_model.hpp"
#include "drte/point_estimation.hpp"
#include "drte/robust_solver.hpp"
#include "drte/variance_bounds.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace drte {

enum class SigmaMethod { NeymanAnalytic, NeymanInfluence, SharpPlugin, SharpKernel, Bootstrap };

std::string_view to_string(SigmaMethod m) noexcept;

/// Asymptotic covariance of sqrt(n)(V_p-hat, V_o-hat, tau*-hat), in that order.
///
/// Construction symmetrizes the input and, when the smallest eigenvalue is
/// below -1e-8 * trace, clips negative eigenvalues to zero.
class SigmaMatrix {
public:
    static constexpr int kVp = 0;
    static constexpr int kVo = 1;
    static constexpr int kTau = 2;

    SigmaMatrix(const Eigen::Matrix3d& entries, SigmaMethod method,
                std::vector<std::string> warnings = {});

    const Eigen::Matrix3d& entries() const noexcept { return entries_; }
    double operator()(int i, int j) const { return entries_(i, j); }
    SigmaMethod method() const noexcept { return method_; }
    bool repaired() const noexcept { return repaired_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    /// Asymptotic standard deviation of sqrt(n)(tau*-hat - tau*).
    double sigma_tau() const;

private:
    Eigen::Matrix3d entries_;
    SigmaMethod method_;
    bool repaired_ = false;
    std::vector<std::string> warnings_;
};

/// Closed-form plug-in covariance for the Neyman bounds (sigma1 +/- sigma0)^2.
/// Throws DomainError when either arm variance is zero; warns when the two arm
/// variances are within a relative 1e-3 of each other.
SigmaMatrix sigma_neyman(const ArmMoments& moments);

/// Per-observation influence values for (V_p, V_o, tau*), one row per unit.
using InfluenceMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Neyman-bound influence values; their empirical covariance reproduces
/// sigma_neyman exactly.
InfluenceMatrix neyman_influence(const ExperimentalSample& sample);

/// Sharp-bound influence values with the quantile-product terms integrated
/// exactly against the empirical distributions. Substituting y = Q(u) removes
/// the density from the quantile influence functions, so no smoothing is
/// needed. Requires at least 30 observations per arm.
InfluenceMatrix sharp_influence_exact(const ExperimentalSample& sample);

struct KernelOptions {
    std::size_t grid_size = 400;
    double u_min = 0.01;
    double u_max = 0.99;
    double density_floor = 1e-6;
};

/// Sharp-bound influence values from the quantile influence functions with
/// Gaussian-kernel density estimates (Silverman bandwidth), integrated by the
/// midpoint rule on a trimmed u-grid. Throws DensityError when an estimated
/// density falls below the floor and InsufficientData for arms under 30.
InfluenceMatrix sharp_influence_kernel(const ExperimentalSample& sample,
                                       const KernelOptions& options = {});

/// Empirical covariance (1/n normalization) of influence rows.
SigmaMatrix sigma_from_influence(const InfluenceMatrix& rows, SigmaMethod method,
                                 std::vector<std::string> warnings = {});

SigmaMatrix sigma_sharp(const ExperimentalSample& sample);
SigmaMatrix sigma_sharp_kernel(const ExperimentalSample& sample, const KernelOptions& options = {});

/// Nonparametric bootstrap, resampling within arms: n times the covariance of
/// (V_p, V_o, tau*) over the draws. Draw b uses its own generator seeded from
/// (seed, b), so results do not depend on evaluation order.
SigmaMatrix sigma_bootstrap(const ExperimentalSample& sample, BoundMethod bounds,
                            std::size_t draws, std::uint64_t seed);

/// Plug-in covariance for the requested bound type.
SigmaMatrix estimate_sigma(const ExperimentalSample& sample, BoundMethod bounds);

/// Gaussian kernel density estimate with Silverman's rule-of-thumb bandwidth
/// 0.9 min(sd, IQR/1.34) n^(-1/5).
class KernelDensity {
public:
    explicit KernelDensity(std::span<const double> values);
    double bandwidth() const noexcept { return h_; }
    double operator()(double y) const;

private:
    std::vector<double> sorted_;
    double h_;
};

/// Gradient of the first-order condition in (V_p, V_o, tau*) at each bound,
/// and the curvature M'' there. The implicit function theorem gives
/// sqrt(n)(tau_b-hat - tau_b) ~ -(d_b / m_bb)' Z.
struct Loadings {
    Eigen::Vector3d d_p = Eigen::Vector3d::Zero();
    Eigen::Vector3d d_o = Eigen::Vector3d::Zero();
    double m_pp = 0.0;
    double m_oo = 0.0;
};

/// Throws ZeroTauError if |tau_p| or |tau_o| is below 1e-10.
Loadings loadings(double tau_star, const VarianceBounds& bounds, double tau_p, double tau_o,
                  const RobustConfig& config);

/// Asymptotic SD of sqrt(n)(tau_b-hat - tau_b): sqrt(g' Sigma g) with
/// g = d / m. The conditional variant zeroes the tau* component of d.
double asymptotic_sd(const Eigen::Vector3d& d, double m, const SigmaMatrix& sigma,
                     bool conditional = false);

struct BoundSds {
    double sd_p = 0.0;
    double sd_o = 0.0;
};

BoundSds bound_sds(const Loadings& l, const SigmaMatrix& sigma, bool conditional = false);

/// Limit SD of sqrt(n) tau_b-hat when tau_b = 0:
/// sigma_tau / (1 + [q = 2] delta sqrt(V_b / 2)). Throws UnsupportedRegime for q < 2.
double zero_tau_limit_sd(double sigma_tau, double v_b, const RobustConfig& config);

}  // namespace drte
