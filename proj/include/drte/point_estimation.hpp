#pragma once

#include "drte/data_model.hpp"

namespace drte {

/// Per-arm plug-in moments. Central moments use 1/n_t normalization.
struct ArmMoments {
    double tau1 = 0.0;       ///< mean of treated outcomes
    double tau0 = 0.0;       ///< mean of control outcomes
    double sigma1_sq = 0.0;
    double sigma0_sq = 0.0;
    double mu3_1 = 0.0;
    double mu3_0 = 0.0;
    double mu4_1 = 0.0;
    double mu4_0 = 0.0;
    double e_hat = 0.5;      ///< treated fraction n1 / n

    double ate() const noexcept { return tau1 - tau0; }
};

/// Difference of arm means.
double estimate_ate_diff_means(const ExperimentalSample& sample);

/// Horvitz-Thompson form with known propensity e:
/// (1/n) sum T Y / e - (1/n) sum (1-T) Y / (1-e).
double estimate_ate_ipw(const ExperimentalSample& sample, double e);

/// Requires at least two observations per arm (InsufficientData otherwise).
ArmMoments estimate_moments(const ExperimentalSample& sample);

}  // namespace drte
