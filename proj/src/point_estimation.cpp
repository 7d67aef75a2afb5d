#include "drte/point_estimation.hpp"

#include "drte/errors.hpp"

#include <numeric>

namespace drte {

namespace {

double mean_of(std::span<const double> xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

struct Central {
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
};

Central central_moments(std::span<const double> xs, double mean) {
    Central c;
    for (double x : xs) {
        const double d = x - mean;
        const double d2 = d * d;
        c.m2 += d2;
        c.m3 += d2 * d;
        c.m4 += d2 * d2;
    }
    const auto m = static_cast<double>(xs.size());
    c.m2 /= m;
    c.m3 /= m;
    c.m4 /= m;
    return c;
}

}  // namespace

double estimate_ate_diff_means(const ExperimentalSample& sample) {
    return mean_of(sample.treated_outcomes()) - mean_of(sample.control_outcomes());
}

double estimate_ate_ipw(const ExperimentalSample& sample, double e) {
    if (!(e > 0.0 && e < 1.0)) {
        throw DomainError("propensity must lie in (0, 1), got " + std::to_string(e));
    }
    double treated = 0.0, control = 0.0;
    const auto y = sample.outcomes();
    const auto t = sample.treatments();
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (t[i] == 1) {
            treated += y[i];
        } else {
            control += y[i];
        }
    }
    const auto n = static_cast<double>(sample.n());
    return treated / (n * e) - control / (n * (1.0 - e));
}

ArmMoments estimate_moments(const ExperimentalSample& sample) {
    if (sample.n1() < 2 || sample.n0() < 2) {
        throw InsufficientData("moments need at least two observations per arm (n1=" +
                               std::to_string(sample.n1()) +
                               ", n0=" + std::to_string(sample.n0()) + ")");
    }
    ArmMoments m;
    m.tau1 = mean_of(sample.treated_outcomes());
    m.tau0 = mean_of(sample.control_outcomes());
    const Central c1 = central_moments(sample.treated_outcomes(), m.tau1);
    const Central c0 = central_moments(sample.control_outcomes(), m.tau0);
    m.sigma1_sq = c1.m2;
    m.sigma0_sq = c0.m2;
    m.mu3_1 = c1.m3;
    m.mu3_0 = c0.m3;
    m.mu4_1 = c1.m4;
    m.mu4_0 = c0.m4;
    m.e_hat = sample.treated_fraction();
    return m;
}

}  // namespace drte
