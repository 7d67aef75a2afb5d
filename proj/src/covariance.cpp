#include "drte/covariance.hpp"

#include "drte/errors.hpp"
#include "drte/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace drte {

std::string_view to_string(SigmaMethod m) noexcept {
    switch (m) {
        case SigmaMethod::NeymanAnalytic: return "neyman-analytic";
        case SigmaMethod::NeymanInfluence: return "neyman-influence";
        case SigmaMethod::SharpPlugin: return "sharp-plugin";
        case SigmaMethod::SharpKernel: return "sharp-kernel";
        case SigmaMethod::Bootstrap: return "bootstrap";
    }
    return "unknown";
}

SigmaMatrix::SigmaMatrix(const Eigen::Matrix3d& entries, SigmaMethod method,
                         std::vector<std::string> warnings)
    : entries_(0.5 * (entries + entries.transpose())), method_(method),
      warnings_(std::move(warnings)) {
    if (!entries_.allFinite()) throw DomainError("covariance matrix has non-finite entries");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(entries_);
    const double trace = entries_.trace();
    if (eig.eigenvalues().minCoeff() < -1e-8 * std::max(trace, 0.0)) {
        const Eigen::Vector3d clipped = eig.eigenvalues().cwiseMax(0.0);
        entries_ = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
        entries_ = 0.5 * (entries_ + entries_.transpose());
        repaired_ = true;
        std::ostringstream msg;
        msg << "covariance projected to PSD (smallest eigenvalue " << eig.eigenvalues().minCoeff()
            << ")";
        warnings_.push_back(msg.str());
    }
    for (int i = 0; i < 3; ++i) entries_(i, i) = std::max(entries_(i, i), 0.0);
}

double SigmaMatrix::sigma_tau() const { return std::sqrt(entries_(kTau, kTau)); }

SigmaMatrix sigma_neyman(const ArmMoments& m) {
    if (!(m.sigma1_sq > 0.0) || !(m.sigma0_sq > 0.0)) {
        throw DomainError("Neyman covariance needs positive variance in both arms");
    }
    if (!(m.e_hat > 0.0 && m.e_hat < 1.0)) throw DomainError("treated fraction must lie in (0, 1)");
    std::vector<std::string> warnings;
    if (std::fabs(m.sigma1_sq - m.sigma0_sq) <= 1e-3 * std::max(m.sigma1_sq, m.sigma0_sq)) {
        warnings.emplace_back(
            "arm variances nearly equal; the lower Neyman bound is not differentiable there");
    }
    const double e = m.e_hat;
    const double s1 = std::sqrt(m.sigma1_sq), s0 = std::sqrt(m.sigma0_sq);
    // V_p = (s1 + s0)^2 and V_o = (s1 - s0)^2 load on the arm variances with
    // coefficients 1 +/- s0/s1 and 1 +/- s1/s0.
    const double a_p = 1.0 + s0 / s1, b_p = 1.0 + s1 / s0;
    const double a_o = 1.0 - s0 / s1, b_o = 1.0 - s1 / s0;
    const double k1 = (m.mu4_1 - m.sigma1_sq * m.sigma1_sq) / e;
    const double k0 = (m.mu4_0 - m.sigma0_sq * m.sigma0_sq) / (1.0 - e);
    const double c1 = m.mu3_1 / e;          // Cov(tau1-dot, sigma1^2-dot)
    const double c0 = m.mu3_0 / (1.0 - e);  // Cov(tau0-dot, sigma0^2-dot)

    Eigen::Matrix3d s;
    s(0, 0) = a_p * a_p * k1 + b_p * b_p * k0;
    s(1, 1) = a_o * a_o * k1 + b_o * b_o * k0;
    s(2, 2) = m.sigma1_sq / e + m.sigma0_sq / (1.0 - e);
    s(0, 1) = s(1, 0) = a_p * a_o * k1 + b_p * b_o * k0;
    s(0, 2) = s(2, 0) = a_p * c1 - b_p * c0;
    s(1, 2) = s(2, 1) = a_o * c1 - b_o * c0;
    return SigmaMatrix(s, SigmaMethod::NeymanAnalytic, std::move(warnings));
}

namespace {

// Influence values shared by both bound types.
struct BaseInfluence {
    Eigen::VectorXd tau1, tau0, s1, s0;
    ArmMoments m;
};

BaseInfluence base_influence(const ExperimentalSample& sample) {
    BaseInfluence b;
    b.m = estimate_moments(sample);
    const auto n = static_cast<Eigen::Index>(sample.n());
    b.tau1 = b.tau0 = b.s1 = b.s0 = Eigen::VectorXd::Zero(n);
    const double e = b.m.e_hat;
    const auto y = sample.outcomes();
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        if (sample.is_treated(k)) {
            const double r = y[k] - b.m.tau1;
            b.tau1(i) = r / e;
            b.s1(i) = (r * r - b.m.sigma1_sq) / e;
        } else {
            const double r = y[k] - b.m.tau0;
            b.tau0(i) = r / (1.0 - e);
            b.s0(i) = (r * r - b.m.sigma0_sq) / (1.0 - e);
        }
    }
    return b;
}

// theta_o = int Q1 Q0 and theta_p = int Q1(u) Q0(1-u) influence values.
struct ThetaInfluence {
    Eigen::VectorXd o, p;
};

InfluenceMatrix assemble_sharp(const BaseInfluence& b, const ThetaInfluence& th) {
    const Eigen::Index n = b.tau1.size();
    const Eigen::VectorXd gamma = b.m.tau0 * b.tau1 + b.m.tau1 * b.tau0;
    InfluenceMatrix out(n, 3);
    out.col(0) = b.s1 + b.s0 - 2.0 * (th.p - gamma);
    out.col(1) = b.s1 + b.s0 - 2.0 * (th.o - gamma);
    out.col(2) = b.tau1 - b.tau0;
    return out;
}

std::vector<double> sorted_copy(std::span<const double> xs) {
    std::vector<double> v(xs.begin(), xs.end());
    std::sort(v.begin(), v.end());
    return v;
}

// Index of Q(k/m) in a sorted array of size n: ceil(k n / m) - 1.
std::size_t step_index(std::size_t k, std::size_t m, std::size_t n) {
    return (k * n + m - 1) / m - 1;
}

// For one arm with sorted values `own` and the other arm's sorted values
// `other`, the influence of unit y on int Q_own(u) g(u) du (g = Q_other(u) or
// Q_other(1-u)) is
//   -(1/p) [ sum_{k : own[k-1] >= y} w_k - sum_k (k/m) w_k ],
// with w_k = g(k/m) (own[k] - own[k-1]) over the gaps of the own arm and p the
// arm's assignment probability.
struct GapWeights {
    std::vector<double> own;
    std::vector<double> suffix;  // suffix[j] = sum_{k >= j+1} w_k
    double centre = 0.0;

    double operator()(double y) const {
        const auto j = static_cast<std::size_t>(std::lower_bound(own.begin(), own.end(), y) -
                                                own.begin());
        return suffix[j] - centre;
    }
};

GapWeights gap_weights(std::vector<double> own, const std::vector<double>& other, bool reversed) {
    const std::size_t m = own.size(), n = other.size();
    GapWeights g;
    g.suffix.assign(m + 1, 0.0);
    for (std::size_t k = m - 1; k >= 1; --k) {
        const std::size_t idx = reversed ? step_index(m - k, m, n) : step_index(k, m, n);
        const double w = other[idx] * (own[k] - own[k - 1]);
        g.suffix[k - 1] = g.suffix[k] + w;
        g.centre += (static_cast<double>(k) / static_cast<double>(m)) * w;
    }
    g.own = std::move(own);
    return g;
}

void require_arm_sizes(const ExperimentalSample& sample) {
    if (sample.n1() < 30 || sample.n0() < 30) {
        throw InsufficientData("sharp-bound covariance needs at least 30 observations per arm (n1=" +
                               std::to_string(sample.n1()) +
                               ", n0=" + std::to_string(sample.n0()) + ")");
    }
}

}  // namespace

InfluenceMatrix neyman_influence(const ExperimentalSample& sample) {
    const BaseInfluence b = base_influence(sample);
    if (!(b.m.sigma1_sq > 0.0) || !(b.m.sigma0_sq > 0.0)) {
        throw DomainError("Neyman covariance needs positive variance in both arms");
    }
    const double s1 = std::sqrt(b.m.sigma1_sq), s0 = std::sqrt(b.m.sigma0_sq);
    InfluenceMatrix out(b.tau1.size(), 3);
    out.col(0) = (1.0 + s0 / s1) * b.s1 + (1.0 + s1 / s0) * b.s0;
    out.col(1) = (1.0 - s0 / s1) * b.s1 + (1.0 - s1 / s0) * b.s0;
    out.col(2) = b.tau1 - b.tau0;
    return out;
}

InfluenceMatrix sharp_influence_exact(const ExperimentalSample& sample) {
    require_arm_sizes(sample);
    const BaseInfluence b = base_influence(sample);
    const double e = b.m.e_hat;
    const auto a1 = sorted_copy(sample.treated_outcomes());
    const auto a0 = sorted_copy(sample.control_outcomes());

    const GapWeights t_o = gap_weights(a1, a0, false);
    const GapWeights t_p = gap_weights(a1, a0, true);
    const GapWeights c_o = gap_weights(a0, a1, false);
    const GapWeights c_p = gap_weights(a0, a1, true);

    ThetaInfluence th;
    const auto n = static_cast<Eigen::Index>(sample.n());
    th.o = th.p = Eigen::VectorXd::Zero(n);
    const auto y = sample.outcomes();
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        if (sample.is_treated(k)) {
            th.o(i) = -t_o(y[k]) / e;
            th.p(i) = -t_p(y[k]) / e;
        } else {
            th.o(i) = -c_o(y[k]) / (1.0 - e);
            th.p(i) = -c_p(y[k]) / (1.0 - e);
        }
    }
    return assemble_sharp(b, th);
}

KernelDensity::KernelDensity(std::span<const double> values) : sorted_(sorted_copy(values)) {
    const auto n = static_cast<double>(sorted_.size());
    if (sorted_.size() < 2) throw InsufficientData("kernel density needs at least two points");
    const double mean = std::accumulate(sorted_.begin(), sorted_.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : sorted_) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    const EmpiricalDistribution dist(sorted_);
    const double iqr = dist.quantile(0.75) - dist.quantile(0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd;
    h_ = 0.9 * spread * std::pow(n, -0.2);
    if (!(h_ > 0.0)) throw DensityError("kernel bandwidth is zero (constant arm)");
}

double KernelDensity::operator()(double y) const {
    // Contributions beyond 40 bandwidths underflow; restrict to that window.
    const auto lo = std::lower_bound(sorted_.begin(), sorted_.end(), y - 40.0 * h_);
    const auto hi = std::upper_bound(sorted_.begin(), sorted_.end(), y + 40.0 * h_);
    double s = 0.0;
    for (auto it = lo; it != hi; ++it) {
        const double z = (y - *it) / h_;
        s += std::exp(-0.5 * z * z);
    }
    return s / (static_cast<double>(sorted_.size()) * h_ * std::sqrt(2.0 * std::numbers::pi));
}

InfluenceMatrix sharp_influence_kernel(const ExperimentalSample& sample,
                                       const KernelOptions& opt) {
    require_arm_sizes(sample);
    if (opt.grid_size < 200) throw DomainError("kernel grid needs at least 200 points");
    if (!(opt.u_min > 0.0 && opt.u_min < opt.u_max && opt.u_max < 1.0) ||
        std::fabs(opt.u_min + opt.u_max - 1.0) > 1e-12) {
        throw DomainError("kernel trim must be symmetric: 0 < u_min < u_max = 1 - u_min");
    }
    const BaseInfluence b = base_influence(sample);
    const double e = b.m.e_hat;
    const EmpiricalDistribution d1(sample.treated_outcomes()), d0(sample.control_outcomes());
    const KernelDensity f1(sample.treated_outcomes()), f0(sample.control_outcomes());

    const std::size_t g = opt.grid_size;
    const double du = (opt.u_max - opt.u_min) / static_cast<double>(g);
    std::vector<double> u(g), q1(g), q0(g), q1r(g), q0r(g), fq1(g), fq0(g);
    for (std::size_t j = 0; j < g; ++j) {
        u[j] = opt.u_min + (static_cast<double>(j) + 0.5) * du;
        q1[j] = d1.quantile(u[j]);
        q0[j] = d0.quantile(u[j]);
        q1r[j] = d1.quantile(1.0 - u[j]);
        q0r[j] = d0.quantile(1.0 - u[j]);
        fq1[j] = f1(q1[j]);
        fq0[j] = f0(q0[j]);
        if (fq1[j] < opt.density_floor || fq0[j] < opt.density_floor) {
            std::ostringstream msg;
            msg << "estimated density below " << opt.density_floor << " at u=" << u[j];
            throw DensityError(msg.str());
        }
    }

    // For a unit y in arm t with quantiles q_t (nondecreasing in j):
    //   sum_j c_j [1{y <= q_t(u_j)} - u_j] = S(first j with q_t(u_j) >= y) - sum_j c_j u_j.
    struct Integrator {
        const std::vector<double>* q;
        std::vector<double> suffix;
        double centre = 0.0;
        double operator()(double y) const {
            const auto j = static_cast<std::size_t>(
                std::lower_bound(q->begin(), q->end(), y) - q->begin());
            return suffix[j] - centre;
        }
    };
    const auto make = [&](const std::vector<double>& q, const std::vector<double>& c) {
        Integrator it{&q, std::vector<double>(g + 1, 0.0), 0.0};
        for (std::size_t j = g; j-- > 0;) {
            it.suffix[j] = it.suffix[j + 1] + c[j];
            it.centre += c[j] * u[j];
        }
        return it;
    };
    // Q0-dot(1 - u) enters theta_p; substituting w = 1 - u pairs it with Q1(1 - w).
    std::vector<double> c1o(g), c1p(g), c0o(g), c0p(g);
    for (std::size_t j = 0; j < g; ++j) {
        c1o[j] = du * q0[j] / (e * fq1[j]);
        c1p[j] = du * q0r[j] / (e * fq1[j]);
        c0o[j] = du * q1[j] / ((1.0 - e) * fq0[j]);
        c0p[j] = du * q1r[j] / ((1.0 - e) * fq0[j]);
    }
    const Integrator t_o = make(q1, c1o), t_p = make(q1, c1p);
    const Integrator k_o = make(q0, c0o), k_p = make(q0, c0p);

    ThetaInfluence th;
    const auto n = static_cast<Eigen::Index>(sample.n());
    th.o = th.p = Eigen::VectorXd::Zero(n);
    const auto y = sample.outcomes();
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        if (sample.is_treated(k)) {
            th.o(i) = -t_o(y[k]);
            th.p(i) = -t_p(y[k]);
        } else {
            th.o(i) = -k_o(y[k]);
            th.p(i) = -k_p(y[k]);
        }
    }
    return assemble_sharp(b, th);
}

SigmaMatrix sigma_from_influence(const InfluenceMatrix& rows, SigmaMethod method,
                                 std::vector<std::string> warnings) {
    const auto n = static_cast<double>(rows.rows());
    const Eigen::RowVector3d mean = rows.colwise().mean();
    const InfluenceMatrix centred = rows.rowwise() - mean;
    const Eigen::Matrix3d cov = (centred.transpose() * centred) / n;
    return SigmaMatrix(cov, method, std::move(warnings));
}

SigmaMatrix sigma_sharp(const ExperimentalSample& sample) {
    return sigma_from_influence(sharp_influence_exact(sample), SigmaMethod::SharpPlugin);
}

SigmaMatrix sigma_sharp_kernel(const ExperimentalSample& sample, const KernelOptions& options) {
    return sigma_from_influence(sharp_influence_kernel(sample, options), SigmaMethod::SharpKernel);
}

SigmaMatrix sigma_bootstrap(const ExperimentalSample& sample, BoundMethod bounds,
                            std::size_t draws, std::uint64_t seed) {
    if (draws < 2) throw DomainError("bootstrap needs at least two draws");
    const auto treated = sample.treated_outcomes();
    const auto control = sample.control_outcomes();
    std::vector<double> t(treated.size()), c(control.size());
    Eigen::MatrixXd stats(static_cast<Eigen::Index>(draws), 3);
    for (std::size_t b = 0; b < draws; ++b) {
        std::mt19937_64 rng(derive_seed(seed, b));
        std::uniform_int_distribution<std::size_t> pick1(0, treated.size() - 1);
        std::uniform_int_distribution<std::size_t> pick0(0, control.size() - 1);
        for (auto& x : t) x = treated[pick1(rng)];
        for (auto& x : c) x = control[pick0(rng)];
        VarianceBounds vb;
        if (bounds == BoundMethod::Sharp) {
            vb = sharp_bounds_from_arms(t, c);
        } else {
            const auto var = [](const std::vector<double>& v) {
                const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
                double s = 0.0;
                for (double x : v) s += (x - m) * (x - m);
                return s / static_cast<double>(v.size());
            };
            vb = neyman_bounds(var(t), var(c));
        }
        const double ate = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(t.size()) -
                           std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
        const auto row = static_cast<Eigen::Index>(b);
        stats(row, 0) = vb.v_p;
        stats(row, 1) = vb.v_o;
        stats(row, 2) = ate;
    }
    const Eigen::RowVector3d mean = stats.colwise().mean();
    const Eigen::MatrixXd centred = stats.rowwise() - mean;
    const Eigen::Matrix3d cov = (centred.transpose() * centred) / static_cast<double>(draws - 1);
    return SigmaMatrix(cov * static_cast<double>(sample.n()), SigmaMethod::Bootstrap);
}

SigmaMatrix estimate_sigma(const ExperimentalSample& sample, BoundMethod bounds) {
    if (bounds == BoundMethod::Sharp) return sigma_sharp(sample);
    return sigma_neyman(estimate_moments(sample));
}

namespace {

// Gradient of the first-order condition for one bound and the curvature there.
std::pair<Eigen::Vector3d, double> bound_loading(double tau_star, double v_b, double tau_b,
                                                 int slot, const RobustConfig& config) {
    const double gap = tau_star - tau_b;
    const double a = std::hypot(std::sqrt(v_b), gap);
    Eigen::Vector3d d = Eigen::Vector3d::Zero();
    if (a == 0.0) {
        // Homogeneous effect below the threshold: tau_b moves one-for-one with tau*.
        d(SigmaMatrix::kTau) = -1.0;
        return {d, 1.0};
    }
    const double scale = gap / (a * a);
    d(slot) = scale * (0.5 / a);
    d(SigmaMatrix::kTau) = scale * (gap / a) - 1.0 / a;
    const double m = v_b / (a * a * a) + config.delta() * penalty_second_derivative(tau_b, config.q());
    return {d, m};
}

}  // namespace

Loadings loadings(double tau_star, const VarianceBounds& bounds, double tau_p, double tau_o,
                  const RobustConfig& config) {
    if (std::fabs(tau_p) < 1e-10 || std::fabs(tau_o) < 1e-10) {
        throw ZeroTauError("a bound estimate is zero; use the zero-effect limit instead");
    }
    Loadings l;
    std::tie(l.d_p, l.m_pp) = bound_loading(tau_star, bounds.v_p, tau_p, SigmaMatrix::kVp, config);
    std::tie(l.d_o, l.m_oo) = bound_loading(tau_star, bounds.v_o, tau_o, SigmaMatrix::kVo, config);
    return l;
}

double asymptotic_sd(const Eigen::Vector3d& d, double m, const SigmaMatrix& sigma,
                     bool conditional) {
    if (!(m > 0.0)) throw DomainError("curvature must be positive");
    Eigen::Vector3d g = d / m;
    if (conditional) g(SigmaMatrix::kTau) = 0.0;
    return std::sqrt(std::max(0.0, g.dot(sigma.entries() * g)));
}

BoundSds bound_sds(const Loadings& l, const SigmaMatrix& sigma, bool conditional) {
    return {asymptotic_sd(l.d_p, l.m_pp, sigma, conditional),
            asymptotic_sd(l.d_o, l.m_oo, sigma, conditional)};
}

double zero_tau_limit_sd(double sigma_tau, double v_b, const RobustConfig& config) {
    if (!(sigma_tau > 0.0)) throw DomainError("sigma_tau must be positive");
    if (!(v_b >= 0.0)) throw DomainError("v_b must be nonnegative");
    if (config.q() < 2.0) {
        throw UnsupportedRegime("the zero-effect limit for q < 2 is non-normal and not implemented");
    }
    const double shrink = config.q() == 2.0 ? config.delta() * std::sqrt(v_b / 2.0) : 0.0;
    return sigma_tau / (1.0 + shrink);
}

}  // namespace drte
