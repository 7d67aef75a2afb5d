#include "doctest.h"
#include "test_util.hpp"

#include "drte/errors.hpp"
#include "drte/point_estimation.hpp"

#include <cmath>
#include <random>

using namespace drte;

namespace {

ExperimentalSample make_sample(const std::vector<double>& treated, const std::vector<double>& control) {
    std::vector<double> y;
    std::vector<std::uint8_t> t;
    for (double v : treated) {
        y.push_back(v);
        t.push_back(1);
    }
    for (double v : control) {
        y.push_back(v);
        t.push_back(0);
    }
    return ExperimentalSample(y, t);
}

}  // namespace

TEST_CASE("difference in means") {
    CHECK(estimate_ate_diff_means(make_sample({2, 4}, {1, 1})) == 2.0);
    CHECK(estimate_ate_diff_means(make_sample({1, 2, 3}, {1, 2, 3})) == 0.0);
    CHECK(estimate_ate_diff_means(make_sample({5}, {3})) == 2.0);
}

TEST_CASE("ipw estimator") {
    CHECK(estimate_ate_ipw(make_sample({2}, {1}), 0.5) == doctest::Approx(1.0));
    CHECK(estimate_ate_ipw(make_sample({0, 0}, {0}), 0.3) == 0.0);
    CHECK_THROWS_AS(estimate_ate_ipw(make_sample({2}, {1}), 0.0), DomainError);
    CHECK_THROWS_AS(estimate_ate_ipw(make_sample({2}, {1}), 1.0), DomainError);
}

TEST_CASE("ipw at the sample treated fraction equals difference in means") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> z(0.0, 3.0);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> y(2 + rep % 37);
        std::vector<std::uint8_t> t(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] = z(rng) + 10.0;
            t[i] = static_cast<std::uint8_t>(i % 3 == 0 ? 1 : (rng() & 1));
        }
        t[1] = 0;
        const ExperimentalSample s(y, t);
        const double dm = estimate_ate_diff_means(s);
        const double ipw = estimate_ate_ipw(s, s.treated_fraction());
        CHECK(std::abs(dm - ipw) <= 1e-12 * std::max(1.0, std::abs(dm)) + 1e-12);
    }
}

TEST_CASE("moments of small arms") {
    const auto m = estimate_moments(make_sample({0, 2}, {4, 4, 4}));
    CHECK(m.tau1 == 1.0);
    CHECK(m.sigma1_sq == 1.0);
    CHECK(m.mu3_1 == 0.0);
    CHECK(m.mu4_1 == 1.0);
    CHECK(m.sigma0_sq == 0.0);
    CHECK(m.mu3_0 == 0.0);
    CHECK(m.mu4_0 == 0.0);
    CHECK(m.e_hat == doctest::Approx(0.4));
    CHECK(m.ate() == doctest::Approx(-3.0));
    CHECK_THROWS_AS(estimate_moments(make_sample({1}, {1, 2})), InsufficientData);
}

TEST_CASE("moments of a large Gaussian arm") {
    const auto treated = testutil::normal_draws(1'000'000, 0.0, 1.0, 2024);
    const auto control = testutil::normal_draws(1000, 0.0, 1.0, 2025);
    const auto m = estimate_moments(make_sample(treated, control));
    CHECK(std::abs(m.sigma1_sq - 1.0) < 0.02);
    CHECK(std::abs(m.mu4_1 - 3.0) < 0.06);
}

TEST_CASE("location and scale equivariance") {
    const auto a = testutil::normal_draws(50, 1.0, 2.0, 1);
    const auto b = testutil::normal_draws(40, -1.0, 0.5, 2);
    const auto base = estimate_moments(make_sample(a, b));
    const double c = 3.5, s = -2.0;
    std::vector<double> a2 = a, b2 = b, a3 = a, b3 = b;
    for (auto& x : a2) x += c;
    for (auto& x : b2) x += c;
    for (auto& x : a3) x *= s;
    for (auto& x : b3) x *= s;
    const auto shifted = estimate_moments(make_sample(a2, b2));
    const auto scaled = estimate_moments(make_sample(a3, b3));
    CHECK(shifted.tau1 == doctest::Approx(base.tau1 + c));
    CHECK(shifted.tau0 == doctest::Approx(base.tau0 + c));
    CHECK(shifted.sigma1_sq == doctest::Approx(base.sigma1_sq));
    CHECK(shifted.mu3_0 == doctest::Approx(base.mu3_0).epsilon(1e-9));
    CHECK(shifted.mu4_1 == doctest::Approx(base.mu4_1));
    CHECK(scaled.ate() == doctest::Approx(s * base.ate()));
    CHECK(scaled.sigma0_sq == doctest::Approx(s * s * base.sigma0_sq));
    CHECK(scaled.mu3_1 == doctest::Approx(s * s * s * base.mu3_1));
    CHECK(scaled.mu4_0 == doctest::Approx(s * s * s * s * base.mu4_0));
}
