#include "doctest.h"
#include "test_util.hpp"

#include "drte/errors.hpp"
#include "drte/point_estimation.hpp"
#include "drte/variance_bounds.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
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

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double var(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

// Pairing oracle: repeat each treated value n0 times and each control value n1
// times, so both expanded arms have n1*n0 entries and the quantile integrals
// become plain averages over sorted (or reversed) pairs.
VarianceBounds pairing_oracle(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<double> ea, eb;
    for (double x : a) ea.insert(ea.end(), b.size(), x);
    for (double x : b) eb.insert(eb.end(), a.size(), x);
    const std::size_t m = ea.size();
    double cu = 0.0, cl = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        cu += ea[i] * eb[i];
        cl += ea[i] * eb[m - 1 - i];
    }
    cu = cu / static_cast<double>(m) - mean(a) * mean(b);
    cl = cl / static_cast<double>(m) - mean(a) * mean(b);
    const double s = var(a) + var(b);
    return {std::max(0.0, s - 2.0 * cu), s - 2.0 * cl, BoundMethod::Sharp};
}

QuantileFunction gaussian_quantile(double mu, double sd) {
    return [mu, sd](double u) {
        return mu + sd * boost::math::quantile(boost::math::normal_distribution<double>(), u);
    };
}

}  // namespace

TEST_CASE("neyman bounds") {
    auto b = neyman_bounds(4.0, 1.0);
    CHECK(b.v_o == 1.0);
    CHECK(b.v_p == 9.0);
    CHECK(b.method == BoundMethod::Neyman);
    b = neyman_bounds(0.0, 0.0);
    CHECK(b.v_o == 0.0);
    CHECK(b.v_p == 0.0);
    b = neyman_bounds(0.0, 1.0);
    CHECK(b.v_o == 1.0);
    CHECK(b.v_p == 1.0);
    CHECK_THROWS_AS(neyman_bounds(-1.0, 1.0), DomainError);
}

TEST_CASE("sharp bounds on identical small arms") {
    auto b = sharp_bounds_empirical(make_sample({1, 2, 3}, {1, 2, 3}));
    CHECK(b.v_o == doctest::Approx(0.0));
    CHECK(b.v_p == doctest::Approx(4.0 * 2.0 / 3.0));
    b = sharp_bounds_empirical(make_sample({0, 2}, {0, 2}));
    CHECK(b.v_o == doctest::Approx(0.0));
    CHECK(b.v_p == doctest::Approx(4.0));
    CHECK(b.method == BoundMethod::Sharp);
    CHECK_THROWS_AS(sharp_bounds_empirical(make_sample({1}, {1, 2})), InsufficientData);
}

TEST_CASE("sharp bounds match the pairing oracle for equal and unequal arms") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> size(2, 25);
    std::lognormal_distribution<double> skewed(0.0, 0.8);
    std::uniform_int_distribution<int> tie(0, 4);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t n1 = static_cast<std::size_t>(size(rng));
        const std::size_t n0 = rep % 3 == 0 ? n1 : static_cast<std::size_t>(size(rng));
        std::vector<double> a(n1), b(n0);
        for (auto& x : a) x = rep % 5 == 0 ? tie(rng) : skewed(rng) * 3.0;
        for (auto& x : b) x = rep % 5 == 0 ? tie(rng) : -skewed(rng);
        const auto got = sharp_bounds_empirical(make_sample(a, b));
        const auto want = pairing_oracle(a, b);
        CHECK(std::abs(got.v_o - want.v_o) <= 1e-10 * std::max(1.0, want.v_p));
        CHECK(std::abs(got.v_p - want.v_p) <= 1e-10 * std::max(1.0, want.v_p));
        CHECK(got.v_o <= got.v_p);
    }
}

TEST_CASE("sharp bounds are shift invariant") {
    const auto a = testutil::normal_draws(37, 0.0, 2.0, 3);
    const auto b = testutil::normal_draws(23, 0.0, 1.0, 4);
    const auto base = sharp_bounds_empirical(make_sample(a, b));
    auto a2 = a, b2 = b;
    for (auto& x : a2) x += 100.0;
    for (auto& x : b2) x -= 7.0;
    const auto shifted = sharp_bounds_empirical(make_sample(a2, b2));
    CHECK(std::abs(shifted.v_o - base.v_o) < 1e-9);
    CHECK(std::abs(shifted.v_p - base.v_p) < 1e-9);
}

TEST_CASE("sharp bounds on large Gaussian arms approach the Neyman values") {
    const auto a = testutil::normal_draws(100'000, 2.0, 2.0, 5);
    const auto b = testutil::normal_draws(100'000, 0.2, 1.0, 6);
    const auto s = make_sample(a, b);
    const auto sharp = sharp_bounds_empirical(s);
    const auto m = estimate_moments(s);
    const auto ney = neyman_bounds(m.sigma1_sq, m.sigma0_sq);
    CHECK(sharp.v_o == doctest::Approx(1.0).epsilon(0.03));
    CHECK(sharp.v_p == doctest::Approx(9.0).epsilon(0.03));
    CHECK(sharp.v_o == doctest::Approx(ney.v_o).epsilon(0.03));
    CHECK(sharp.v_p == doctest::Approx(ney.v_p).epsilon(0.03));
    CHECK(estimate_variance_bounds(s, BoundMethod::Neyman).v_p == doctest::Approx(ney.v_p));
}

TEST_CASE("population sharp bounds") {
    auto b = sharp_bounds_population(gaussian_quantile(0, 1), gaussian_quantile(0, 1), 20000);
    CHECK(b.v_o == doctest::Approx(0.0));
    CHECK(b.v_p == doctest::Approx(4.0).epsilon(1e-3));
    b = sharp_bounds_population(gaussian_quantile(2, 2), gaussian_quantile(0.2, 1), 20000);
    CHECK(b.v_o == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(b.v_p == doctest::Approx(9.0).epsilon(1e-3));
    b = sharp_bounds_population([](double) { return 3.0; }, [](double) { return 3.0; }, 100);
    CHECK(b.v_o == 0.0);
    CHECK(b.v_p == 0.0);
    CHECK_THROWS_AS(sharp_bounds_population(gaussian_quantile(0, 1), gaussian_quantile(0, 1), 99),
                    DomainError);
}

TEST_CASE("any Gaussian coupling lies inside the population bounds") {
    // Lognormal against Gaussian: the sharp bounds are strictly inside Neyman.
    const auto q1 = [](double u) {
        return std::exp(boost::math::quantile(boost::math::normal_distribution<double>(), u));
    };
    const auto q0 = gaussian_quantile(0.0, 1.5);
    const auto sharp = sharp_bounds_population(q1, q0, 200000);
    const double var1 = std::exp(1.0) * (std::exp(1.0) - 1.0);
    const auto ney = neyman_bounds(var1, 2.25);
    CHECK(ney.v_o <= sharp.v_o + 1e-6);
    CHECK(sharp.v_p <= ney.v_p + 1e-6);
    CHECK(ney.v_o < sharp.v_o - 0.01);

    std::mt19937_64 rng(17);
    std::normal_distribution<double> z(0.0, 1.0);
    for (double rho : {-0.9, 0.0, 0.9}) {
        const std::size_t reps = 400000;
        std::vector<double> d(reps);
        for (auto& x : d) {
            const double z1 = z(rng);
            const double z0 = rho * z1 + std::sqrt(1 - rho * rho) * z(rng);
            x = std::exp(z1) - 1.5 * z0;
        }
        const double v = var(d);
        const double m = mean(d);
        double m4 = 0.0;
        for (double x : d) m4 += std::pow(x - m, 4);
        m4 /= static_cast<double>(reps);
        const double se = std::sqrt((m4 - v * v) / static_cast<double>(reps));
        CHECK(v >= sharp.v_o - 3 * se);
        CHECK(v <= sharp.v_p + 3 * se);
    }
}
