#include "doctest.h"
#include "test_util.hpp"

#include "drte/errors.hpp"
#include "drte/radius_calibration.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace drte;

namespace {

double w2(const std::vector<double>& a, const std::vector<double>& b) {
    return wasserstein2_1d(EmpiricalDistribution(a), EmpiricalDistribution(b));
}

// Equal sizes: W2^2 is the mean squared difference of sorted pairs.
double sorted_pair_oracle(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(a.size()));
}

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> z(0.0, 2.0);
    std::vector<double> v(n);
    for (auto& x : v) x = z(rng);
    return v;
}

}  // namespace

TEST_CASE("wasserstein distance basics") {
    const std::vector<double> a{1.0, 4.0, -2.0, 0.5};
    CHECK(w2(a, a) == 0.0);
    std::vector<double> shifted = a;
    for (auto& x : shifted) x += 3.25;
    CHECK(std::abs(w2(a, shifted) - 3.25) < 1e-10);
    std::vector<double> scaled = a, scaled_b = shifted;
    for (auto& x : scaled) x *= -2.5;
    for (auto& x : scaled_b) x *= -2.5;
    CHECK(std::abs(w2(scaled, scaled_b) - 2.5 * w2(a, shifted)) < 1e-10);
    // A permuted multiset is the same distribution.
    const std::vector<double> perm{0.5, -2.0, 4.0, 1.0};
    CHECK(w2(a, perm) == 0.0);
}

TEST_CASE("wasserstein distance matches the sorted-pair oracle") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t n = 1 + static_cast<std::size_t>(rep % 40);
        const auto a = random_values(rng, n);
        const auto b = random_values(rng, n);
        CHECK(std::abs(w2(a, b) - sorted_pair_oracle(a, b)) < 1e-10);
        CHECK(w2(a, b) == w2(b, a));
    }
}

TEST_CASE("wasserstein distance satisfies the triangle inequality") {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> size(1, 30);
    for (int rep = 0; rep < 1000; ++rep) {
        const auto a = random_values(rng, static_cast<std::size_t>(size(rng)));
        const auto b = random_values(rng, static_cast<std::size_t>(size(rng)));
        const auto c = random_values(rng, static_cast<std::size_t>(size(rng)));
        CHECK(w2(a, c) <= w2(a, b) + w2(b, c) + 1e-10);
    }
}

TEST_CASE("split benchmark on a homogeneous sample") {
    const auto s = testutil::gaussian_design(2000, 1.0, 0.0, 1.0, 1.0, 0.5, 0.5, 9);
    SplitOptions o;
    o.kind = SplitKind::Halves;
    o.seed = 3;
    const auto b = split_benchmark(s, o);
    CHECK(b.joint_lower_bound * b.joint_lower_bound ==
          doctest::Approx(b.w2_y1 * b.w2_y1 + b.w2_y0 * b.w2_y0).epsilon(1e-12));
    CHECK(b.permutations == 200);
    CHECK(b.joint_lower_bound <= b.permutation_null_95);
    CHECK(b.n1_a + b.n1_b == s.n1());
    const auto again = split_benchmark(s, o);
    CHECK(again.permutation_null_95 == b.permutation_null_95);
}

TEST_CASE("split benchmark recovers a cluster gap") {
    // Each arm is a 50/50 mixture of points at 0 and 10; the median split
    // separates the clusters, so each arm's distance is exactly 10.
    std::vector<double> y;
    std::vector<std::uint8_t> t;
    for (int i = 0; i < 40; ++i) {
        y.push_back(i % 2 ? 10.0 : 0.0);
        t.push_back(i < 20 ? 1 : 0);
    }
    const ExperimentalSample s(y, t);
    SplitOptions o;
    o.permutations = 50;
    const auto b = split_benchmark(s, o);
    CHECK(b.w2_y1 == doctest::Approx(10.0));
    CHECK(b.w2_y0 == doctest::Approx(10.0));
    CHECK(b.joint_lower_bound == doctest::Approx(10.0 * std::sqrt(2.0)));
    CHECK(b.joint_lower_bound > b.permutation_null_95);
}

TEST_CASE("split benchmark preconditions") {
    const ExperimentalSample s({1, 2, 3, 4, 5, 6, 7, 8}, {1, 1, 1, 0, 0, 0, 0, 0});
    SplitOptions o;
    o.kind = SplitKind::ProvidedMask;
    o.mask = {0, 0, 1, 0, 0, 1, 1, 1};  // one treated unit in cell B
    CHECK_THROWS_AS(split_benchmark(s, o), InsufficientData);
    o.mask = {0, 1};
    CHECK_THROWS_AS(split_benchmark(s, o), ValidationError);
    CHECK(parse_split_kind("halves") == SplitKind::Halves);
    CHECK_THROWS_AS(parse_split_kind("thirds"), DomainError);
}

TEST_CASE("shift decomposition") {
    CHECK(shift_decomposition(0.0, 1.5) == doctest::Approx(2.25));
    CHECK(shift_decomposition(std::sqrt(2.0), 1.0) == doctest::Approx(0.5));
    CHECK(shift_decomposition(1e8, 1.0) < 1e-15);
    CHECK(shift_decomposition(INFINITY, 1.0) == 0.0);
    double prev = INFINITY;
    for (double t = 0.0; t < 5.0; t += 0.25) {
        const double v = shift_decomposition(t, 0.7);
        CHECK(v < prev);
        CHECK(v <= 0.49 + 1e-15);
        CHECK(shift_decomposition(t, 1.4) == doctest::Approx(4.0 * v));
        prev = v;
    }
    CHECK_THROWS_AS(shift_decomposition(1.0, 1.0, 3.0), UnsupportedConfig);
    CHECK_THROWS_AS(shift_decomposition(1.0, -1.0), DomainError);
}
