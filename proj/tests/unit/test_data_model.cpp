#include "doctest.h"
#include "test_util.hpp"

#include "drte/data_model.hpp"
#include "drte/errors.hpp"

#include <random>

using namespace drte;

TEST_CASE("load_sample reads a minimal valid file") {
    auto path = testutil::write_temp("minimal.csv", "y,t\n1.0,1\n0.5,0\n");
    const auto s = load_sample(path);
    CHECK(s.n() == 2);
    CHECK(s.n1() == 1);
    CHECK(s.n0() == 1);
    CHECK(s.treated_outcomes()[0] == 1.0);
    CHECK(s.control_outcomes()[0] == 0.5);
}

TEST_CASE("load_sample honours custom column names and quoting") {
    auto path = testutil::write_temp("named.csv", "\"id\",outcome,arm\n1,2.5,1\n2,\"-1e-3\",0\n3,4,0\n");
    const auto s = load_sample(path, "outcome", "arm");
    CHECK(s.n() == 3);
    CHECK(s.n0() == 2);
    CHECK(s.control_outcomes()[0] == doctest::Approx(-1e-3));
}

TEST_CASE("load_sample rejects an empty control arm") {
    auto path = testutil::write_temp("all_treated.csv", "y,t\n1,1\n2,1\n");
    CHECK_THROWS_AS(load_sample(path), ValidationError);
}

TEST_CASE("load_sample reports the row of an unparseable outcome") {
    auto path = testutil::write_temp("bad.csv", "y,t\n1,1\nabc,0\n");
    try {
        load_sample(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.row() == 2);
        CHECK(e.column() == "y");
    }
}

TEST_CASE("load_sample input errors") {
    CHECK_THROWS_AS(load_sample("/nonexistent/drte.csv"), FileNotFound);
    CHECK_THROWS_AS(load_sample(testutil::write_temp("missing.csv", "y,t\n,1\n2,0\n")), ParseError);
    CHECK_THROWS_AS(load_sample(testutil::write_temp("code.csv", "y,t\n1,2\n2,0\n")),
                    ValidationError);
    CHECK_THROWS_AS(load_sample(testutil::write_temp("inf.csv", "y,t\ninf,1\n2,0\n")),
                    ValidationError);
    CHECK_THROWS_AS(load_sample(testutil::write_temp("ragged.csv", "y,t\n1,1,3\n2,0\n")),
                    ParseError);
    CHECK_THROWS_AS(load_sample(testutil::write_temp("nocol.csv", "y,w\n1,1\n2,0\n")),
                    ValidationError);
}

TEST_CASE("sample constructor invariants") {
    CHECK_THROWS_AS(ExperimentalSample({1.0}, {1}), ValidationError);
    CHECK_THROWS_AS(ExperimentalSample({1.0, 2.0}, {1}), ValidationError);
    CHECK_THROWS_AS(ExperimentalSample({1.0, std::nan("")}, {1, 0}), ValidationError);
    const ExperimentalSample s({1.0, 2.0, 3.0, 4.0, 5.0}, {1, 0, 1, 0, 0});
    CHECK(s.n1() + s.n0() == s.n());
    CHECK(s.treated_fraction() == doctest::Approx(0.4));
}

TEST_CASE("empirical cdf") {
    const std::vector<double> v{3.0, 1.0, 2.0};
    const EmpiricalDistribution d(v);
    CHECK(d.cdf(2.0) == doctest::Approx(2.0 / 3.0));
    CHECK(d.cdf(0.0) == 0.0);
    CHECK(d.cdf(3.0) == 1.0);
    CHECK(d.cdf(d.sorted_values().back()) == 1.0);
}

TEST_CASE("empirical quantile") {
    const std::vector<double> v{1.0, 2.0, 3.0};
    const EmpiricalDistribution d(v);
    CHECK(d.quantile(0.5) == 2.0);
    CHECK(d.quantile(1.0) == 3.0);
    CHECK(d.quantile(1.0 / 3.0) == 1.0);
    CHECK(d.quantile(1e-12) == 1.0);
    CHECK_THROWS_AS(d.quantile(0.0), DomainError);
    CHECK_THROWS_AS(d.quantile(1.5), DomainError);

    const std::vector<double> single{5.0};
    const EmpiricalDistribution one(single);
    for (double u : {0.01, 0.5, 1.0}) CHECK(one.quantile(u) == 5.0);

    // 0.7 * 10 rounds to 7.000000000000001 in floating point.
    std::vector<double> ten(10);
    for (int i = 0; i < 10; ++i) ten[i] = i;
    CHECK(EmpiricalDistribution(ten).quantile(0.7) == 6.0);
}

TEST_CASE("quantile and cdf form a Galois pair on random samples") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> size(1, 40);
    std::uniform_int_distribution<int> value(-5, 5);  // forces ties
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> xs(static_cast<std::size_t>(size(rng)));
        for (auto& x : xs) x = value(rng);
        const EmpiricalDistribution d(xs);
        double prev_q = -1e300;
        for (int j = 1; j <= 50; ++j) {
            const double u = j / 50.0;
            const double q = d.quantile(u);
            CHECK(d.cdf(q) >= u - 1e-15);
            CHECK(q >= prev_q);
            prev_q = q;
        }
        double prev_f = 0.0;
        for (double y : d.sorted_values()) {
            CHECK(d.quantile(d.cdf(y)) <= y);
            CHECK(d.cdf(y) >= prev_f);
            prev_f = d.cdf(y);
        }
        // Step formula: Q(u) = sorted[k-1] on ((k-1)/m, k/m].
        const auto m = d.size();
        for (std::size_t k = 1; k <= m; ++k) {
            const double mid = (static_cast<double>(k) - 0.5) / static_cast<double>(m);
            CHECK(d.quantile(mid) == d.step_value(k));
        }
    }
}
