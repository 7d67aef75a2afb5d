#include "doctest.h"

#include "drte/errors.hpp"
#include "drte/simulation.hpp"

#include <cmath>

using namespace drte;

TEST_CASE("case presets") {
    const auto c1 = simulation_case(1);
    CHECK(c1.dgp.mu1 == 2.0);
    CHECK(c1.dgp.mu0 == doctest::Approx(0.2));
    CHECK(c1.dgp.rho == 0.7);
    CHECK(c1.dgp.e == 0.3);
    CHECK(c1.dgp.n == 1000);
    CHECK(c1.config.delta() == doctest::Approx(0.1));
    CHECK(simulation_case(5).config.q() == doctest::Approx(3.0));
    CHECK(simulation_case(6).config.q() == doctest::Approx(1.5));
    const auto c4 = simulation_case(4, 4000);
    CHECK(c4.dgp.mu1 == doctest::Approx(2.0));
    CHECK(c4.dgp.mu0 == doctest::Approx(0.2));
    CHECK(c4.config.delta() == doctest::Approx(1.0));
    CHECK(c4.dgp.n == 4000);
    CHECK_THROWS_AS(simulation_case(7), DomainError);
}

TEST_CASE("population truth reproduces the design targets") {
    const double want[] = {1.686, 0.879, 0.018, 0.157, 1.682, 1.680};
    for (int id = 1; id <= 6; ++id) {
        const auto c = simulation_case(id);
        const auto t = population_truth(c.dgp, c.config);
        INFO("case " << id << " tau_dr=" << t.tau_dr);
        CHECK(std::abs(t.tau_dr - want[id - 1]) <= 0.002);
        CHECK(t.tau_p <= t.tau_dr);
        CHECK(t.tau_dr <= t.tau_o);
        CHECK(t.bounds.v_o == doctest::Approx(std::pow(c.dgp.sigma1 - c.dgp.sigma0, 2)));
    }
    const auto t1 = population_truth(simulation_case(1).dgp, simulation_case(1).config);
    CHECK(t1.tau_star == doctest::Approx(1.8));
    CHECK(t1.v_true == doctest::Approx(2.2));
}

TEST_CASE("draw_sample") {
    GaussianDGP d{1.0, 0.0, 1.0, 1.0, 1.0, 0.4, 500};
    const auto a = draw_sample(d, 42);
    const auto b = draw_sample(d, 42);
    CHECK(std::equal(a.outcomes().begin(), a.outcomes().end(), b.outcomes().begin()));
    CHECK(std::equal(a.treatments().begin(), a.treatments().end(), b.treatments().begin()));
    const auto c = draw_sample(d, 43);
    CHECK_FALSE(std::equal(a.outcomes().begin(), a.outcomes().end(), c.outcomes().begin()));

    // rho = 1 with equal scales: Y(1) - Y(0) equals mu1 - mu0 for every unit.
    const auto po = draw_potential_outcomes(GaussianDGP{1.5, 0.25, 2.0, 2.0, 1.0, 0.5, 1000}, 7);
    for (std::size_t i = 0; i < po.y1.size(); ++i) CHECK(std::abs(po.y1[i] - po.y0[i] - 1.25) < 1e-12);

    // The revealed sample picks Y(1) or Y(0) by assignment.
    const auto full = draw_potential_outcomes(d, 42);
    for (std::size_t i = 0; i < a.n(); ++i) {
        CHECK(a.outcomes()[i] == (full.t[i] ? full.y1[i] : full.y0[i]));
    }

    const auto huge = draw_sample(GaussianDGP{0, 0, 1, 1, 0.7, 0.3, 1'000'000}, 8);
    CHECK(std::abs(huge.treated_fraction() - 0.3) < 0.002);

    CHECK_THROWS_AS(draw_sample(GaussianDGP{0, 0, 1, 1, 0, 0.5, 1}, 1), DomainError);
    CHECK_THROWS_AS(draw_sample(GaussianDGP{0, 0, 1, 1, 1.5, 0.5, 10}, 1), DomainError);
    CHECK_THROWS_AS(draw_sample(GaussianDGP{0, 0, 0, 1, 0, 0.5, 10}, 1), DomainError);
    // With e tiny and n = 2 both arms are rarely populated; two failures raise.
    CHECK_THROWS_AS(draw_sample(GaussianDGP{0, 0, 1, 1, 0, 1e-12, 2}, 1), DegenerateSample);
}

TEST_CASE("coverage study smoke and determinism") {
    auto c = simulation_case(1, 300);
    StudyOptions o;
    o.replications = 100;
    o.seed = 5;
    const auto r1 = run_coverage_study(c.dgp, c.config, o, 1);
    o.threads = 3;
    const auto r3 = run_coverage_study(c.dgp, c.config, o, 1);
    CHECK(r1.coverage_im >= 0.0);
    CHECK(r1.coverage_im <= 1.0);
    CHECK(r1.coverage_imbonf >= r1.coverage_im);
    CHECK(r1.nesting_violations == 0);
    CHECK(table_csv_row(r1) == table_csv_row(r3));
    CHECK(r1.replications == 100);
    CHECK(table_csv_header().rfind("case,tau_dr,", 0) == 0);
    o.replications = 99;
    CHECK_THROWS_AS(run_coverage_study(c.dgp, c.config, o), DomainError);
    o.replications = 100;
    CHECK_THROWS_AS(run_coverage_study(c.dgp, RobustConfig(0.1, 1.0), o), UnsupportedConfig);
}

TEST_CASE("zero radius reduces to textbook ATE coverage") {
    auto c = simulation_case(1, 500);
    StudyOptions o;
    o.replications = 600;
    o.bounds = BoundMethod::Neyman;
    o.seed = 11;
    const auto r = run_coverage_study(c.dgp, RobustConfig(0.0, 2.0), o);
    CHECK(r.truth.tau_dr == doctest::Approx(1.8));
    CHECK(std::abs(r.coverage_im - 0.95) < 0.03);
    CHECK(r.coverage_imbonf >= r.coverage_im);
    CHECK(r.coverage_imbonf < 0.99);
}
