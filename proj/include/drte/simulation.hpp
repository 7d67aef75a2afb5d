#pragma once

#include "drte/data_model.hpp"
#include "drte/inference.hpp"
#include "drte/robust_solver.hpp"
#include "drte/variance_bounds.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace drte {

/// Bivariate normal potential outcomes with Bernoulli(e) assignment.
struct GaussianDGP {
    double mu1 = 0.0;
    double mu0 = 0.0;
    double sigma1 = 1.0;
    double sigma0 = 1.0;
    double rho = 0.0;
    double e = 0.5;
    std::size_t n = 1000;

    /// Throws DomainError unless sigmas > 0, |rho| <= 1, 0 < e < 1, n >= 2.
    void validate() const;
};

/// One of the six built-in designs: rho = 0.7, e = 0.3, delta = c * sigma0.
struct SimulationCase {
    int id = 1;
    GaussianDGP dgp;
    double c = 0.1;
    double p = 2.0;
    RobustConfig config{0.1, 2.0};
};

/// Presets 1..6; throws DomainError for other ids.
SimulationCase simulation_case(int id, std::size_t n = 1000);

struct PopulationTruth {
    double tau_star = 0.0;
    double v_true = 0.0;  ///< Var(Y(1) - Y(0)) under the true coupling
    VarianceBounds bounds;  ///< sharp bounds; equal to Neyman for Gaussian marginals
    double tau_dr = 0.0;
    double tau_p = 0.0;
    double tau_o = 0.0;
};

PopulationTruth population_truth(const GaussianDGP& dgp, const RobustConfig& config);

/// Both potential outcomes and the assignment for each unit.
struct PotentialOutcomes {
    std::vector<double> y1;
    std::vector<double> y0;
    std::vector<std::uint8_t> t;
};

/// Deterministic draw of dgp.n units with both potential outcomes.
PotentialOutcomes draw_potential_outcomes(const GaussianDGP& dgp, std::uint64_t seed);

/// Revealed outcomes Y = T Y(1) + (1 - T) Y(0) of draw_potential_outcomes. If an arm comes out empty the draw is
/// repeated once with a derived seed; a second failure throws DegenerateSample.
ExperimentalSample draw_sample(const GaussianDGP& dgp, std::uint64_t seed);

struct StudyOptions {
    std::size_t replications = 1000;
    double alpha = 0.05;
    double beta = 0.045;
    std::size_t grid_points = 101;
    BoundMethod bounds = BoundMethod::Sharp;
    std::uint64_t seed = 20240601;
    unsigned threads = 1;
};

struct ReplicationOutcome {
    double tau_star_hat = 0.0;
    double im_lower = 0.0;
    double im_upper = 0.0;
    bool has_two_step = false;
    double bonf_lower = 0.0;
    double bonf_upper = 0.0;
};

struct SimulationReport {
    int case_id = 0;
    GaussianDGP dgp;
    RobustConfig config{0.0, 2.0};
    StudyOptions options;
    PopulationTruth truth;
    VarianceBounds neyman_population;

    std::size_t replications = 0;
    std::size_t two_step_replications = 0;  ///< first step rejected tau* = 0

    // Aggregates over replications where the two-step interval exists.
    double coverage_im = 0.0;
    double coverage_imbonf = 0.0;
    double mean_im_lower = 0.0;
    double mean_im_upper = 0.0;
    double mean_bonf_lower = 0.0;
    double mean_bonf_upper = 0.0;
    double length_ratio = 0.0;  ///< mean two-step length / mean IM length
    double mean_length_ratio = 0.0;  ///< average of per-replication ratios

    /// IM coverage over every replication.
    double coverage_im_all = 0.0;
    /// Replications where the two-step interval fails to contain the IM interval.
    std::size_t nesting_violations = 0;

    std::vector<ReplicationOutcome> outcomes;
};

/// Runs the coverage study. Replication r uses the seed derive_seed(seed, r),
/// so results are identical for any thread count.
SimulationReport run_coverage_study(const GaussianDGP& dgp, const RobustConfig& config,
                                    const StudyOptions& options, int case_id = 0);

/// Table-1-shaped CSV: header and one row per report.
std::string table_csv_header();
std::string table_csv_row(const SimulationReport& report);

}  // namespace drte
