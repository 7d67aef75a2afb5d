#pragma once

#include "drte/data_model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace drte {

/// 2-Wasserstein distance between two empirical distributions on the line,
/// sqrt(int_0^1 (Q_a(u) - Q_b(u))^2 du), integrated exactly on the merged grid.
double wasserstein2_1d(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

enum class SplitKind { MedianOutcome, Halves, ProvidedMask };

std::string_view to_string(SplitKind k) noexcept;
/// Accepts "median", "halves" or "mask".
SplitKind parse_split_kind(std::string_view s);

struct RadiusBenchmark {
    double w2_y1 = 0.0;
    double w2_y0 = 0.0;
    /// sqrt(w2_y1^2 + w2_y0^2): lower bound on the joint transport distance.
    double joint_lower_bound = 0.0;
    std::string split_description;
    /// Cell sizes: treated in cells A/B, control in cells A/B.
    std::size_t n1_a = 0, n1_b = 0, n0_a = 0, n0_b = 0;
    /// 95th percentile of joint_lower_bound under random relabelling of cells
    /// within each arm (cell sizes held fixed).
    double permutation_null_95 = 0.0;
    std::size_t permutations = 0;
};

struct SplitOptions {
    SplitKind kind = SplitKind::MedianOutcome;
    /// Cell membership for ProvidedMask (1 = cell B), one entry per unit.
    std::vector<std::uint8_t> mask;
    std::size_t permutations = 200;
    std::uint64_t seed = 1;
};

/// Compares outcome distributions across two cells of the sample, arm by arm.
/// MedianOutcome puts units with Y above the pooled median in cell B; Halves
/// splits by row order. Each cell must keep at least two units per arm.
RadiusBenchmark split_benchmark(const ExperimentalSample& sample, const SplitOptions& options);

/// Share of the squared radius spent moving potential outcomes under the
/// worst case with q = 2: 2 delta^2 / (2 + tau^2). Throws UnsupportedConfig
/// for other q and DomainError for negative delta.
double shift_decomposition(double tau, double delta, double q = 2.0);

}  // namespace drte
