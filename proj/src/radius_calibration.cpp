#include "drte/radius_calibration.hpp"

#include "drte/errors.hpp"
#include "drte/quantile_integral.hpp"
#include "drte/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace drte {

double wasserstein2_1d(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
    const double sq = integrate_step_pair(a.sorted_values(), b.sorted_values(),
                                          [](double x, double y) { return (x - y) * (x - y); });
    return std::sqrt(std::max(0.0, sq));
}

std::string_view to_string(SplitKind k) noexcept {
    switch (k) {
        case SplitKind::MedianOutcome: return "median";
        case SplitKind::Halves: return "halves";
        case SplitKind::ProvidedMask: return "mask";
    }
    return "unknown";
}

SplitKind parse_split_kind(std::string_view s) {
    if (s == "median") return SplitKind::MedianOutcome;
    if (s == "halves") return SplitKind::Halves;
    if (s == "mask") return SplitKind::ProvidedMask;
    throw DomainError("unknown split '" + std::string(s) + "' (expected median, halves or mask)");
}

namespace {

struct ArmCells {
    std::vector<double> a, b;
};

double w2(const std::vector<double>& a, const std::vector<double>& b) {
    return wasserstein2_1d(EmpiricalDistribution(a), EmpiricalDistribution(b));
}

// Reassigns the pooled arm values to cells of the original sizes.
void relabel(ArmCells& cells, std::vector<double>& pool, std::mt19937_64& rng) {
    std::shuffle(pool.begin(), pool.end(), rng);
    const auto na = static_cast<std::ptrdiff_t>(cells.a.size());
    std::copy(pool.begin(), pool.begin() + na, cells.a.begin());
    std::copy(pool.begin() + na, pool.end(), cells.b.begin());
}

}  // namespace

RadiusBenchmark split_benchmark(const ExperimentalSample& sample, const SplitOptions& opt) {
    const std::size_t n = sample.n();
    std::vector<std::uint8_t> in_b(n, 0);
    RadiusBenchmark out;
    switch (opt.kind) {
        case SplitKind::MedianOutcome: {
            const EmpiricalDistribution pooled(sample.outcomes());
            const double median = pooled.quantile(0.5);
            for (std::size_t i = 0; i < n; ++i) in_b[i] = sample.outcomes()[i] > median ? 1 : 0;
            out.split_description = "outcome above pooled median (" + std::to_string(median) + ")";
            break;
        }
        case SplitKind::Halves:
            for (std::size_t i = n / 2; i < n; ++i) in_b[i] = 1;
            out.split_description = "first vs second half of rows";
            break;
        case SplitKind::ProvidedMask:
            if (opt.mask.size() != n) {
                throw ValidationError("split mask has " + std::to_string(opt.mask.size()) +
                                      " entries for " + std::to_string(n) + " units");
            }
            in_b = opt.mask;
            out.split_description = "user-provided mask";
            break;
    }

    ArmCells treated, control;
    for (std::size_t i = 0; i < n; ++i) {
        ArmCells& arm = sample.is_treated(i) ? treated : control;
        (in_b[i] ? arm.b : arm.a).push_back(sample.outcomes()[i]);
    }
    out.n1_a = treated.a.size();
    out.n1_b = treated.b.size();
    out.n0_a = control.a.size();
    out.n0_b = control.b.size();
    if (std::min({out.n1_a, out.n1_b, out.n0_a, out.n0_b}) < 2) {
        throw InsufficientData("each split cell needs at least two units per arm (treated " +
                               std::to_string(out.n1_a) + "/" + std::to_string(out.n1_b) +
                               ", control " + std::to_string(out.n0_a) + "/" +
                               std::to_string(out.n0_b) + ")");
    }
    out.w2_y1 = w2(treated.a, treated.b);
    out.w2_y0 = w2(control.a, control.b);
    out.joint_lower_bound = std::hypot(out.w2_y1, out.w2_y0);

    out.permutations = opt.permutations;
    if (opt.permutations > 0) {
        std::vector<double> pool1(treated.a), pool0(control.a);
        pool1.insert(pool1.end(), treated.b.begin(), treated.b.end());
        pool0.insert(pool0.end(), control.b.begin(), control.b.end());
        std::vector<double> null(opt.permutations);
        for (std::size_t k = 0; k < opt.permutations; ++k) {
            std::mt19937_64 rng(derive_seed(opt.seed, k));
            relabel(treated, pool1, rng);
            relabel(control, pool0, rng);
            null[k] = std::hypot(w2(treated.a, treated.b), w2(control.a, control.b));
        }
        std::sort(null.begin(), null.end());
        const auto idx = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(null.size()))) - 1;
        out.permutation_null_95 = null[idx];
    }
    return out;
}

double shift_decomposition(double tau, double delta, double q) {
    if (q != 2.0) throw UnsupportedConfig("the shift decomposition is derived for q = 2 only");
    if (!(delta >= 0.0)) throw DomainError("delta must be nonnegative");
    if (std::isinf(tau)) return 0.0;
    return 2.0 * delta * delta / (2.0 + tau * tau);
}

}  // namespace drte
