#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace drte {

/// Exact value of  integral_0^1 f(A(u), B(u)) du  for two step functions on
/// (0, 1]: A takes a[k] on (k/na, (k+1)/na], B takes b[k] on (k/nb, (k+1)/nb].
///
/// The product of two such functions is constant on the merged breakpoint
/// grid {k/na} U {k/nb}; segment lengths are tracked in integer units of
/// 1/(na*nb) so the weights sum to one exactly.
template <class F>
double integrate_step_pair(std::span<const double> a, std::span<const double> b, F&& f) {
    const auto na = static_cast<std::int64_t>(a.size());
    const auto nb = static_cast<std::int64_t>(b.size());
    const double unit = 1.0 / (static_cast<double>(na) * static_cast<double>(nb));
    std::int64_t i = 0, j = 0, prev = 0;
    double total = 0.0;
    while (i < na && j < nb) {
        const std::int64_t end_a = (i + 1) * nb;
        const std::int64_t end_b = (j + 1) * na;
        const std::int64_t end = end_a < end_b ? end_a : end_b;
        total += f(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(j)]) *
                 (static_cast<double>(end - prev) * unit);
        prev = end;
        if (end_a == end) ++i;
        if (end_b == end) ++j;
    }
    return total;
}

}  // namespace drte
