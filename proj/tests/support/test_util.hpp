#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace testutil {

/// Writes `content` to a fresh file under the system temp directory.
inline std::filesystem::path write_temp(const std::string& name, const std::string& content) {
    auto dir = std::filesystem::temp_directory_path() / "drte_tests";
    std::filesystem::create_directories(dir);
    auto path = dir / name;
    std::ofstream(path) << content;
    return path;
}

inline std::vector<double> normal_draws(std::size_t n, double mean, double sd, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(mean, sd);
    std::vector<double> out(n);
    for (auto& x : out) x = dist(rng);
    return out;
}

inline double relative_error(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace testutil

#include "drte/data_model.hpp"

namespace testutil {

/// Revealed outcomes from a bivariate Gaussian potential-outcome design.
inline drte::ExperimentalSample gaussian_design(std::size_t n, double mu1, double mu0,
                                                double s1, double s0, double rho, double e,
                                                std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::bernoulli_distribution treat(e);
    std::vector<double> y(n);
    std::vector<std::uint8_t> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z1 = z(rng);
        const double z0 = rho * z1 + std::sqrt(1.0 - rho * rho) * z(rng);
        t[i] = treat(rng) ? 1 : 0;
        y[i] = t[i] ? mu1 + s1 * z1 : mu0 + s0 * z0;
    }
    t[0] = 1;
    t[1] = 0;
    y[0] = mu1 + s1 * z(rng);
    y[1] = mu0 + s0 * z(rng);
    return drte::ExperimentalSample(std::move(y), std::move(t));
}

}  // namespace testutil
