#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace drte {

/// Outcomes and binary treatment indicators from one randomized experiment.
///
/// Immutable after construction. The constructor enforces n >= 2, both arms
/// populated, equal lengths, treatment codes in {0,1} and finite outcomes.
class ExperimentalSample {
public:
    ExperimentalSample(std::vector<double> outcomes, std::vector<std::uint8_t> treatments);

    std::size_t n() const noexcept { return outcomes_.size(); }
    std::size_t n1() const noexcept { return treated_.size(); }
    std::size_t n0() const noexcept { return control_.size(); }

    std::span<const double> outcomes() const noexcept { return outcomes_; }
    std::span<const std::uint8_t> treatments() const noexcept { return treatments_; }

    /// Outcomes of the treated (resp. control) units in original row order.
    std::span<const double> treated_outcomes() const noexcept { return treated_; }
    std::span<const double> control_outcomes() const noexcept { return control_; }

    bool is_treated(std::size_t i) const { return treatments_.at(i) == 1; }

    /// Fraction of treated units, n1 / n.
    double treated_fraction() const noexcept {
        return static_cast<double>(n1()) / static_cast<double>(n());
    }

private:
    std::vector<double> outcomes_;
    std::vector<std::uint8_t> treatments_;
    std::vector<double> treated_;
    std::vector<double> control_;
};

/// Empirical distribution of a finite sample: right-continuous CDF and the
/// left-continuous generalized inverse Q(u) = inf{y : F(y) >= u}.
///
/// Ties are kept, so Q(u) = sorted[ceil(u m) - 1] for u in (0, 1].
class EmpiricalDistribution {
public:
    explicit EmpiricalDistribution(std::span<const double> values);

    std::size_t size() const noexcept { return sorted_.size(); }
    std::span<const double> sorted_values() const noexcept { return sorted_; }

    /// Fraction of observations <= y.
    double cdf(double y) const noexcept;

    /// Generalized inverse; throws DomainError unless 0 < u <= 1.
    double quantile(double u) const;

    /// Q evaluated on the k-th step, i.e. for u in ((k-1)/m, k/m]; k in [1, m].
    double step_value(std::size_t k) const { return sorted_.at(k - 1); }

    double mean() const noexcept;

private:
    std::vector<double> sorted_;
};

/// Header plus raw string cells of a comma-separated file.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; throws ValidationError when absent.
    std::size_t column_index(std::string_view name) const;
};

/// Reads a UTF-8 CSV file with a header row. Quoted fields are supported.
CsvTable read_csv(const std::filesystem::path& path);

/// Loads and validates an experimental sample. Missing or malformed cells are
/// a hard ParseError; a treatment code outside {0,1}, a non-finite outcome or
/// an empty arm is a ValidationError.
ExperimentalSample load_sample(const std::filesystem::path& path,
                               std::string_view outcome_column = "y",
                               std::string_view treatment_column = "t");

/// Reads a 0/1 column from a CSV file (used for user-provided split masks).
std::vector<std::uint8_t> load_binary_column(const std::filesystem::path& path,
                                             std::string_view column);

}  // namespace drte
