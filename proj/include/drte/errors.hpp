#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace drte {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Input data violates a sample invariant (empty arm, bad treatment code...).
class ValidationError : public Error {
public:
    using Error::Error;
};

class FileNotFound : public Error {
public:
    explicit FileNotFound(const std::string& path)
        : Error("file not found: " + path), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Malformed CSV cell. `row` is 1-based and counts data rows (header excluded).
class ParseError : public Error {
public:
    ParseError(std::size_t row, std::string column, const std::string& what)
        : Error("row " + std::to_string(row) + ", column '" + column + "': " + what),
          row_(row), column_(std::move(column)) {}
    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

/// Not enough observations for the requested estimator.
class InsufficientData : public Error {
public:
    using Error::Error;
};

/// An iterative solver hit its iteration cap. Indicates a bug, not bad data.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A bound estimate sits at zero, where the delta-method loadings do not exist.
class ZeroTauError : public Error {
public:
    using Error::Error;
};

/// Asymptotic regime without an implemented limit law (q < 2 at tau_b = 0).
class UnsupportedRegime : public Error {
public:
    using Error::Error;
};

/// Configuration not supported by the requested procedure (e.g. q = 1 inference).
class UnsupportedConfig : public Error {
public:
    using Error::Error;
};

/// Interval endpoints materially inverted.
class OrderError : public Error {
public:
    using Error::Error;
};

/// Kernel density estimate fell below the floor on the quantile grid.
class DensityError : public Error {
public:
    using Error::Error;
};

/// A simulated draw left one treatment arm empty.
class DegenerateSample : public Error {
public:
    using Error::Error;
};

}  // namespace drte
