#include "drte/data_model.hpp"

#include "drte/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace drte {

ExperimentalSample::ExperimentalSample(std::vector<double> outcomes,
                                       std::vector<std::uint8_t> treatments)
    : outcomes_(std::move(outcomes)), treatments_(std::move(treatments)) {
    if (outcomes_.size() != treatments_.size()) {
        throw ValidationError("outcomes and treatments differ in length (" +
                              std::to_string(outcomes_.size()) + " vs " +
                              std::to_string(treatments_.size()) + ")");
    }
    if (outcomes_.size() < 2) {
        throw ValidationError("a sample needs at least two observations");
    }
    for (std::size_t i = 0; i < outcomes_.size(); ++i) {
        if (treatments_[i] > 1) {
            throw ValidationError("treatment at index " + std::to_string(i) +
                                  " is not in {0,1}");
        }
        if (!std::isfinite(outcomes_[i])) {
            throw ValidationError("outcome at index " + std::to_string(i) + " is not finite");
        }
        (treatments_[i] == 1 ? treated_ : control_).push_back(outcomes_[i]);
    }
    if (treated_.empty()) throw ValidationError("empty treated arm");
    if (control_.empty()) throw ValidationError("empty control arm");
}

EmpiricalDistribution::EmpiricalDistribution(std::span<const double> values)
    : sorted_(values.begin(), values.end()) {
    if (sorted_.empty()) throw DomainError("empirical distribution of an empty sample");
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalDistribution::cdf(double y) const noexcept {
    auto it = std::upper_bound(sorted_.begin(), sorted_.end(), y);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double EmpiricalDistribution::quantile(double u) const {
    if (!(u > 0.0 && u <= 1.0)) {
        throw DomainError("quantile level must lie in (0, 1], got " + std::to_string(u));
    }
    const auto m = static_cast<double>(sorted_.size());
    auto k = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(u * m)), 1,
                                     sorted_.size());
    // u*m may round up past an integer; the step (k-1)/m already reaches u then.
    while (k > 1 && static_cast<double>(k - 1) / m >= u) --k;
    return sorted_[k - 1];
}

double EmpiricalDistribution::mean() const noexcept {
    return std::accumulate(sorted_.begin(), sorted_.end(), 0.0) /
           static_cast<double>(sorted_.size());
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

double parse_real(const std::string& cell, std::size_t row, const std::string& column) {
    if (cell.empty()) throw ParseError(row, column, "missing value");
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw ParseError(row, column, "cannot parse '" + cell + "' as a real number");
    }
    return value;
}

long long parse_integer(const std::string& cell, std::size_t row, const std::string& column) {
    if (cell.empty()) throw ParseError(row, column, "missing value");
    long long value = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ParseError(row, column, "cannot parse '" + cell + "' as an integer");
    }
    return value;
}

}  // namespace

std::size_t CsvTable::column_index(std::string_view name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw ValidationError("column '" + std::string(name) + "' not found in header");
    }
    return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFound(path.string());

    CsvTable table;
    std::string line;
    bool have_header = false;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!have_header) {
            if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
            if (trim(line).empty()) continue;
            table.header = split_csv_line(line);
            have_header = true;
            continue;
        }
        if (trim(line).empty()) continue;
        ++row;
        auto cells = split_csv_line(line);
        if (cells.size() != table.header.size()) {
            throw ParseError(row, "*", "expected " + std::to_string(table.header.size()) +
                                           " fields, found " + std::to_string(cells.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    if (!have_header) throw ParseError(0, "*", "file has no header row");
    return table;
}

ExperimentalSample load_sample(const std::filesystem::path& path,
                               std::string_view outcome_column,
                               std::string_view treatment_column) {
    const CsvTable table = read_csv(path);
    const std::size_t yi = table.column_index(outcome_column);
    const std::size_t ti = table.column_index(treatment_column);
    const std::string ycol(outcome_column), tcol(treatment_column);

    std::vector<double> y;
    std::vector<std::uint8_t> t;
    y.reserve(table.rows.size());
    t.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        const double value = parse_real(cells[yi], r + 1, ycol);
        if (!std::isfinite(value)) {
            throw ValidationError("row " + std::to_string(r + 1) + ": outcome '" + cells[yi] +
                                  "' is not finite");
        }
        const long long code = parse_integer(cells[ti], r + 1, tcol);
        if (code != 0 && code != 1) {
            throw ValidationError("row " + std::to_string(r + 1) + ": treatment " +
                                  std::to_string(code) + " is not in {0,1}");
        }
        y.push_back(value);
        t.push_back(static_cast<std::uint8_t>(code));
    }
    return ExperimentalSample(std::move(y), std::move(t));
}

std::vector<std::uint8_t> load_binary_column(const std::filesystem::path& path,
                                             std::string_view column) {
    const CsvTable table = read_csv(path);
    const std::size_t ci = table.column_index(column);
    std::vector<std::uint8_t> out;
    out.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const long long code = parse_integer(table.rows[r][ci], r + 1, std::string(column));
        if (code != 0 && code != 1) {
            throw ValidationError("row " + std::to_string(r + 1) + ": column '" +
                                  std::string(column) + "' must be 0 or 1");
        }
        out.push_back(static_cast<std::uint8_t>(code));
    }
    return out;
}

}  // namespace drte
