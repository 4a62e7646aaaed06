#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gspec {

// An observed univariate time series Y_1, ..., Y_n (1-based in formulas).
// Values must be finite; analysis entry points (CSV ingestion, simulation,
// split construction) additionally require n >= 8.
class Series {
public:
  explicit Series(std::vector<double> values, std::string name = "");

  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  const std::string& name() const { return name_; }

  // 1-based access: at1(t) == Y_t, 1 <= t <= n
  double at1(std::size_t t) const { return values_[t - 1]; }

  // Reads a single-column or named-column CSV. A header row is optional for
  // single-column files and required when `column` is given. Decimal point
  // '.', comma separators, no quoting. Requires at least 8 rows of data.
  static Series from_csv(const std::string& path, const std::string& column = "");

  // Element-wise square, used for volatility-model testing where the analysis
  // series is Y_t = y_t^2.
  Series squared() const;

private:
  std::vector<double> values_;
  std::string name_;
};

} // namespace gspec
