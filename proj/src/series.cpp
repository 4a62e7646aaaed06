#include "gspec/series.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gspec/error.hpp"

namespace gspec {

namespace {

bool parse_double(const std::string& token, double& out) {
  const char* begin = token.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    std::size_t b = field.find_first_not_of(" \t\r");
    std::size_t e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return fields;
}

} // namespace

Series::Series(std::vector<double> values, std::string name)
    : values_(std::move(values)), name_(std::move(name)) {
  if (values_.empty()) fail(ErrorCode::InvalidArgument, "series: no values");
  for (double v : values_) {
    if (!std::isfinite(v)) {
      fail(ErrorCode::InvalidArgument, "series: non-finite value");
    }
  }
}

Series Series::from_csv(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::InvalidArgument, "cannot open " + path);

  std::vector<double> values;
  std::string line;
  std::size_t col_index = 0;
  bool header_checked = false;
  std::string series_name = column;

  while (std::getline(in, line)) {
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_fields(line);
    if (!header_checked) {
      header_checked = true;
      double probe;
      bool numeric_first = !fields.empty() && parse_double(fields[0], probe);
      if (!numeric_first) { // header row
        if (!column.empty()) {
          bool found = false;
          for (std::size_t i = 0; i < fields.size(); ++i) {
            if (fields[i] == column) {
              col_index = i;
              found = true;
              break;
            }
          }
          if (!found) {
            fail(ErrorCode::InvalidArgument,
                 path + ": no column named '" + column + "'");
          }
        } else if (fields.size() == 1) {
          series_name = fields[0];
        } else {
          fail(ErrorCode::InvalidArgument,
               path + ": multi-column file needs an explicit column name");
        }
        continue;
      }
      if (!column.empty()) {
        fail(ErrorCode::InvalidArgument,
             path + ": column '" + column + "' requested but file has no header");
      }
      if (fields.size() != 1) {
        fail(ErrorCode::InvalidArgument,
             path + ": multi-column file needs a header and column name");
      }
    }
    if (col_index >= fields.size()) {
      fail(ErrorCode::InvalidArgument, path + ": short row");
    }
    double v;
    if (!parse_double(fields[col_index], v)) {
      fail(ErrorCode::InvalidArgument,
           path + ": non-numeric value '" + fields[col_index] + "'");
    }
    values.push_back(v);
  }
  if (values.size() < 8) {
    fail(ErrorCode::InvalidArgument, path + ": need at least 8 observations");
  }
  return Series(std::move(values), series_name);
}

Series Series::squared() const {
  std::vector<double> sq(values_.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = values_[i] * values_[i];
  return Series(std::move(sq), name_.empty() ? "" : name_ + "^2");
}

} // namespace gspec
