#include "gspec/split.hpp"

#include <string>

#include "gspec/error.hpp"

namespace gspec {

SplitSpec make_split(std::size_t n) {
  if (n < 8) fail(ErrorCode::InvalidSplit, "split: need n >= 8");
  return SplitSpec{n, n / 2, n};
}

SplitSpec make_split(std::size_t n, std::size_t fit_len, std::size_t check_len) {
  if (n < 8) fail(ErrorCode::InvalidSplit, "split: need n >= 8");
  SplitSpec spec{n, fit_len, check_len};
  if (!spec.valid()) {
    fail(ErrorCode::InvalidSplit,
         "split: need 1 <= f_n <= n and 1 <= l_n <= n, got f_n=" +
             std::to_string(fit_len) + " l_n=" + std::to_string(check_len) +
             " n=" + std::to_string(n));
  }
  return spec;
}

} // namespace gspec
