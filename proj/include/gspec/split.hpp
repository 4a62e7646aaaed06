#pragma once

#include <cstddef>

namespace gspec {

// Sample-splitting geometry for a series of length n:
//   fitting sample   = Y_1, ..., Y_{f_n}
//   checking sample  = Y_{n-l_n+1}, ..., Y_n   (the last l_n observations)
// The default rule takes f_n = floor(n/2) and l_n = n, so the checking sample
// is the whole series and overlaps the fitting half.
struct SplitSpec {
  std::size_t n = 0;         // series length
  std::size_t fit_len = 0;   // f_n
  std::size_t check_len = 0; // l_n

  // first checking index, 1-based: t runs check_start()..n
  std::size_t check_start() const { return n - check_len + 1; }

  // number of lag-j moment terms in the formulas, n_j = l_n - j + 1
  std::size_t lag_count(std::size_t j) const { return check_len - j + 1; }

  bool valid() const {
    return n > 0 && fit_len >= 1 && fit_len <= n && check_len >= 1 && check_len <= n;
  }
};

enum class SplitRule { HalfOverlap, Custom };

// HalfOverlap split for a series of length n (n >= 8).
SplitSpec make_split(std::size_t n);

// Custom split; values must satisfy 1 <= f_n <= n and 1 <= l_n <= n, n >= 8.
SplitSpec make_split(std::size_t n, std::size_t fit_len, std::size_t check_len);

} // namespace gspec
