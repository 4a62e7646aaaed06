#include "gspec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gspec/error.hpp"

namespace gspec {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Dot product over eight independent accumulators combined in a fixed tree.
// Breaks the FP dependency chain (we cannot let the compiler reassociate under
// strict IEEE semantics) while keeping results identical per call site; the
// eight-lane stride matches one AVX-512 register so the pattern vectorizes
// without changing the rounding.
inline double dot8(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  double s4 = 0.0, s5 = 0.0, s6 = 0.0, s7 = 0.0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
    s4 += a[i + 4] * b[i + 4];
    s5 += a[i + 5] * b[i + 5];
    s6 += a[i + 6] * b[i + 6];
    s7 += a[i + 7] * b[i + 7];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7));
}

} // namespace

double SpectralWeights::lag_weight(std::size_t j) const {
  double jp = static_cast<double>(j) * kPi;
  return 1.0 / (jp * jp);
}

double SpectralWeights::correction(std::size_t j) const {
  return std::sqrt(static_cast<double>(max_lag - j + 1) /
                   static_cast<double>(max_lag));
}

StatContext::StatContext(const ResidualSet& res, WeightKind kind,
                         std::size_t kernel_budget_bytes)
    : kind_(kind), split_(res.split()), sigma2_(res.sigma2_e()),
      residuals_(res.residuals()) {
  std::size_t n = split_.n;
  std::size_t l = split_.check_len;
  lo_ = (n == l) ? 1 : n - l; // first conditioning index, max(n - l_n, 1)
  m_ = n - lo_;
  if (kind_ == WeightKind::Indicator) {
    build_indicator(res);
  } else {
    build_cf(res, kernel_budget_bytes);
  }
}

void StatContext::build_indicator(const ResidualSet& res) {
  const std::vector<double>& z = res.conditioning();
  std::size_t n = split_.n;
  std::size_t l = split_.check_len;

  // conditioning values C[i] = Z_{lo+i}, i = 0..m-1; these double as the
  // evaluation points x_e = Z_{t-1} for t across the checking sample
  std::vector<double> cond(m_);
  for (std::size_t i = 0; i < m_; ++i) cond[i] = z[lo_ + i - 1];

  std::vector<std::int32_t> order(m_);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int32_t a, std::int32_t b) { return cond[a] < cond[b]; });

  lag_offset_.assign(l + 1, 0);
  std::size_t total = 0;
  for (std::size_t j = 1; j <= l; ++j) {
    std::size_t hi = n - j; // last admissible conditioning index for lag j
    total += (hi >= lo_) ? hi - lo_ + 1 : 0;
    lag_offset_[j] = total;
  }
  sorted_local_.assign(total, 0);
  ranks_.assign(l * m_, 0);

  std::size_t check_start = split_.check_start();
  for (std::size_t j = 1; j <= l; ++j) {
    std::size_t hi = n - j;
    if (hi < lo_) continue; // empty window (lag l_n under the full-overlap split)
    std::int32_t wlimit = static_cast<std::int32_t>(hi - lo_); // window: i <= wlimit
    std::size_t out = lag_offset_[j - 1];
    std::int32_t* rank_row = ranks_.data() + (j - 1) * m_;
    std::size_t pos = 0;
    std::int32_t in_window = 0;
    while (pos < m_) {
      // tie group [pos, gend) of equal conditioning values: the closed
      // inequality 1(z <= x) means every evaluation point in the group sees
      // the window count including the whole group
      std::size_t gend = pos;
      double v = cond[order[pos]];
      while (gend < m_ && cond[order[gend]] == v) ++gend;
      for (std::size_t g = pos; g < gend; ++g) {
        std::int32_t i = order[g];
        if (i <= wlimit) {
          // local residual index of t = (lo + i) + j
          sorted_local_[out++] = static_cast<std::int32_t>(
              (lo_ + static_cast<std::size_t>(i)) + j - check_start);
          ++in_window;
        }
      }
      for (std::size_t g = pos; g < gend; ++g) rank_row[order[g]] = in_window;
      pos = gend;
    }
  }
}

void StatContext::build_cf(const ResidualSet& res, std::size_t budget) {
  if (m_ > 0 && m_ > budget / (m_ * sizeof(double))) {
    fail(ErrorCode::KernelMemory,
         "cf kernel matrix of " + std::to_string(m_) + "x" + std::to_string(m_) +
             " doubles exceeds the memory budget");
  }
  const std::vector<double>& z = res.conditioning();
  kernel_.assign(m_ * m_, 0.0);
  for (std::size_t i = 0; i < m_; ++i) {
    double zi = z[lo_ + i - 1];
    double* row = kernel_.data() + i * m_;
    row[i] = 1.0;
    for (std::size_t k = i + 1; k < m_; ++k) {
      double d = zi - z[lo_ + k - 1];
      double v = std::exp(-0.5 * d * d);
      row[k] = v;
      kernel_[k * m_ + i] = v;
    }
  }
}

StatisticValue StatContext::evaluate(std::span<const double> multipliers) const {
  return evaluate_for(residuals_, sigma2_, multipliers);
}

StatisticValue StatContext::evaluate_for(std::span<const double> residuals,
                                         double sigma2,
                                         std::span<const double> multipliers) const {
  std::size_t l = split_.check_len;
  if (residuals.size() != l) {
    fail(ErrorCode::InvalidArgument, "residuals: need l_n values");
  }
  if (!multipliers.empty() && multipliers.size() != l) {
    fail(ErrorCode::InvalidArgument, "multipliers: need l_n values");
  }
  std::vector<double> u(l);
  if (multipliers.empty()) {
    std::copy(residuals.begin(), residuals.end(), u.begin());
  } else {
    for (std::size_t i = 0; i < l; ++i) u[i] = residuals[i] * multipliers[i];
  }

  StatisticValue out;
  out.weight = kind_;
  out.integrator = integrator_for(kind_);
  out.per_lag.assign(l, 0.0);
  if (kind_ == WeightKind::Indicator) {
    evaluate_indicator(u, sigma2, out);
  } else {
    evaluate_cf(u, sigma2, out);
  }
  double total = 0.0;
  for (double c : out.per_lag) total += c;
  out.value = total;
  return out;
}

void StatContext::evaluate_indicator(const std::vector<double>& u, double sigma2,
                                     StatisticValue& out) const {
  std::size_t l = split_.check_len;
  std::vector<double> pref(m_);
  for (std::size_t j = 1; j <= l; ++j) {
    std::size_t begin = lag_offset_[j - 1];
    std::size_t w = lag_offset_[j] - begin;
    if (w == 0) continue;
    const std::int32_t* idx = sorted_local_.data() + begin;
    double run = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
      run += u[static_cast<std::size_t>(idx[i])];
      pref[i] = run;
    }
    const std::int32_t* rank_row = ranks_.data() + (j - 1) * m_;
    double s = 0.0;
    for (std::size_t e = 0; e < m_; ++e) {
      std::int32_t c = rank_row[e];
      if (c > 0) {
        double g = pref[static_cast<std::size_t>(c - 1)];
        s += g * g;
      }
    }
    double nj = static_cast<double>(split_.lag_count(j));
    double jp = static_cast<double>(j) * kPi;
    out.per_lag[j - 1] =
        s / (sigma2 * nj * static_cast<double>(l) * jp * jp);
  }
}

void StatContext::evaluate_cf(const std::vector<double>& u, double sigma2,
                              StatisticValue& out) const {
  std::size_t n = split_.n;
  std::size_t l = split_.check_len;
  std::size_t check_start = split_.check_start();
  for (std::size_t j = 1; j <= l; ++j) {
    std::size_t hi = n - j;
    if (hi < lo_) continue;
    std::size_t w = hi - lo_ + 1;
    // residuals for the window start at t = lo + j, contiguous in u
    const double* v = u.data() + (lo_ + j - check_start);
    double diag = dot8(v, v, w);
    double off = 0.0;
    for (std::size_t i = 0; i + 1 < w; ++i) {
      const double* row = kernel_.data() + i * m_;
      off += v[i] * dot8(row + i + 1, v + i + 1, w - i - 1);
    }
    double s = diag + 2.0 * off;
    double nj = static_cast<double>(split_.lag_count(j));
    double jp = static_cast<double>(j) * kPi;
    out.per_lag[j - 1] = s / (sigma2 * nj * jp * jp);
  }
}

StatisticValue statistic_indicator(const ResidualSet& res,
                                   std::span<const double> multipliers) {
  return StatContext(res, WeightKind::Indicator).evaluate(multipliers);
}

StatisticValue statistic_cf(const ResidualSet& res,
                            std::span<const double> multipliers) {
  return StatContext(res, WeightKind::ComplexExp).evaluate(multipliers);
}

std::complex<double> gamma_hat(const ResidualSet& res, std::size_t j, double x,
                               WeightKind kind,
                               std::span<const double> multipliers) {
  const SplitSpec& split = res.split();
  if (j < 1 || j > split.check_len) {
    fail(ErrorCode::LagOutOfRange,
         "gamma_hat: lag " + std::to_string(j) + " outside 1..l_n");
  }
  if (!multipliers.empty() && multipliers.size() != split.check_len) {
    fail(ErrorCode::InvalidArgument, "multipliers: need l_n values");
  }
  std::size_t check_start = split.check_start();
  std::complex<double> sum = 0.0;
  for (std::size_t t = check_start + j - 1; t <= split.n; ++t) {
    double z;
    if (!res.lagged(t, j, z)) continue;
    double e = res.residuals()[t - check_start];
    if (!multipliers.empty()) e *= multipliers[t - check_start];
    sum += e * eval_weight(kind, z, x);
  }
  return sum / static_cast<double>(split.lag_count(j));
}

std::vector<std::vector<std::complex<double>>> h_hat_diagnostic(
    const ResidualSet& res, WeightKind kind, const std::vector<double>& lambdas,
    const std::vector<double>& xs) {
  const SplitSpec& split = res.split();
  std::size_t l = split.check_len;
  std::size_t check_start = split.check_start();
  double ln = static_cast<double>(l);

  // gamma_0(x) = (1/l_n) sum_t e_t w(Z_{t-1}, x)
  std::vector<std::complex<double>> gamma0(xs.size(), 0.0);
  for (std::size_t xi = 0; xi < xs.size(); ++xi) {
    std::complex<double> sum = 0.0;
    for (std::size_t t = check_start; t <= split.n; ++t) {
      double z;
      if (!res.lagged(t, 1, z)) continue;
      sum += res.residuals()[t - check_start] * eval_weight(kind, z, xs[xi]);
    }
    gamma0[xi] = sum / ln;
  }

  std::vector<std::vector<std::complex<double>>> gj(l);
  for (std::size_t j = 1; j <= l; ++j) {
    gj[j - 1].resize(xs.size());
    for (std::size_t xi = 0; xi < xs.size(); ++xi) {
      gj[j - 1][xi] = gamma_hat(res, j, xs[xi], kind);
    }
  }

  std::vector<std::vector<std::complex<double>>> h(
      lambdas.size(), std::vector<std::complex<double>>(xs.size()));
  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    double lambda = lambdas[li];
    for (std::size_t xi = 0; xi < xs.size(); ++xi) {
      if (lambda == 0.0) {
        h[li][xi] = 0.0;
        continue;
      }
      if (lambda == 1.0) {
        h[li][xi] = gamma0[xi]; // sin(j pi) terms vanish identically
        continue;
      }
      std::complex<double> acc = gamma0[xi] * lambda;
      for (std::size_t j = 1; j <= l; ++j) {
        double nj = static_cast<double>(split.lag_count(j));
        double jp = static_cast<double>(j) * kPi;
        acc += 2.0 * gj[j - 1][xi] * std::sqrt(nj / ln) * std::sin(jp * lambda) / jp;
      }
      h[li][xi] = acc;
    }
  }
  return h;
}

} // namespace gspec
