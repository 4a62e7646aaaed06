#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gspec/residuals.hpp"
#include "gspec/weights.hpp"

namespace gspec {

// Spectral side of the statistic: lag j enters with weight 1/(j pi)^2 and the
// finite-sample correction (n_j / l_n)^(1/2).
struct SpectralWeights {
  std::size_t max_lag = 0; // l_n

  double lag_weight(std::size_t j) const;  // 1 / (j pi)^2
  double correction(std::size_t j) const;  // sqrt(n_j / l_n)
};

struct StatisticValue {
  double value = 0.0;
  std::vector<double> per_lag; // contribution of lag j at [j-1]; all >= 0
  WeightKind weight = WeightKind::Indicator;
  IntegratorKind integrator = IntegratorKind::EmpiricalCdfOfLaggedY;
};

// Per-dataset evaluation state for one weight family, reused across bootstrap
// draws. Construction performs the data-dependent precomputation (per-lag sort
// order and rank tables for the indicator weight; the conditioning-value
// Gaussian kernel matrix for the CF weight); evaluate() then prices one
// multiplier draw. evaluate() is const and safe to call concurrently.
//
// Multiplier semantics: an empty span means "no multipliers" and a span of
// length l_n multiplies residual e_t by V_t (sigma_e stays at the original
// residual value). Multipliers identically 1 reproduce the plain statistic
// bit-for-bit because both cases run the same code path.
class StatContext {
public:
  static constexpr std::size_t kDefaultKernelBudget = std::size_t{2} << 30; // 2 GiB

  StatContext(const ResidualSet& res, WeightKind kind,
              std::size_t kernel_budget_bytes = kDefaultKernelBudget);

  StatisticValue evaluate(std::span<const double> multipliers = {}) const;

  // Same conditioning tables, different residual vector (the fixed-design
  // bootstrap re-estimates and so replaces residuals and sigma2 per draw).
  // The residuals must be aligned like the originals: t = check_start()..n.
  StatisticValue evaluate_for(std::span<const double> residuals, double sigma2,
                              std::span<const double> multipliers = {}) const;

  WeightKind weight() const { return kind_; }
  const SplitSpec& split() const { return split_; }

private:
  void build_indicator(const ResidualSet& res);
  void build_cf(const ResidualSet& res, std::size_t budget);
  void evaluate_indicator(const std::vector<double>& u, double sigma2,
                          StatisticValue& out) const;
  void evaluate_cf(const std::vector<double>& u, double sigma2,
                   StatisticValue& out) const;

  WeightKind kind_;
  SplitSpec split_;
  double sigma2_ = 0.0;
  std::vector<double> residuals_; // l_n, aligned to t = check_start()..n
  std::size_t lo_ = 0;            // first conditioning index max(n - l_n, 1)
  std::size_t m_ = 0;             // conditioning/evaluation count n - lo_

  // indicator tables: per lag j, window entries in conditioning-value order
  // (as local residual indices) and, per evaluation point, the count of
  // window values <= that point
  std::vector<std::int32_t> sorted_local_;
  std::vector<std::size_t> lag_offset_; // size l_n + 1, prefix offsets
  std::vector<std::int32_t> ranks_;     // l_n blocks of m_ entries

  // CF table: m_ x m_ row-major kernel over conditioning values
  std::vector<double> kernel_;
};

// Cramer-von Mises statistic, indicator weight and empirical integrator:
//   D2 = sum_j n_j / (l_n (j pi)^2) sum_t gamma_j(Y_{t-1})^2,
//   gamma_j(x) = (sigma_e n_j)^(-1) sum_k e_k V_k 1(Z_{k-j} <= x).
StatisticValue statistic_indicator(const ResidualSet& res,
                                   std::span<const double> multipliers = {});

// CF weight with standard normal integrator, closed form:
//   D2 = sum_j 1 / (sigma2_e n_j (j pi)^2)
//          sum_{t,s} e_t V_t e_s V_s exp(-(Z_{t-j} - Z_{s-j})^2 / 2).
StatisticValue statistic_cf(const ResidualSet& res,
                            std::span<const double> multipliers = {});

// Plain lag-j weighted moment (no sigma_e scaling):
//   (1/n_j) sum over admissible t of e_t V_t w(Z_{t-j}, x), 1 <= j <= l_n.
std::complex<double> gamma_hat(const ResidualSet& res, std::size_t j, double x,
                               WeightKind kind,
                               std::span<const double> multipliers = {});

// Cumulative spectral distribution diagnostic on a (lambda, x) grid:
//   H(lambda, x) = gamma_0(x) lambda
//                + 2 sum_j gamma_j(x) sqrt(n_j/l_n) sin(j pi lambda) / (j pi),
// with gamma_0(x) = (1/l_n) sum_t e_t w(Z_{t-1}, x). Endpoints are exact:
// H(0, x) = 0 and H(1, x) = gamma_0(x). Result is [lambda index][x index].
std::vector<std::vector<std::complex<double>>> h_hat_diagnostic(
    const ResidualSet& res, WeightKind kind, const std::vector<double>& lambdas,
    const std::vector<double>& xs);

} // namespace gspec
