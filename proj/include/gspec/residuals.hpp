#pragma once

#include <cstddef>
#include <vector>

#include "gspec/error.hpp"
#include "gspec/estimators.hpp"
#include "gspec/series.hpp"
#include "gspec/split.hpp"

namespace gspec {

// Checking-sample residuals together with the conditioning values used for
// lagged weight arguments.
//
// residuals()[i] is e_t for t = split.check_start() + i, i = 0..l_n-1.
// conditioning() holds the full analysis series Z_1..Z_n: the raw series for
// mean models and the squared series for GARCH models, so Z_{t-j} is read as
// conditioning()[t-j-1]. Index 0 (t-j < 1) never exists; lag sums skip it.
// sigma2_e() = (1/l_n) sum of squared residuals over the checking sample.
class ResidualSet {
public:
  ResidualSet(std::vector<double> residuals, std::vector<double> conditioning,
              SplitSpec split);

  const std::vector<double>& residuals() const { return residuals_; }
  const std::vector<double>& conditioning() const { return conditioning_; }
  const SplitSpec& split() const { return split_; }
  double sigma_e() const { return sigma_e_; }
  double sigma2_e() const { return sigma2_e_; }

  // Z_{t-j} for 1-based t; false when t-j < 1 (value unavailable)
  bool lagged(std::size_t t, std::size_t j, double& out) const {
    if (t < j + 1) return false;
    out = conditioning_[t - j - 1];
    return true;
  }

private:
  std::vector<double> residuals_;
  std::vector<double> conditioning_;
  SplitSpec split_;
  double sigma_e_ = 0.0;
  double sigma2_e_ = 0.0;
};

// Residuals over the checking sample using the observed information set.
// Pre-sample values follow the family conventions documented in estimators.
// Throws DegenerateResiduals when sigma_e falls below 1e-300 (exact fit).
ResidualSet compute_residuals(const FittedModel& model, const Series& series,
                              const SplitSpec& split);

// One-step conditional predictions f(I_{t-1}, theta) for t = 1..n on the
// analysis scale (mean for mean models, sigma2 path for GARCH on Y = y^2).
std::vector<double> conditional_predictions(const FittedModel& model,
                                            const Series& series,
                                            const SplitSpec& split);

} // namespace gspec
