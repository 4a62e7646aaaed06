#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gspec/series.hpp"
#include "gspec/split.hpp"

namespace gspec {

enum class ModelFamily { Constant, Ar, Arma, Garch, Tar };

// Parametric conditional-mean model for the fitted-value rule Y_t = f(I_{t-1}, theta) + e_t.
// GARCH models are handled on the squared-series representation: the estimator
// consumes the raw series y_t, and goodness-of-fit residuals are y_t^2 - sigma2_t.
//
// Descriptor grammar (round-trips through parse/descriptor):
//   "const"                constant mean
//   "ar:p"                 AR(p) without intercept
//   "ar:p:c"               AR(p) with intercept
//   "arma:p,q"             ARMA(p,q), no intercept
//   "garch:p,q"            GARCH(p,q) with p ARCH and q GARCH terms
//   "arch:p"               alias for garch:p,0
//   "tar:p1,...,pk:d=D"    k-regime TAR with per-regime intercepts, delay D
struct ModelSpec {
  ModelFamily family = ModelFamily::Constant;
  int p = 0;
  int q = 0;
  bool intercept = false;             // AR only; TAR always has per-regime intercepts
  std::vector<int> regime_orders;     // TAR
  int delay = 1;                      // TAR

  static ModelSpec parse(const std::string& descriptor);
  std::string descriptor() const;
};

struct FitDiagnostics {
  double objective = 0.0; // family-specific: SSR (AR/ARMA/TAR), -quasi-loglik (GARCH)
  int iterations = 0;
  bool converged = true;
  bool boundary = false;  // ARMA near-unit-root warning
};

// theta layout by family:
//   Constant: [mu]
//   Ar:       [c]? + [phi_1..phi_p]            (c present iff intercept)
//   Arma:     [phi_1..phi_p, psi_1..psi_q]
//   Garch:    [omega, phi_1..phi_p, psi_1..psi_q]
//   Tar:      per regime [c_i, phi_{i,1}..phi_{i,p_i}], then thresholds r_1 < ... < r_{k-1}
struct FittedModel {
  ModelSpec spec;
  std::vector<double> theta;
  FitDiagnostics diagnostics;

  std::vector<double> tar_thresholds() const; // the top k-1 theta entries
};

// Candidate thresholds for the TAR grid search, taken from the fitting-sample
// threshold variable. Observed mode (default) uses the distinct observed values
// inside the [lo, hi] quantile range; QuantileSteps walks quantiles lo..hi in
// `step` increments; Explicit uses `values` as given.
struct ThresholdGrid {
  enum class Mode { Observed, QuantileSteps, Explicit };
  Mode mode = Mode::Observed;
  double lo = 0.10;
  double hi = 0.90;
  double step = 0.02;
  std::vector<double> values;
};

// All fits read only the fitting sample Y_1..Y_{f_n} and increment the
// estimator-call counter exactly once.
FittedModel fit_constant(const Series& series, const SplitSpec& split);
FittedModel fit_ar(const Series& series, const SplitSpec& split, int p,
                   bool intercept = false);
FittedModel fit_arma(const Series& series, const SplitSpec& split, int p, int q);
FittedModel fit_garch(const Series& series, const SplitSpec& split, int p, int q);
FittedModel fit_tar(const Series& series, const SplitSpec& split,
                    const std::vector<int>& regime_orders, int delay,
                    const ThresholdGrid& grid = {});
FittedModel fit_model(const ModelSpec& spec, const Series& series,
                      const SplitSpec& split);

// Fixed-design refit for the full-sample wild bootstrap: same family/orders,
// responses ystar, regressors (lagged values, threshold variables) taken from
// `original`. GARCH refits on ystar itself, which is the bootstrap squared
// series. Fits over the whole span described by `split` and increments the
// estimator-call counter.
FittedModel refit_fixed_design(const ModelSpec& spec,
                               const std::vector<double>& original,
                               const std::vector<double>& ystar,
                               const SplitSpec& split);

// Monotone instrumentation counter over every fit_* / refit call; tests and
// the harness assert call-count contracts through deltas.
std::uint64_t estimator_calls();

// --- building blocks exposed for tests and for residual computation ---

// AR(infinity) expansion of an ARMA(p,q) model: pi_0 = 1 and
//   pi_k = -phi_k - sum_{l=1..min(k,q)} psi_l pi_{k-l},  phi_k = 0 for k > p.
// Returns pi_1..pi_count.
std::vector<double> arma_pi_coefficients(const std::vector<double>& phi,
                                         const std::vector<double>& psi,
                                         std::size_t count);

// Conditional variance path sigma2_1..sigma2_len for GARCH theta
// [omega, phi.., psi..]; pre-sample y^2 and sigma2 are set to `init`.
std::vector<double> garch_sigma2_path(const std::vector<double>& theta, int p,
                                      int q, const double* y, std::size_t len,
                                      double init);

// Gaussian quasi-log-likelihood sum_t [-log sigma_t - y_t^2 / (2 sigma2_t)].
double garch_quasi_loglik(const std::vector<double>& theta, int p, int q,
                          const double* y, std::size_t len, double init);

// true iff 1 + c_1 z + ... + c_m z^m has every root outside the closed unit disk
bool poly_roots_outside_unit_disk(const std::vector<double>& c);

} // namespace gspec
