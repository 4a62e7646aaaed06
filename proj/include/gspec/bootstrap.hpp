#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gspec/estimators.hpp"
#include "gspec/residuals.hpp"
#include "gspec/rng.hpp"
#include "gspec/spectral.hpp"

namespace gspec {

// Wild-bootstrap multiplier laws with mean 0 and variance 1.
//   Mammen: V = (1-sqrt5)/2 w.p. (1+sqrt5)/(2 sqrt5), else (1+sqrt5)/2
//     (third moment 1).
//   Rademacher: +-1 with equal probability.
enum class MultiplierKind { Mammen, Rademacher };

void draw_multipliers(MultiplierKind kind, std::size_t count, RngStream& stream,
                      std::vector<double>& out);

struct Provenance {
  std::uint64_t seed = 0;
  std::size_t B = 0;
  double alpha = 0.0;
  MultiplierKind multiplier = MultiplierKind::Mammen;
  WeightKind weight = WeightKind::Indicator;
  IntegratorKind integrator = IntegratorKind::EmpiricalCdfOfLaggedY;
  SplitSpec split;
  std::string model;  // descriptor of the null model, when known
  std::string scheme; // "split" or "full_fdwb"
  std::size_t failures = 0; // FDWB re-estimation failures that forced redraws
};

struct TestResult {
  double statistic = 0.0;
  std::vector<double> boot_draws; // B bootstrap statistics in draw order
  double p_value = 0.0;           // (1/B) #{draws >= statistic}
  double critical_value = 0.0;    // empirical (1-alpha) quantile of draws
  bool reject = false;            // statistic > critical_value
  double elapsed_seconds = 0.0;
  Provenance provenance;
};

struct BootstrapOptions {
  std::size_t B = 500;
  double alpha = 0.05;
  MultiplierKind multiplier = MultiplierKind::Mammen;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool ones_hook = false; // test hook: every multiplier identically 1
};

// p = (1/B) #{draws >= statistic}; ties count toward the p-value.
double empirical_p_value(std::span<const double> draws, double statistic);

// Order statistic ceil((1-alpha) B) of the draws; alpha must lie in (0,1).
double empirical_critical_value(std::span<const double> draws, double alpha);

// Multiplier bootstrap on a fitted residual set: no re-estimation, draw b uses
// stream (seed, Multiplier, b), and every bootstrap statistic goes through the
// same evaluation path as the original statistic.
TestResult split_bootstrap_test(const ResidualSet& res, WeightKind weight,
                                const BootstrapOptions& opts);

// Full-sample fixed-design wild bootstrap baseline: fits on all n, then per
// replication rebuilds responses Ystar_t = f(I_{t-1}, theta_hat) + e_t V_t
// with the original regressors held fixed, re-estimates, recomputes residuals
// and sigma_e under the re-estimate, and re-prices the statistic. Estimation
// failures redraw the multipliers up to 5 attempts (then
// BootstrapEstimationFailure). GARCH models regenerate on the squared-series
// representation with responses truncated below at 1e-12.
TestResult full_sample_fdwb_test(const Series& series, const ModelSpec& spec,
                                 WeightKind weight,
                                 const BootstrapOptions& opts);

} // namespace gspec
