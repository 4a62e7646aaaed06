#include "gspec/residuals.hpp"

#include <algorithm>
#include <cmath>

#include "gspec/error.hpp"
#include "gspec/estimators.hpp"

namespace gspec {

ResidualSet::ResidualSet(std::vector<double> residuals,
                         std::vector<double> conditioning, SplitSpec split)
    : residuals_(std::move(residuals)),
      conditioning_(std::move(conditioning)),
      split_(split) {
  if (residuals_.size() != split_.check_len || conditioning_.size() != split_.n) {
    fail(ErrorCode::InvalidArgument, "residuals: size does not match split");
  }
  double s2 = 0.0;
  for (double e : residuals_) s2 += e * e;
  s2 /= static_cast<double>(split_.check_len);
  sigma2_e_ = s2;
  sigma_e_ = std::sqrt(s2);
  if (!(sigma_e_ >= 1e-300)) {
    fail(ErrorCode::DegenerateResiduals,
         "residuals: standard deviation below 1e-300");
  }
}

std::vector<double> conditional_predictions(const FittedModel& model,
                                            const Series& series,
                                            const SplitSpec& split) {
  if (!split.valid() || split.n != series.size()) {
    fail(ErrorCode::InvalidSplit, "predictions: split does not match series");
  }
  const std::size_t n = split.n;
  const auto& spec = model.spec;
  const auto& th = model.theta;
  std::vector<double> pred(n);

  // maximum lag the mean function reaches back to; unavailable history is
  // treated as zero
  auto lag = [&](std::size_t t, int i) {
    return t > static_cast<std::size_t>(i) ? series.at1(t - static_cast<std::size_t>(i)) : 0.0;
  };

  switch (spec.family) {
    case ModelFamily::Constant: {
      if (n < 2) fail(ErrorCode::ModelMismatch, "predictions: series too short");
      std::fill(pred.begin(), pred.end(), th[0]);
      break;
    }
    case ModelFamily::Ar: {
      if (n <= static_cast<std::size_t>(spec.p)) {
        fail(ErrorCode::ModelMismatch, "predictions: series shorter than AR order");
      }
      std::size_t base = spec.intercept ? 1 : 0;
      for (std::size_t t = 1; t <= n; ++t) {
        double v = spec.intercept ? th[0] : 0.0;
        for (int i = 1; i <= spec.p; ++i) v += th[base + static_cast<std::size_t>(i - 1)] * lag(t, i);
        pred[t - 1] = v;
      }
      break;
    }
    case ModelFamily::Arma: {
      std::size_t m = static_cast<std::size_t>(std::max(spec.p, spec.q));
      if (n <= m) fail(ErrorCode::ModelMismatch, "predictions: series too short");
      std::vector<double> phi(th.begin(), th.begin() + spec.p);
      std::vector<double> psi(th.begin() + spec.p, th.end());
      std::vector<double> pi = arma_pi_coefficients(phi, psi, n - 1);
      for (std::size_t t = 1; t <= n; ++t) {
        double v = 0.0;
        for (std::size_t k = 1; k < t; ++k) v -= pi[k - 1] * series.at1(t - k);
        pred[t - 1] = v;
      }
      break;
    }
    case ModelFamily::Garch: {
      std::size_t m = static_cast<std::size_t>(std::max(spec.p, spec.q));
      if (n <= m) fail(ErrorCode::ModelMismatch, "predictions: series too short");
      // volatility recursion over the full sample, initialized at the
      // fitting-sample variance
      double mean = 0.0;
      for (std::size_t t = 1; t <= split.fit_len; ++t) mean += series.at1(t);
      mean /= static_cast<double>(split.fit_len);
      double var = 0.0;
      for (std::size_t t = 1; t <= split.fit_len; ++t) {
        var += (series.at1(t) - mean) * (series.at1(t) - mean);
      }
      var /= static_cast<double>(split.fit_len);
      pred = garch_sigma2_path(th, spec.p, spec.q, series.values().data(), n, var);
      break;
    }
    case ModelFamily::Tar: {
      int max_order = *std::max_element(spec.regime_orders.begin(),
                                        spec.regime_orders.end());
      if (n <= static_cast<std::size_t>(std::max(max_order, spec.delay))) {
        fail(ErrorCode::ModelMismatch, "predictions: series too short");
      }
      std::size_t k = spec.regime_orders.size();
      std::vector<std::size_t> offs(k, 0);
      for (std::size_t r = 1; r < k; ++r) {
        offs[r] = offs[r - 1] + static_cast<std::size_t>(spec.regime_orders[r - 1]) + 1;
      }
      std::vector<double> thr(th.end() - static_cast<std::ptrdiff_t>(k - 1), th.end());
      for (std::size_t t = 1; t <= n; ++t) {
        double x = lag(t, spec.delay);
        std::size_t r = 0;
        while (r + 1 < k && x >= thr[r]) ++r;
        double v = th[offs[r]];
        for (int i = 1; i <= spec.regime_orders[r]; ++i) {
          v += th[offs[r] + static_cast<std::size_t>(i)] * lag(t, i);
        }
        pred[t - 1] = v;
      }
      break;
    }
  }
  return pred;
}

ResidualSet compute_residuals(const FittedModel& model, const Series& series,
                              const SplitSpec& split) {
  std::vector<double> pred = conditional_predictions(model, series, split);
  const bool vol = model.spec.family == ModelFamily::Garch;
  // The weights always condition on the lagged observed series, which is the
  // information set of the null hypothesis. The residual is the conditional
  // mean error y_t - m_t for mean models and the studentized variance error
  // y_t^2 / sigma_t^2 - 1 for volatility models. Dividing by the fitted
  // variance keeps the multiplier bootstrap stable when the squared series
  // is heavy tailed; the raw difference y_t^2 - sigma_t^2 lets a single
  // extreme observation dominate the statistic, which floors the bootstrap
  // p-value at the probability that one multiplier exceeds one.
  std::vector<double> analysis(split.n);
  for (std::size_t t = 0; t < split.n; ++t) analysis[t] = series.at1(t + 1);
  std::vector<double> resid(split.check_len);
  std::size_t start = split.check_start();
  for (std::size_t t = start; t <= split.n; ++t) {
    double y = analysis[t - 1];
    if (vol) {
      if (!(pred[t - 1] > 1e-300)) {
        fail(ErrorCode::DegenerateResiduals,
             "residuals: fitted variance is not positive");
      }
      resid[t - start] = y * y / pred[t - 1] - 1.0;
    } else {
      resid[t - start] = y - pred[t - 1];
    }
  }
  return ResidualSet(std::move(resid), std::move(analysis), split);
}

} // namespace gspec
