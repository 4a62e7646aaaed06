#include "gspec/bootstrap.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "gspec/error.hpp"
#include "gspec/thread_pool.hpp"

namespace gspec {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void validate_options(const BootstrapOptions& opts) {
  if (opts.B < 1) fail(ErrorCode::InvalidArgument, "bootstrap: need B >= 1");
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) {
    fail(ErrorCode::InvalidLevel, "bootstrap: alpha must lie in (0, 1)");
  }
}

} // namespace

void draw_multipliers(MultiplierKind kind, std::size_t count, RngStream& stream,
                      std::vector<double>& out) {
  out.resize(count);
  if (kind == MultiplierKind::Rademacher) {
    for (std::size_t i = 0; i < count; ++i) {
      out[i] = stream.next_uniform() <= 0.5 ? 1.0 : -1.0;
    }
    return;
  }
  // Mammen two-point law: mean 0, variance 1, third moment 1
  const double root5 = std::sqrt(5.0);
  const double lo = (1.0 - root5) / 2.0;
  const double hi = (1.0 + root5) / 2.0;
  const double p_lo = (1.0 + root5) / (2.0 * root5);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = stream.next_uniform() <= p_lo ? lo : hi;
  }
}

double empirical_p_value(std::span<const double> draws, double statistic) {
  std::size_t count = 0;
  for (double d : draws) {
    if (d >= statistic) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(draws.size());
}

double empirical_critical_value(std::span<const double> draws, double alpha) {
  if (draws.empty()) fail(ErrorCode::InvalidArgument, "critical value: no draws");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    fail(ErrorCode::InvalidLevel, "critical value: alpha must lie in (0, 1)");
  }
  std::vector<double> sorted(draws.begin(), draws.end());
  std::sort(sorted.begin(), sorted.end());
  double bd = static_cast<double>(sorted.size());
  std::size_t rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * bd));
  rank = std::min(std::max<std::size_t>(rank, 1), sorted.size());
  return sorted[rank - 1];
}

TestResult split_bootstrap_test(const ResidualSet& res, WeightKind weight,
                                const BootstrapOptions& opts) {
  validate_options(opts);
  auto t0 = Clock::now();

  StatContext ctx(res, weight);
  StatisticValue stat = ctx.evaluate();

  const std::size_t l = res.split().check_len;
  std::vector<double> draws(opts.B);
  parallel_for(opts.B, opts.threads, [&](std::size_t b) {
    std::vector<double> v;
    if (opts.ones_hook) {
      v.assign(l, 1.0);
    } else {
      RngStream stream(opts.seed, RngDomain::Multiplier, b);
      draw_multipliers(opts.multiplier, l, stream, v);
    }
    draws[b] = ctx.evaluate(v).value;
  });

  TestResult out;
  out.statistic = stat.value;
  out.boot_draws = std::move(draws);
  out.p_value = empirical_p_value(out.boot_draws, out.statistic);
  out.critical_value = empirical_critical_value(out.boot_draws, opts.alpha);
  out.reject = out.statistic > out.critical_value;
  out.elapsed_seconds = seconds_since(t0);
  out.provenance = {opts.seed,       opts.B,
                    opts.alpha,      opts.multiplier,
                    weight,          integrator_for(weight),
                    res.split(),     "",
                    "split",         0};
  return out;
}

TestResult full_sample_fdwb_test(const Series& series, const ModelSpec& spec,
                                 WeightKind weight,
                                 const BootstrapOptions& opts) {
  validate_options(opts);
  auto t0 = Clock::now();

  const std::size_t n = series.size();
  SplitSpec full = make_split(n, n, n);
  FittedModel fitted = fit_model(spec, series, full);
  ResidualSet res = compute_residuals(fitted, series, full);
  StatContext ctx(res, weight);
  StatisticValue stat = ctx.evaluate();

  const bool vol = spec.family == ModelFamily::Garch;
  // analysis-scale responses and fitted values at the original design
  std::vector<double> analysis(n), pred(n);
  {
    std::vector<double> p0 = conditional_predictions(fitted, series, full);
    for (std::size_t t = 0; t < n; ++t) {
      double y = series.at1(t + 1);
      analysis[t] = vol ? y * y : y;
      pred[t] = p0[t];
    }
  }
  const std::vector<double>& ehat = res.residuals(); // t = 1..n here

  std::vector<double> draws(opts.B);
  std::vector<std::size_t> redraws(opts.B, 0);
  parallel_for(opts.B, opts.threads, [&](std::size_t b) {
    std::vector<double> v, ystar(n), rstar(n);
    for (unsigned attempt = 0; attempt < 5; ++attempt) {
      if (opts.ones_hook) {
        v.assign(n, 1.0);
      } else {
        RngStream stream(opts.seed, RngDomain::Fdwb, b * 8 + attempt);
        draw_multipliers(opts.multiplier, n, stream, v);
      }
      for (std::size_t t = 0; t < n; ++t) {
        double y = pred[t] + ehat[t] * v[t];
        if (vol && y < 1e-12) y = 1e-12; // squared series stays positive
        ystar[t] = y;
      }
      try {
        FittedModel refit = refit_fixed_design(spec, series.values(), ystar, full);
        // residuals of the bootstrap responses under the re-estimate, at the
        // original (fixed) design
        std::vector<double> pstar;
        if (vol) {
          std::vector<double> yb(n);
          for (std::size_t t = 0; t < n; ++t) yb[t] = std::sqrt(ystar[t]);
          pstar = conditional_predictions(refit, Series(std::move(yb)), full);
        } else {
          pstar = conditional_predictions(refit, series, full);
        }
        double s2 = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
          rstar[t] = ystar[t] - pstar[t];
          s2 += rstar[t] * rstar[t];
        }
        s2 /= static_cast<double>(n);
        if (!(std::sqrt(s2) >= 1e-300)) {
          fail(ErrorCode::DegenerateResiduals, "bootstrap residuals degenerate");
        }
        draws[b] = ctx.evaluate_for(rstar, s2).value;
        return;
      } catch (const Error&) {
        ++redraws[b];
      }
    }
    fail(ErrorCode::BootstrapEstimationFailure,
         "fdwb: re-estimation failed on 5 multiplier draws");
  });

  std::size_t failures = 0;
  for (std::size_t r : redraws) failures += r;

  TestResult out;
  out.statistic = stat.value;
  out.boot_draws = std::move(draws);
  out.p_value = empirical_p_value(out.boot_draws, out.statistic);
  out.critical_value = empirical_critical_value(out.boot_draws, opts.alpha);
  out.reject = out.statistic > out.critical_value;
  out.elapsed_seconds = seconds_since(t0);
  out.provenance = {opts.seed,         opts.B,
                    opts.alpha,        opts.multiplier,
                    weight,            integrator_for(weight),
                    full,              spec.descriptor(),
                    "full_fdwb",       failures};
  return out;
}

} // namespace gspec
