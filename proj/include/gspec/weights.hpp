#pragma once

#include <cmath>
#include <complex>

namespace gspec {

// Weight families w(z, x) driving the spectral moments:
//   Indicator:  w = 1(z <= x), paired with integration over the empirical
//               distribution of the lagged checking-sample values;
//   ComplexExp: w = exp(i x z), paired with the standard normal integrating
//               measure, which collapses to the closed-form Gaussian kernel.
enum class WeightKind { Indicator, ComplexExp };

enum class IntegratorKind { EmpiricalCdfOfLaggedY, StdNormalCdf };

inline IntegratorKind integrator_for(WeightKind kind) {
  return kind == WeightKind::Indicator ? IntegratorKind::EmpiricalCdfOfLaggedY
                                       : IntegratorKind::StdNormalCdf;
}

inline std::complex<double> eval_weight(WeightKind kind, double z, double x) {
  if (kind == WeightKind::Indicator) {
    return {z <= x ? 1.0 : 0.0, 0.0};
  }
  return {std::cos(x * z), std::sin(x * z)};
}

// int exp(ix(a-b)) dPhi(x) = exp(-(a-b)^2/2): the closed form that replaces
// x-quadrature for the ComplexExp weight. Symmetric and positive semidefinite.
inline double cf_kernel(double a, double b) {
  double d = a - b;
  return std::exp(-0.5 * d * d);
}

} // namespace gspec
