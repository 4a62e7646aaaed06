#pragma once

#include <cstdint>
#include <string>

#include "gspec/series.hpp"

namespace gspec {

// Simulators for the Monte Carlo study. Mean-form processes (tested against
// conditional-mean nulls on the raw series) and volatility-form processes
// (y_t = sigma_t eta_t or deterministic maps; tested against GARCH-type nulls
// on the squared series Y_t = y_t^2).
enum class DgpKind {
  // mean-form
  Ar1,       // Y = 0.6 Y_1 + e
  Ar1Exp,    // Y = 0.6 Y_1 + (w - 1), w ~ Exp(1)
  Ar1Het,    // Y = 0.6 Y_1 + h e,  h^2 = 0.1 + 0.1 Y_1^2
  Ar1Bil,    // Y = 0.6 Y_1 + 0.1 Y_1 e + e
  Ar2,       // Y = 0.6 Y_1 - 0.5 Y_2 + e
  Arma11,    // Y = 0.6 Y_1 + 0.9 e_1 + e
  Bil,       // Y = 0.6 Y_1 + 0.7 e_1 Y_2 + e
  Nlma,      // Y = 0.6 Y_1 + 0.7 e_1 e_2 + e
  Tar2,      // Y = 0.6 Y_1 + e if Y_1 < 1, else -0.5 Y_1 + e
  Sign,      // Y = sign(Y_1) + 0.43 e
  TentMap,   // Y = Y_1/a if Y_1 < a else (1-Y_1)/(1-a), a = 0.49999, Y_0 ~ U[0,1]
  Nar,       // Y = 0.6 Y_1 + 0.7 sin(0.3 pi Y_2) + e
  Tar3,      // Y = 0.6 Y_1 + e if Y_1 < -1; -0.5 Y_1 + e if -1 <= Y_1 < 1; else 0.3 Y_1 + e
  // volatility-form
  Arch1,     // s2 = 0.9 + 0.1 y_1^2
  Arch2,     // s2 = 0.9 + 0.1 y_1^2 + 0.8 y_2^2
  Arch4,     // s2 = 0.9 + 0.1 y_1^2 + 0.2 y_2^2 + 0.2 y_3^2 + 0.1 y_4^2
  Arch5,     // Arch4 + 0.3 y_5^2
  Garch11,   // s2 = 0.01 + 0.29 y_1^2 + 0.7 s2_1
  Garch22,   // s2 = 0.1 + 0.2 y_1^2 + 0.2 y_2^2 + 0.3 s2_1 + 0.1 s2_2
  Egarch11,  // log s2 = 0.01 + 0.9 log s2_1 + 0.3 (|eta_1| - sqrt(2/pi)) - 0.8 eta_1
  Sv,        // s2 = 0.1 y_1^2 + exp(h), h = 0.98 h_1 + v, v ~ N(0, 0.166^2)
  BilVol,    // y = 0.8 eta_1 y_1 + eta
  LogisticMap, // y = 4 y_1 (1 - y_1), y_0 ~ U[0,1]
  NlmaVol,   // y = 0.8 eta_1^2 + eta
};

struct DgpSpec {
  DgpKind kind = DgpKind::Ar1;
  std::size_t burn_in = 200;

  // CLI names: ar1, ar1-exp, ar1-het, ar1-bil, ar2, arma11, bil, nlma, tar2,
  // sign, temmap, nar, tar3, arch1, arch2, arch4, arch5, garch11, garch22,
  // egarch11, sv, bil-vol, lm, nlma-vol
  static DgpSpec parse(const std::string& name);
  std::string name() const;

  // true when the process targets a volatility null (test on squared series)
  bool volatility() const;
};

// n >= 8. Deterministic in (spec, n, seed); burn-in draws are discarded.
// Throws ExplosivePath if any |value| exceeds 1e12.
Series simulate(const DgpSpec& spec, std::size_t n, std::uint64_t seed);

// Local alternative around a mean-form null:
//   Y_t = f(I_{t-1}, theta0) + amplitude * a(I_{t-1}) / sqrt(scale_len) + e_t.
// Supported bases: Ar1 and Tar3 (the null families of the study). A drift of
// kind None is bit-identical to simulate().
struct DriftSpec {
  enum class Kind { None, SinLag2, LinearLag1 }; // a = sin(0.3 pi Y_2), a = Y_1
  Kind kind = Kind::None;
  double amplitude = 1.0;

  static DriftSpec parse(const std::string& name, double amplitude);
  std::string name() const;
};

Series simulate_local_alternative(const DgpSpec& base, const DriftSpec& drift,
                                  std::size_t n, std::size_t scale_len,
                                  std::uint64_t seed);

// single map steps (exposed for tests)
double tent_map_step(double y, double alpha = 0.49999);
double logistic_map_step(double y);

} // namespace gspec
