#include "gspec/dgps.hpp"

#include <cmath>
#include <vector>

#include "gspec/error.hpp"
#include "gspec/rng.hpp"

namespace gspec {

namespace {

constexpr double kExplosive = 1e12;

void guard(double y) {
  if (!std::isfinite(y) || std::fabs(y) > kExplosive) {
    fail(ErrorCode::ExplosivePath, "simulate: |Y_t| exceeded 1e12");
  }
}

struct NameRow {
  const char* name;
  DgpKind kind;
};

constexpr NameRow kNames[] = {
    {"ar1", DgpKind::Ar1},         {"ar1-exp", DgpKind::Ar1Exp},
    {"ar1-het", DgpKind::Ar1Het},  {"ar1-bil", DgpKind::Ar1Bil},
    {"ar2", DgpKind::Ar2},         {"arma11", DgpKind::Arma11},
    {"bil", DgpKind::Bil},         {"nlma", DgpKind::Nlma},
    {"tar2", DgpKind::Tar2},       {"sign", DgpKind::Sign},
    {"temmap", DgpKind::TentMap},  {"nar", DgpKind::Nar},
    {"tar3", DgpKind::Tar3},       {"arch1", DgpKind::Arch1},
    {"arch2", DgpKind::Arch2},     {"arch4", DgpKind::Arch4},
    {"arch5", DgpKind::Arch5},     {"garch11", DgpKind::Garch11},
    {"garch22", DgpKind::Garch22}, {"egarch11", DgpKind::Egarch11},
    {"sv", DgpKind::Sv},           {"bil-vol", DgpKind::BilVol},
    {"lm", DgpKind::LogisticMap},  {"nlma-vol", DgpKind::NlmaVol},
};

double tar3_mean(double y1) {
  if (y1 < -1.0) return 0.6 * y1;
  if (y1 < 1.0) return -0.5 * y1;
  return 0.3 * y1;
}

} // namespace

double tent_map_step(double y, double alpha) {
  return y < alpha ? y / alpha : (1.0 - y) / (1.0 - alpha);
}

double logistic_map_step(double y) { return 4.0 * y * (1.0 - y); }

DgpSpec DgpSpec::parse(const std::string& name) {
  for (const auto& row : kNames) {
    if (name == row.name) {
      DgpSpec spec;
      spec.kind = row.kind;
      return spec;
    }
  }
  fail(ErrorCode::InvalidArgument, "dgp: unknown name '" + name + "'");
}

std::string DgpSpec::name() const {
  for (const auto& row : kNames) {
    if (row.kind == kind) return row.name;
  }
  return "";
}

bool DgpSpec::volatility() const {
  switch (kind) {
    case DgpKind::Arch1:
    case DgpKind::Arch2:
    case DgpKind::Arch4:
    case DgpKind::Arch5:
    case DgpKind::Garch11:
    case DgpKind::Garch22:
    case DgpKind::Egarch11:
    case DgpKind::Sv:
    case DgpKind::BilVol:
    case DgpKind::LogisticMap:
    case DgpKind::NlmaVol:
      return true;
    default:
      return false;
  }
}

Series simulate(const DgpSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n < 8) fail(ErrorCode::InvalidArgument, "simulate: need n >= 8");
  RngStream rng(seed, RngDomain::Simulate, 0);
  const std::size_t total = spec.burn_in + n;
  std::vector<double> out;
  out.reserve(n);
  auto record = [&](std::size_t step, double y) {
    guard(y);
    if (step >= spec.burn_in) out.push_back(y);
  };

  switch (spec.kind) {
    case DgpKind::Ar1: {
      double y1 = 0.0;
      for (std::size_t s = 0; s < total; ++s) {
        double y = 0.6 * y1 + rng.next_normal();
        record(s, y);
        y1 = y;
      }
      break;
    }
    case DgpKind::Ar1Exp: {
      double y1 = 0.0;
      for (std::size_t s = 0; s < total; ++s) {
        double e = -std::log(rng.next_uniform()) - 1.0;
        double y = 0.6 * y1 + e;
        record(s, y);
        y1 = y;
      }
      break;
    }
    case DgpKind::Ar1Het: {
      double y1 = 0.0;
      for (std::size_t s = 0; s < total; ++s) {
        double h = std::sqrt(0.1 + 0.1 * y1 * y1);
        double y = 0.6 * y1 + h * rng.next_normal();
        record(s, y);
        y1 = y;
      }
      break;
    }
    case DgpKind::Ar1Bil: {
      double y1 = 0.0;
      for (std::size_t s = 0; s < total; ++s) {
        double e = rng.next_normal();
        double y = 0.6 * y1 + 0.1 * y1 * e + e;
        record(s, y);
        y1 = y;
      }
      break;
    }
    case DgpKind::Ar2: {
      double y1 = 0.0, y2 = 0.0;
      for (std::size_t s = 0; s < total; ++s) {
        double y = 0.6 * y1 - 0.5 * y2 + rng.next_normal();
        record(s, y);
        y2 = y1;
        y1 = y;
      }
      break;
    }
    case DgpKind::Arma11: {
      double y1 = 0.0, e1 = 0.0;
      for (std::size_t s = 0; s < total; ++s) {
        double e = rng.next_normal();
        double y = 0.6 * y1 + 0.9 * e1 + e;
        record(s, y);
        y1 = y;
        e1 = e;
      }
      break;
    }
    case DgpKind::Bil: {
      double y1 = 0.0, y2 = 0.0, e1 = 0.0;
      for (std::size_t s = 0; s < total; ++s) {
        double e = rng.next_normal();
        double y = 0.6 * y1 + 0.7 * e1 * y2 + e;
        record(s, y);
        y2 = y1;
        y1 = y;
        e1 = e;
      }
      break;
    }
    case DgpKind::Nlma: {
      double y1 = 0.0, e1 = 0.0, e2 = 0.0;
      for (std::size_t s = 0; s < total; ++s) {
        double e = rng.next_normal();
        double y = 0.6 * y1 + 0.7 * e1 * e2 + e;
        record(s, y);
        y1 = y;
        e2 = e1;
        e1 = e;
      }
      break;
    }
    case DgpKind::Tar2: {
      double y1 = 0.0;
      for (std::size_t s = 0; s < total; ++s) {
        double coef = y1 < 1.0 ? 0.6 : -0.5;
        double y = coef * y1 + rng.next_normal();
        record(s, y);
        y1 = y;
      }
      break;
    }
    case DgpKind::Sign: {
      double y1 = 0.0;
      for (std::size_t s = 0; s < total; ++s) {
        double sgn = y1 > 0.0 ? 1.0 : (y1 < 0.0 ? -1.0 : 0.0);
        double y = sgn + 0.43 * rng.next_normal();
        record(s, y);
        y1 = y;
      }
      break;
    }
    case DgpKind::TentMap: {
      double y = rng.next_uniform();
      for (std::size_t s = 0; s < total; ++s) {
        y = tent_map_step(y);
        record(s, y);
      }
      break;
    }
    case DgpKind::Nar: {
      double y1 = 0.0, y2 = 0.0;
      for (std::size_t s = 0; s < total; ++s) {
        double y = 0.6 * y1 + 0.7 * std::sin(0.3 * M_PI * y2) + rng.next_normal();
        record(s, y);
        y2 = y1;
        y1 = y;
      }
      break;
    }
    case DgpKind::Tar3: {
      double y1 = 0.0;
      for (std::size_t s = 0; s < total; ++s) {
        double y = tar3_mean(y1) + rng.next_normal();
        record(s, y);
        y1 = y;
      }
      break;
    }
    case DgpKind::Arch1:
    case DgpKind::Arch2:
    case DgpKind::Arch4:
    case DgpKind::Arch5: {
      std::vector<double> coef;
      switch (spec.kind) {
        case DgpKind::Arch1: coef = {0.1}; break;
        case DgpKind::Arch2: coef = {0.1, 0.8}; break;
        case DgpKind::Arch4: coef = {0.1, 0.2, 0.2, 0.1}; break;
        default: coef = {0.1, 0.2, 0.2, 0.1, 0.3}; break;
      }
      std::vector<double> lags(coef.size(), 0.0); // y_{t-1}^2 ... y_{t-p}^2
      for (std::size_t s = 0; s < total; ++s) {
        double s2 = 0.9;
        for (std::size_t i = 0; i < coef.size(); ++i) s2 += coef[i] * lags[i];
        double y = std::sqrt(s2) * rng.next_normal();
        record(s, y);
        for (std::size_t i = lags.size(); i-- > 1;) lags[i] = lags[i - 1];
        lags[0] = y * y;
      }
      break;
    }
    case DgpKind::Garch11: {
      double s2 = 1.0, y1 = 0.0;
      for (std::size_t s = 0; s < total; ++s) {
        s2 = 0.01 + 0.29 * y1 * y1 + 0.7 * s2;
        double y = std::sqrt(s2) * rng.next_normal();
        record(s, y);
        y1 = y;
      }
      break;
    }
    case DgpKind::Garch22: {
      double s2a = 1.0, s2b = 1.0, y1 = 0.0, y2 = 0.0;
      for (std::size_t s = 0; s < total; ++s) {
        double s2 = 0.1 + 0.2 * y1 * y1 + 0.2 * y2 * y2 + 0.3 * s2a + 0.1 * s2b;
        double y = std::sqrt(s2) * rng.next_normal();
        record(s, y);
        s2b = s2a;
        s2a = s2;
        y2 = y1;
        y1 = y;
      }
      break;
    }
    case DgpKind::Egarch11: {
      double log_s2 = 0.0, eta1 = 0.0;
      const double mean_abs = std::sqrt(2.0 / M_PI);
      for (std::size_t s = 0; s < total; ++s) {
        log_s2 = 0.01 + 0.9 * log_s2 + 0.3 * (std::fabs(eta1) - mean_abs) - 0.8 * eta1;
        double eta = rng.next_normal();
        double y = std::exp(0.5 * log_s2) * eta;
        record(s, y);
        eta1 = eta;
      }
      break;
    }
    case DgpKind::Sv: {
      // Latent log-volatility AR(1) plus an ARCH feedback term:
      //   h_t = 0.98 h_{t-1} + v_t,  sigma2_t = 0.1 y_{t-1}^2 + exp(h_t),
      //   y_t = sigma_t * eta_t with v_t = eta_t (shock reuse).
      // The log-AR(1) applies to the latent component only: feeding the
      // full sigma2 (ARCH term included) back through the log gives a
      // process whose deterministic fixed point is (1/0.9)^50 ~= 194, i.e.
      // a variance scale detached from the other volatility designs.
      // Reusing the return innovation as the volatility shock makes the
      // contemporaneous exp(eta_t) factor untrackable by any fit driven by
      // lagged squares, so every conditional-variance null is rejected.
      double h = 0.0, y1 = 0.0;
      for (std::size_t s = 0; s < total; ++s) {
        double z = rng.next_normal();
        h = 0.98 * h + z;
        double s2 = 0.1 * y1 * y1 + std::exp(h);
        double y = std::sqrt(s2) * z;
        record(s, y);
        y1 = y;
      }
      break;
    }
    case DgpKind::BilVol: {
      double y1 = 0.0, eta1 = 0.0;
      for (std::size_t s = 0; s < total; ++s) {
        double eta = rng.next_normal();
        double y = 0.8 * eta1 * y1 + eta;
        record(s, y);
        y1 = y;
        eta1 = eta;
      }
      break;
    }
    case DgpKind::LogisticMap: {
      double y = rng.next_uniform();
      for (std::size_t s = 0; s < total; ++s) {
        y = logistic_map_step(y);
        record(s, y);
      }
      break;
    }
    case DgpKind::NlmaVol: {
      double eta1 = 0.0;
      for (std::size_t s = 0; s < total; ++s) {
        double eta = rng.next_normal();
        double y = 0.8 * eta1 * eta1 + eta;
        record(s, y);
        eta1 = eta;
      }
      break;
    }
  }
  return Series(std::move(out));
}

DriftSpec DriftSpec::parse(const std::string& name, double amplitude) {
  DriftSpec spec;
  spec.amplitude = amplitude;
  if (name == "none") {
    spec.kind = Kind::None;
  } else if (name == "sin-lag2") {
    spec.kind = Kind::SinLag2;
  } else if (name == "linear-lag1") {
    spec.kind = Kind::LinearLag1;
  } else {
    fail(ErrorCode::InvalidArgument, "drift: unknown name '" + name + "'");
  }
  return spec;
}

std::string DriftSpec::name() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::SinLag2: return "sin-lag2";
    case Kind::LinearLag1: return "linear-lag1";
  }
  return "";
}

Series simulate_local_alternative(const DgpSpec& base, const DriftSpec& drift,
                                  std::size_t n, std::size_t scale_len,
                                  std::uint64_t seed) {
  if (base.kind != DgpKind::Ar1 && base.kind != DgpKind::Tar3) {
    fail(ErrorCode::InvalidArgument,
         "local alternative: base must be ar1 or tar3");
  }
  if (drift.kind == DriftSpec::Kind::None) return simulate(base, n, seed);
  if (n < 8) fail(ErrorCode::InvalidArgument, "simulate: need n >= 8");
  if (scale_len == 0) {
    fail(ErrorCode::InvalidArgument, "local alternative: scale_len must be > 0");
  }

  RngStream rng(seed, RngDomain::Simulate, 0);
  const double scale = drift.amplitude / std::sqrt(static_cast<double>(scale_len));
  const std::size_t total = base.burn_in + n;
  std::vector<double> out;
  out.reserve(n);
  double y1 = 0.0, y2 = 0.0;
  for (std::size_t s = 0; s < total; ++s) {
    double mean = base.kind == DgpKind::Ar1 ? 0.6 * y1 : tar3_mean(y1);
    double a = drift.kind == DriftSpec::Kind::SinLag2
                   ? std::sin(0.3 * M_PI * y2)
                   : y1;
    double y = mean + scale * a + rng.next_normal();
    guard(y);
    if (s >= base.burn_in) out.push_back(y);
    y2 = y1;
    y1 = y;
  }
  return Series(std::move(out));
}

} // namespace gspec
