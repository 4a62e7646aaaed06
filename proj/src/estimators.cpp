#include "gspec/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>

#include "gspec/error.hpp"

namespace gspec {

namespace {

std::atomic<std::uint64_t> g_estimator_calls{0};

void count_call() { g_estimator_calls.fetch_add(1, std::memory_order_relaxed); }

// ---------- small dense linear algebra ----------

// In-place Cholesky A = L L^T for row-major d x d; false on a non-positive pivot.
bool cholesky(std::vector<double>& a, std::size_t d) {
  for (std::size_t j = 0; j < d; ++j) {
    double diag = a[j * d + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * d + k] * a[j * d + k];
    if (!(diag > 0.0)) return false;
    double l = std::sqrt(diag);
    a[j * d + j] = l;
    for (std::size_t i = j + 1; i < d; ++i) {
      double v = a[i * d + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * d + k] * a[j * d + k];
      a[i * d + j] = v / l;
    }
  }
  return true;
}

void cholesky_solve_factored(const std::vector<double>& l, std::size_t d,
                             std::vector<double>& x) {
  for (std::size_t i = 0; i < d; ++i) {
    double v = x[i];
    for (std::size_t k = 0; k < i; ++k) v -= l[i * d + k] * x[k];
    x[i] = v / l[i * d + i];
  }
  for (std::size_t ii = d; ii-- > 0;) {
    double v = x[ii];
    for (std::size_t k = ii + 1; k < d; ++k) v -= l[k * d + ii] * x[k];
    x[ii] = v / l[ii * d + ii];
  }
}

double sym_norm2(const std::vector<double>& a, std::size_t d,
                 std::vector<double>& v, std::vector<double>& w) {
  v.assign(d, 1.0 / std::sqrt(static_cast<double>(d)));
  double lambda = 0.0;
  for (int it = 0; it < 60; ++it) {
    for (std::size_t i = 0; i < d; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += a[i * d + k] * v[k];
      w[i] = s;
    }
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    lambda = norm;
    for (std::size_t i = 0; i < d; ++i) v[i] = w[i] / norm;
  }
  return lambda;
}

// Solves the normal equations A theta = b with a 2-norm condition estimate
// (power iteration for lambda_max, inverse iteration through the Cholesky
// factor for lambda_min). Throws SingularDesign when the factorization fails
// or the condition number exceeds 1e12.
std::vector<double> solve_normal_equations(std::vector<double> a,
                                           std::vector<double> b,
                                           std::size_t d) {
  std::vector<double> scratch_v(d), scratch_w(d);
  double lmax = sym_norm2(a, d, scratch_v, scratch_w);
  std::vector<double> factor = a;
  if (lmax == 0.0 || !cholesky(factor, d)) {
    fail(ErrorCode::SingularDesign, "regression design is singular");
  }
  // inverse power iteration: growth rate of A^{-1} v estimates 1/lambda_min
  scratch_v.assign(d, 1.0 / std::sqrt(static_cast<double>(d)));
  double inv_norm = 1.0;
  for (int it = 0; it < 60; ++it) {
    scratch_w = scratch_v;
    cholesky_solve_factored(factor, d, scratch_w);
    double norm = 0.0;
    for (double x : scratch_w) norm += x * x;
    norm = std::sqrt(norm);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      fail(ErrorCode::SingularDesign, "regression design is singular");
    }
    inv_norm = norm;
    for (std::size_t i = 0; i < d; ++i) scratch_v[i] = scratch_w[i] / norm;
  }
  double cond = lmax * inv_norm;
  if (!(cond <= 1e12)) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", cond);
    fail(ErrorCode::SingularDesign,
         std::string("regression design condition number ") + buf + " > 1e12");
  }
  cholesky_solve_factored(factor, d, b);
  return b;
}

// ---------- Nelder-Mead ----------

struct NmResult {
  std::vector<double> x;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

NmResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                     const std::vector<double>& x0, double step, double ftol,
                     int max_iter) {
  const std::size_t d = x0.size();
  std::vector<std::vector<double>> pts(d + 1, x0);
  for (std::size_t i = 0; i < d; ++i) pts[i + 1][i] += step;
  std::vector<double> fv(d + 1);
  for (std::size_t i = 0; i <= d; ++i) fv[i] = f(pts[i]);

  std::vector<std::size_t> idx(d + 1);
  std::vector<double> centroid(d), xr(d), xx(d);
  NmResult res;

  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = idx[0], worst = idx[d];
    const double fb = fv[best], fw = fv[worst];
    if (2.0 * std::fabs(fw - fb) <=
        ftol * (std::fabs(fw) + std::fabs(fb) + 1e-300)) {
      res.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k <= d; ++k) {
      if (idx[k] == worst) continue;
      for (std::size_t i = 0; i < d; ++i) centroid[i] += pts[idx[k]][i];
    }
    for (std::size_t i = 0; i < d; ++i) centroid[i] /= static_cast<double>(d);

    for (std::size_t i = 0; i < d; ++i) xr[i] = 2.0 * centroid[i] - pts[worst][i];
    double fr = f(xr);
    if (fr < fb) {
      for (std::size_t i = 0; i < d; ++i) xx[i] = 3.0 * centroid[i] - 2.0 * pts[worst][i];
      double fe = f(xx);
      if (fe < fr) {
        pts[worst] = xx;
        fv[worst] = fe;
      } else {
        pts[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[idx[d - 1]]) {
      pts[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    if (fr < fw) { // outside contraction
      for (std::size_t i = 0; i < d; ++i) xx[i] = 1.5 * centroid[i] - 0.5 * pts[worst][i];
      double fc = f(xx);
      if (fc <= fr) {
        pts[worst] = xx;
        fv[worst] = fc;
        continue;
      }
    } else { // inside contraction
      for (std::size_t i = 0; i < d; ++i) xx[i] = 0.5 * centroid[i] + 0.5 * pts[worst][i];
      double fc = f(xx);
      if (fc < fw) {
        pts[worst] = xx;
        fv[worst] = fc;
        continue;
      }
    }
    for (std::size_t k = 0; k <= d; ++k) { // shrink toward best
      if (idx[k] == best) continue;
      for (std::size_t i = 0; i < d; ++i) {
        pts[idx[k]][i] = 0.5 * (pts[idx[k]][i] + pts[best][i]);
      }
      fv[idx[k]] = f(pts[idx[k]]);
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= d; ++i) {
    if (fv[i] < fv[best]) best = i;
  }
  res.x = pts[best];
  res.fx = fv[best];
  return res;
}

// ---------- stationarity transforms ----------

// Levinson step-up: partial correlations kappa (all in (-1,1)) to predictor
// coefficients a of a stable AR polynomial 1 - sum a_i z^i.
std::vector<double> pacf_to_ar(const std::vector<double>& kappa) {
  std::vector<double> a(kappa.size(), 0.0), prev;
  for (std::size_t k = 0; k < kappa.size(); ++k) {
    prev.assign(a.begin(), a.begin() + k);
    a[k] = kappa[k];
    for (std::size_t i = 0; i < k; ++i) a[i] = prev[i] - kappa[k] * prev[k - 1 - i];
  }
  return a;
}

// Levinson step-down; false when some |kappa| >= 1 (non-stable input).
bool ar_to_pacf(const std::vector<double>& a_in, std::vector<double>& kappa) {
  std::vector<double> a = a_in;
  std::size_t p = a.size();
  kappa.assign(p, 0.0);
  for (std::size_t k = p; k-- > 0;) {
    double kk = a[k];
    if (!(std::fabs(kk) < 1.0)) return false;
    kappa[k] = kk;
    if (k == 0) break;
    std::vector<double> b(a.begin(), a.begin() + k);
    double denom = 1.0 - kk * kk;
    for (std::size_t i = 0; i < k; ++i) a[i] = (b[i] + kk * b[k - 1 - i]) / denom;
  }
  return true;
}

std::vector<double> tanh_all(const std::vector<double>& w) {
  std::vector<double> k(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) k[i] = std::tanh(w[i]);
  return k;
}

double atanh_clamped(double k) {
  k = std::min(0.95, std::max(-0.95, k));
  return 0.5 * std::log((1.0 + k) / (1.0 - k));
}

// ---------- ARMA support ----------

// conditional sum of squares over t = max(p,q)+1 .. f_n with the truncated
// AR(infinity) residual rule
double arma_css(const std::vector<double>& phi, const std::vector<double>& psi,
                const double* y, std::size_t f) {
  std::size_t m = std::max(phi.size(), psi.size());
  std::vector<double> pi = arma_pi_coefficients(phi, psi, f > 0 ? f - 1 : 0);
  double ssr = 0.0;
  for (std::size_t t = m + 1; t <= f; ++t) {
    double e = y[t - 1];
    for (std::size_t k = 1; k < t; ++k) e += pi[k - 1] * y[t - 1 - k];
    ssr += e * e;
  }
  return ssr;
}

// ---------- GARCH support ----------

struct GarchMap {
  int p, q;
  // z = [log omega, softmax scores for (phi, psi)] -> feasible theta
  std::vector<double> to_theta(const std::vector<double>& z) const {
    std::vector<double> theta(1 + p + q);
    theta[0] = std::exp(std::min(40.0, std::max(-40.0, z[0])));
    double zmax = 0.0;
    for (int i = 0; i < p + q; ++i) zmax = std::max(zmax, z[1 + i]);
    double denom = std::exp(-zmax);
    for (int i = 0; i < p + q; ++i) denom += std::exp(z[1 + i] - zmax);
    for (int i = 0; i < p + q; ++i) {
      theta[1 + i] = std::exp(z[1 + i] - zmax) / denom;
    }
    return theta;
  }
  // inverse for interior starting points: coefficients > 0, sum < 1
  std::vector<double> to_z(const std::vector<double>& theta) const {
    std::vector<double> z(1 + p + q);
    z[0] = std::log(std::max(theta[0], 1e-12));
    double slack = 1.0;
    for (int i = 0; i < p + q; ++i) slack -= theta[1 + i];
    slack = std::max(slack, 1e-6);
    for (int i = 0; i < p + q; ++i) {
      z[1 + i] = std::log(std::max(theta[1 + i], 1e-8) / slack);
    }
    return z;
  }
};

} // namespace

std::uint64_t estimator_calls() {
  return g_estimator_calls.load(std::memory_order_relaxed);
}

// ---------- descriptors ----------

namespace {

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string tok = text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                  : comma - pos);
    if (tok.empty()) fail(ErrorCode::InvalidArgument, "model: bad order list");
    char* end = nullptr;
    long v = std::strtol(tok.c_str(), &end, 10);
    if (*end != '\0' || v < 0) fail(ErrorCode::InvalidArgument, "model: bad order");
    out.push_back(static_cast<int>(v));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

} // namespace

ModelSpec ModelSpec::parse(const std::string& descriptor) {
  ModelSpec spec;
  if (descriptor == "const") {
    spec.family = ModelFamily::Constant;
    return spec;
  }
  std::size_t colon = descriptor.find(':');
  std::string head = descriptor.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : descriptor.substr(colon + 1);
  if (head == "ar") {
    spec.family = ModelFamily::Ar;
    std::size_t c2 = rest.find(':');
    if (c2 != std::string::npos) {
      if (rest.substr(c2 + 1) != "c") {
        fail(ErrorCode::InvalidArgument, "model: " + descriptor);
      }
      spec.intercept = true;
      rest = rest.substr(0, c2);
    }
    auto orders = parse_int_list(rest);
    if (orders.size() != 1 || orders[0] < 0 ||
        (orders[0] == 0 && !spec.intercept)) {
      fail(ErrorCode::InvalidArgument, "model: " + descriptor);
    }
    spec.p = orders[0];
    return spec;
  }
  if (head == "arma") {
    spec.family = ModelFamily::Arma;
    auto orders = parse_int_list(rest);
    if (orders.size() != 2 || orders[0] < 0 || orders[1] < 0 ||
        orders[0] + orders[1] < 1) {
      fail(ErrorCode::InvalidArgument, "model: " + descriptor);
    }
    spec.p = orders[0];
    spec.q = orders[1];
    return spec;
  }
  if (head == "garch" || head == "arch") {
    spec.family = ModelFamily::Garch;
    auto orders = parse_int_list(rest);
    if (head == "arch") {
      if (orders.size() != 1) fail(ErrorCode::InvalidArgument, "model: " + descriptor);
      orders.push_back(0);
    }
    if (orders.size() != 2 || orders[0] < 1 || orders[1] < 0) {
      fail(ErrorCode::InvalidArgument, "model: " + descriptor);
    }
    spec.p = orders[0];
    spec.q = orders[1];
    return spec;
  }
  if (head == "tar") {
    spec.family = ModelFamily::Tar;
    std::size_t c2 = rest.find(':');
    std::string orders_text = rest.substr(0, c2);
    spec.regime_orders = parse_int_list(orders_text);
    if (spec.regime_orders.size() < 2) {
      fail(ErrorCode::InvalidArgument, "model: tar needs >= 2 regimes");
    }
    for (int o : spec.regime_orders) {
      if (o < 1) fail(ErrorCode::InvalidArgument, "model: tar orders must be >= 1");
    }
    if (c2 == std::string::npos || rest.compare(c2 + 1, 2, "d=") != 0) {
      fail(ErrorCode::InvalidArgument, "model: tar needs :d=<delay>");
    }
    auto d = parse_int_list(rest.substr(c2 + 3));
    if (d.size() != 1 || d[0] < 1) {
      fail(ErrorCode::InvalidArgument, "model: bad tar delay");
    }
    spec.delay = d[0];
    return spec;
  }
  fail(ErrorCode::InvalidArgument, "model: unknown descriptor '" + descriptor + "'");
}

std::string ModelSpec::descriptor() const {
  switch (family) {
    case ModelFamily::Constant:
      return "const";
    case ModelFamily::Ar:
      return "ar:" + std::to_string(p) + (intercept ? ":c" : "");
    case ModelFamily::Arma:
      return "arma:" + std::to_string(p) + "," + std::to_string(q);
    case ModelFamily::Garch:
      return "garch:" + std::to_string(p) + "," + std::to_string(q);
    case ModelFamily::Tar: {
      std::string s = "tar:";
      for (std::size_t i = 0; i < regime_orders.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(regime_orders[i]);
      }
      s += ":d=" + std::to_string(delay);
      return s;
    }
  }
  return "";
}

std::vector<double> FittedModel::tar_thresholds() const {
  std::size_t k = spec.regime_orders.size();
  return std::vector<double>(theta.end() - static_cast<std::ptrdiff_t>(k - 1),
                             theta.end());
}

// ---------- constant / AR ----------

FittedModel fit_constant(const Series& series, const SplitSpec& split) {
  count_call();
  if (!split.valid() || split.n != series.size()) {
    fail(ErrorCode::InvalidSplit, "fit: split does not match series");
  }
  double mean = 0.0;
  for (std::size_t t = 1; t <= split.fit_len; ++t) mean += series.at1(t);
  mean /= static_cast<double>(split.fit_len);
  FittedModel model;
  model.spec.family = ModelFamily::Constant;
  model.theta = {mean};
  double ssr = 0.0;
  for (std::size_t t = 1; t <= split.fit_len; ++t) {
    double d = series.at1(t) - mean;
    ssr += d * d;
  }
  model.diagnostics = {ssr, 0, true, false};
  return model;
}

FittedModel fit_ar(const Series& series, const SplitSpec& split, int p,
                   bool intercept) {
  count_call();
  if (!split.valid() || split.n != series.size()) {
    fail(ErrorCode::InvalidSplit, "fit: split does not match series");
  }
  if (p < 0 || (p == 0 && !intercept)) {
    fail(ErrorCode::InvalidArgument, "fit_ar: need p >= 1, or p = 0 with intercept");
  }
  std::size_t dim = static_cast<std::size_t>(p) + (intercept ? 1 : 0);
  std::size_t f = split.fit_len;
  if (f < static_cast<std::size_t>(p) + dim + 1) {
    fail(ErrorCode::InvalidArgument, "fit_ar: fitting sample too short");
  }

  std::vector<double> a(dim * dim, 0.0), b(dim, 0.0), row(dim);
  double ssr_y = 0.0;
  for (std::size_t t = static_cast<std::size_t>(p) + 1; t <= f; ++t) {
    std::size_t c = 0;
    if (intercept) row[c++] = 1.0;
    for (int i = 1; i <= p; ++i) row[c++] = series.at1(t - static_cast<std::size_t>(i));
    double y = series.at1(t);
    ssr_y += y * y;
    for (std::size_t i = 0; i < dim; ++i) {
      b[i] += row[i] * y;
      for (std::size_t k = i; k < dim; ++k) a[i * dim + k] += row[i] * row[k];
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t k = 0; k < i; ++k) a[i * dim + k] = a[k * dim + i];
  }
  std::vector<double> theta = solve_normal_equations(a, b, dim);
  double fitted = 0.0;
  for (std::size_t i = 0; i < dim; ++i) fitted += theta[i] * b[i];

  FittedModel model;
  model.spec.family = ModelFamily::Ar;
  model.spec.p = p;
  model.spec.intercept = intercept;
  model.theta = std::move(theta);
  model.diagnostics = {ssr_y - fitted, 0, true, false};
  return model;
}

// ---------- ARMA ----------

std::vector<double> arma_pi_coefficients(const std::vector<double>& phi,
                                         const std::vector<double>& psi,
                                         std::size_t count) {
  std::vector<double> pi(count, 0.0);
  for (std::size_t k = 1; k <= count; ++k) {
    double v = k <= phi.size() ? -phi[k - 1] : 0.0;
    std::size_t lmax = std::min(k, psi.size());
    for (std::size_t l = 1; l <= lmax; ++l) {
      double prev = (k == l) ? 1.0 : pi[k - l - 1]; // pi_0 = 1
      v -= psi[l - 1] * prev;
    }
    pi[k - 1] = v;
  }
  return pi;
}

bool poly_roots_outside_unit_disk(const std::vector<double>& c) {
  std::vector<double> a(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) a[i] = -c[i];
  std::vector<double> kappa;
  return ar_to_pacf(a, kappa);
}

FittedModel fit_arma(const Series& series, const SplitSpec& split, int p, int q) {
  count_call();
  if (!split.valid() || split.n != series.size()) {
    fail(ErrorCode::InvalidSplit, "fit: split does not match series");
  }
  if (p < 0 || q < 0 || p + q < 1) {
    fail(ErrorCode::InvalidArgument, "fit_arma: need p, q >= 0 and p + q >= 1");
  }
  std::size_t f = split.fit_len;
  if (f <= static_cast<std::size_t>(10 * (p + q))) {
    fail(ErrorCode::InvalidArgument, "fit_arma: need f_n > 10 (p + q)");
  }
  const double* y = series.values().data();

  FittedModel model;
  model.spec.family = ModelFamily::Arma;
  model.spec.p = p;
  model.spec.q = q;

  if (q == 0) {
    // pure AR: the conditional sum of squares over t = p+1..f_n is exactly the
    // least-squares objective, so solve it in closed form
    FittedModel ar = fit_ar(series, split, p, false);
    g_estimator_calls.fetch_sub(1, std::memory_order_relaxed); // inner call
    model.theta = ar.theta;
    model.diagnostics = ar.diagnostics;
    return model;
  }

  auto objective = [&](const std::vector<double>& w) {
    std::vector<double> kphi(w.begin(), w.begin() + p);
    std::vector<double> kpsi(w.begin() + p, w.end());
    std::vector<double> phi = pacf_to_ar(tanh_all(kphi));
    std::vector<double> ma = pacf_to_ar(tanh_all(kpsi));
    std::vector<double> psi(ma.size());
    for (std::size_t i = 0; i < ma.size(); ++i) psi[i] = -ma[i];
    return arma_css(phi, psi, y, f);
  };

  // starts: AR-based, zeros, mild positive partial correlations
  std::vector<std::vector<double>> starts;
  {
    std::vector<double> w0(static_cast<std::size_t>(p + q), 0.0);
    if (p > 0) {
      try {
        FittedModel ar = fit_ar(series, split, p, false);
        g_estimator_calls.fetch_sub(1, std::memory_order_relaxed);
        std::vector<double> kappa;
        if (ar_to_pacf(ar.theta, kappa)) {
          for (int i = 0; i < p; ++i) w0[static_cast<std::size_t>(i)] = atanh_clamped(kappa[static_cast<std::size_t>(i)]);
        }
      } catch (const Error&) {
        // fall back to zeros
      }
    }
    starts.push_back(w0);
    starts.emplace_back(static_cast<std::size_t>(p + q), 0.0);
    std::vector<double> w2(static_cast<std::size_t>(p + q), atanh_clamped(0.3));
    starts.push_back(w2);
  }

  NmResult best;
  best.fx = std::numeric_limits<double>::infinity();
  int total_iters = 0;
  bool any_converged = false;
  for (const auto& w0 : starts) {
    NmResult r = nelder_mead(objective, w0, 0.25, 1e-10, 1000);
    total_iters += r.iterations;
    any_converged = any_converged || r.converged;
    if (r.fx < best.fx) best = r;
  }
  // polish with a fresh simplex around the winner
  NmResult polish = nelder_mead(objective, best.x, 0.02, 1e-12, 1000);
  total_iters += polish.iterations;
  if (polish.fx < best.fx) best = polish;
  if (!any_converged && !polish.converged) {
    fail(ErrorCode::NonConvergence, "fit_arma: optimizer hit the iteration cap");
  }

  std::vector<double> kphi(best.x.begin(), best.x.begin() + p);
  std::vector<double> kpsi(best.x.begin() + p, best.x.end());
  std::vector<double> phi = pacf_to_ar(tanh_all(kphi));
  std::vector<double> ma = pacf_to_ar(tanh_all(kpsi));
  bool boundary = false;
  for (double w : best.x) boundary = boundary || std::fabs(std::tanh(w)) > 0.999;

  model.theta.reserve(static_cast<std::size_t>(p + q));
  model.theta.insert(model.theta.end(), phi.begin(), phi.end());
  for (double v : ma) model.theta.push_back(-v);
  model.diagnostics = {best.fx, total_iters, true, boundary};
  return model;
}

// ---------- GARCH ----------

std::vector<double> garch_sigma2_path(const std::vector<double>& theta, int p,
                                      int q, const double* y, std::size_t len,
                                      double init) {
  std::vector<double> s2(len);
  for (std::size_t t = 1; t <= len; ++t) {
    double v = theta[0];
    for (int i = 1; i <= p; ++i) {
      double y2 = t > static_cast<std::size_t>(i)
                      ? y[t - 1 - static_cast<std::size_t>(i)] * y[t - 1 - static_cast<std::size_t>(i)]
                      : init;
      v += theta[static_cast<std::size_t>(i)] * y2;
    }
    for (int j = 1; j <= q; ++j) {
      double prev = t > static_cast<std::size_t>(j) ? s2[t - 1 - static_cast<std::size_t>(j)] : init;
      v += theta[static_cast<std::size_t>(p + j)] * prev;
    }
    s2[t - 1] = v;
  }
  return s2;
}

double garch_quasi_loglik(const std::vector<double>& theta, int p, int q,
                          const double* y, std::size_t len, double init) {
  std::vector<double> s2 = garch_sigma2_path(theta, p, q, y, len, init);
  double ll = 0.0;
  for (std::size_t t = 0; t < len; ++t) {
    ll += -0.5 * std::log(s2[t]) - y[t] * y[t] / (2.0 * s2[t]);
  }
  return ll;
}

FittedModel fit_garch(const Series& series, const SplitSpec& split, int p, int q) {
  count_call();
  if (!split.valid() || split.n != series.size()) {
    fail(ErrorCode::InvalidSplit, "fit: split does not match series");
  }
  if (p < 1 || q < 0) fail(ErrorCode::InvalidArgument, "fit_garch: need p >= 1, q >= 0");
  std::size_t f = split.fit_len;
  if (f < 50) fail(ErrorCode::InvalidArgument, "fit_garch: need f_n >= 50");
  const double* y = series.values().data();

  double mean = 0.0;
  for (std::size_t t = 0; t < f; ++t) mean += y[t];
  mean /= static_cast<double>(f);
  double var = 0.0;
  for (std::size_t t = 0; t < f; ++t) var += (y[t] - mean) * (y[t] - mean);
  var /= static_cast<double>(f);
  if (!(var > 0.0)) {
    fail(ErrorCode::DegenerateData, "fit_garch: fitting sample has no variation");
  }

  GarchMap map{p, q};
  auto objective = [&](const std::vector<double>& z) {
    std::vector<double> theta = map.to_theta(z);
    double ll = garch_quasi_loglik(theta, p, q, y, f, var);
    return std::isfinite(ll) ? -ll : 1e100;
  };

  // moment-matched, high-persistence and low-persistence starting points
  auto make_start = [&](double phi_tot, double psi_tot) {
    std::vector<double> theta(1 + static_cast<std::size_t>(p + q));
    theta[0] = std::max(var * (1.0 - phi_tot - psi_tot), 1e-8);
    for (int i = 0; i < p; ++i) theta[1 + static_cast<std::size_t>(i)] = phi_tot / p;
    for (int j = 0; j < q; ++j) theta[1 + static_cast<std::size_t>(p + j)] = psi_tot / q;
    return map.to_z(theta);
  };
  std::vector<std::vector<double>> starts;
  if (q > 0) {
    starts.push_back(make_start(0.10, 0.75));
    starts.push_back(make_start(0.15, 0.82));
    starts.push_back(make_start(0.25, 0.25));
  } else {
    starts.push_back(make_start(0.30, 0.0));
    starts.push_back(make_start(0.80, 0.0));
    starts.push_back(make_start(0.10, 0.0));
  }

  NmResult best;
  best.fx = std::numeric_limits<double>::infinity();
  int total_iters = 0;
  bool any_converged = false;
  for (const auto& z0 : starts) {
    NmResult r = nelder_mead(objective, z0, 0.3, 1e-9, 2000);
    total_iters += r.iterations;
    any_converged = any_converged || r.converged;
    if (r.fx < best.fx) best = r;
  }
  if (!any_converged) {
    NmResult retry = nelder_mead(objective, best.x, 0.05, 1e-9, 2000);
    total_iters += retry.iterations;
    if (retry.fx < best.fx) best = retry;
    if (!retry.converged) {
      fail(ErrorCode::NonConvergence, "fit_garch: optimizer hit the iteration cap");
    }
  }

  FittedModel model;
  model.spec.family = ModelFamily::Garch;
  model.spec.p = p;
  model.spec.q = q;
  model.theta = map.to_theta(best.x);
  model.diagnostics = {best.fx, total_iters, true, false};
  return model;
}

// ---------- TAR ----------

namespace {

struct TarData {
  const double* y = nullptr;
  std::size_t t_begin = 0, t_end = 0; // 1-based inclusive regression range
  int delay = 1;
  std::vector<int> orders;
  std::size_t k = 0;      // regimes
  std::size_t max_dim = 0;

  double threshold_var(std::size_t t) const {
    return t > static_cast<std::size_t>(delay) ? y[t - 1 - static_cast<std::size_t>(delay)] : 0.0;
  }
  double lag(std::size_t t, int i) const {
    return t > static_cast<std::size_t>(i) ? y[t - 1 - static_cast<std::size_t>(i)] : 0.0;
  }
};

// per-regime least squares at one threshold tuple; returns false when any
// regime is short or singular
bool tar_eval(const TarData& d, const std::vector<double>& thr, std::size_t min_count,
              double yy_total, double& ssr_out,
              std::vector<std::vector<double>>* coefs_out) {
  std::size_t k = d.k;
  std::vector<std::size_t> counts(k, 0);
  std::vector<std::vector<double>> xx(k), xy(k);
  for (std::size_t r = 0; r < k; ++r) {
    std::size_t dim = static_cast<std::size_t>(d.orders[r]) + 1;
    xx[r].assign(dim * dim, 0.0);
    xy[r].assign(dim, 0.0);
  }
  std::vector<double> row(d.max_dim + 1);
  for (std::size_t t = d.t_begin; t <= d.t_end; ++t) {
    double x = d.threshold_var(t);
    std::size_t r = 0;
    while (r + 1 < k && x >= thr[r]) ++r;
    ++counts[r];
    std::size_t dim = static_cast<std::size_t>(d.orders[r]) + 1;
    row[0] = 1.0;
    for (int i = 1; i <= d.orders[r]; ++i) row[static_cast<std::size_t>(i)] = d.lag(t, i);
    double yt = d.y[t - 1];
    double* a = xx[r].data();
    double* b = xy[r].data();
    for (std::size_t i = 0; i < dim; ++i) {
      b[i] += row[i] * yt;
      for (std::size_t c = i; c < dim; ++c) a[i * dim + c] += row[i] * row[c];
    }
  }
  for (std::size_t r = 0; r < k; ++r) {
    if (counts[r] < min_count) return false;
  }
  double fitted = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    std::size_t dim = static_cast<std::size_t>(d.orders[r]) + 1;
    std::vector<double>& a = xx[r];
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t c = 0; c < i; ++c) a[i * dim + c] = a[c * dim + i];
    }
    std::vector<double> factor = a;
    if (!cholesky(factor, dim)) return false;
    std::vector<double> theta = xy[r];
    cholesky_solve_factored(factor, dim, theta);
    for (std::size_t i = 0; i < dim; ++i) fitted += theta[i] * xy[r][i];
    if (coefs_out) (*coefs_out)[r] = std::move(theta);
  }
  ssr_out = yy_total - fitted;
  return true;
}

} // namespace

FittedModel fit_tar(const Series& series, const SplitSpec& split,
                    const std::vector<int>& regime_orders, int delay,
                    const ThresholdGrid& grid) {
  count_call();
  if (!split.valid() || split.n != series.size()) {
    fail(ErrorCode::InvalidSplit, "fit: split does not match series");
  }
  if (regime_orders.size() < 2) {
    fail(ErrorCode::InvalidArgument, "fit_tar: need >= 2 regimes");
  }
  for (int o : regime_orders) {
    if (o < 1) fail(ErrorCode::InvalidArgument, "fit_tar: orders must be >= 1");
  }
  if (delay < 1) fail(ErrorCode::InvalidArgument, "fit_tar: need delay >= 1");

  TarData d;
  d.y = series.values().data();
  d.delay = delay;
  d.orders = regime_orders;
  d.k = regime_orders.size();
  int max_order = *std::max_element(regime_orders.begin(), regime_orders.end());
  d.max_dim = static_cast<std::size_t>(max_order);
  d.t_begin = static_cast<std::size_t>(std::max(max_order, delay)) + 1;
  d.t_end = split.fit_len;
  std::size_t min_count = static_cast<std::size_t>(max_order) + 5;
  if (d.t_begin + d.k * min_count > d.t_end + 1) {
    fail(ErrorCode::NoAdmissibleThreshold, "fit_tar: fitting sample too short");
  }

  // candidate thresholds from the fitting-sample threshold variable
  std::vector<double> xs;
  xs.reserve(d.t_end - d.t_begin + 1);
  for (std::size_t t = d.t_begin; t <= d.t_end; ++t) xs.push_back(d.threshold_var(t));
  std::sort(xs.begin(), xs.end());
  auto quantile = [&](double pr) {
    double pos = pr * static_cast<double>(xs.size() - 1);
    return xs[static_cast<std::size_t>(pos + 0.5)];
  };
  std::vector<double> cand;
  if (grid.mode == ThresholdGrid::Mode::Explicit) {
    cand = grid.values;
    std::sort(cand.begin(), cand.end());
  } else if (grid.mode == ThresholdGrid::Mode::QuantileSteps) {
    for (double pr = grid.lo; pr <= grid.hi + 1e-12; pr += grid.step) {
      cand.push_back(quantile(std::min(pr, grid.hi)));
    }
  } else {
    double lo_v = quantile(grid.lo), hi_v = quantile(grid.hi);
    for (double v : xs) {
      if (v >= lo_v && v <= hi_v) cand.push_back(v);
    }
  }
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  if (cand.size() < d.k - 1) {
    fail(ErrorCode::NoAdmissibleThreshold, "fit_tar: grid has too few candidates");
  }

  double yy_total = 0.0;
  for (std::size_t t = d.t_begin; t <= d.t_end; ++t) yy_total += d.y[t - 1] * d.y[t - 1];

  // enumerate ascending (k-1)-tuples in lexicographic order; ties in SSR keep
  // the first (lowest-index) tuple
  std::size_t km1 = d.k - 1;
  std::vector<std::size_t> pick(km1);
  std::iota(pick.begin(), pick.end(), 0);
  std::vector<double> thr(km1), best_thr;
  double best_ssr = std::numeric_limits<double>::infinity();
  int evaluated = 0;
  bool done = cand.size() < km1;
  while (!done) {
    for (std::size_t i = 0; i < km1; ++i) thr[i] = cand[pick[i]];
    double ssr;
    if (tar_eval(d, thr, min_count, yy_total, ssr, nullptr)) {
      ++evaluated;
      if (ssr < best_ssr) {
        best_ssr = ssr;
        best_thr = thr;
      }
    }
    // next combination
    std::size_t i = km1;
    while (i-- > 0) {
      if (pick[i] + (km1 - i) < cand.size()) {
        ++pick[i];
        for (std::size_t j = i + 1; j < km1; ++j) pick[j] = pick[j - 1] + 1;
        break;
      }
      if (i == 0) done = true;
    }
    if (km1 == 0) break;
  }
  if (best_thr.empty()) {
    fail(ErrorCode::NoAdmissibleThreshold,
         "fit_tar: no threshold tuple leaves every regime with enough data");
  }

  std::vector<std::vector<double>> coefs(d.k);
  double ssr;
  tar_eval(d, best_thr, min_count, yy_total, ssr, &coefs);

  FittedModel model;
  model.spec.family = ModelFamily::Tar;
  model.spec.regime_orders = regime_orders;
  model.spec.delay = delay;
  for (const auto& c : coefs) model.theta.insert(model.theta.end(), c.begin(), c.end());
  model.theta.insert(model.theta.end(), best_thr.begin(), best_thr.end());
  model.diagnostics = {ssr, evaluated, true, false};
  return model;
}

// ---------- dispatcher / fixed-design refits ----------

FittedModel fit_model(const ModelSpec& spec, const Series& series,
                      const SplitSpec& split) {
  switch (spec.family) {
    case ModelFamily::Constant:
      return fit_constant(series, split);
    case ModelFamily::Ar:
      return fit_ar(series, split, spec.p, spec.intercept);
    case ModelFamily::Arma:
      return fit_arma(series, split, spec.p, spec.q);
    case ModelFamily::Garch:
      return fit_garch(series, split, spec.p, spec.q);
    case ModelFamily::Tar:
      return fit_tar(series, split, spec.regime_orders, spec.delay);
  }
  fail(ErrorCode::InvalidArgument, "fit_model: unknown family");
}

FittedModel refit_fixed_design(const ModelSpec& spec,
                               const std::vector<double>& original,
                               const std::vector<double>& ystar,
                               const SplitSpec& split) {
  if (original.size() != ystar.size() || split.n != original.size()) {
    fail(ErrorCode::InvalidArgument, "refit: length mismatch");
  }
  std::size_t f = split.fit_len;

  if (spec.family == ModelFamily::Constant) {
    count_call();
    double mean = 0.0;
    for (std::size_t t = 0; t < f; ++t) mean += ystar[t];
    mean /= static_cast<double>(f);
    FittedModel model;
    model.spec = spec;
    model.theta = {mean};
    return model;
  }

  if (spec.family == ModelFamily::Ar) {
    count_call();
    std::size_t dim = static_cast<std::size_t>(spec.p) + (spec.intercept ? 1 : 0);
    std::vector<double> a(dim * dim, 0.0), b(dim, 0.0), row(dim);
    for (std::size_t t = static_cast<std::size_t>(spec.p) + 1; t <= f; ++t) {
      std::size_t c = 0;
      if (spec.intercept) row[c++] = 1.0;
      for (int i = 1; i <= spec.p; ++i) row[c++] = original[t - 1 - static_cast<std::size_t>(i)];
      double y = ystar[t - 1];
      for (std::size_t i = 0; i < dim; ++i) {
        b[i] += row[i] * y;
        for (std::size_t k = i; k < dim; ++k) a[i * dim + k] += row[i] * row[k];
      }
    }
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t k = 0; k < i; ++k) a[i * dim + k] = a[k * dim + i];
    }
    FittedModel model;
    model.spec = spec;
    model.theta = solve_normal_equations(a, b, dim);
    return model;
  }

  if (spec.family == ModelFamily::Arma) {
    count_call();
    int p = spec.p, q = spec.q;
    auto objective = [&](const std::vector<double>& w) {
      std::vector<double> kphi(w.begin(), w.begin() + p);
      std::vector<double> kpsi(w.begin() + p, w.end());
      std::vector<double> phi = pacf_to_ar(tanh_all(kphi));
      std::vector<double> ma = pacf_to_ar(tanh_all(kpsi));
      std::vector<double> psi(ma.size());
      for (std::size_t i = 0; i < ma.size(); ++i) psi[i] = -ma[i];
      std::size_t m = static_cast<std::size_t>(std::max(p, q));
      std::vector<double> pi = arma_pi_coefficients(phi, psi, f - 1);
      double ssr = 0.0;
      for (std::size_t t = m + 1; t <= f; ++t) {
        double e = ystar[t - 1];
        for (std::size_t k = 1; k < t; ++k) e += pi[k - 1] * original[t - 1 - k];
        ssr += e * e;
      }
      return ssr;
    };
    std::vector<double> w0(static_cast<std::size_t>(p + q), 0.0);
    NmResult r = nelder_mead(objective, w0, 0.25, 1e-10, 1000);
    NmResult polish = nelder_mead(objective, r.x, 0.02, 1e-12, 1000);
    if (polish.fx < r.fx) r = polish;
    std::vector<double> kphi(r.x.begin(), r.x.begin() + p);
    std::vector<double> kpsi(r.x.begin() + p, r.x.end());
    std::vector<double> phi = pacf_to_ar(tanh_all(kphi));
    std::vector<double> ma = pacf_to_ar(tanh_all(kpsi));
    FittedModel model;
    model.spec = spec;
    model.theta.insert(model.theta.end(), phi.begin(), phi.end());
    for (double v : ma) model.theta.push_back(-v);
    model.diagnostics = {r.fx, r.iterations, r.converged, false};
    return model;
  }

  if (spec.family == ModelFamily::Garch) {
    // bootstrap responses are the squared series; refit QMLE on sqrt(ystar)
    std::vector<double> yb(ystar.size());
    for (std::size_t i = 0; i < ystar.size(); ++i) {
      yb[i] = std::sqrt(std::max(ystar[i], 1e-12));
    }
    return fit_garch(Series(std::move(yb)), split, spec.p, spec.q);
  }

  // TAR: regime membership and regressors from the original series
  count_call();
  TarData d;
  d.y = original.data();
  d.delay = spec.delay;
  d.orders = spec.regime_orders;
  d.k = spec.regime_orders.size();
  int max_order = *std::max_element(spec.regime_orders.begin(), spec.regime_orders.end());
  d.max_dim = static_cast<std::size_t>(max_order);
  d.t_begin = static_cast<std::size_t>(std::max(max_order, spec.delay)) + 1;
  d.t_end = f;
  std::size_t min_count = static_cast<std::size_t>(max_order) + 5;

  std::vector<double> xs;
  for (std::size_t t = d.t_begin; t <= d.t_end; ++t) xs.push_back(d.threshold_var(t));
  std::sort(xs.begin(), xs.end());
  double lo_v = xs[static_cast<std::size_t>(0.10 * static_cast<double>(xs.size() - 1) + 0.5)];
  double hi_v = xs[static_cast<std::size_t>(0.90 * static_cast<double>(xs.size() - 1) + 0.5)];
  std::vector<double> cand;
  for (double v : xs) {
    if (v >= lo_v && v <= hi_v) cand.push_back(v);
  }
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  // response: regress ystar on original-lag designs
  const std::vector<double>& resp = ystar;
  double yy_total = 0.0;
  for (std::size_t t = d.t_begin; t <= d.t_end; ++t) yy_total += resp[t - 1] * resp[t - 1];

  // same evaluation as tar_eval but with a separate response vector
  auto eval = [&](const std::vector<double>& thr, double& ssr_out,
                  std::vector<std::vector<double>>* coefs_out) {
    std::size_t k = d.k;
    std::vector<std::size_t> counts(k, 0);
    std::vector<std::vector<double>> xx(k), xy(k);
    for (std::size_t r = 0; r < k; ++r) {
      std::size_t dim = static_cast<std::size_t>(d.orders[r]) + 1;
      xx[r].assign(dim * dim, 0.0);
      xy[r].assign(dim, 0.0);
    }
    std::vector<double> row(d.max_dim + 1);
    for (std::size_t t = d.t_begin; t <= d.t_end; ++t) {
      double x = d.threshold_var(t);
      std::size_t r = 0;
      while (r + 1 < k && x >= thr[r]) ++r;
      ++counts[r];
      std::size_t dim = static_cast<std::size_t>(d.orders[r]) + 1;
      row[0] = 1.0;
      for (int i = 1; i <= d.orders[r]; ++i) row[static_cast<std::size_t>(i)] = d.lag(t, i);
      double yt = resp[t - 1];
      for (std::size_t i = 0; i < dim; ++i) {
        xy[r][i] += row[i] * yt;
        for (std::size_t c = i; c < dim; ++c) xx[r][i * dim + c] += row[i] * row[c];
      }
    }
    for (std::size_t r = 0; r < k; ++r) {
      if (counts[r] < min_count) return false;
    }
    double fitted = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
      std::size_t dim = static_cast<std::size_t>(d.orders[r]) + 1;
      for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t c = 0; c < i; ++c) xx[r][i * dim + c] = xx[r][c * dim + i];
      }
      std::vector<double> factor = xx[r];
      if (!cholesky(factor, dim)) return false;
      std::vector<double> theta = xy[r];
      cholesky_solve_factored(factor, dim, theta);
      for (std::size_t i = 0; i < dim; ++i) fitted += theta[i] * xy[r][i];
      if (coefs_out) (*coefs_out)[r] = std::move(theta);
    }
    ssr_out = yy_total - fitted;
    return true;
  };

  std::size_t km1 = d.k - 1;
  if (cand.size() < km1) {
    fail(ErrorCode::NoAdmissibleThreshold, "refit: grid has too few candidates");
  }
  std::vector<std::size_t> pick(km1);
  std::iota(pick.begin(), pick.end(), 0);
  std::vector<double> thr(km1), best_thr;
  double best_ssr = std::numeric_limits<double>::infinity();
  bool done = false;
  while (!done) {
    for (std::size_t i = 0; i < km1; ++i) thr[i] = cand[pick[i]];
    double ssr;
    if (eval(thr, ssr, nullptr) && ssr < best_ssr) {
      best_ssr = ssr;
      best_thr = thr;
    }
    std::size_t i = km1;
    while (i-- > 0) {
      if (pick[i] + (km1 - i) < cand.size()) {
        ++pick[i];
        for (std::size_t j = i + 1; j < km1; ++j) pick[j] = pick[j - 1] + 1;
        break;
      }
      if (i == 0) done = true;
    }
  }
  if (best_thr.empty()) {
    fail(ErrorCode::NoAdmissibleThreshold, "refit: no admissible threshold tuple");
  }
  std::vector<std::vector<double>> coefs(d.k);
  double ssr;
  eval(best_thr, ssr, &coefs);

  FittedModel model;
  model.spec = spec;
  for (const auto& c : coefs) model.theta.insert(model.theta.end(), c.begin(), c.end());
  model.theta.insert(model.theta.end(), best_thr.begin(), best_thr.end());
  model.diagnostics = {ssr, 0, true, false};
  return model;
}

} // namespace gspec
