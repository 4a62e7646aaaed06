// Acceptance gate for the shipped configuration. Runs every release
// criterion end to end at desk scale (R = 500 Monte Carlo replications,
// B = 500 bootstrap draws) and prints exactly one PASS/FAIL line per
// criterion with the measured values. Exits nonzero when any criterion
// fails. Every tolerance is a named constant next to its criterion group.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gspec/bootstrap.hpp"
#include "gspec/dgps.hpp"
#include "gspec/error.hpp"
#include "gspec/estimators.hpp"
#include "gspec/harness.hpp"
#include "gspec/residuals.hpp"
#include "gspec/rng.hpp"
#include "gspec/series.hpp"
#include "gspec/spectral.hpp"
#include "gspec/split.hpp"

#include "oracles.hpp"

namespace {

using namespace gspec;

constexpr std::size_t kR = 500; // Monte Carlo replications
constexpr std::size_t kB = 500; // bootstrap draws per test
constexpr double kAlpha = 0.05;

// 1. Size under the linear null: rejection rates must sit inside the nominal
//    band once binomial Monte Carlo error at R = 500 is allowed for.
constexpr double kLinearSizeLo = 0.025;
constexpr double kLinearSizeHi = 0.080;

// 2. Power against strong departures from the linear null.
constexpr double kTentPowerMin = 0.99;
constexpr double kTarCfPowerMin = 0.90;

// 3. Volatility null: size stays controlled under the true ARCH(1) null and
//    the stochastic-volatility alternative is rejected essentially always.
constexpr double kArchSizeHi = 0.08;
constexpr double kSvPowerMin = 0.99;

// 4. GARCH(2,2) null size band.
constexpr double kGarchSizeLo = 0.03;
constexpr double kGarchSizeHi = 0.11;

// 5. Timing: the split scheme must dominate the re-estimating full-sample
//    bootstrap for an expensive estimator and stay comparable for a cheap one.
constexpr double kTarSpeedupMin = 50.0;
constexpr double kArRatioMax = 2.0;

// 6. Sunspot study: the richly parameterized threshold model is accepted,
//    the constant-mean and linear AR(5) models are rejected.
constexpr double kSunspotTarPMin = 0.30;
constexpr double kSunspotConstPMax = 0.01;
constexpr double kSunspotArPMax = 0.05;

// 7. Estimating the null parameters on the fitting half must not move the
//    null distribution of the statistic (oracle property).
constexpr double kOracleKsMax = 0.10;

// 8. Closed-form statistics agree with quadrature and naive references.
constexpr double kQuadRelTol = 1e-4;
constexpr double kNaiveRelTol = 1e-12;

// 9. Bootstrap calibration: null p-values approximately uniform; multiplier
//    law has the advertised first two moments.
constexpr double kPValueKsMax = 0.08;
constexpr double kMammenMomentTol = 1e-2;

// Criterion seeds (arbitrary fixed values, one per criterion).
constexpr std::uint64_t kSeedSize = 101;
constexpr std::uint64_t kSeedPowerTent = 201;
constexpr std::uint64_t kSeedPowerTar = 202;
constexpr std::uint64_t kSeedArch = 301;
constexpr std::uint64_t kSeedSv = 302;
constexpr std::uint64_t kSeedGarch = 401;
constexpr std::uint64_t kSeedBench = 501;
constexpr std::uint64_t kSeedSunspot = 601;
constexpr std::uint64_t kSeedOracle = 701;
constexpr std::uint64_t kSeedInstances = 801;
constexpr std::uint64_t kSeedMammen = 901;
constexpr std::uint64_t kSeedThreads = 1001;

struct Gate {
  int failures = 0;

  void report(int number, bool pass, const std::string& detail, double secs) {
    std::printf("[%s] %2d. %s (%.1f s)\n", pass ? "PASS" : "FAIL", number,
                detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++failures;
  }
};

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

McConfig make_config(const std::string& dgp, const std::string& null_model,
                     const std::vector<std::string>& tests, std::size_t n,
                     std::uint64_t seed) {
  McConfig cfg;
  cfg.label = dgp;
  cfg.dgp = DgpSpec::parse(dgp);
  cfg.null_model = null_model;
  cfg.n = n;
  cfg.replications = kR;
  cfg.bootstrap = kB;
  cfg.alpha = kAlpha;
  cfg.seed = seed;
  cfg.threads = 1;
  cfg.tests.clear();
  for (const std::string& t : tests) cfg.tests.push_back(TestSpec::parse(t));
  return cfg;
}

double rate_of(const McReport& report, const std::string& label) {
  for (const TestSummary& s : report.tests) {
    if (s.test == label) return s.rejection_rate;
  }
  std::fprintf(stderr, "missing test summary: %s\n", label.c_str());
  std::exit(2);
}

std::string pct(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * rate);
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

} // namespace

int main() {
  Gate gate;
  std::printf("acceptance gate: R=%zu replications, B=%zu bootstrap draws, "
              "alpha=%.2f\n", kR, kB, kAlpha);
  std::fflush(stdout);

  // ---- 1. Size under the linear null -----------------------------------
  // AR(1) data against a fitted AR(1), n = 200; both split tests must hold
  // their level. The per-replication p-values feed criterion 9.
  McReport size_report;
  {
    double t0 = now_s();
    McConfig cfg = make_config("ar1", "ar:1", {"split:indicator", "split:cf"},
                               200, kSeedSize);
    size_report = run_mc(cfg);
    double ind = rate_of(size_report, "split:indicator");
    double cf = rate_of(size_report, "split:cf");
    bool pass = ind >= kLinearSizeLo && ind <= kLinearSizeHi &&
                cf >= kLinearSizeLo && cf <= kLinearSizeHi;
    gate.report(1, pass,
                "size, linear null (ar1 vs ar:1, n=200): indicator " +
                    pct(ind) + ", cf " + pct(cf) + ", band [" +
                    pct(kLinearSizeLo) + ", " + pct(kLinearSizeHi) + "]",
                now_s() - t0);
  }

  // ---- 2. Power against nonlinear alternatives, linear null ------------
  {
    double t0 = now_s();
    McReport tent = run_mc(make_config(
        "temmap", "ar:1", {"split:indicator", "split:cf"}, 200, kSeedPowerTent));
    McReport tar = run_mc(
        make_config("tar2", "ar:1", {"split:cf"}, 200, kSeedPowerTar));
    double tent_ind = rate_of(tent, "split:indicator");
    double tent_cf = rate_of(tent, "split:cf");
    double tar_cf = rate_of(tar, "split:cf");
    bool pass = tent_ind >= kTentPowerMin && tent_cf >= kTentPowerMin &&
                tar_cf >= kTarCfPowerMin;
    gate.report(2, pass,
                "power, linear null (n=200): tent map indicator " +
                    pct(tent_ind) + ", cf " + pct(tent_cf) + " (need >= " +
                    pct(kTentPowerMin) + "); tar2 cf " + pct(tar_cf) +
                    " (need >= " + pct(kTarCfPowerMin) + ")",
                now_s() - t0);
  }

  // ---- 3. Volatility null: ARCH(1) size and SV power --------------------
  {
    double t0 = now_s();
    McReport arch = run_mc(make_config(
        "arch1", "arch:1", {"split:indicator", "split:cf"}, 200, kSeedArch));
    McReport sv = run_mc(make_config(
        "sv", "arch:1", {"split:indicator", "split:cf"}, 200, kSeedSv));
    double a_ind = rate_of(arch, "split:indicator");
    double a_cf = rate_of(arch, "split:cf");
    double s_ind = rate_of(sv, "split:indicator");
    double s_cf = rate_of(sv, "split:cf");
    bool pass = a_ind <= kArchSizeHi && a_cf <= kArchSizeHi &&
                s_ind >= kSvPowerMin && s_cf >= kSvPowerMin;
    gate.report(3, pass,
                "volatility null (n=200): arch1 sizes " + pct(a_ind) + "/" +
                    pct(a_cf) + " (need <= " + pct(kArchSizeHi) +
                    "); sv power " + pct(s_ind) + "/" + pct(s_cf) +
                    " (need >= " + pct(kSvPowerMin) + ")",
                now_s() - t0);
  }

  // ---- 4. GARCH(2,2) null size ------------------------------------------
  {
    double t0 = now_s();
    McReport g = run_mc(make_config(
        "garch22", "garch:2,2", {"split:indicator", "split:cf"}, 200,
        kSeedGarch));
    double ind = rate_of(g, "split:indicator");
    double cf = rate_of(g, "split:cf");
    bool pass = ind >= kGarchSizeLo && ind <= kGarchSizeHi &&
                cf >= kGarchSizeLo && cf <= kGarchSizeHi;
    gate.report(4, pass,
                "garch(2,2) null size (n=200): indicator " + pct(ind) +
                    ", cf " + pct(cf) + ", band [" + pct(kGarchSizeLo) + ", " +
                    pct(kGarchSizeHi) + "]",
                now_s() - t0);
  }

  // ---- 5. Timing: split scheme vs full-sample re-estimating bootstrap ---
  // One full test pipeline per scheme, repeated on fresh data; ratios, not
  // absolute seconds, so the check is hardware-independent.
  {
    double t0 = now_s();
    std::vector<std::string> tests = {"split:indicator", "full:indicator"};
    McConfig tar_cfg =
        make_config("tar3", "tar:1,1,1:d=1", tests, 200, kSeedBench);
    McConfig ar_cfg = make_config("ar1", "ar:1", tests, 200, kSeedBench);
    std::vector<BenchRow> rows = run_bench({tar_cfg, ar_cfg}, 3);
    double tar_split = 0.0, tar_full = 0.0, ar_split = 0.0, ar_full = 0.0;
    for (const BenchRow& row : rows) {
      if (row.label == "tar3" && row.test == "split:indicator")
        tar_split = row.mean_s;
      if (row.label == "tar3" && row.test == "full:indicator")
        tar_full = row.mean_s;
      if (row.label == "ar1" && row.test == "split:indicator")
        ar_split = row.mean_s;
      if (row.label == "ar1" && row.test == "full:indicator")
        ar_full = row.mean_s;
    }
    double tar_ratio = tar_full / tar_split;
    double ar_ratio = ar_full / ar_split;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "timing (n=200, B=%zu): tar3 full/split %.1fx (need >= "
                  "%.0fx); ar1 full/split %.2fx (need <= %.0fx)",
                  kB, tar_ratio, kTarSpeedupMin, ar_ratio, kArRatioMax);
    gate.report(5, tar_ratio >= kTarSpeedupMin && ar_ratio <= kArRatioMax,
                buf, now_s() - t0);
  }

  // ---- 6. Sunspot study --------------------------------------------------
  // Annual Wolf sunspot numbers 1700-1979: the three-regime threshold model
  // with delay 2 is accepted by both split tests, while the constant-mean
  // and AR(5) models are rejected.
  {
    double t0 = now_s();
    Series sun = Series::from_csv(
        std::string(GSPEC_DATA_DIR) + "/sunspot_wolf_1700_1979.csv",
        "sunspots");
    BootstrapOptions opts;
    opts.B = kB;
    opts.alpha = kAlpha;
    opts.seed = kSeedSunspot;
    std::vector<TestSpec> tests = {TestSpec::parse("split:indicator"),
                                   TestSpec::parse("split:cf")};
    std::vector<EmpiricalRow> rows = run_empirical(
        sun, {"tar:11,10,10:d=2", "const", "ar:5"}, tests, "half", opts);
    auto p_of = [&rows](const std::string& model, const std::string& test) {
      for (const EmpiricalRow& row : rows) {
        if (row.model == model && row.test == test) return row.p_value;
      }
      std::fprintf(stderr, "missing empirical row %s %s\n", model.c_str(),
                   test.c_str());
      std::exit(2);
    };
    double tar_i = p_of("tar:11,10,10:d=2", "split:indicator");
    double tar_c = p_of("tar:11,10,10:d=2", "split:cf");
    double const_i = p_of("const", "split:indicator");
    double const_c = p_of("const", "split:cf");
    double ar_i = p_of("ar:5", "split:indicator");
    double ar_c = p_of("ar:5", "split:cf");
    bool pass = tar_i > kSunspotTarPMin && tar_c > kSunspotTarPMin &&
                const_i < kSunspotConstPMax && const_c < kSunspotConstPMax &&
                ar_i < kSunspotArPMax && ar_c < kSunspotArPMax;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "sunspots 1700-1979: tar(11,10,10;d=2) p %.3f/%.3f (> "
                  "%.2f); const p %.3f/%.3f (< %.2f); ar:5 p %.3f/%.3f (< "
                  "%.2f)",
                  tar_i, tar_c, kSunspotTarPMin, const_i, const_c,
                  kSunspotConstPMax, ar_i, ar_c, kSunspotArPMax);
    gate.report(6, pass, buf, now_s() - t0);
  }

  // ---- 7. Estimation does not move the null distribution ----------------
  // Paired on the same simulated series: the statistic computed from a
  // fitted AR(1) versus from the true parameter value. The two empirical
  // distributions over R replications must agree in Kolmogorov-Smirnov
  // distance (no bootstrap needed, only statistic values).
  {
    double t0 = now_s();
    const std::size_t n = 2000;
    std::vector<double> d_fitted, d_true;
    d_fitted.reserve(kR);
    d_true.reserve(kR);
    FittedModel truth;
    truth.spec = ModelSpec::parse("ar:1");
    truth.theta = {0.6};
    DgpSpec dgp = DgpSpec::parse("ar1");
    SplitSpec split = make_split(n);
    for (std::size_t r = 0; r < kR; ++r) {
      Series s = simulate(dgp, n, derive_seed(kSeedOracle, 1, r));
      FittedModel fitted = fit_ar(s, split, 1);
      ResidualSet res_fit = compute_residuals(fitted, s, split);
      ResidualSet res_true = compute_residuals(truth, s, split);
      StatContext ctx(res_fit, WeightKind::Indicator);
      d_fitted.push_back(ctx.evaluate().value);
      d_true.push_back(
          ctx.evaluate_for(res_true.residuals(), res_true.sigma2_e()).value);
    }
    double ks = oracle::ks_two_sample(d_fitted, d_true);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "oracle property (ar1, n=%zu, R=%zu): KS(fitted, true "
                  "theta) = %.4f (need <= %.2f)",
                  n, kR, ks, kOracleKsMax);
    gate.report(7, ks <= kOracleKsMax, buf, now_s() - t0);
  }

  // ---- 8. Closed forms vs quadrature and naive references ---------------
  {
    double t0 = now_s();
    std::mt19937_64 gen(kSeedInstances);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto random_set = [&gen, &normal](std::size_t l_max) {
      std::uniform_int_distribution<std::size_t> l_dist(4, l_max);
      std::uniform_int_distribution<std::size_t> extra_dist(0, 10);
      std::size_t l = l_dist(gen);
      std::size_t n = l + extra_dist(gen);
      std::size_t f = std::max<std::size_t>(1, n / 2);
      std::vector<double> e(l), z(n);
      for (double& v : e) v = normal(gen);
      for (double& v : z) v = normal(gen);
      return ResidualSet(e, z, SplitSpec{n, f, l});
    };
    double worst_quad = 0.0;
    for (int i = 0; i < 20; ++i) {
      ResidualSet res = random_set(20);
      double fast = statistic_cf(res).value;
      double slow = oracle::quadrature_statistic_cf(res);
      worst_quad = std::max(worst_quad, std::fabs(fast - slow) / slow);
    }
    double worst_naive = 0.0;
    for (int i = 0; i < 20; ++i) {
      ResidualSet res = random_set(12);
      double ind = statistic_indicator(res).value;
      double ind_ref = oracle::naive_statistic_indicator(res);
      double cf = statistic_cf(res).value;
      double cf_ref = oracle::naive_statistic_cf(res);
      worst_naive = std::max(worst_naive,
                             std::fabs(ind - ind_ref) / ind_ref);
      worst_naive = std::max(worst_naive, std::fabs(cf - cf_ref) / cf_ref);
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "reference agreement: cf vs quadrature rel %.2e (<= "
                  "%.0e); both vs naive rel %.2e (<= %.0e)",
                  worst_quad, kQuadRelTol, worst_naive, kNaiveRelTol);
    gate.report(8, worst_quad <= kQuadRelTol && worst_naive <= kNaiveRelTol,
                buf, now_s() - t0);
  }

  // ---- 9. Bootstrap calibration ------------------------------------------
  // Null p-values from criterion 1 must look uniform; the asymmetric
  // two-point multiplier must have mean 0 and variance 1.
  {
    double t0 = now_s();
    std::vector<double> p_ind, p_cf;
    for (const RepRecord& rec : size_report.reps) {
      if (rec.failed) continue;
      if (rec.test == "split:indicator") p_ind.push_back(rec.p_value);
      if (rec.test == "split:cf") p_cf.push_back(rec.p_value);
    }
    double ks_ind = oracle::ks_uniform(p_ind);
    double ks_cf = oracle::ks_uniform(p_cf);
    RngStream stream(kSeedMammen, RngDomain::Generic, 0);
    std::vector<double> draws;
    draw_multipliers(MultiplierKind::Mammen, 1000000, stream, draws);
    double m1 = 0.0, m2 = 0.0;
    for (double v : draws) {
      m1 += v;
      m2 += v * v;
    }
    m1 /= static_cast<double>(draws.size());
    m2 /= static_cast<double>(draws.size());
    bool pass = ks_ind <= kPValueKsMax && ks_cf <= kPValueKsMax &&
                std::fabs(m1) <= kMammenMomentTol &&
                std::fabs(m2 - 1.0) <= kMammenMomentTol;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "bootstrap calibration: p-value KS %.4f/%.4f (<= %.2f); "
                  "multiplier moments %.4f/%.4f (within %.2f of 0/1)",
                  ks_ind, ks_cf, kPValueKsMax, m1, m2, kMammenMomentTol);
    gate.report(9, pass, buf, now_s() - t0);
  }

  // ---- 10. Determinism across thread counts ------------------------------
  {
    double t0 = now_s();
    namespace fs = std::filesystem;
    fs::path base = fs::temp_directory_path() / "gspec_acceptance_threads";
    std::vector<std::string> contents;
    for (unsigned threads : {1u, 4u, 16u}) {
      McConfig cfg = make_config(
          "ar1", "ar:1", {"split:indicator", "split:cf", "full:indicator"},
          100, kSeedThreads);
      cfg.replications = 20;
      cfg.bootstrap = 50;
      cfg.threads = threads;
      fs::path dir = base / ("t" + std::to_string(threads));
      fs::create_directories(dir);
      cfg.out_dir = dir.string();
      run_mc(cfg);
      contents.push_back(read_file(dir / "reps.csv"));
    }
    bool pass = !contents[0].empty() && contents[0] == contents[1] &&
                contents[0] == contents[2];
    gate.report(10, pass,
                std::string("determinism: reps.csv at 1/4/16 threads ") +
                    (pass ? "bit-identical" : "DIFFER"),
                now_s() - t0);
  }

  if (gate.failures == 0) {
    std::printf("acceptance gate: all criteria satisfied\n");
    return 0;
  }
  std::printf("acceptance gate: %d criterion group(s) failed\n",
              gate.failures);
  return 1;
}
