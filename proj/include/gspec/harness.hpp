#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gspec/bootstrap.hpp"
#include "gspec/dgps.hpp"
#include "gspec/estimators.hpp"
#include "gspec/series.hpp"

namespace gspec {

enum class Scheme { Split, FullFdwb };

// One test variant to run per replication, e.g. split:indicator.
struct TestSpec {
  Scheme scheme = Scheme::Split;
  WeightKind weight = WeightKind::Indicator;

  static TestSpec parse(const std::string& label); // "split:cf", "full:indicator"
  std::string label() const;
};

// Split selection: "half" for the default overlap rule or "f:l" custom sizes.
SplitSpec parse_split(const std::string& text, std::size_t n);

MultiplierKind parse_multiplier(const std::string& name); // "mammen"/"rademacher"
std::string multiplier_name(MultiplierKind kind);

struct McConfig {
  std::string label;        // used in bench output; defaults to dgp/model
  DgpSpec dgp;
  DriftSpec drift;          // optional local-alternative overlay
  std::string null_model = "ar:1";
  std::string split = "half";
  std::size_t n = 200;
  std::size_t replications = 500;
  std::size_t bootstrap = 500;
  double alpha = 0.05;
  MultiplierKind multiplier = MultiplierKind::Mammen;
  std::vector<TestSpec> tests = {TestSpec{}};
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out_dir;      // when set, write report.csv and reps.csv here

  // Minimal flat TOML subset: `key = value` lines with strings, numbers,
  // booleans and arrays of strings; '#' comments. Keys mirror the fields:
  // label, dgp, drift, drift_amplitude, burn_in, null_model, split, n,
  // replications, bootstrap, alpha, multiplier, tests, seed, threads, out_dir.
  static McConfig from_toml_file(const std::string& path);
};

// One row per (replication, test); deterministic content only, so files
// compare bit-identically across thread counts.
struct RepRecord {
  std::size_t rep = 0;
  std::string test;
  double statistic = 0.0;
  double p_value = 0.0;
  double critical_value = 0.0;
  bool reject = false;
  bool converged = true;
  bool failed = false; // estimation failed; excluded from rejection counts
};

struct TestSummary {
  std::string test;
  std::size_t rejections = 0;
  std::size_t failures = 0;
  double rejection_rate = 0.0; // rejections / R
  double mc_se = 0.0;          // sqrt(rate (1-rate) / R)
  double mean_elapsed_s = 0.0; // mean full-pipeline time per replication
  double total_elapsed_s = 0.0;
};

struct McReport {
  std::vector<TestSummary> tests;
  std::vector<RepRecord> reps; // ordered by (rep, test position)
  std::size_t estimator_calls = 0;
};

// R replications: simulate, fit the null once per replication (shared by all
// split tests), run every requested test on the same data. Replication r draws
// from streams keyed (seed, domain, r), so results are bit-identical for any
// thread count. Aborts (EstimationFailure) if estimation failures exceed 10%
// of R. Writes report.csv / reps.csv when out_dir is set.
McReport run_mc(const McConfig& config);

struct BenchRow {
  std::string label;
  std::string test;
  std::size_t repeats = 0;
  double mean_s = 0.0;
  double min_s = 0.0;
  double max_s = 0.0;
};

// Times one full test pipeline (estimation + statistic + bootstrap) per config
// and test, averaged over `repeats` fresh datasets. Writes timing.csv when
// out_dir is set on the first config. Comparisons should use ratios between
// rows, not absolute seconds.
std::vector<BenchRow> run_bench(const std::vector<McConfig>& configs,
                                std::size_t repeats);

struct EmpiricalRow {
  std::string model;
  std::string test;
  double statistic = 0.0;
  double p_value = 0.0;
};

// Applies each null model to an observed series under every test spec.
std::vector<EmpiricalRow> run_empirical(const Series& series,
                                        const std::vector<std::string>& models,
                                        const std::vector<TestSpec>& tests,
                                        const std::string& split,
                                        const BootstrapOptions& opts);

// Single test pipeline used by the CLI and the harness: fit (split scheme) or
// delegate to the FDWB (full scheme), then bootstrap. elapsed_seconds covers
// the whole pipeline including estimation.
TestResult run_single_test(const Series& series, const ModelSpec& model,
                           const SplitSpec& split, const TestSpec& test,
                           const BootstrapOptions& opts);

// CSV writers (shared by harness and CLI; doubles serialized as %.17g)
void write_report_csv(const std::string& path, const McConfig& config,
                      const McReport& report);
void write_reps_csv(const std::string& path, const McReport& report);
void write_timing_csv(const std::string& path,
                      const std::vector<BenchRow>& rows);

} // namespace gspec
