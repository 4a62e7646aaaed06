// Command line front end: simulate model data, run a single goodness-of-fit
// test, drive Monte Carlo and timing studies, or test observed series.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gspec/dgps.hpp"
#include "gspec/error.hpp"
#include "gspec/harness.hpp"
#include "gspec/thread_pool.hpp"

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string integrator_name(gspec::IntegratorKind kind) {
  return kind == gspec::IntegratorKind::EmpiricalCdfOfLaggedY ? "empirical-cdf"
                                                              : "normal-cdf";
}

std::string weight_name(gspec::WeightKind kind) {
  return kind == gspec::WeightKind::Indicator ? "indicator" : "cf";
}

json result_to_json(const gspec::TestResult& r) {
  const gspec::Provenance& p = r.provenance;
  return json{
      {"statistic", r.statistic},
      {"p_value", r.p_value},
      {"critical_value", r.critical_value},
      {"reject", r.reject},
      {"B", p.B},
      {"elapsed_s", r.elapsed_seconds},
      {"provenance",
       {{"seed", p.seed},
        {"bootstrap", p.B},
        {"alpha", p.alpha},
        {"multiplier", gspec::multiplier_name(p.multiplier)},
        {"weight", weight_name(p.weight)},
        {"integrator", integrator_name(p.integrator)},
        {"scheme", p.scheme},
        {"model", p.model},
        {"failures", p.failures},
        {"split",
         {{"n", p.split.n},
          {"fit_len", p.split.fit_len},
          {"check_len", p.split.check_len}}}}},
  };
}

void print_result_text(const gspec::TestResult& r, const std::string& test_label) {
  const gspec::Provenance& p = r.provenance;
  std::cout << "test " << test_label << " model " << p.model << " split "
            << p.split.fit_len << ":" << p.split.check_len << " of n " << p.split.n
            << "\n";
  std::cout << "statistic " << fmt_double(r.statistic) << "\n";
  std::cout << "p_value " << fmt_double(r.p_value) << "\n";
  std::cout << "critical_value " << fmt_double(r.critical_value) << " (alpha "
            << fmt_double(p.alpha) << ")\n";
  std::cout << "reject " << (r.reject ? "yes" : "no") << "\n";
}

struct CommonTestOptions {
  std::string scheme = "split";
  std::string weight = "indicator";
  std::string split = "half";
  std::size_t bootstrap = 500;
  double alpha = 0.05;
  std::string multiplier = "mammen";
  std::uint64_t seed = 1;
  unsigned threads = 0; // 0: library default
  bool ones_hook = false;
  bool as_json = false;

  gspec::BootstrapOptions to_bootstrap() const {
    gspec::BootstrapOptions opts;
    opts.B = bootstrap;
    opts.alpha = alpha;
    opts.multiplier = gspec::parse_multiplier(multiplier);
    opts.seed = seed;
    opts.threads = threads == 0 ? gspec::default_threads() : threads;
    opts.ones_hook = ones_hook;
    return opts;
  }
  gspec::TestSpec to_test_spec() const {
    return gspec::TestSpec::parse(scheme + ":" + weight);
  }
};

void add_common_test_options(CLI::App* cmd, CommonTestOptions& o) {
  cmd->add_option("--scheme", o.scheme, "Bootstrap scheme: split or full")
      ->check(CLI::IsMember({"split", "full"}));
  cmd->add_option("--weight", o.weight, "Weight family: indicator or cf")
      ->check(CLI::IsMember({"indicator", "cf"}));
  cmd->add_option("--split", o.split, "Sample split: 'half' or 'f:l'");
  cmd->add_option("-B,--bootstrap", o.bootstrap, "Bootstrap replications");
  cmd->add_option("--alpha", o.alpha, "Test level in (0,1)");
  cmd->add_option("--multiplier", o.multiplier, "Multiplier law: mammen or rademacher")
      ->check(CLI::IsMember({"mammen", "rademacher"}));
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--threads", o.threads, "Worker threads (0: auto)");
  cmd->add_flag("--ones-hook", o.ones_hook,
                "Replace every multiplier by 1 (diagnostic)");
  cmd->add_flag("--json", o.as_json, "Emit JSON instead of text");
}

int cmd_simulate(const std::string& dgp, std::size_t n, std::uint64_t seed,
                 long burn_in, const std::string& out_path) {
  gspec::DgpSpec spec = gspec::DgpSpec::parse(dgp);
  if (burn_in >= 0) spec.burn_in = static_cast<std::size_t>(burn_in);
  gspec::Series series = gspec::simulate(spec, n, seed);
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) gspec::fail(gspec::ErrorCode::InvalidArgument,
                           "cannot write '" + out_path + "'");
    out = &file;
  }
  (*out) << "y\n";
  for (double v : series.values()) (*out) << fmt_double(v) << "\n";
  return 0;
}

int cmd_test(const std::string& data, const std::string& column,
             const std::string& model, const CommonTestOptions& o) {
  gspec::Series series = gspec::Series::from_csv(data, column);
  gspec::ModelSpec spec = gspec::ModelSpec::parse(model);
  gspec::SplitSpec split = gspec::parse_split(o.split, series.size());
  gspec::TestSpec test = o.to_test_spec();
  gspec::TestResult r =
      gspec::run_single_test(series, spec, split, test, o.to_bootstrap());
  if (o.as_json) {
    std::cout << result_to_json(r).dump(2) << "\n";
  } else {
    print_result_text(r, test.label());
  }
  return 0;
}

int cmd_mc(const std::string& config_path, const std::string& out_dir,
           unsigned threads, long replications, long bootstrap, bool as_json) {
  gspec::McConfig config = gspec::McConfig::from_toml_file(config_path);
  if (!out_dir.empty()) config.out_dir = out_dir;
  if (threads > 0) config.threads = threads;
  if (replications > 0) config.replications = static_cast<std::size_t>(replications);
  if (bootstrap > 0) config.bootstrap = static_cast<std::size_t>(bootstrap);
  gspec::McReport report = gspec::run_mc(config);
  if (as_json) {
    json tests = json::array();
    for (const auto& s : report.tests) {
      tests.push_back({{"test", s.test},
                       {"rejections", s.rejections},
                       {"failures", s.failures},
                       {"rejection_rate", s.rejection_rate},
                       {"mc_se", s.mc_se},
                       {"mean_elapsed_s", s.mean_elapsed_s},
                       {"total_elapsed_s", s.total_elapsed_s}});
    }
    std::cout << json{{"label", config.label},
                      {"dgp", config.dgp.name()},
                      {"null_model", config.null_model},
                      {"replications", config.replications},
                      {"estimator_calls", report.estimator_calls},
                      {"tests", tests}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "dgp " << config.dgp.name() << " null " << config.null_model
              << " R " << config.replications << " B " << config.bootstrap << "\n";
    for (const auto& s : report.tests) {
      std::cout << s.test << " rejection_rate " << fmt_double(s.rejection_rate)
                << " (" << s.rejections << "/" << config.replications
                << ") failures " << s.failures << " mean_elapsed_s "
                << fmt_double(s.mean_elapsed_s) << "\n";
    }
  }
  return 0;
}

int cmd_bench(const std::vector<std::string>& config_paths, std::size_t repeats,
              const std::string& out_dir, bool as_json) {
  std::vector<gspec::McConfig> configs;
  for (const auto& path : config_paths) {
    configs.push_back(gspec::McConfig::from_toml_file(path));
  }
  if (!configs.empty() && !out_dir.empty()) configs.front().out_dir = out_dir;
  std::vector<gspec::BenchRow> rows = gspec::run_bench(configs, repeats);
  if (as_json) {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"label", r.label},
                     {"test", r.test},
                     {"repeats", r.repeats},
                     {"mean_s", r.mean_s},
                     {"min_s", r.min_s},
                     {"max_s", r.max_s}});
    }
    std::cout << arr.dump(2) << "\n";
  } else {
    for (const auto& r : rows) {
      std::cout << r.label << " " << r.test << " mean_s " << fmt_double(r.mean_s)
                << " min_s " << fmt_double(r.min_s) << " max_s "
                << fmt_double(r.max_s) << "\n";
    }
  }
  return 0;
}

int cmd_empirical(const std::string& data, const std::string& column,
                  const std::vector<std::string>& models,
                  const std::vector<std::string>& tests,
                  const CommonTestOptions& o) {
  gspec::Series series = gspec::Series::from_csv(data, column);
  std::vector<gspec::TestSpec> specs;
  for (const auto& t : tests) specs.push_back(gspec::TestSpec::parse(t));
  std::vector<gspec::EmpiricalRow> rows =
      gspec::run_empirical(series, models, specs, o.split, o.to_bootstrap());
  if (o.as_json) {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"model", r.model},
                     {"test", r.test},
                     {"statistic", r.statistic},
                     {"p_value", r.p_value}});
    }
    std::cout << arr.dump(2) << "\n";
  } else {
    for (const auto& r : rows) {
      std::cout << r.model << " " << r.test << " statistic "
                << fmt_double(r.statistic) << " p_value " << fmt_double(r.p_value)
                << "\n";
    }
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral goodness-of-fit tests for conditional mean and "
               "volatility time series models"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a model series as CSV");
  std::string sim_dgp;
  std::size_t sim_n = 200;
  std::uint64_t sim_seed = 1;
  long sim_burn = -1;
  std::string sim_out;
  sim->add_option("--dgp", sim_dgp, "Process name, e.g. ar1, tar3, garch11")
      ->required();
  sim->add_option("--n", sim_n, "Series length");
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--burn-in", sim_burn, "Burn-in steps (default 200)");
  sim->add_option("--out", sim_out, "Output path (default stdout)");

  // test
  auto* test = app.add_subcommand("test", "Run one goodness-of-fit test");
  std::string test_data, test_column, test_model;
  CommonTestOptions test_opts;
  test->add_option("--data", test_data, "CSV with the series")->required();
  test->add_option("--column", test_column, "CSV column name (default: single column)");
  test->add_option("--model", test_model, "Null model, e.g. ar:1, garch:1,1")
      ->required();
  add_common_test_options(test, test_opts);

  // mc
  auto* mc = app.add_subcommand("mc", "Monte Carlo rejection study from a config");
  std::string mc_config, mc_out_dir;
  unsigned mc_threads = 0;
  long mc_reps = -1, mc_boot = -1;
  bool mc_json = false;
  mc->add_option("--config", mc_config, "TOML config path")->required();
  mc->add_option("--out-dir", mc_out_dir, "Write report.csv and reps.csv here");
  mc->add_option("--threads", mc_threads, "Worker threads (0: config value)");
  mc->add_option("--replications", mc_reps, "Override replication count");
  mc->add_option("--bootstrap", mc_boot, "Override bootstrap draws");
  mc->add_flag("--json", mc_json, "Emit JSON instead of text");

  // bench
  auto* bench = app.add_subcommand("bench", "Time full test pipelines");
  std::vector<std::string> bench_configs;
  std::size_t bench_repeats = 5;
  std::string bench_out_dir;
  bool bench_json = false;
  bench->add_option("--config", bench_configs, "TOML config path (repeatable)")
      ->required();
  bench->add_option("--repeats", bench_repeats, "Fresh datasets per row");
  bench->add_option("--out-dir", bench_out_dir, "Write timing.csv here");
  bench->add_flag("--json", bench_json, "Emit JSON instead of text");

  // empirical
  auto* emp = app.add_subcommand("empirical", "Test observed data against models");
  std::string emp_data, emp_column;
  std::vector<std::string> emp_models;
  std::vector<std::string> emp_tests = {"split:indicator", "split:cf"};
  CommonTestOptions emp_opts;
  emp->add_option("--data", emp_data, "CSV with the series")->required();
  emp->add_option("--column", emp_column, "CSV column name");
  emp->add_option("--model", emp_models, "Null model descriptor (repeatable)")
      ->required();
  emp->add_option("--test", emp_tests,
                  "Test spec scheme:weight (repeatable; default split tests)");
  add_common_test_options(emp, emp_opts);

  try {
    app.parse(argc, argv);
    if (sim->parsed()) return cmd_simulate(sim_dgp, sim_n, sim_seed, sim_burn, sim_out);
    if (test->parsed()) return cmd_test(test_data, test_column, test_model, test_opts);
    if (mc->parsed()) return cmd_mc(mc_config, mc_out_dir, mc_threads, mc_reps, mc_boot, mc_json);
    if (bench->parsed()) return cmd_bench(bench_configs, bench_repeats, bench_out_dir, bench_json);
    if (emp->parsed()) return cmd_empirical(emp_data, emp_column, emp_models, emp_tests, emp_opts);
    return 1;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const gspec::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.usage() ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
