#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gspec/bootstrap.hpp"
#include "gspec/dgps.hpp"
#include "gspec/error.hpp"
#include "gspec/harness.hpp"
#include "gspec/series.hpp"
#include "oracles.hpp"

using namespace gspec;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

McConfig tiny_config() {
  McConfig cfg;
  cfg.dgp = DgpSpec::parse("ar1");
  cfg.null_model = "ar:1";
  cfg.split = "half";
  cfg.n = 64;
  cfg.replications = 6;
  cfg.bootstrap = 13;
  cfg.seed = 31;
  cfg.tests = {TestSpec::parse("split:indicator"), TestSpec::parse("split:cf")};
  return cfg;
}

} // namespace

// ---------------------------------------------------------------------------
// label parsing
// ---------------------------------------------------------------------------

TEST_CASE("test labels round-trip through parse") {
  for (const char* label : {"split:indicator", "split:cf", "full:indicator", "full:cf"}) {
    CHECK(TestSpec::parse(label).label() == label);
  }
  CHECK(TestSpec::parse("split:indicator").scheme == Scheme::Split);
  CHECK(TestSpec::parse("full:cf").scheme == Scheme::FullFdwb);
  CHECK(TestSpec::parse("split:cf").weight == WeightKind::ComplexExp);
  for (const char* label : {"both:cf", "split:x", "split", "full:", ""}) {
    auto code = oracle::caught_code([&] { (void)TestSpec::parse(label); });
    INFO("label: " << label);
    REQUIRE(code.has_value());
    CHECK(*code == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("split selection strings") {
  SplitSpec half = parse_split("half", 200);
  CHECK(half.n == 200);
  CHECK(half.fit_len == 100);
  CHECK(half.check_len == 200);

  SplitSpec custom = parse_split("60:100", 200);
  CHECK(custom.fit_len == 60);
  CHECK(custom.check_len == 100);
  CHECK(custom.check_start() == 101);

  for (const char* text : {"x", "0:10", "10:0", "60:", ":100", "150:300"}) {
    auto code = oracle::caught_code([&] { (void)parse_split(text, 200); });
    INFO("split: " << text);
    REQUIRE(code.has_value());
    CHECK(*code == ErrorCode::InvalidSplit);
  }
}

TEST_CASE("multiplier names") {
  CHECK(parse_multiplier("mammen") == MultiplierKind::Mammen);
  CHECK(parse_multiplier("rademacher") == MultiplierKind::Rademacher);
  CHECK(multiplier_name(MultiplierKind::Mammen) == "mammen");
  CHECK(multiplier_name(MultiplierKind::Rademacher) == "rademacher");
  CHECK(*oracle::caught_code([&] { (void)parse_multiplier("gaussian"); }) ==
        ErrorCode::InvalidArgument);
}

// ---------------------------------------------------------------------------
// config files
// ---------------------------------------------------------------------------

TEST_CASE("config files populate every field") {
  fs::path dir = fresh_dir("gspec_test_config");
  fs::path file = dir / "study.toml";
  write_file(file,
             "# size study at desk scale\n"
             "label = \"size-ar1\"   # free-form name\n"
             "dgp = \"ar1\"\n"
             "drift = \"sin-lag2\"\n"
             "drift_amplitude = 2.5\n"
             "burn_in = 150\n"
             "null_model = \"ar:1\"\n"
             "split = \"half\"\n"
             "n = 200\n"
             "\n"
             "replications = 40\n"
             "bootstrap = 99\n"
             "alpha = 0.10\n"
             "multiplier = \"rademacher\"\n"
             "tests = [\"split:indicator\", \"split:cf\", \"full:indicator\"]\n"
             "seed = 77\n"
             "threads = 2\n"
             "out_dir = \"/tmp/somewhere\"\n");
  McConfig cfg = McConfig::from_toml_file(file.string());
  CHECK(cfg.label == "size-ar1");
  CHECK(cfg.dgp.kind == DgpKind::Ar1);
  CHECK(cfg.dgp.burn_in == 150);
  CHECK(cfg.drift.kind == DriftSpec::Kind::SinLag2);
  CHECK(cfg.drift.amplitude == 2.5);
  CHECK(cfg.null_model == "ar:1");
  CHECK(cfg.split == "half");
  CHECK(cfg.n == 200);
  CHECK(cfg.replications == 40);
  CHECK(cfg.bootstrap == 99);
  CHECK(cfg.alpha == 0.10);
  CHECK(cfg.multiplier == MultiplierKind::Rademacher);
  REQUIRE(cfg.tests.size() == 3);
  CHECK(cfg.tests[0].label() == "split:indicator");
  CHECK(cfg.tests[1].label() == "split:cf");
  CHECK(cfg.tests[2].label() == "full:indicator");
  CHECK(cfg.seed == 77);
  CHECK(cfg.threads == 2);
  CHECK(cfg.out_dir == "/tmp/somewhere");
  fs::remove_all(dir);
}

TEST_CASE("config defaults survive a minimal file") {
  fs::path dir = fresh_dir("gspec_test_config_min");
  fs::path file = dir / "min.toml";
  write_file(file, "dgp = \"garch11\"\nnull_model = \"garch:1,1\"\n");
  McConfig cfg = McConfig::from_toml_file(file.string());
  CHECK(cfg.dgp.kind == DgpKind::Garch11);
  CHECK(cfg.dgp.burn_in == 200);
  CHECK(cfg.drift.kind == DriftSpec::Kind::None);
  CHECK(cfg.n == 200);
  CHECK(cfg.replications == 500);
  CHECK(cfg.bootstrap == 500);
  CHECK(cfg.alpha == 0.05);
  CHECK(cfg.multiplier == MultiplierKind::Mammen);
  REQUIRE(cfg.tests.size() == 1);
  CHECK(cfg.tests[0].label() == "split:indicator");
  fs::remove_all(dir);
}

TEST_CASE("config rejections") {
  fs::path dir = fresh_dir("gspec_test_config_bad");

  auto expect_invalid = [&](const std::string& body) {
    fs::path file = dir / "bad.toml";
    write_file(file, body);
    auto code = oracle::caught_code([&] { (void)McConfig::from_toml_file(file.string()); });
    INFO("body: " << body);
    REQUIRE(code.has_value());
    CHECK(*code == ErrorCode::InvalidArgument);
  };

  expect_invalid("frobnicate = 3\n");            // unknown key
  expect_invalid("dgp = ar1\n");                 // missing quotes
  expect_invalid("n = \"many\"\n");              // not a number
  expect_invalid("just some words\n");           // no key = value shape
  expect_invalid("tests = []\n");                // empty test list
  expect_invalid("tests = [\"split:indicator\"");

  CHECK(*oracle::caught_code([&] {
          (void)McConfig::from_toml_file((dir / "absent.toml").string());
        }) == ErrorCode::InvalidArgument);
  fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// Monte Carlo driver
// ---------------------------------------------------------------------------

TEST_CASE("single-replication study produces a complete report") {
  McConfig cfg = tiny_config();
  cfg.replications = 1;
  cfg.bootstrap = 19;
  McReport rep = run_mc(cfg);

  REQUIRE(rep.reps.size() == 2);
  REQUIRE(rep.tests.size() == 2);
  CHECK(rep.reps[0].test == "split:indicator");
  CHECK(rep.reps[1].test == "split:cf");
  for (const RepRecord& r : rep.reps) {
    CHECK(!r.failed);
    CHECK(r.converged);
    CHECK(r.statistic > 0.0);
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);
    CHECK(r.critical_value > 0.0);
    CHECK(r.reject == (r.statistic > r.critical_value));
  }
  for (const TestSummary& s : rep.tests) {
    CHECK(s.failures == 0);
    CHECK(s.rejection_rate == (s.rejections == 1 ? 1.0 : 0.0));
  }
  CHECK(rep.estimator_calls == 1); // one fit shared by both split tests
}

TEST_CASE("split tests share one estimation per replication") {
  McConfig cfg = tiny_config();
  McReport rep = run_mc(cfg);
  CHECK(rep.estimator_calls == cfg.replications);

  // a full-scheme test adds B+1 fits per replication
  McConfig with_full = tiny_config();
  with_full.replications = 2;
  with_full.tests.push_back(TestSpec::parse("full:indicator"));
  McReport rep2 = run_mc(with_full);
  CHECK(rep2.estimator_calls == 2 * (1 + with_full.bootstrap + 1));
}

TEST_CASE("a study aborts when estimation keeps failing") {
  McConfig cfg = tiny_config();
  cfg.n = 8;
  cfg.null_model = "ar:5"; // cannot be fit on a four-point fitting sample
  cfg.replications = 5;
  cfg.bootstrap = 5;
  auto code = oracle::caught_code([&] { (void)run_mc(cfg); });
  REQUIRE(code.has_value());
  CHECK(*code == ErrorCode::EstimationFailure);
}

TEST_CASE("replication records are identical across thread counts and reruns") {
  fs::path d1 = fresh_dir("gspec_mc_t1");
  fs::path d3 = fresh_dir("gspec_mc_t3");
  fs::path d1b = fresh_dir("gspec_mc_t1b");

  McConfig cfg = tiny_config();
  cfg.tests.push_back(TestSpec::parse("full:indicator"));
  cfg.threads = 1;
  cfg.out_dir = d1.string();
  run_mc(cfg);
  cfg.threads = 3;
  cfg.out_dir = d3.string();
  run_mc(cfg);
  cfg.threads = 1;
  cfg.out_dir = d1b.string();
  run_mc(cfg);

  std::string reps1 = slurp(d1 / "reps.csv");
  CHECK(reps1 == slurp(d3 / "reps.csv"));
  CHECK(reps1 == slurp(d1b / "reps.csv"));

  // golden headers
  CHECK(reps1.rfind("rep,test,statistic,p_value,critical_value,reject,converged,failed\n", 0) == 0);
  std::string report = slurp(d1 / "report.csv");
  CHECK(report.rfind("label,dgp,drift,null_model,split,n,replications,bootstrap,alpha,"
                     "multiplier,seed,test,rejections,failures,rejection_rate,mc_se,"
                     "mean_elapsed_s,total_elapsed_s\n", 0) == 0);

  fs::remove_all(d1);
  fs::remove_all(d3);
  fs::remove_all(d1b);
}

TEST_CASE("rejection rates order as null, local alternative, fixed alternative") {
  McConfig base;
  base.null_model = "ar:1";
  base.split = "half";
  base.n = 200;
  base.replications = 30;
  base.bootstrap = 99;
  base.seed = 11;
  base.tests = {TestSpec::parse("split:cf")};

  McConfig null_cfg = base;
  null_cfg.dgp = DgpSpec::parse("ar1");

  McConfig local_cfg = base;
  local_cfg.dgp = DgpSpec::parse("ar1");
  local_cfg.drift = DriftSpec::parse("sin-lag2", 6.0);

  McConfig fixed_cfg = base;
  fixed_cfg.dgp = DgpSpec::parse("nar"); // the same direction at fixed size

  double rate_null = run_mc(null_cfg).tests[0].rejection_rate;
  double rate_local = run_mc(local_cfg).tests[0].rejection_rate;
  double rate_fixed = run_mc(fixed_cfg).tests[0].rejection_rate;

  CHECK(rate_null <= 0.15);
  CHECK(rate_null <= rate_local);
  CHECK(rate_local <= rate_fixed);
  CHECK(rate_fixed >= 0.2);
  CHECK(rate_fixed > rate_null);
}

// ---------------------------------------------------------------------------
// timing and observed-series drivers
// ---------------------------------------------------------------------------

TEST_CASE("timing rows collapse for a single repeat") {
  fs::path dir = fresh_dir("gspec_bench");
  McConfig cfg = tiny_config();
  cfg.out_dir = dir.string();
  std::vector<BenchRow> rows = run_bench({cfg}, 1);
  REQUIRE(rows.size() == 2);
  for (const BenchRow& r : rows) {
    CHECK(r.repeats == 1);
    CHECK(r.mean_s == r.min_s);
    CHECK(r.mean_s == r.max_s);
    CHECK(r.mean_s > 0.0);
    CHECK(r.label == "ar1"); // label defaults to the generator name
  }
  CHECK(rows[0].test == "split:indicator");
  CHECK(rows[1].test == "split:cf");

  std::string timing = slurp(dir / "timing.csv");
  CHECK(timing.rfind("label,test,repeats,mean_s,min_s,max_s\n", 0) == 0);
  fs::remove_all(dir);

  CHECK(*oracle::caught_code([&] { (void)run_bench({cfg}, 0); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("timing rows bracket the mean for several repeats") {
  McConfig cfg = tiny_config();
  cfg.replications = 1;
  std::vector<BenchRow> rows = run_bench({cfg}, 3);
  for (const BenchRow& r : rows) {
    CHECK(r.repeats == 3);
    CHECK(r.min_s <= r.mean_s);
    CHECK(r.mean_s <= r.max_s);
  }
}

TEST_CASE("observed-series driver prices every model under every test") {
  Series s = simulate(DgpSpec::parse("ar1"), 200, 51);
  BootstrapOptions opts;
  opts.B = 99;
  opts.seed = 3;
  std::vector<TestSpec> tests = {TestSpec::parse("split:indicator"),
                                 TestSpec::parse("split:cf")};
  std::vector<EmpiricalRow> rows =
      run_empirical(s, {"ar:1", "const"}, tests, "half", opts);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].model == "ar:1");
  CHECK(rows[0].test == "split:indicator");
  CHECK(rows[1].model == "ar:1");
  CHECK(rows[1].test == "split:cf");
  CHECK(rows[2].model == "const");
  CHECK(rows[3].model == "const");
  for (const EmpiricalRow& r : rows) {
    CHECK(r.statistic > 0.0);
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);
  }
  // the constant null ignores the autoregressive structure entirely, so it
  // should look worse than the correctly specified model on this draw
  CHECK(rows[2].p_value <= rows[0].p_value);
}
