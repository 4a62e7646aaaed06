#include "gspec/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "gspec/error.hpp"
#include "gspec/thread_pool.hpp"

namespace gspec {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string weight_name(WeightKind kind) {
  return kind == WeightKind::Indicator ? "indicator" : "cf";
}

} // namespace

TestSpec TestSpec::parse(const std::string& label) {
  std::size_t colon = label.find(':');
  if (colon == std::string::npos) {
    fail(ErrorCode::InvalidArgument, "test: expected scheme:weight, got '" + label + "'");
  }
  std::string scheme = label.substr(0, colon);
  std::string weight = label.substr(colon + 1);
  TestSpec spec;
  if (scheme == "split") {
    spec.scheme = Scheme::Split;
  } else if (scheme == "full") {
    spec.scheme = Scheme::FullFdwb;
  } else {
    fail(ErrorCode::InvalidArgument, "test: unknown scheme '" + scheme + "'");
  }
  if (weight == "indicator") {
    spec.weight = WeightKind::Indicator;
  } else if (weight == "cf") {
    spec.weight = WeightKind::ComplexExp;
  } else {
    fail(ErrorCode::InvalidArgument, "test: unknown weight '" + weight + "'");
  }
  return spec;
}

std::string TestSpec::label() const {
  return std::string(scheme == Scheme::Split ? "split" : "full") + ":" +
         weight_name(weight);
}

SplitSpec parse_split(const std::string& text, std::size_t n) {
  if (text == "half") return make_split(n);
  std::size_t colon = text.find(':');
  if (colon == std::string::npos) {
    fail(ErrorCode::InvalidSplit, "split: expected 'half' or 'f:l', got '" + text + "'");
  }
  char* end = nullptr;
  std::string f_text = text.substr(0, colon), l_text = text.substr(colon + 1);
  long f = std::strtol(f_text.c_str(), &end, 10);
  if (*end != '\0' || f < 1) fail(ErrorCode::InvalidSplit, "split: bad fit length");
  long l = std::strtol(l_text.c_str(), &end, 10);
  if (*end != '\0' || l < 1) fail(ErrorCode::InvalidSplit, "split: bad check length");
  return make_split(n, static_cast<std::size_t>(f), static_cast<std::size_t>(l));
}

MultiplierKind parse_multiplier(const std::string& name) {
  if (name == "mammen") return MultiplierKind::Mammen;
  if (name == "rademacher") return MultiplierKind::Rademacher;
  fail(ErrorCode::InvalidArgument, "multiplier: unknown kind '" + name + "'");
}

std::string multiplier_name(MultiplierKind kind) {
  return kind == MultiplierKind::Mammen ? "mammen" : "rademacher";
}

// ---------- flat TOML subset ----------

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string unquote(const std::string& raw, const std::string& key) {
  std::string v = trim(raw);
  if (v.size() < 2 || v.front() != '"' || v.back() != '"') {
    fail(ErrorCode::InvalidArgument, "config: key '" + key + "' needs a quoted string");
  }
  return v.substr(1, v.size() - 2);
}

double to_number(const std::string& raw, const std::string& key) {
  char* end = nullptr;
  double v = std::strtod(raw.c_str(), &end);
  if (end == raw.c_str() || *end != '\0') {
    fail(ErrorCode::InvalidArgument, "config: key '" + key + "' needs a number");
  }
  return v;
}

std::vector<std::string> to_string_array(const std::string& raw, const std::string& key) {
  std::string v = trim(raw);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
    fail(ErrorCode::InvalidArgument, "config: key '" + key + "' needs an array");
  }
  std::vector<std::string> out;
  std::string inner = v.substr(1, v.size() - 2);
  std::size_t pos = 0;
  while (pos < inner.size()) {
    std::size_t comma = inner.find(',', pos);
    std::string item = inner.substr(pos, comma == std::string::npos ? std::string::npos
                                                                    : comma - pos);
    if (!trim(item).empty()) out.push_back(unquote(item, key));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

// strips a '#' comment that is not inside a quoted string
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

} // namespace

McConfig McConfig::from_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::InvalidArgument, "config: cannot open '" + path + "'");
  McConfig cfg;
  std::string drift_name = "none";
  double drift_amplitude = 1.0;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::InvalidArgument, "config: expected key = value, got '" + line + "'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "label") {
      cfg.label = unquote(value, key);
    } else if (key == "dgp") {
      cfg.dgp = DgpSpec::parse(unquote(value, key));
    } else if (key == "drift") {
      drift_name = unquote(value, key);
    } else if (key == "drift_amplitude") {
      drift_amplitude = to_number(value, key);
    } else if (key == "burn_in") {
      cfg.dgp.burn_in = static_cast<std::size_t>(to_number(value, key));
    } else if (key == "null_model") {
      cfg.null_model = unquote(value, key);
    } else if (key == "split") {
      cfg.split = unquote(value, key);
    } else if (key == "n") {
      cfg.n = static_cast<std::size_t>(to_number(value, key));
    } else if (key == "replications") {
      cfg.replications = static_cast<std::size_t>(to_number(value, key));
    } else if (key == "bootstrap") {
      cfg.bootstrap = static_cast<std::size_t>(to_number(value, key));
    } else if (key == "alpha") {
      cfg.alpha = to_number(value, key);
    } else if (key == "multiplier") {
      cfg.multiplier = parse_multiplier(unquote(value, key));
    } else if (key == "tests") {
      cfg.tests.clear();
      for (const auto& t : to_string_array(value, key)) {
        cfg.tests.push_back(TestSpec::parse(t));
      }
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(to_number(value, key));
    } else if (key == "threads") {
      cfg.threads = static_cast<unsigned>(to_number(value, key));
    } else if (key == "out_dir") {
      cfg.out_dir = unquote(value, key);
    } else {
      fail(ErrorCode::InvalidArgument, "config: unknown key '" + key + "'");
    }
  }
  if (cfg.tests.empty()) {
    fail(ErrorCode::InvalidArgument, "config: needs at least one test");
  }
  cfg.drift = DriftSpec::parse(drift_name, drift_amplitude);
  return cfg;
}

// ---------- single pipeline ----------

TestResult run_single_test(const Series& series, const ModelSpec& model,
                           const SplitSpec& split, const TestSpec& test,
                           const BootstrapOptions& opts) {
  auto t0 = Clock::now();
  TestResult result;
  if (test.scheme == Scheme::FullFdwb) {
    result = full_sample_fdwb_test(series, model, test.weight, opts);
  } else {
    FittedModel fitted = fit_model(model, series, split);
    ResidualSet res = compute_residuals(fitted, series, split);
    result = split_bootstrap_test(res, test.weight, opts);
    result.provenance.model = model.descriptor();
  }
  result.elapsed_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return result;
}

// ---------- Monte Carlo ----------

McReport run_mc(const McConfig& config) {
  const std::size_t R = config.replications;
  const std::size_t T = config.tests.size();
  if (R < 1) fail(ErrorCode::InvalidArgument, "mc: need replications >= 1");
  if (T < 1) fail(ErrorCode::InvalidArgument, "mc: need at least one test");
  const ModelSpec model = ModelSpec::parse(config.null_model);
  const SplitSpec split = parse_split(config.split, config.n);

  const std::uint64_t calls_before = estimator_calls();
  McReport report;
  report.reps.assign(R * T, RepRecord{});
  std::vector<double> elapsed(R * T, 0.0);

  const bool any_split = std::any_of(config.tests.begin(), config.tests.end(),
                                     [](const TestSpec& t) { return t.scheme == Scheme::Split; });

  parallel_for(R, config.threads, [&](std::size_t r) {
    for (std::size_t k = 0; k < T; ++k) {
      RepRecord& rec = report.reps[r * T + k];
      rec.rep = r;
      rec.test = config.tests[k].label();
    }
    BootstrapOptions opts;
    opts.B = config.bootstrap;
    opts.alpha = config.alpha;
    opts.multiplier = config.multiplier;
    opts.seed = derive_seed(config.seed, 2, r);
    opts.threads = 1;

    Series data = Series(std::vector<double>{0, 0, 0, 0, 0, 0, 0, 0});
    try {
      std::uint64_t sim_seed = derive_seed(config.seed, 1, r);
      data = config.drift.kind == DriftSpec::Kind::None
                 ? simulate(config.dgp, config.n, sim_seed)
                 : simulate_local_alternative(config.dgp, config.drift, config.n,
                                              split.check_len, sim_seed);
    } catch (const Error&) {
      for (std::size_t k = 0; k < T; ++k) report.reps[r * T + k].failed = true;
      return;
    }

    // one fit per replication, shared by every split-scheme test
    bool have_fit = false;
    bool fit_converged = true;
    double fit_seconds = 0.0;
    ResidualSet res(std::vector<double>(split.check_len, 1.0),
                    std::vector<double>(split.n, 0.0), split);
    if (any_split) {
      auto f0 = Clock::now();
      try {
        FittedModel fitted = fit_model(model, data, split);
        fit_converged = fitted.diagnostics.converged;
        res = compute_residuals(fitted, data, split);
        have_fit = true;
      } catch (const Error&) {
        have_fit = false;
      }
      fit_seconds = std::chrono::duration<double>(Clock::now() - f0).count();
    }

    for (std::size_t k = 0; k < T; ++k) {
      RepRecord& rec = report.reps[r * T + k];
      const TestSpec& test = config.tests[k];
      try {
        if (test.scheme == Scheme::Split) {
          if (!have_fit) {
            rec.failed = true;
            continue;
          }
          TestResult tr = split_bootstrap_test(res, test.weight, opts);
          rec.statistic = tr.statistic;
          rec.p_value = tr.p_value;
          rec.critical_value = tr.critical_value;
          rec.reject = tr.reject;
          rec.converged = fit_converged;
          elapsed[r * T + k] = fit_seconds + tr.elapsed_seconds;
        } else {
          TestResult tr = full_sample_fdwb_test(data, model, test.weight, opts);
          rec.statistic = tr.statistic;
          rec.p_value = tr.p_value;
          rec.critical_value = tr.critical_value;
          rec.reject = tr.reject;
          elapsed[r * T + k] = tr.elapsed_seconds;
        }
      } catch (const Error&) {
        rec.failed = true;
      }
    }
  });

  report.estimator_calls = static_cast<std::size_t>(estimator_calls() - calls_before);

  for (std::size_t k = 0; k < T; ++k) {
    TestSummary s;
    s.test = config.tests[k].label();
    for (std::size_t r = 0; r < R; ++r) {
      const RepRecord& rec = report.reps[r * T + k];
      if (rec.failed) {
        ++s.failures;
      } else if (rec.reject) {
        ++s.rejections;
      }
      s.total_elapsed_s += elapsed[r * T + k];
    }
    double rd = static_cast<double>(R);
    s.rejection_rate = static_cast<double>(s.rejections) / rd;
    s.mc_se = std::sqrt(s.rejection_rate * (1.0 - s.rejection_rate) / rd);
    s.mean_elapsed_s = s.total_elapsed_s / rd;
    report.tests.push_back(std::move(s));
  }

  for (const TestSummary& s : report.tests) {
    if (static_cast<double>(s.failures) > 0.1 * static_cast<double>(R)) {
      fail(ErrorCode::EstimationFailure,
           "mc: estimation failed on " + std::to_string(s.failures) + " of " +
               std::to_string(R) + " replications for " + s.test);
    }
  }

  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    write_report_csv(config.out_dir + "/report.csv", config, report);
    write_reps_csv(config.out_dir + "/reps.csv", report);
  }
  return report;
}

// ---------- timing ----------

std::vector<BenchRow> run_bench(const std::vector<McConfig>& configs,
                                std::size_t repeats) {
  if (repeats < 1) fail(ErrorCode::InvalidArgument, "bench: need repeats >= 1");
  std::vector<BenchRow> rows;
  for (const McConfig& config : configs) {
    const ModelSpec model = ModelSpec::parse(config.null_model);
    const SplitSpec split = parse_split(config.split, config.n);
    for (const TestSpec& test : config.tests) {
      BenchRow row;
      row.label = config.label.empty() ? config.dgp.name() : config.label;
      row.test = test.label();
      row.repeats = repeats;
      row.min_s = std::numeric_limits<double>::infinity();
      for (std::size_t rep = 0; rep < repeats; ++rep) {
        Series data = simulate(config.dgp, config.n, derive_seed(config.seed, 1, rep));
        BootstrapOptions opts;
        opts.B = config.bootstrap;
        opts.alpha = config.alpha;
        opts.multiplier = config.multiplier;
        opts.seed = derive_seed(config.seed, 2, rep);
        opts.threads = config.threads;
        TestResult tr = run_single_test(data, model, split, test, opts);
        row.mean_s += tr.elapsed_seconds;
        row.min_s = std::min(row.min_s, tr.elapsed_seconds);
        row.max_s = std::max(row.max_s, tr.elapsed_seconds);
      }
      row.mean_s /= static_cast<double>(repeats);
      rows.push_back(std::move(row));
    }
  }
  if (!configs.empty() && !configs.front().out_dir.empty()) {
    std::filesystem::create_directories(configs.front().out_dir);
    write_timing_csv(configs.front().out_dir + "/timing.csv", rows);
  }
  return rows;
}

// ---------- observed series ----------

std::vector<EmpiricalRow> run_empirical(const Series& series,
                                        const std::vector<std::string>& models,
                                        const std::vector<TestSpec>& tests,
                                        const std::string& split,
                                        const BootstrapOptions& opts) {
  SplitSpec sp = parse_split(split, series.size());
  std::vector<EmpiricalRow> rows;
  for (const std::string& descriptor : models) {
    ModelSpec model = ModelSpec::parse(descriptor);
    for (const TestSpec& test : tests) {
      TestResult tr = run_single_test(series, model, sp, test, opts);
      rows.push_back({descriptor, test.label(), tr.statistic, tr.p_value});
    }
  }
  return rows;
}

// ---------- CSV ----------

void write_report_csv(const std::string& path, const McConfig& config,
                      const McReport& report) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  out << "label,dgp,drift,null_model,split,n,replications,bootstrap,alpha,"
         "multiplier,seed,test,rejections,failures,rejection_rate,mc_se,"
         "mean_elapsed_s,total_elapsed_s\n";
  for (const TestSummary& s : report.tests) {
    out << config.label << ',' << config.dgp.name() << ',' << config.drift.name()
        << ',' << config.null_model << ',' << config.split << ',' << config.n
        << ',' << config.replications << ',' << config.bootstrap << ','
        << fmt_double(config.alpha) << ',' << multiplier_name(config.multiplier)
        << ',' << config.seed << ',' << s.test << ',' << s.rejections << ','
        << s.failures << ',' << fmt_double(s.rejection_rate) << ','
        << fmt_double(s.mc_se) << ',' << fmt_double(s.mean_elapsed_s) << ','
        << fmt_double(s.total_elapsed_s) << '\n';
  }
}

void write_reps_csv(const std::string& path, const McReport& report) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  out << "rep,test,statistic,p_value,critical_value,reject,converged,failed\n";
  for (const RepRecord& r : report.reps) {
    out << r.rep << ',' << r.test << ',' << fmt_double(r.statistic) << ','
        << fmt_double(r.p_value) << ',' << fmt_double(r.critical_value) << ','
        << (r.reject ? 1 : 0) << ',' << (r.converged ? 1 : 0) << ','
        << (r.failed ? 1 : 0) << '\n';
  }
}

void write_timing_csv(const std::string& path, const std::vector<BenchRow>& rows) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  out << "label,test,repeats,mean_s,min_s,max_s\n";
  for (const BenchRow& r : rows) {
    out << r.label << ',' << r.test << ',' << r.repeats << ','
        << fmt_double(r.mean_s) << ',' << fmt_double(r.min_s) << ','
        << fmt_double(r.max_s) << '\n';
  }
}

} // namespace gspec
