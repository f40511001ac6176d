#include "cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dipca/bench.h"
#include "dipca/core.h"
#include "dipca/deflate.h"
#include "dipca/error.h"
#include "dipca/io.h"
#include "dipca/secondorder.h"

namespace dipca::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliConfig {
  std::string input;
  std::string data;
  std::string output;
  std::string scores;
  std::string summary;
  std::string truth;
  std::string algo = "1";
  std::string preset;
  int lags = 1;
  int components = 0;  // 0: min(m, 10)
  double tol = 1e-6;
  std::uint64_t seed = 42;
  bool center = true;
  bool header = false;
  int max_outer = 10000;
  int max_power = 1000;
  int workers = 1;
  bool classify = true;
  std::vector<std::string> algorithms;
  // gen
  int m = 50;
  int n = 500;
  double sigma = 1.0;
  int planted = 1;
};

void require_readable(const std::string& path) {
  if (path.empty() || !fs::is_regular_file(path)) {
    throw Error(ErrorCode::kIo, "input file '" + path + "' does not exist");
  }
  std::ifstream probe(path);
  if (!probe) throw Error(ErrorCode::kIo, "cannot read '" + path + "'");
}

void require_writable_target(const std::string& path) {
  if (path.empty()) return;
  const fs::path parent = fs::absolute(path).parent_path();
  if (!fs::is_directory(parent)) {
    throw Error(ErrorCode::kIo,
                "output directory '" + parent.string() + "' does not exist");
  }
}

SolveOptions solve_options(const CliConfig& cfg) {
  SolveOptions opts;
  opts.eps_tol = cfg.tol;
  opts.seed = cfg.seed;
  opts.max_outer = cfg.max_outer;
  opts.max_power = cfg.max_power;
  opts.validate();
  return opts;
}

TimeSeriesData load_data(const std::string& path, int lags, bool header,
                         bool center) {
  require_readable(path);
  TimeSeriesData data(read_csv(path, header), lags);
  return center ? center_columns(data) : data;
}

void emit(const std::string& path, const std::string& contents,
          std::ostream& out) {
  if (path.empty()) {
    out << contents;
  } else {
    write_file_atomic(path, contents);
  }
}

int cmd_fit(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  require_writable_target(cfg.output);
  const Algorithm algorithm = parse_algorithm(cfg.algo);
  const SolveOptions opts = solve_options(cfg);
  const TimeSeriesData data = load_data(cfg.input, cfg.lags, cfg.header, cfg.center);
  const SolveReport report = solve(data, algorithm, opts);
  emit(cfg.output, dump_json(to_json(fit_model_from_report(report, data))), out);
  if (!report.converged) {
    err << "fit did not converge [" << to_string(report.status)
        << "]: " << report.diagnostic << '\n';
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_extract(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  require_writable_target(cfg.output);
  require_writable_target(cfg.scores);
  const Algorithm algorithm = parse_algorithm(cfg.algo);
  const SolveOptions opts = solve_options(cfg);
  const TimeSeriesData data = load_data(cfg.input, cfg.lags, cfg.header, cfg.center);
  const int k = cfg.components > 0 ? cfg.components
                                   : std::min(data.features(), 10);
  const DiPCAModel model = extract_components(data, k, opts, algorithm);
  if (model.components.empty()) {
    throw Error(ErrorCode::kZeroScore, model.stop_reason);
  }

  const int got = static_cast<int>(model.components.size());
  Eigen::MatrixXd raw = data.x();
  raw.rowwise() += data.column_means().transpose();
  const double scale = std::max(raw.norm(), 1e-300);
  const double rel_error = (raw - reconstruct(model, got)).norm() / scale;

  if (!cfg.scores.empty()) {
    Eigen::MatrixXd t(data.x().rows(), got);
    std::vector<std::string> header;
    for (int j = 0; j < got; ++j) {
      t.col(j) = model.components[j].t;
      header.push_back("t" + std::to_string(j + 1));
    }
    write_file_atomic(cfg.scores, to_csv(t, header));
  }
  if (cfg.output.empty()) {
    out << dump_json(to_json(model));
  } else {
    write_file_atomic(cfg.output, dump_json(to_json(model)));
  }
  out << "components: " << got << "\n"
      << "reconstruction_relative_error: " << rel_error << "\n";
  if (!model.stop_reason.empty()) err << "stopped early: " << model.stop_reason << '\n';

  const bool all_converged =
      std::all_of(model.components.begin(), model.components.end(),
                  [](const LatentComponent& c) { return c.diagnostics.converged; });
  if (!all_converged) {
    err << "one or more components did not converge\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_check(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  require_readable(cfg.input);
  require_writable_target(cfg.output);
  json doc;
  {
    std::ifstream in(cfg.input);
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParse, cfg.input + ": " + e.what());
    }
  }
  const FitModel model = fit_model_from_json(doc);
  const TimeSeriesData data = load_data(cfg.data, model.s, cfg.header, model.centered);
  if (data.features() != model.m) {
    throw Error(ErrorCode::kDimensionMismatch,
                "model has m = " + std::to_string(model.m) + " but data has " +
                    std::to_string(data.features()) + " columns");
  }
  const KernelSet kernels = build_kernels(data, KernelStorage::kDense);
  const FixedPointClass cls = classify_fixed_point(model.w, model.beta, kernels);

  json verdict = {
      {"inertia", {cls.inertia.n_plus, cls.inertia.n_minus, cls.inertia.n_zero}},
      {"expected_inertia", {2, model.m + model.s, 0}},
      {"is_max", cls.is_max},
      {"reduced_negative_definite", cls.reduced_negative_definite},
      {"equivalence_holds", cls.equivalence_holds},
      {"fraction_negative", cls.fraction_negative},
      {"lambda", cls.lambda},
      {"kkt_residual", cls.kkt_residual},
      {"zero_tol", cls.zero_tol}};
  if (cls.reduced_spectrum.size() > 0) {
    verdict["min_reduced_eigenvalue"] = cls.reduced_spectrum.minCoeff();
    verdict["max_reduced_eigenvalue"] = cls.reduced_spectrum.maxCoeff();
  } else {
    verdict["min_reduced_eigenvalue"] = nullptr;
    verdict["max_reduced_eigenvalue"] = nullptr;
  }
  const std::string text = dump_json(verdict);
  out << text;
  if (!cfg.output.empty()) write_file_atomic(cfg.output, text);
  if (!cls.equivalence_holds) {
    err << "warning: inertia test and reduced-Hessian test disagree\n";
  }
  return cls.is_max ? kExitOk : kExitNotMaximum;
}

int cmd_gen(const CliConfig& cfg, std::ostream& out, std::ostream&) {
  require_writable_target(cfg.output);
  require_writable_target(cfg.truth);
  SyntheticConfig synth;
  if (!cfg.preset.empty()) {
    synth = bench_preset(cfg.preset).front();
  } else {
    synth.m = cfg.m;
    synth.n = cfg.n;
    synth.s = cfg.lags;
    synth.sigma = cfg.sigma;
    synth.planted_components = cfg.planted;
  }
  synth.seed = cfg.seed;
  const SyntheticInstance inst = gen_synthetic(synth);

  std::vector<std::string> header;
  if (cfg.header) {
    for (int j = 0; j < synth.m; ++j) header.push_back("x" + std::to_string(j + 1));
  }
  emit(cfg.output, to_csv(inst.data.x(), header), out);

  if (!cfg.truth.empty()) {
    json planted = json::array();
    for (const auto& p : inst.planted) {
      planted.push_back(
          {{"w", std::vector<double>(p.w.data(), p.w.data() + p.w.size())},
           {"beta", std::vector<double>(p.beta.data(), p.beta.data() + p.beta.size())},
           {"ar_coefficients",
            std::vector<double>(p.ar_coefficients.data(),
                                p.ar_coefficients.data() + p.ar_coefficients.size())},
           {"lambda", p.lambda}});
    }
    json truth = {{"m", synth.m},         {"n", synth.n},
                  {"s", synth.s},         {"sigma", synth.sigma},
                  {"seed", synth.seed},   {"planted", std::move(planted)}};
    write_file_atomic(cfg.truth, dump_json(truth));
  }
  return kExitOk;
}

int cmd_bench(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  require_writable_target(cfg.output);
  require_writable_target(cfg.summary);
  const std::vector<SyntheticConfig> sweep =
      bench_preset(cfg.preset.empty() ? "default" : cfg.preset);
  std::vector<Algorithm> algorithms;
  if (cfg.algorithms.empty()) {
    algorithms = {Algorithm::kI, Algorithm::kII};
  } else {
    for (const auto& a : cfg.algorithms) algorithms.push_back(parse_algorithm(a));
  }
  BenchOptions opts;
  opts.solve = solve_options(cfg);
  opts.workers = cfg.workers;
  opts.classify = cfg.classify;
  const BenchReport report = run_benchmark(sweep, algorithms, opts);

  emit(cfg.output, bench_csv(report), out);
  if (!cfg.summary.empty()) write_file_atomic(cfg.summary, bench_summary_json(report));
  const long failed = std::count_if(report.records.begin(), report.records.end(),
                                    [](const BenchRecord& r) { return !r.converged; });
  if (failed > 0) err << failed << " of " << report.records.size()
                      << " fits did not converge\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamic inner PCA: latent AR components of multivariate time series"};
  app.require_subcommand(1);
  CliConfig cfg;

  auto add_solver_flags = [&cfg](CLI::App* sub, bool with_lags = true) {
    sub->add_option("--algo", cfg.algo, "Algorithm: 1 (one power step) or 2 "
                                        "(coordinate maximization)")
        ->check(CLI::IsMember(std::vector<std::string>{"1", "2", "I", "II"}));
    if (with_lags) {
      sub->add_option("--lags", cfg.lags, "AR lag order s")->check(CLI::PositiveNumber);
    }
    sub->add_option("--tol", cfg.tol, "Stopping tolerance on ||d - lambda w||_inf")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "Seed for all randomness (default 42)");
    sub->add_option("--max-outer", cfg.max_outer, "Outer iteration cap")
        ->check(CLI::PositiveNumber);
    sub->add_option("--max-power", cfg.max_power, "Inner power iteration cap")
        ->check(CLI::PositiveNumber);
  };
  auto add_data_flags = [&cfg](CLI::App* sub) {
    sub->add_flag("--center,!--no-center", cfg.center,
                  "Subtract column means before fitting (default on)");
    sub->add_flag("--header", cfg.header, "Skip the first CSV row");
  };

  CLI::App* fit = app.add_subcommand("fit", "Fit one latent component");
  fit->add_option("input", cfg.input, "Data CSV")->required();
  fit->add_option("-o,--output", cfg.output, "Model JSON (stdout if omitted)");
  add_solver_flags(fit);
  add_data_flags(fit);

  CLI::App* extract = app.add_subcommand("extract", "Extract k components by deflation");
  extract->add_option("input", cfg.input, "Data CSV")->required();
  extract->add_option("-o,--output", cfg.output, "Model JSON (stdout if omitted)");
  extract->add_option("--components", cfg.components, "Number of components k")
      ->check(CLI::PositiveNumber);
  extract->add_option("--scores", cfg.scores, "Write scores t as CSV");
  add_solver_flags(extract);
  add_data_flags(extract);

  CLI::App* check = app.add_subcommand("check", "Second-order test of a fitted model");
  check->add_option("model", cfg.input, "Model JSON from fit")->required();
  check->add_option("data", cfg.data, "Data CSV the model was fitted on")->required();
  check->add_option("-o,--output", cfg.output, "Also write the verdict JSON here");
  check->add_flag("--header", cfg.header, "Skip the first CSV row");

  CLI::App* gen = app.add_subcommand("gen", "Generate planted synthetic data");
  gen->add_option("-o,--output", cfg.output, "Data CSV (stdout if omitted)");
  gen->add_option("--preset", cfg.preset, "Use the shape of a bench preset");
  gen->add_option("--m", cfg.m, "Features")->check(CLI::PositiveNumber);
  gen->add_option("--n", cfg.n, "Prediction window length")->check(CLI::PositiveNumber);
  gen->add_option("--lags", cfg.lags, "AR lag order s")->check(CLI::PositiveNumber);
  gen->add_option("--sigma", cfg.sigma, "Noise standard deviation")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--planted", cfg.planted, "Planted components")
      ->check(CLI::PositiveNumber);
  gen->add_option("--seed", cfg.seed, "Generator seed (default 42)");
  gen->add_option("--truth", cfg.truth, "Write planted ground truth JSON");
  gen->add_flag("--header", cfg.header, "Emit a header row");

  CLI::App* bench = app.add_subcommand("bench", "Run a benchmark sweep");
  bench->add_option("--preset", cfg.preset, "Sweep preset (default: default)");
  bench->add_option("-o,--output", cfg.output, "Report CSV (stdout if omitted)");
  bench->add_option("--summary", cfg.summary, "JSON summary with cumulative curves");
  bench->add_option("--workers", cfg.workers, "Concurrent instances")
      ->check(CLI::PositiveNumber);
  bench->add_option("--algorithms", cfg.algorithms, "Subset of algorithms (1 2)");
  bench->add_flag("!--no-classify", cfg.classify, "Skip the second-order test");
  add_solver_flags(bench, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  try {
    if (fit->parsed()) return cmd_fit(cfg, out, err);
    if (extract->parsed()) return cmd_extract(cfg, out, err);
    if (check->parsed()) return cmd_check(cfg, out, err);
    if (gen->parsed()) return cmd_gen(cfg, out, err);
    if (bench->parsed()) return cmd_bench(cfg, out, err);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace dipca::cli
