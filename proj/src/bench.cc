#include "dipca/bench.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "dipca/error.h"
#include "dipca/secondorder.h"

namespace dipca {

namespace {

constexpr int kBurnIn = 200;
constexpr int kMaxArDraws = 1000;

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Eigen::VectorXd draw_stable_ar(int s, double margin, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  Eigen::VectorXd phi(s);
  for (int attempt = 0; attempt < kMaxArDraws; ++attempt) {
    for (int i = 0; i < s; ++i) phi(i) = uniform(rng);
    if (ar_spectral_radius(phi) <= 1.0 - margin) return phi;
  }
  throw Error(ErrorCode::kResampleFailure,
              "no stable AR(" + std::to_string(s) + ") draw with margin " +
                  std::to_string(margin) + " in " +
                  std::to_string(kMaxArDraws) + " attempts");
}

Eigen::VectorXd simulate_ar(const Eigen::VectorXd& phi, double scale, int length,
                            std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int s = static_cast<int>(phi.size());
  Eigen::VectorXd path = Eigen::VectorXd::Zero(kBurnIn + length);
  for (int k = 0; k < path.size(); ++k) {
    double value = scale * normal(rng);
    for (int i = 1; i <= s && k - i >= 0; ++i) value += phi(i - 1) * path(k - i);
    path(k) = value;
  }
  return path.tail(length);
}

}  // namespace

double ar_spectral_radius(const Eigen::VectorXd& coefficients) {
  const long s = coefficients.size();
  if (s == 0) return 0.0;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(s, s);
  companion.row(0) = coefficients.transpose();
  if (s > 1) companion.bottomLeftCorner(s - 1, s - 1).setIdentity();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

SyntheticInstance gen_synthetic(const SyntheticConfig& cfg) {
  if (cfg.m < 1 || cfg.n < 1 || cfg.s < 1 || cfg.s >= cfg.n) {
    throw Error(ErrorCode::kInvalidArgument,
                "synthetic dimensions need m, n, s >= 1 and s < n");
  }
  if (cfg.planted_components < 1 || cfg.planted_components > cfg.m) {
    throw Error(ErrorCode::kInvalidArgument,
                "planted_components must lie in 1..m");
  }
  if (!(cfg.sigma >= 0.0) || !(cfg.ar_spectral_margin > 0.0) ||
      !(cfg.ar_spectral_margin < 1.0) || !(cfg.signal_scale > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "need sigma >= 0, margin in (0, 1) and signal_scale > 0");
  }

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int rows = cfg.n + cfg.s;
  const int k = cfg.planted_components;

  Eigen::MatrixXd gaussian(cfg.m, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < cfg.m; ++i) gaussian(i, j) = normal(rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  const Eigen::MatrixXd directions =
      qr.householderQ() * Eigen::MatrixXd::Identity(cfg.m, k);

  std::vector<PlantedComponent> planted;
  Eigen::MatrixXd signal = Eigen::MatrixXd::Zero(rows, cfg.m);
  for (int j = 0; j < k; ++j) {
    PlantedComponent comp;
    comp.w = directions.col(j);
    comp.ar_coefficients = draw_stable_ar(cfg.s, cfg.ar_spectral_margin, rng);
    comp.t = simulate_ar(comp.ar_coefficients, cfg.signal_scale / (j + 1),
                         rows, rng);
    Eigen::VectorXd c(cfg.s);
    for (int i = 1; i <= cfg.s; ++i) {
      c(i - 1) = comp.t.segment(cfg.s, cfg.n).dot(comp.t.segment(cfg.s - i, cfg.n));
    }
    comp.lambda = c.norm();
    comp.beta = comp.lambda > 0.0 ? Eigen::VectorXd(c / comp.lambda)
                                  : Eigen::VectorXd::Zero(cfg.s);
    signal.noalias() += comp.t * comp.w.transpose();
    planted.push_back(std::move(comp));
  }

  // Noise is drawn for every sigma so sweeps differing only in sigma share
  // both the signal and the noise pattern.
  Eigen::MatrixXd noise(rows, cfg.m);
  for (int j = 0; j < cfg.m; ++j)
    for (int i = 0; i < rows; ++i) noise(i, j) = normal(rng);

  Eigen::MatrixXd x = signal + cfg.sigma * noise;
  return SyntheticInstance{TimeSeriesData(std::move(x), cfg.s),
                           std::move(signal), std::move(planted)};
}

BenchReport run_benchmark(const std::vector<SyntheticConfig>& instances,
                          const std::vector<Algorithm>& algorithms,
                          const BenchOptions& opts) {
  if (instances.empty() || algorithms.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "benchmark needs at least one instance and one algorithm");
  }
  opts.solve.validate();
  const int workers = std::max(1, opts.workers);
  const std::size_t per_instance = algorithms.size();

  BenchReport report;
  report.workers = workers;
  report.records.resize(instances.size() * per_instance);

  auto run_instance = [&](std::size_t idx) {
    const SyntheticConfig& cfg = instances[idx];
    for (std::size_t a = 0; a < per_instance; ++a) {
      BenchRecord& rec = report.records[idx * per_instance + a];
      rec.instance_id = static_cast<int>(idx) + 1;
      rec.algorithm = algorithms[a];
      rec.config = cfg;
    }
    try {
      const SyntheticInstance inst = gen_synthetic(cfg);
      const auto t0 = std::chrono::steady_clock::now();
      const KernelSet kernels = build_kernels(inst.data, opts.storage);
      const double kernel_time =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      for (std::size_t a = 0; a < per_instance; ++a) {
        BenchRecord& rec = report.records[idx * per_instance + a];
        const SolveReport fit = solve(kernels, rec.algorithm, opts.solve);
        const SolverState& st = fit.converged ? fit.state : fit.best;
        rec.objective = st.lambda;
        rec.wall_time_s = fit.wall_time_s;
        rec.total_time_s = kernel_time + fit.wall_time_s;
        rec.iterations = fit.state.iter;
        rec.converged = fit.converged;
        rec.status = fit.status;
        rec.residual_inf = st.residual_inf;
        rec.recovery = std::abs(st.w.dot(inst.planted.front().w));
        rec.fraction_negative = std::numeric_limits<double>::quiet_NaN();
        if (!fit.converged) rec.note = fit.diagnostic;
        if (!opts.classify) continue;
        try {
          const FixedPointClass cls = classify_fixed_point(st.w, st.beta, kernels);
          rec.classified = true;
          rec.is_max = cls.is_max;
          rec.equivalence_holds = cls.equivalence_holds;
          rec.fraction_negative = cls.fraction_negative;
        } catch (const Error& e) {
          rec.note = e.what();
        }
      }
    } catch (const Error& e) {
      for (std::size_t a = 0; a < per_instance; ++a) {
        BenchRecord& rec = report.records[idx * per_instance + a];
        rec.fraction_negative = std::numeric_limits<double>::quiet_NaN();
        rec.note = e.what();
      }
    }
  };

  if (workers == 1) {
    for (std::size_t i = 0; i < instances.size(); ++i) run_instance(i);
    return report;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < instances.size(); i = next++) {
        run_instance(i);
      }
    });
  }
  pool.clear();  // joins
  return report;
}

std::vector<std::string> bench_preset_names() {
  return {"default", "noiseless", "m200-sigma1", "m200-sigma10", "paper-shape"};
}

std::vector<SyntheticConfig> bench_preset(const std::string& name) {
  SyntheticConfig base;
  base.m = 50;
  base.n = 500;
  base.s = 4;
  base.sigma = 1.0;
  if (name == "default") {
  } else if (name == "noiseless") {
    base.sigma = 0.0;
  } else if (name == "m200-sigma1") {
    base.m = 200;
  } else if (name == "m200-sigma10") {
    base.m = 200;
    base.sigma = 10.0;
  } else if (name == "paper-shape") {
    base.m = 5106;
    base.n = 71;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown preset '" + name + "'");
  }
  std::vector<SyntheticConfig> sweep;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    base.seed = seed;
    sweep.push_back(base);
  }
  return sweep;
}

std::string bench_csv(const BenchReport& report) {
  std::ostringstream out;
  out << "instance_id,algorithm,m,n,s,sigma,seed,objective,wall_time_s,"
         "iterations,converged,fraction_negative\n";
  for (const auto& r : report.records) {
    out << r.instance_id << ',' << to_string(r.algorithm) << ',' << r.config.m
        << ',' << r.config.n << ',' << r.config.s << ','
        << fmt17(r.config.sigma) << ',' << r.config.seed << ','
        << fmt17(r.objective) << ',' << fmt17(r.wall_time_s) << ','
        << r.iterations << ',' << (r.converged ? "true" : "false") << ','
        << fmt17(r.fraction_negative) << '\n';
  }
  return out.str();
}

std::string bench_summary_json(const BenchReport& report) {
  using nlohmann::json;
  json rows = json::array();
  std::map<std::string, std::vector<const BenchRecord*>> by_algorithm;
  for (const auto& r : report.records) {
    by_algorithm[to_string(r.algorithm)].push_back(&r);
    json row = {{"instance_id", r.instance_id},
                {"algorithm", to_string(r.algorithm)},
                {"seed", r.config.seed},
                {"sigma", r.config.sigma},
                {"objective", r.objective},
                {"wall_time_s", r.wall_time_s},
                {"total_time_s", r.total_time_s},
                {"iterations", r.iterations},
                {"converged", r.converged},
                {"status", to_string(r.status)},
                {"residual_inf", r.residual_inf},
                {"classified", r.classified},
                {"is_max", r.is_max},
                {"equivalence_holds", r.equivalence_holds},
                {"recovery", r.recovery}};
    row["fraction_negative"] =
        std::isnan(r.fraction_negative) ? json(nullptr) : json(r.fraction_negative);
    if (!r.note.empty()) row["note"] = r.note;
    rows.push_back(std::move(row));
  }

  // Cumulative curves: each metric's values sorted ascending (empirical CDF
  // abscissae; the ordinate of entry i is (i + 1) / count).
  json curves = json::object();
  for (const auto& [name, recs] : by_algorithm) {
    std::vector<double> objective, time, fraction, iterations;
    for (const BenchRecord* r : recs) {
      objective.push_back(r->objective);
      time.push_back(r->wall_time_s);
      iterations.push_back(r->iterations);
      if (!std::isnan(r->fraction_negative)) fraction.push_back(r->fraction_negative);
    }
    for (auto* v : {&objective, &time, &fraction, &iterations}) {
      std::sort(v->begin(), v->end());
    }
    curves[name] = {{"objective", objective},
                    {"wall_time_s", time},
                    {"fraction_negative", fraction},
                    {"iterations", iterations}};
  }
  json summary = {{"workers", report.workers},
                  {"records", std::move(rows)},
                  {"cumulative", std::move(curves)}};
  return summary.dump(2) + "\n";
}

OracleResult brute_force_oracle(const KernelSet& kernels, int restarts,
                                int refine_iters, std::uint64_t seed) {
  const int m = kernels.features();
  const int s = kernels.lags();
  if (m > 6 || s > 3) {
    throw Error(ErrorCode::kSizeGuard,
                "brute-force oracle is limited to m <= 6 and s <= 3");
  }
  if (restarts < 1 || refine_iters < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "restarts and refine_iters must be >= 1");
  }

  std::vector<Eigen::MatrixXd> dense;
  for (int i = 1; i <= s; ++i) dense.push_back(kernels.kernel(i));
  auto combined = [&](const Eigen::VectorXd& beta) {
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < s; ++i) y += beta(i) * dense[i];
    return y;
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  OracleResult best;
  best.objective = -std::numeric_limits<double>::infinity();

  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd beta(s);
    if (r < 2 * s) {
      // Signed coordinate starts first, then random directions.
      beta.setZero();
      beta(r / 2) = (r % 2 == 0) ? 1.0 : -1.0;
    } else {
      do {
        for (int i = 0; i < s; ++i) beta(i) = normal(rng);
      } while (beta.norm() == 0.0);
      beta.normalize();
    }
    for (int it = 0; it < refine_iters; ++it) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(combined(beta));
      const Eigen::VectorXd w = eig.eigenvectors().col(m - 1);
      const double value = eig.eigenvalues()(m - 1);
      if (value > best.objective) best = {value, w, beta};

      Eigen::VectorXd c(s);
      for (int i = 0; i < s; ++i) c(i) = w.dot(dense[i] * w);
      const double norm = c.norm();
      if (norm < 1e-14) break;
      const Eigen::VectorXd next = c / norm;
      if (norm > best.objective) best = {norm, w, next};
      if ((next - beta).lpNorm<Eigen::Infinity>() < 1e-15) break;
      beta = next;
    }
  }
  return best;
}

}  // namespace dipca
