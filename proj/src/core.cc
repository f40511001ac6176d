#include "dipca/core.h"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "dipca/error.h"

namespace dipca {

namespace {

constexpr double kDirectionFloor = 1e-14;
constexpr double kUnitTolerance = 1e-9;

void require_unit(const Eigen::VectorXd& v, const char* name) {
  if (std::abs(v.norm() - 1.0) > kUnitTolerance) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " must be a unit vector (norm " +
                    std::to_string(v.norm()) + ")");
  }
}

Eigen::VectorXd random_unit(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  do {
    for (int i = 0; i < dim; ++i) v(i) = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

Eigen::VectorXd normalized_start(const Eigen::VectorXd& v, int dim,
                                 const char* name) {
  if (v.size() != dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string("user-supplied ") + name + " has length " +
                    std::to_string(v.size()) + ", expected " +
                    std::to_string(dim));
  }
  if (!v.allFinite() || v.norm() == 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("user-supplied ") + name +
                    " must be finite and nonzero");
  }
  return v / v.norm();
}

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

// Fills c, d, lambda and the residual for the current (w, beta) from the
// kernel products y_i = Y_i w (columns of `products`).
void refresh(SolverState& state, const Eigen::MatrixXd& products) {
  state.c = products.transpose() * state.w;
  state.d = products * state.beta;
  state.lambda = state.c.dot(state.beta);
  state.residual_inf = inf_norm(state.d - state.lambda * state.w);
}

SolveStatus status_for(ErrorCode code) {
  return code == ErrorCode::kDegenerateDirection
             ? SolveStatus::kDegenerateDirection
             : SolveStatus::kZeroDirection;
}

// Shared outer loop of both algorithms. `next_w` produces w^(l+1) from the
// current iterate; everything after it (kernel products, beta update,
// residual) is common.
template <typename NextW>
SolveReport run_outer(const KernelSet& kernels, const SolveOptions& opts,
                      Algorithm algorithm, NextW&& next_w) {
  const auto start = std::chrono::steady_clock::now();
  SolveReport report;
  report.algorithm = algorithm;
  SolverState state = init_state(kernels, opts);
  report.best = state;

  int flip_streak = 0;
  try {
    for (int l = 0; l < opts.max_outer; ++l) {
      const double best_before = report.best.residual_inf;
      state.w = next_w(state, report);

      const Eigen::MatrixXd products = kernels.apply_all(state.w);
      const Eigen::VectorXd c = products.transpose() * state.w;
      state.rayleigh_before_beta = c.dot(state.beta);
      BetaUpdate update = beta_from_c(c);
      state.beta = std::move(update.beta);
      state.c = std::move(update.c);
      state.lambda = update.lambda;
      state.d = products * state.beta;
      state.residual_inf = inf_norm(state.d - state.lambda * state.w);
      state.iter = l + 1;

      report.lambda_history.push_back(state.lambda);
      report.residual_history.push_back(state.residual_inf);
      if (state.residual_inf < report.best.residual_inf) report.best = state;

      if (state.residual_inf < opts.eps_tol) {
        report.converged = true;
        report.status = SolveStatus::kConverged;
        break;
      }

      // The beta step always restores lambda >= 0, so a negative Rayleigh
      // quotient just before it is a sign flip between consecutive steps.
      // A dominant negative eigenvalue more often shows up as a period-2
      // cycle: lambda alternates up/down while w keeps flipping along the
      // negative eigendirection.
      const auto& h = report.lambda_history;
      const std::size_t len = h.size();
      const bool alternating =
          len >= 3 && (h[len - 1] - h[len - 2]) * (h[len - 2] - h[len - 3]) < 0.0;
      const bool flipped = state.rayleigh_before_beta < 0.0 || alternating;
      const bool stalled = state.residual_inf >= best_before;
      flip_streak = (flipped && stalled) ? flip_streak + 1 : 0;
      if (flip_streak >= opts.oscillation_window) {
        report.status = SolveStatus::kOscillation;
        report.diagnostic =
            "lambda estimate oscillated with no residual progress for " +
            std::to_string(flip_streak) +
            " consecutive iterations (negative dominant eigenvalue)";
        break;
      }
    }
    if (!report.converged && report.status == SolveStatus::kMaxIterations) {
      report.diagnostic = "reached max_outer = " +
                          std::to_string(opts.max_outer) +
                          " without meeting eps_tol";
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateDirection &&
        e.code() != ErrorCode::kZeroDirection) {
      throw;
    }
    report.status = status_for(e.code());
    report.diagnostic = e.what();
    // Y_beta w = 0 together with c = 0 means w is annihilated by every
    // kernel quadratic form; report the more specific cause.
    if (report.status == SolveStatus::kZeroDirection &&
        state.c.norm() < kDirectionFloor) {
      report.status = SolveStatus::kDegenerateDirection;
      report.diagnostic =
          "w lies in the null direction of every kernel quadratic form "
          "(||c|| < 1e-14)";
    }
  }

  report.state = std::move(state);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

}  // namespace

const char* to_string(Algorithm algorithm) {
  return algorithm == Algorithm::kI ? "I" : "II";
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged: return "converged";
    case SolveStatus::kMaxIterations: return "max-iterations";
    case SolveStatus::kDegenerateDirection: return "degenerate-direction";
    case SolveStatus::kZeroDirection: return "zero-direction";
    case SolveStatus::kOscillation: return "oscillation";
  }
  return "unknown";
}

void SolveOptions::validate() const {
  if (!(eps_tol > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "eps_tol must be > 0");
  }
  if (inner_tol && !(*inner_tol > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "inner_tol must be > 0");
  }
  if (max_outer < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_outer must be >= 1");
  }
  if (max_power < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_power must be >= 1");
  }
  if (oscillation_window < 1) {
    throw Error(ErrorCode::kInvalidArgument, "oscillation_window must be >= 1");
  }
}

SolverState init_state(const KernelSet& kernels, const SolveOptions& opts) {
  opts.validate();
  SolverState state;
  if (opts.init_mode == InitMode::kUserSupplied) {
    state.w = normalized_start(opts.w0, kernels.features(), "w0");
    state.beta = normalized_start(opts.beta0, kernels.lags(), "beta0");
  } else {
    std::mt19937_64 rng(opts.seed);
    state.w = random_unit(kernels.features(), rng);
    state.beta = random_unit(kernels.lags(), rng);
  }
  refresh(state, kernels.apply_all(state.w));
  state.rayleigh_before_beta = state.lambda;
  return state;
}

BetaUpdate beta_from_c(const Eigen::VectorXd& c) {
  const double norm = c.norm();
  if (!(norm >= kDirectionFloor)) {
    throw Error(ErrorCode::kDegenerateDirection,
                "w lies in the null direction of every kernel quadratic form "
                "(||c|| < 1e-14)");
  }
  return BetaUpdate{c, c / norm, norm};
}

BetaUpdate beta_update(const Eigen::VectorXd& w, const KernelSet& kernels) {
  require_unit(w, "w");
  const Eigen::MatrixXd products = kernels.apply_all(w);
  return beta_from_c(products.transpose() * w);
}

PowerStep power_step(const KernelSet& kernels, const Eigen::VectorXd& beta,
                     const Eigen::VectorXd& w) {
  require_unit(w, "w");
  PowerStep step;
  step.d = kernels.apply_combined(beta, w);
  const double norm = step.d.norm();
  if (!(norm >= kDirectionFloor)) {
    throw Error(ErrorCode::kZeroDirection, "||Y_beta w|| < 1e-14");
  }
  step.w_next = step.d / norm;
  return step;
}

WSubproblem solve_w_subproblem(const KernelSet& kernels,
                               const Eigen::VectorXd& beta,
                               const Eigen::VectorXd& w0,
                               const SolveOptions& opts) {
  require_unit(beta, "beta");
  require_unit(w0, "w0");
  const double tol = opts.inner_tol.value_or(opts.eps_tol);

  // Dense kernels: form Y_beta once, then each step is one m x m product.
  Eigen::MatrixXd combined;
  const bool dense = kernels.storage() == KernelStorage::kDense;
  if (dense) combined = combine_kernels(kernels, beta);
  auto apply = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    if (dense) return combined * v;
    return kernels.apply_combined(beta, v);
  };

  WSubproblem out;
  out.w = w0;
  Eigen::VectorXd d = apply(out.w);
  double rho_prev = out.w.dot(d);
  for (int k = 1; k <= opts.max_power; ++k) {
    const double norm = d.norm();
    if (!(norm >= kDirectionFloor)) {
      throw Error(ErrorCode::kZeroDirection, "||Y_beta w|| < 1e-14");
    }
    out.w = d / norm;
    d = apply(out.w);
    const double rho = out.w.dot(d);
    out.lambda_w = rho;
    out.power_iters = k;
    const double change = rho_prev != 0.0 ? std::abs(rho / rho_prev - 1.0)
                                          : std::abs(rho - rho_prev);
    if (change < tol) {
      out.converged = true;
      return out;
    }
    rho_prev = rho;
  }
  return out;
}

KktResidual kkt_residual(const SolverState& state, const KernelSet& kernels) {
  KktResidual out;
  const Eigen::VectorXd d = kernels.apply_combined(state.beta, state.w);
  const double lambda = state.w.dot(d);
  out.s_vec = d - lambda * state.w;
  out.res_inf = inf_norm(out.s_vec);
  return out;
}

double objective(const Eigen::VectorXd& w, const Eigen::VectorXd& beta,
                 const KernelSet& kernels) {
  require_unit(w, "w");
  require_unit(beta, "beta");
  return w.dot(kernels.apply_combined(beta, w));
}

double score_objective(const TimeSeriesData& data, const Eigen::VectorXd& w,
                       const Eigen::VectorXd& beta) {
  if (w.size() != data.features() || beta.size() != data.lags()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "w/beta do not match the data dimensions");
  }
  const Eigen::VectorXd t = data.x() * w;
  const int s = data.lags();
  double total = 0.0;
  for (Eigen::Index i = s; i < t.size(); ++i) {
    double prediction = 0.0;
    for (int j = 1; j <= s; ++j) prediction += beta(j - 1) * t(i - j);
    total += t(i) * prediction;
  }
  return total;
}

SolveReport solve_dipca_I(const KernelSet& kernels, const SolveOptions& opts) {
  return run_outer(kernels, opts, Algorithm::kI,
                   [](const SolverState& state, SolveReport& report) {
                     const double norm = state.d.norm();
                     if (!(norm >= kDirectionFloor)) {
                       throw Error(ErrorCode::kZeroDirection,
                                   "||Y_beta w|| < 1e-14");
                     }
                     ++report.power_iterations;
                     return Eigen::VectorXd(state.d / norm);
                   });
}

SolveReport solve_dipca_II(const KernelSet& kernels, const SolveOptions& opts) {
  return run_outer(
      kernels, opts, Algorithm::kII,
      [&](const SolverState& state, SolveReport& report) {
        WSubproblem sub =
            solve_w_subproblem(kernels, state.beta, state.w, opts);
        report.power_iterations += sub.power_iters;
        if (!sub.converged) ++report.inner_cap_hits;
        return std::move(sub.w);
      });
}

SolveReport solve(const KernelSet& kernels, Algorithm algorithm,
                  const SolveOptions& opts) {
  return algorithm == Algorithm::kI ? solve_dipca_I(kernels, opts)
                                    : solve_dipca_II(kernels, opts);
}

SolveReport solve(const TimeSeriesData& data, Algorithm algorithm,
                  const SolveOptions& opts, KernelStorage storage) {
  return solve(build_kernels(data, storage), algorithm, opts);
}

}  // namespace dipca
