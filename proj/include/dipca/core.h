#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dipca/lagmat.h"

namespace dipca {

enum class Algorithm {
  kI,   // one power step per outer iteration
  kII,  // coordinate maximization: w-subproblem solved to convergence
};

const char* to_string(Algorithm algorithm);

enum class InitMode { kSeededRandom, kUserSupplied };

struct SolveOptions {
  double eps_tol = 1e-6;
  // Ratio-test tolerance of the inner power loop (algorithm II). Defaults to
  // eps_tol.
  std::optional<double> inner_tol;
  int max_outer = 10000;
  int max_power = 1000;
  std::uint64_t seed = 42;
  InitMode init_mode = InitMode::kSeededRandom;
  // Only read when init_mode == kUserSupplied; normalized on use.
  Eigen::VectorXd w0;
  Eigen::VectorXd beta0;
  // Consecutive sign-flipping, non-improving iterations before giving up.
  int oscillation_window = 10;

  // Throws Error(kInvalidArgument) on out-of-range values.
  void validate() const;
};

// One iterate (w, beta) with the quantities Algorithm I/II derive from it.
struct SolverState {
  Eigen::VectorXd w;
  Eigen::VectorXd beta;
  Eigen::VectorXd c;  // c_i = w^T Y_i w
  Eigen::VectorXd d;  // Y_beta w
  // ||c|| after a beta update; equals w^T Y_beta w there.
  double lambda = 0.0;
  // w^T Y_beta w with the beta in force before the last beta update.
  double rayleigh_before_beta = 0.0;
  double residual_inf = 0.0;
  int iter = 0;
};

enum class SolveStatus {
  kConverged,
  kMaxIterations,
  kDegenerateDirection,  // ||c|| vanished: w annihilates every kernel form
  kZeroDirection,        // ||Y_beta w|| vanished
  kOscillation,          // lambda keeps flipping direction, no residual progress
};

const char* to_string(SolveStatus status);

struct SolveReport {
  SolverState state;  // last iterate
  SolverState best;   // lowest residual seen
  bool converged = false;
  SolveStatus status = SolveStatus::kMaxIterations;
  std::string diagnostic;
  std::vector<double> lambda_history;
  std::vector<double> residual_history;
  double wall_time_s = 0.0;
  Algorithm algorithm = Algorithm::kI;
  long power_iterations = 0;
  // Outer iterations whose inner power loop stopped at max_power.
  int inner_cap_hits = 0;
};

SolverState init_state(const KernelSet& kernels, const SolveOptions& opts);

struct BetaUpdate {
  Eigen::VectorXd c;
  Eigen::VectorXd beta;
  double lambda = 0.0;
};

// Closed-form maximizer of c^T beta over the unit ball.
// Throws Error(kDegenerateDirection) when ||c|| < 1e-14.
BetaUpdate beta_from_c(const Eigen::VectorXd& c);
BetaUpdate beta_update(const Eigen::VectorXd& w, const KernelSet& kernels);

struct PowerStep {
  Eigen::VectorXd w_next;
  Eigen::VectorXd d;
};

// d = Y_beta w, w_next = d / ||d||. Throws Error(kZeroDirection) when
// ||d|| < 1e-14.
PowerStep power_step(const KernelSet& kernels, const Eigen::VectorXd& beta,
                     const Eigen::VectorXd& w);

struct WSubproblem {
  Eigen::VectorXd w;
  double lambda_w = 0.0;  // Rayleigh quotient w^T Y_beta w
  int power_iters = 0;
  bool converged = false;  // false when max_power was hit
};

// Power iteration with beta fixed until |rho_{k+1} / rho_k - 1| < inner tol.
WSubproblem solve_w_subproblem(const KernelSet& kernels,
                               const Eigen::VectorXd& beta,
                               const Eigen::VectorXd& w0,
                               const SolveOptions& opts);

struct KktResidual {
  Eigen::VectorXd s_vec;
  double res_inf = 0.0;
};

// s = Y_beta w - (w^T Y_beta w) w, recomputed from state.w and state.beta.
KktResidual kkt_residual(const SolverState& state, const KernelSet& kernels);

// w^T Y_beta w.
double objective(const Eigen::VectorXd& w, const Eigen::VectorXd& beta,
                 const KernelSet& kernels);

// sum_{i=s+1}^{n+s} t_i * (beta_1 t_{i-1} + ... + beta_s t_{i-s}) with
// t = X w, evaluated directly in score space.
double score_objective(const TimeSeriesData& data, const Eigen::VectorXd& w,
                       const Eigen::VectorXd& beta);

// Solver failures never throw; they come back as a non-converged report.
SolveReport solve_dipca_I(const KernelSet& kernels, const SolveOptions& opts);
SolveReport solve_dipca_II(const KernelSet& kernels, const SolveOptions& opts);
SolveReport solve(const KernelSet& kernels, Algorithm algorithm,
                  const SolveOptions& opts);
SolveReport solve(const TimeSeriesData& data, Algorithm algorithm,
                  const SolveOptions& opts,
                  KernelStorage storage = KernelStorage::kAuto);

}  // namespace dipca
