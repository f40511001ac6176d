#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dipca/core.h"
#include "dipca/lagmat.h"

namespace dipca {

struct SyntheticConfig {
  int m = 50;
  int n = 500;
  int s = 4;
  double sigma = 1.0;  // standard deviation of the additive noise
  std::uint64_t seed = 1;
  int planted_components = 1;
  // Planted AR polynomials keep every root within radius 1 - margin.
  double ar_spectral_margin = 0.1;
  // Innovation scale of the first latent series; component j uses
  // signal_scale / (j + 1).
  double signal_scale = 5.0;
};

struct PlantedComponent {
  Eigen::VectorXd w;                // unit, mutually orthonormal across j
  Eigen::VectorXd ar_coefficients;  // generating AR(s) coefficients
  Eigen::VectorXd beta;             // unit maximizer of c^T beta at w
  double lambda = 0.0;              // ||c|| of this series alone
  Eigen::VectorXd t;                // latent series, length n + s
};

struct SyntheticInstance {
  TimeSeriesData data;
  Eigen::MatrixXd signal;  // X without noise
  std::vector<PlantedComponent> planted;
};

// X = sum_j t_j w_j^T + sigma E, with E iid N(0, 1). Throws
// Error(kResampleFailure) if no stable AR draw is found in 1000 attempts.
SyntheticInstance gen_synthetic(const SyntheticConfig& cfg);

// Spectral radius of the companion matrix of an AR(s) coefficient vector.
double ar_spectral_radius(const Eigen::VectorXd& coefficients);

struct BenchOptions {
  SolveOptions solve;
  int workers = 1;
  KernelStorage storage = KernelStorage::kAuto;
  bool classify = true;
};

struct BenchRecord {
  int instance_id = 0;
  Algorithm algorithm = Algorithm::kI;
  SyntheticConfig config;
  double objective = 0.0;
  double wall_time_s = 0.0;   // iteration only
  double total_time_s = 0.0;  // including kernel construction
  int iterations = 0;
  bool converged = false;
  SolveStatus status = SolveStatus::kMaxIterations;
  double residual_inf = 0.0;
  // Second-order results; fraction_negative is NaN when not classified.
  bool classified = false;
  bool is_max = false;
  bool equivalence_holds = false;
  double fraction_negative = 0.0;
  std::string note;
  // |<w, w_planted>| against the first planted direction.
  double recovery = 0.0;
};

struct BenchReport {
  std::vector<BenchRecord> records;  // instance-major, algorithm-minor
  int workers = 1;
};

// Each instance is generated, its kernels built, then fitted and classified
// once per algorithm. Failures are recorded per row; the sweep never aborts.
BenchReport run_benchmark(const std::vector<SyntheticConfig>& instances,
                          const std::vector<Algorithm>& algorithms,
                          const BenchOptions& opts);

// Named sweeps: default, noiseless, m200-sigma1, m200-sigma10, paper-shape.
// Throws Error(kInvalidArgument) for unknown names.
std::vector<SyntheticConfig> bench_preset(const std::string& name);
std::vector<std::string> bench_preset_names();

// CSV with header
// instance_id,algorithm,m,n,s,sigma,seed,objective,wall_time_s,iterations,converged,fraction_negative
std::string bench_csv(const BenchReport& report);
// JSON summary: per-row extras and sorted per-algorithm metric curves.
std::string bench_summary_json(const BenchReport& report);

struct OracleResult {
  double objective = 0.0;
  Eigen::VectorXd w;
  Eigen::VectorXd beta;
};

// Multi-start exact coordinate ascent for tiny problems (m <= 6, s <= 3):
// the w-step is a dense symmetric eigendecomposition, the beta-step the
// closed form. Throws Error(kSizeGuard) beyond those limits.
OracleResult brute_force_oracle(const KernelSet& kernels, int restarts,
                                int refine_iters, std::uint64_t seed = 0);

}  // namespace dipca
