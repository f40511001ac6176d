#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dipca/core.h"
#include "dipca/lagmat.h"

namespace dipca {

struct ComponentDiagnostics {
  SolveStatus status = SolveStatus::kMaxIterations;
  bool converged = false;
  int iterations = 0;
  double residual_inf = 0.0;
  double wall_time_s = 0.0;
};

struct LatentComponent {
  Eigen::VectorXd w;
  Eigen::VectorXd beta;
  Eigen::VectorXd t;  // scores of the (deflated) data the component came from
  Eigen::VectorXd p;  // loadings X^T t / t^T t
  double lambda = 0.0;
  ComponentDiagnostics diagnostics;
};

struct DiPCAModel {
  std::vector<LatentComponent> components;
  Eigen::VectorXd column_means;
  bool centered = false;
  int s = 0;
  int m = 0;
  int n = 0;
  Algorithm algorithm = Algorithm::kI;
  // Non-empty when extraction ended before k components.
  std::string stop_reason;
  // Data left after the last deflation (not persisted).
  Eigen::MatrixXd residual;
};

// t = X w.
Eigen::VectorXd scores(const Eigen::MatrixXd& x, const Eigen::VectorXd& w);

struct ArPrediction {
  Eigen::VectorXd t_hat;  // indexed over the prediction window s+1..n+s
  Eigen::VectorXd r;
};

// t_hat_i = sum_j beta_j t_{i-j}, r_i = t_i - t_hat_i for i = s+1..n+s.
ArPrediction ar_predict(const Eigen::VectorXd& t, const Eigen::VectorXd& beta);

struct Deflation {
  Eigen::MatrixXd x_next;
  Eigen::VectorXd p;
};

// p = X^T t / t^T t and X - t p^T. Throws Error(kZeroScore) when
// t^T t <= 1e-14 (n + s).
Deflation deflate_once(const Eigen::MatrixXd& x, const Eigen::VectorXd& t);

// Flips v in place so its largest-magnitude entry is positive.
void normalize_sign(Eigen::VectorXd& v);

// Solve, score, deflate; k times. A failed solve is kept (flagged) and its
// lowest-residual iterate is used to deflate. Extraction stops early only
// when the remaining data is exhausted (zero scores).
DiPCAModel extract_components(const TimeSeriesData& data, int k,
                              const SolveOptions& opts, Algorithm algorithm,
                              KernelStorage storage = KernelStorage::kAuto);

// sum_{j<=k} t_j p_j^T, plus the column means when the data was centered.
Eigen::MatrixXd reconstruct(const DiPCAModel& model, int k);

}  // namespace dipca
