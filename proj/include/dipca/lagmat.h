#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace dipca {

// Multivariate time series X with (n + s) rows (samples, in time order) and
// m columns (features), together with the AR lag order s.
class TimeSeriesData {
 public:
  // Throws Error(kInvalidData) unless s >= 1, n = rows - s >= 1, s < n,
  // m >= 1 and every entry is finite.
  TimeSeriesData(Eigen::MatrixXd x, int lags);

  const Eigen::MatrixXd& x() const { return x_; }
  int lags() const { return lags_; }
  // Effective sample count n (prediction window length).
  int samples() const { return static_cast<int>(x_.rows()) - lags_; }
  int features() const { return static_cast<int>(x_.cols()); }

  // Means subtracted by center_columns(); all zero otherwise.
  const Eigen::VectorXd& column_means() const { return column_means_; }
  bool centered() const { return centered_; }

 private:
  friend TimeSeriesData center_columns(const TimeSeriesData& data);

  Eigen::MatrixXd x_;
  int lags_;
  Eigen::VectorXd column_means_;
  bool centered_ = false;
};

// X_i = [x_i ... x_{i+n-1}]^T for 1 <= i <= s + 1.
Eigen::Ref<const Eigen::MatrixXd> lag_view(const TimeSeriesData& data, int i);

TimeSeriesData center_columns(const TimeSeriesData& data);

enum class KernelStorage {
  kDense,   // s explicit m x m matrices
  kLagged,  // products evaluated through the lagged views of X
  kAuto,    // kLagged when it is cheaper per product, else kDense
};

// The s symmetric lag kernels
//   Y_i = 1/2 (X_{s+1}^T X_{s+1-i} + X_{s+1-i}^T X_{s+1}),  i = 1..s.
//
// Dense storage materializes each Y_i once. Lagged storage keeps a shared
// copy of X and evaluates Y_i w from O(n m) products, which is what makes
// wide problems (m much larger than n) tractable. Both forms give the same
// products up to floating-point reassociation.
class KernelSet {
 public:
  // Wraps explicit kernels (all square, same size, symmetric within 1e-12
  // relative). Inputs are re-symmetrized as 1/2 (A + A^T).
  static KernelSet from_dense(std::vector<Eigen::MatrixXd> kernels);

  int features() const { return features_; }
  int lags() const { return lags_; }
  KernelStorage storage() const { return storage_; }

  // Column i-1 holds Y_i w.
  Eigen::MatrixXd apply_all(const Eigen::VectorXd& w) const;
  // Y_beta w without forming Y_beta.
  Eigen::VectorXd apply_combined(const Eigen::VectorXd& beta,
                                 const Eigen::VectorXd& w) const;

  // Dense Y_i, 1-based. Materialized on demand for lagged storage.
  Eigen::MatrixXd kernel(int i) const;

 private:
  friend KernelSet build_kernels(const TimeSeriesData& data,
                                 KernelStorage storage);

  KernelSet() = default;

  KernelStorage storage_ = KernelStorage::kDense;
  int features_ = 0;
  int lags_ = 0;
  int samples_ = 0;
  std::vector<Eigen::MatrixXd> dense_;
  std::shared_ptr<const Eigen::MatrixXd> data_;
};

KernelSet build_kernels(const TimeSeriesData& data,
                        KernelStorage storage = KernelStorage::kDense);

// Y_beta = sum_i beta_i Y_i. Throws Error(kDimensionMismatch) when
// beta.size() != s.
Eigen::MatrixXd combine_kernels(const KernelSet& kernels,
                                const Eigen::VectorXd& beta);

}  // namespace dipca
