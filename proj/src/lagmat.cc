#include "dipca/lagmat.h"

#include <string>

#include "dipca/error.h"

namespace dipca {

namespace {

void check_beta(const KernelSet& kernels, const Eigen::VectorXd& beta) {
  if (beta.size() != kernels.lags()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "beta has length " + std::to_string(beta.size()) +
                    ", expected " + std::to_string(kernels.lags()));
  }
}

void check_w(const KernelSet& kernels, const Eigen::VectorXd& w) {
  if (w.size() != kernels.features()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "w has length " + std::to_string(w.size()) + ", expected " +
                    std::to_string(kernels.features()));
  }
}

}  // namespace

TimeSeriesData::TimeSeriesData(Eigen::MatrixXd x, int lags)
    : x_(std::move(x)), lags_(lags) {
  if (lags_ < 1) {
    throw Error(ErrorCode::kInvalidData, "lag order must be >= 1");
  }
  if (x_.cols() < 1) {
    throw Error(ErrorCode::kInvalidData, "data must have at least one feature");
  }
  const long n = x_.rows() - lags_;
  if (n < 1 || lags_ >= n) {
    throw Error(ErrorCode::kInvalidData,
                "need more than 2*s samples: got " + std::to_string(x_.rows()) +
                    " rows for lag order " + std::to_string(lags_));
  }
  if (!x_.allFinite()) {
    throw Error(ErrorCode::kInvalidData, "data contains NaN or Inf");
  }
  column_means_ = Eigen::VectorXd::Zero(x_.cols());
}

Eigen::Ref<const Eigen::MatrixXd> lag_view(const TimeSeriesData& data, int i) {
  if (i < 1 || i > data.lags() + 1) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "lag view index " + std::to_string(i) + " outside 1.." +
                    std::to_string(data.lags() + 1));
  }
  return data.x().middleRows(i - 1, data.samples());
}

TimeSeriesData center_columns(const TimeSeriesData& data) {
  TimeSeriesData out = data;
  const Eigen::VectorXd means = data.x().colwise().mean().transpose();
  out.x_.rowwise() -= means.transpose();
  out.column_means_ = data.column_means_ + means;
  out.centered_ = true;
  return out;
}

KernelSet KernelSet::from_dense(std::vector<Eigen::MatrixXd> kernels) {
  if (kernels.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one kernel");
  }
  const long m = kernels.front().rows();
  for (auto& y : kernels) {
    if (y.rows() != m || y.cols() != m || m < 1) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "kernels must be square and of equal size");
    }
    const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
    if ((y - y.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw Error(ErrorCode::kInvalidArgument, "kernel is not symmetric");
    }
    Eigen::MatrixXd sym = 0.5 * (y + y.transpose());
    y = std::move(sym);
  }
  KernelSet set;
  set.storage_ = KernelStorage::kDense;
  set.features_ = static_cast<int>(m);
  set.lags_ = static_cast<int>(kernels.size());
  set.dense_ = std::move(kernels);
  return set;
}

KernelSet build_kernels(const TimeSeriesData& data, KernelStorage storage) {
  const int m = data.features();
  const int s = data.lags();
  const int n = data.samples();
  if (storage == KernelStorage::kAuto) {
    // Per-product cost: s m^2 dense against roughly (2s + 1) n m lagged.
    const double dense_cost = static_cast<double>(s) * m * m;
    const double lagged_cost = static_cast<double>(2 * s + 1) * n * m;
    storage = lagged_cost < dense_cost ? KernelStorage::kLagged
                                       : KernelStorage::kDense;
  }

  KernelSet set;
  set.storage_ = storage;
  set.features_ = m;
  set.lags_ = s;
  set.samples_ = n;
  if (storage == KernelStorage::kLagged) {
    set.data_ = std::make_shared<const Eigen::MatrixXd>(data.x());
    return set;
  }

  const auto lead = lag_view(data, s + 1);
  set.dense_.reserve(s);
  for (int i = 1; i <= s; ++i) {
    const Eigen::MatrixXd a = lead.transpose() * lag_view(data, s + 1 - i);
    set.dense_.emplace_back(0.5 * (a + a.transpose()));
  }
  return set;
}

Eigen::MatrixXd KernelSet::apply_all(const Eigen::VectorXd& w) const {
  check_w(*this, w);
  Eigen::MatrixXd out(features_, lags_);
  if (storage_ == KernelStorage::kDense) {
    for (int i = 0; i < lags_; ++i) out.col(i).noalias() = dense_[i] * w;
    return out;
  }

  // With u = X w, X_j w = u[j-1 .. j-1+n). Then
  //   Y_i w = 1/2 (X_{s+1}^T u_{s+1-i} + X_{s+1-i}^T u_{s+1}),
  // and both halves are single matrix products over all i.
  const Eigen::MatrixXd& x = *data_;
  const Eigen::VectorXd u = x * w;
  const int n = samples_;
  const int s = lags_;
  Eigen::MatrixXd lagged_scores(n, s);
  Eigen::MatrixXd shifted_lead = Eigen::MatrixXd::Zero(n + s, s);
  for (int i = 1; i <= s; ++i) {
    lagged_scores.col(i - 1) = u.segment(s - i, n);
    shifted_lead.col(i - 1).segment(s - i, n) = u.segment(s, n);
  }
  out.noalias() = x.middleRows(s, n).transpose() * lagged_scores;
  out.noalias() += x.transpose() * shifted_lead;
  out *= 0.5;
  return out;
}

Eigen::VectorXd KernelSet::apply_combined(const Eigen::VectorXd& beta,
                                          const Eigen::VectorXd& w) const {
  check_beta(*this, beta);
  check_w(*this, w);
  if (storage_ == KernelStorage::kDense) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(features_);
    for (int i = 0; i < lags_; ++i) out.noalias() += beta(i) * (dense_[i] * w);
    return out;
  }

  const Eigen::MatrixXd& x = *data_;
  const Eigen::VectorXd u = x * w;
  const int n = samples_;
  const int s = lags_;
  Eigen::VectorXd prediction = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd shifted_lead = Eigen::VectorXd::Zero(n + s);
  for (int i = 1; i <= s; ++i) {
    prediction += beta(i - 1) * u.segment(s - i, n);
    shifted_lead.segment(s - i, n) += beta(i - 1) * u.segment(s, n);
  }
  Eigen::VectorXd out = x.middleRows(s, n).transpose() * prediction;
  out.noalias() += x.transpose() * shifted_lead;
  return 0.5 * out;
}

Eigen::MatrixXd KernelSet::kernel(int i) const {
  if (i < 1 || i > lags_) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "kernel index " + std::to_string(i) + " outside 1.." +
                    std::to_string(lags_));
  }
  if (storage_ == KernelStorage::kDense) return dense_[i - 1];
  const Eigen::MatrixXd& x = *data_;
  const Eigen::MatrixXd a = x.middleRows(lags_, samples_).transpose() *
                            x.middleRows(lags_ - i, samples_);
  return 0.5 * (a + a.transpose());
}

Eigen::MatrixXd combine_kernels(const KernelSet& kernels,
                                const Eigen::VectorXd& beta) {
  check_beta(kernels, beta);
  Eigen::MatrixXd out =
      Eigen::MatrixXd::Zero(kernels.features(), kernels.features());
  for (int i = 1; i <= kernels.lags(); ++i) {
    out += beta(i - 1) * kernels.kernel(i);
  }
  return out;
}

}  // namespace dipca
