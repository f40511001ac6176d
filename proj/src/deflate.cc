#include "dipca/deflate.h"

#include <string>

#include "dipca/error.h"

namespace dipca {

Eigen::VectorXd scores(const Eigen::MatrixXd& x, const Eigen::VectorXd& w) {
  if (x.cols() != w.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "w has length " + std::to_string(w.size()) + " but X has " +
                    std::to_string(x.cols()) + " columns");
  }
  return x * w;
}

ArPrediction ar_predict(const Eigen::VectorXd& t, const Eigen::VectorXd& beta) {
  const long s = beta.size();
  const long n = t.size() - s;
  if (s < 1 || n < 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                "series of length " + std::to_string(t.size()) +
                    " is too short for " + std::to_string(s) + " lags");
  }
  ArPrediction out;
  out.t_hat = Eigen::VectorXd::Zero(n);
  for (long j = 1; j <= s; ++j) {
    out.t_hat += beta(j - 1) * t.segment(s - j, n);
  }
  out.r = t.tail(n) - out.t_hat;
  return out;
}

Deflation deflate_once(const Eigen::MatrixXd& x, const Eigen::VectorXd& t) {
  if (x.rows() != t.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "score length does not match the number of samples");
  }
  const double tt = t.squaredNorm();
  if (!(tt > 1e-14 * static_cast<double>(t.size()))) {
    throw Error(ErrorCode::kZeroScore,
                "score vector is (numerically) zero; nothing left to deflate");
  }
  Deflation out;
  out.p = x.transpose() * t / tt;
  out.x_next = x - t * out.p.transpose();
  return out;
}

void normalize_sign(Eigen::VectorXd& v) {
  if (v.size() == 0) return;
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  if (v(idx) < 0.0) v = -v;
}

DiPCAModel extract_components(const TimeSeriesData& data, int k,
                              const SolveOptions& opts, Algorithm algorithm,
                              KernelStorage storage) {
  if (k < 1 || k > data.features()) {
    throw Error(ErrorCode::kInvalidArgument,
                "component count " + std::to_string(k) + " outside 1.." +
                    std::to_string(data.features()));
  }
  DiPCAModel model;
  model.column_means = data.column_means();
  model.centered = data.centered();
  model.s = data.lags();
  model.m = data.features();
  model.n = data.samples();
  model.algorithm = algorithm;

  Eigen::MatrixXd current = data.x();
  for (int j = 0; j < k; ++j) {
    const TimeSeriesData stage(current, data.lags());
    SolveOptions stage_opts = opts;
    stage_opts.seed = opts.seed + static_cast<std::uint64_t>(j);
    const SolveReport report =
        solve(build_kernels(stage, storage), algorithm, stage_opts);
    const SolverState& chosen = report.converged ? report.state : report.best;

    LatentComponent component;
    component.w = chosen.w;
    normalize_sign(component.w);
    component.beta = chosen.beta;
    component.lambda = chosen.lambda;
    component.diagnostics = {report.status, report.converged, report.state.iter,
                             chosen.residual_inf, report.wall_time_s};
    component.t = scores(current, component.w);

    Deflation deflation;
    try {
      deflation = deflate_once(current, component.t);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kZeroScore) throw;
      model.stop_reason = "component " + std::to_string(j + 1) + ": " + e.what();
      break;
    }
    component.p = std::move(deflation.p);
    current = std::move(deflation.x_next);
    model.components.push_back(std::move(component));
  }
  model.residual = std::move(current);
  return model;
}

Eigen::MatrixXd reconstruct(const DiPCAModel& model, int k) {
  const int count = static_cast<int>(model.components.size());
  if (k < 1 || k > count) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "reconstruction rank " + std::to_string(k) + " outside 1.." +
                    std::to_string(count));
  }
  const auto& first = model.components.front();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(first.t.size(), first.p.size());
  for (int j = 0; j < k; ++j) {
    const auto& c = model.components[j];
    out.noalias() += c.t * c.p.transpose();
  }
  if (model.centered) out.rowwise() += model.column_means.transpose();
  return out;
}

}  // namespace dipca
