#include "dipca/secondorder.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "dipca/error.h"

namespace dipca {

namespace {

void require_unit(const Eigen::VectorXd& v, const char* name) {
  if (std::abs(v.norm() - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " must be a unit vector");
  }
}

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return Eigen::VectorXd();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kInvalidArgument,
                "symmetric eigendecomposition did not converge");
  }
  return solver.eigenvalues();
}

}  // namespace

KktSystem build_kkt_system(const Eigen::VectorXd& w, const Eigen::VectorXd& beta,
                           const KernelSet& kernels) {
  const int m = kernels.features();
  const int s = kernels.lags();
  if (w.size() != m || beta.size() != s) {
    throw Error(ErrorCode::kDimensionMismatch,
                "w/beta do not match the kernel dimensions");
  }
  require_unit(w, "w");
  require_unit(beta, "beta");

  const Eigen::MatrixXd products = kernels.apply_all(w);  // [Y_1 w ... Y_s w]
  const Eigen::MatrixXd combined = combine_kernels(kernels, beta);

  KktSystem sys;
  sys.lambda = w.dot(combined * w);

  const int dim = m + s;
  sys.h = Eigen::MatrixXd::Zero(dim, dim);
  sys.h.topLeftCorner(m, m) =
      combined - sys.lambda * Eigen::MatrixXd::Identity(m, m);
  sys.h.topRightCorner(m, s) = products;
  sys.h.bottomLeftCorner(s, m) = products.transpose();
  sys.h.bottomRightCorner(s, s).diagonal().setConstant(-0.5 * sys.lambda);

  sys.g = Eigen::MatrixXd::Zero(2, dim);
  sys.g.row(0).head(m) = w.transpose();
  sys.g.row(1).tail(s) = beta.transpose();

  sys.k = Eigen::MatrixXd::Zero(dim + 2, dim + 2);
  sys.k.topLeftCorner(dim, dim) = sys.h;
  sys.k.topRightCorner(dim, 2) = sys.g.transpose();
  sys.k.bottomLeftCorner(2, dim) = sys.g;

  sys.z = nullspace_basis(sys.g);
  return sys;
}

Eigen::MatrixXd nullspace_basis(const Eigen::MatrixXd& g) {
  const long rows = g.rows();
  const long cols = g.cols();
  if (rows > cols) {
    throw Error(ErrorCode::kRankDeficient,
                "constraint Jacobian has more rows than columns");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
  if (rows > 0 && svd.singularValues().minCoeff() < 1e-10) {
    throw Error(ErrorCode::kRankDeficient,
                "constraint Jacobian is rank deficient (sigma_min < 1e-10)");
  }
  // The trailing columns of the full Q in G^T = Q R span ker(G).
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g.transpose());
  const Eigen::MatrixXd q = qr.householderQ();
  return q.rightCols(cols - rows);
}

Eigen::MatrixXd balanced_bordered(const KktSystem& sys) {
  const long dim = sys.h.rows();
  const double h_norm =
      dim == 0 ? 0.0 : sys.h.cwiseAbs().rowwise().sum().maxCoeff();
  const double gamma = h_norm > 0.0 ? h_norm : 1.0;
  Eigen::MatrixXd k = sys.k;
  k.topRightCorner(dim, sys.g.rows()) *= gamma;
  k.bottomLeftCorner(sys.g.rows(), dim) *= gamma;
  return k;
}

double default_zero_tol(const Eigen::MatrixXd& m) {
  const double norm =
      m.size() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
  return 1e-8 * std::max(1.0, norm);
}

Inertia inertia_of(const Eigen::MatrixXd& m, std::optional<double> zero_tol) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix must be square");
  }
  const double tol = zero_tol.value_or(default_zero_tol(m));
  const Eigen::VectorXd eig = symmetric_eigenvalues(m);
  Inertia out;
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    if (eig(i) > tol) {
      ++out.n_plus;
    } else if (eig(i) < -tol) {
      ++out.n_minus;
    } else {
      ++out.n_zero;
    }
  }
  return out;
}

FixedPointClass classify_fixed_point(const Eigen::VectorXd& w,
                                     const Eigen::VectorXd& beta,
                                     const KernelSet& kernels,
                                     double residual_gate) {
  KktSystem sys = build_kkt_system(w, beta, kernels);
  const int m = kernels.features();
  const int s = kernels.lags();

  // First-order gate: Y_beta w = lambda w and w^T Y_i w = lambda beta_i.
  const Eigen::VectorXd c = sys.h.topRightCorner(m, s).transpose() * w;
  const Eigen::VectorXd d = sys.h.topLeftCorner(m, m) * w + sys.lambda * w;
  const double w_residual = (d - sys.lambda * w).lpNorm<Eigen::Infinity>();
  const double beta_residual =
      (c - sys.lambda * beta).lpNorm<Eigen::Infinity>();

  FixedPointClass out;
  out.lambda = sys.lambda;
  out.kkt_residual = std::max(w_residual, beta_residual);
  if (!(out.kkt_residual <= residual_gate)) {
    throw Error(ErrorCode::kNotFixedPoint,
                "first-order residual " + std::to_string(out.kkt_residual) +
                    " exceeds " + std::to_string(residual_gate) +
                    "; second-order classification needs a stationary point");
  }

  const Eigen::MatrixXd balanced = balanced_bordered(sys);
  out.zero_tol = default_zero_tol(balanced);
  out.inertia = inertia_of(balanced, out.zero_tol);
  out.is_max = out.inertia == Inertia{2, m + s, 0};

  const Eigen::MatrixXd reduced = sys.z.transpose() * sys.h * sys.z;
  out.reduced_spectrum =
      symmetric_eigenvalues(0.5 * (reduced + reduced.transpose()));
  const long negatives =
      (out.reduced_spectrum.array() < -out.zero_tol).count();
  const long reduced_dim = out.reduced_spectrum.size();
  out.reduced_negative_definite = negatives == reduced_dim;
  out.fraction_negative =
      reduced_dim == 0 ? 1.0 : static_cast<double>(negatives) / reduced_dim;
  out.equivalence_holds = out.is_max == out.reduced_negative_definite;
  return out;
}

}  // namespace dipca
