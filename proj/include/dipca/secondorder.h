#pragma once

#include <optional>

#include <Eigen/Dense>

#include "dipca/lagmat.h"

namespace dipca {

struct Inertia {
  int n_plus = 0;
  int n_minus = 0;
  int n_zero = 0;

  friend bool operator==(const Inertia&, const Inertia&) = default;
};

// Second-order objects at (w, beta):
//   H = [ Y_beta - lambda I   [Y_1 w ... Y_s w] ]
//       [ [Y_i w]^T           -lambda/2 I_s     ]
//   G = [ w^T  0 ; 0  beta^T ],   K = [ H  G^T ; G  0 ],
// with lambda = w^T Y_beta w and Z an orthonormal basis of ker(G).
struct KktSystem {
  Eigen::MatrixXd h;
  Eigen::MatrixXd g;
  Eigen::MatrixXd k;
  Eigen::MatrixXd z;
  double lambda = 0.0;
};

KktSystem build_kkt_system(const Eigen::VectorXd& w, const Eigen::VectorXd& beta,
                           const KernelSet& kernels);

// Orthonormal basis of ker(G), one column per null direction. Throws
// Error(kRankDeficient) if the smallest singular value of G is below 1e-10.
Eigen::MatrixXd nullspace_basis(const Eigen::MatrixXd& g);

// K with the G border scaled by gamma = ||H||_inf (1 if H = 0). This is the
// congruence diag(I, gamma I) K diag(I, gamma I), so the inertia is that of
// K, but the eigenvalues scale with H and a relative zero_tol stays
// meaningful when lambda is far from 1.
Eigen::MatrixXd balanced_bordered(const KktSystem& sys);

// 1e-8 * max(1, ||M||_inf).
double default_zero_tol(const Eigen::MatrixXd& m);

// Eigenvalue sign counts from a full symmetric eigendecomposition.
Inertia inertia_of(const Eigen::MatrixXd& m,
                   std::optional<double> zero_tol = std::nullopt);

struct FixedPointClass {
  bool is_max = false;        // inertia(K) == (2, m + s, 0)
  Inertia inertia;            // of K, counted on balanced_bordered(K)
  Eigen::VectorXd reduced_spectrum;  // eigenvalues of Z^T H Z, ascending
  bool reduced_negative_definite = false;
  // is_max == reduced_negative_definite; both are computed independently.
  bool equivalence_holds = false;
  // Share of reduced eigenvalues below -zero_tol; 1 when Z is empty.
  double fraction_negative = 0.0;
  double zero_tol = 0.0;  // default_zero_tol of the balanced K
  double lambda = 0.0;
  double kkt_residual = 0.0;  // max of the w- and beta-stationarity residuals
};

// Throws Error(kNotFixedPoint) when (w, beta) violates the first-order
// conditions by more than `residual_gate` in the infinity norm.
FixedPointClass classify_fixed_point(const Eigen::VectorXd& w,
                                     const Eigen::VectorXd& beta,
                                     const KernelSet& kernels,
                                     double residual_gate = 1e-4);

}  // namespace dipca
