#include "dipca/secondorder.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dipca/bench.h"
#include "dipca/core.h"
#include "dipca/error.h"
#include "test_util.h"

namespace dipca {
namespace {

using testing::random_matrix;
using testing::random_symmetric;
using testing::random_unit;

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

// Sign counts from the general (nonsymmetric) QR eigensolver.
Inertia general_eigen_inertia(const Eigen::MatrixXd& m, double tol) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  Inertia out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double re = solver.eigenvalues()(i).real();
    if (re > tol) {
      ++out.n_plus;
    } else if (re < -tol) {
      ++out.n_minus;
    } else {
      ++out.n_zero;
    }
  }
  return out;
}

KernelSet negated(const KernelSet& k) {
  std::vector<Eigen::MatrixXd> ys;
  for (int i = 1; i <= k.lags(); ++i) ys.push_back(-k.kernel(i));
  return KernelSet::from_dense(ys);
}

TEST(KktSystemTest, ScalarExample) {
  const KernelSet k = KernelSet::from_dense({Eigen::MatrixXd::Constant(1, 1, 2.0)});
  const KktSystem sys = build_kkt_system(vec({1.0}), vec({1.0}), k);
  EXPECT_DOUBLE_EQ(sys.lambda, 2.0);
  Eigen::MatrixXd h(2, 2);
  h << 0, 2, 2, -1;
  EXPECT_EQ(sys.h, h);
  EXPECT_EQ(sys.g, Eigen::MatrixXd::Identity(2, 2));
  Eigen::MatrixXd kk(4, 4);
  kk << 0, 2, 1, 0,
        2, -1, 0, 1,
        1, 0, 0, 0,
        0, 1, 0, 0;
  EXPECT_EQ(sys.k, kk);
  EXPECT_EQ(sys.z.cols(), 0);
}

TEST(KktSystemTest, ZeroKernels) {
  std::mt19937_64 rng(5);
  const KernelSet k = KernelSet::from_dense(
      {Eigen::MatrixXd::Zero(4, 4), Eigen::MatrixXd::Zero(4, 4)});
  const KktSystem sys = build_kkt_system(random_unit(4, rng), random_unit(2, rng), k);
  EXPECT_EQ(sys.lambda, 0.0);
  EXPECT_TRUE(sys.h.isZero(0.0));
}

TEST(KktSystemTest, StructureOnRandomInstances) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 2 + trial % 6;
    const int s = 1 + trial % 4;
    std::vector<Eigen::MatrixXd> ys;
    for (int i = 0; i < s; ++i) ys.push_back(random_symmetric(m, rng));
    const KernelSet k = KernelSet::from_dense(ys);
    const Eigen::VectorXd w = random_unit(m, rng);
    const Eigen::VectorXd beta = random_unit(s, rng);
    const KktSystem sys = build_kkt_system(w, beta, k);

    EXPECT_LE((sys.h - sys.h.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::MatrixXd yb = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < s; ++i) yb += beta(i) * ys[i];
    EXPECT_NEAR(sys.lambda, w.dot(yb * w), 1e-12);
    EXPECT_LE((sys.h.topLeftCorner(m, m) - (yb - sys.lambda * Eigen::MatrixXd::Identity(m, m)))
                  .cwiseAbs().maxCoeff(), 1e-12);
    for (int i = 0; i < s; ++i) {
      EXPECT_LE((sys.h.block(0, m + i, m, 1) - ys[i] * w).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_EQ(sys.h(m + i, m + i), -0.5 * sys.lambda);
    }
    EXPECT_EQ(sys.k.topLeftCorner(m + s, m + s), sys.h);
    EXPECT_EQ(sys.k.bottomLeftCorner(2, m + s), sys.g);
    EXPECT_TRUE(sys.k.bottomRightCorner(2, 2).isZero(0.0));

    ASSERT_EQ(sys.z.cols(), m + s - 2);
    EXPECT_LE((sys.g * sys.z).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((sys.z.transpose() * sys.z - Eigen::MatrixXd::Identity(m + s - 2, m + s - 2))
                  .cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(KktSystemTest, RejectsNonUnitInputs) {
  const KernelSet k = KernelSet::from_dense({Eigen::MatrixXd::Identity(2, 2)});
  EXPECT_THROW(build_kkt_system(vec({1.0, 1.0}), vec({1.0}), k), Error);
  EXPECT_THROW(build_kkt_system(vec({1.0, 0.0}), vec({0.5}), k), Error);
  EXPECT_THROW(build_kkt_system(vec({1.0}), vec({1.0}), k), Error);
}

TEST(NullspaceTest, CoordinateCase) {
  Eigen::MatrixXd g(2, 3);
  g << 1, 0, 0, 0, 1, 0;
  const Eigen::MatrixXd z = nullspace_basis(g);
  ASSERT_EQ(z.rows(), 3);
  ASSERT_EQ(z.cols(), 1);
  EXPECT_NEAR(std::abs(z(2, 0)), 1.0, 1e-14);
  EXPECT_NEAR(z(0, 0), 0.0, 1e-14);
  EXPECT_NEAR(z(1, 0), 0.0, 1e-14);
}

TEST(NullspaceTest, RandomUnitRows) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int cols = 3 + trial % 10;
    Eigen::MatrixXd g = random_matrix(2, cols, rng);
    g.row(0).normalize();
    g.row(1).normalize();
    const Eigen::MatrixXd z = nullspace_basis(g);
    ASSERT_EQ(z.cols(), cols - 2);
    EXPECT_LT((g * z).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(NullspaceTest, DimensionCount) {
  std::mt19937_64 rng(4);
  const KernelSet k = KernelSet::from_dense({random_symmetric(2, rng)});
  const KktSystem sys = build_kkt_system(random_unit(2, rng), vec({1.0}), k);
  EXPECT_EQ(sys.z.cols(), 1);
}

TEST(NullspaceTest, RankDeficient) {
  Eigen::MatrixXd g(2, 4);
  g << 1, 0, 0, 0, 2, 0, 0, 0;
  try {
    nullspace_basis(g);
    FAIL() << "expected rank-deficiency error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRankDeficient);
  }
}

TEST(InertiaTest, DiagonalAndIdentity) {
  EXPECT_EQ(inertia_of(vec({1, -1, -1, 0}).asDiagonal().toDenseMatrix()), (Inertia{1, 2, 1}));
  EXPECT_EQ(inertia_of(Eigen::MatrixXd::Identity(5, 5)), (Inertia{5, 0, 0}));
}

TEST(InertiaTest, ZeroTolScalesWithNorm) {
  EXPECT_DOUBLE_EQ(default_zero_tol(Eigen::MatrixXd::Identity(3, 3) * 0.5), 1e-8);
  Eigen::MatrixXd m(2, 2);
  m << 100, -300, -300, 2;
  EXPECT_DOUBLE_EQ(default_zero_tol(m), 4e-6);
  EXPECT_EQ(inertia_of(vec({1e6, 1e-3, -1e6}).asDiagonal().toDenseMatrix()),
            (Inertia{1, 1, 1}));
}

TEST(InertiaTest, MatchesGeneralEigensolver) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXd m = random_symmetric(8, rng);
    if (trial % 4 == 0) {
      // Force exact zero eigenvalues through a rank drop.
      const Eigen::MatrixXd b = random_matrix(8, 5, rng);
      m = b * vec({1, -1, 2, -2, 1}).asDiagonal() * b.transpose();
      m = 0.5 * (m + m.transpose());
    }
    const double tol = default_zero_tol(m);
    const Inertia got = inertia_of(m);
    EXPECT_EQ(got, general_eigen_inertia(m, tol)) << "trial " << trial;
    EXPECT_EQ(got.n_plus + got.n_minus + got.n_zero, 8);
  }
}

TEST(ClassifyTest, ScalarPointIsVacuousMaximum) {
  const KernelSet k = KernelSet::from_dense({Eigen::MatrixXd::Constant(1, 1, 2.0)});
  const FixedPointClass fp = classify_fixed_point(vec({1.0}), vec({1.0}), k);
  const KktSystem sys = build_kkt_system(vec({1.0}), vec({1.0}), k);
  EXPECT_EQ(general_eigen_inertia(sys.k, 1e-8), (Inertia{2, 2, 0}));
  EXPECT_EQ(fp.inertia, (Inertia{2, 2, 0}));
  EXPECT_TRUE(fp.is_max);
  EXPECT_EQ(fp.reduced_spectrum.size(), 0);
  EXPECT_TRUE(fp.reduced_negative_definite);
  EXPECT_TRUE(fp.equivalence_holds);
  EXPECT_EQ(fp.fraction_negative, 1.0);
}

TEST(ClassifyTest, PlantedNoiselessOptimumIsMaximum) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticConfig cfg;
    cfg.m = 12;
    cfg.n = 200;
    cfg.s = 3;
    cfg.sigma = 0.0;
    cfg.seed = seed;
    const KernelSet k = build_kernels(gen_synthetic(cfg).data);
    SolveOptions opts;
    opts.eps_tol = 1e-10;
    const SolveReport r = solve_dipca_II(k, opts);
    ASSERT_TRUE(r.converged) << "seed " << seed;
    const FixedPointClass fp = classify_fixed_point(r.state.w, r.state.beta, k);
    EXPECT_TRUE(fp.is_max) << "seed " << seed;
    EXPECT_EQ(fp.inertia, (Inertia{2, cfg.m + cfg.s, 0}));
    EXPECT_EQ(fp.fraction_negative, 1.0);
    EXPECT_TRUE(fp.equivalence_holds);
  }
}

TEST(ClassifyTest, SignFlippedInstanceIsNotMaximum) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticConfig cfg;
    cfg.m = 8;
    cfg.n = 150;
    cfg.s = 2;
    cfg.sigma = 0.1;
    cfg.seed = seed;
    const KernelSet k = build_kernels(gen_synthetic(cfg).data);
    SolveOptions opts;
    opts.eps_tol = 1e-10;
    const SolveReport r = solve_dipca_II(k, opts);
    ASSERT_TRUE(r.converged);
    // Under -Y_i the maximizer becomes a stationary minimizer.
    const KernelSet flipped = negated(k);
    const FixedPointClass fp = classify_fixed_point(r.state.w, r.state.beta, flipped);
    EXPECT_FALSE(fp.is_max) << "seed " << seed;
    EXPECT_NEAR(fp.lambda, -r.state.lambda, 1e-9 * std::abs(r.state.lambda));
    EXPECT_LT(fp.fraction_negative, 1.0);
    EXPECT_TRUE(fp.equivalence_holds);
  }
}

// With s = 1 and beta = b = +-1 every eigenvector of Y_1 is stationary. The
// beta block has no tangent directions, so the point is a local maximum iff
// its eigenvalue is the largest of b Y_1.
TEST(ClassifyTest, SingleLagStationaryPointsAgainstEigenOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 3 + trial % 5;
    const Eigen::MatrixXd y = random_symmetric(m, rng);
    const KernelSet k = KernelSet::from_dense({y});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(y);
    Eigen::Index top = 0;
    Eigen::Index bottom = 0;
    eig.eigenvalues().maxCoeff(&top);
    eig.eigenvalues().minCoeff(&bottom);
    for (Eigen::Index j = 0; j < m; ++j) {
      for (double b : {1.0, -1.0}) {
        const FixedPointClass fp =
            classify_fixed_point(eig.eigenvectors().col(j), vec({b}), k);
        const bool expected = b > 0.0 ? j == top : j == bottom;
        EXPECT_EQ(fp.is_max, expected) << "trial " << trial << " j " << j;
        EXPECT_TRUE(fp.equivalence_holds);
        EXPECT_EQ(fp.fraction_negative == 1.0, fp.is_max);
      }
    }
  }
}

TEST(ClassifyTest, EquivalenceAndSignInvarianceOnConvergedPoints) {
  std::mt19937_64 rng(17);
  int classified = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + trial % 6;
    const int s = 1 + trial % 3;
    std::vector<Eigen::MatrixXd> ys;
    for (int i = 0; i < s; ++i) ys.push_back(random_symmetric(m, rng));
    const KernelSet k = KernelSet::from_dense(ys);
    SolveOptions opts;
    opts.seed = static_cast<std::uint64_t>(trial);
    opts.eps_tol = 1e-10;
    const SolveReport r = solve_dipca_II(k, opts);
    if (!r.converged) continue;
    ++classified;
    const FixedPointClass fp = classify_fixed_point(r.state.w, r.state.beta, k);
    EXPECT_TRUE(fp.equivalence_holds) << "trial " << trial;
    EXPECT_GE(fp.fraction_negative, 0.0);
    EXPECT_LE(fp.fraction_negative, 1.0);
    EXPECT_EQ(fp.fraction_negative == 1.0, fp.is_max);
    EXPECT_EQ(fp.reduced_spectrum.size(), m + s - 2);
    const FixedPointClass neg = classify_fixed_point(-r.state.w, r.state.beta, k);
    EXPECT_EQ(neg.inertia, fp.inertia) << "trial " << trial;
    EXPECT_EQ(neg.is_max, fp.is_max);
  }
  EXPECT_GE(classified, 190);
}

TEST(ClassifyTest, RejectsNonStationaryPoint) {
  std::mt19937_64 rng(2);
  const KernelSet k = KernelSet::from_dense({random_symmetric(4, rng), random_symmetric(4, rng)});
  try {
    classify_fixed_point(random_unit(4, rng), random_unit(2, rng), k);
    FAIL() << "expected not-a-fixed-point error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFixedPoint);
  }
}

TEST(ClassifyTest, BetaBlockIsPartOfTheGate) {
  // w is an eigenvector of Y_beta but c is not parallel to beta.
  const KernelSet k = KernelSet::from_dense(
      {vec({3, 1}).asDiagonal().toDenseMatrix(), vec({1, 2}).asDiagonal().toDenseMatrix()});
  const Eigen::VectorXd beta = vec({0.6, 0.8});
  EXPECT_THROW(classify_fixed_point(vec({1, 0}), beta, k), Error);
  const FixedPointClass fp = classify_fixed_point(vec({1, 0}), vec({3, 1}) / std::sqrt(10.0), k);
  EXPECT_NEAR(fp.lambda, std::sqrt(10.0), 1e-12);
  EXPECT_LE(fp.kkt_residual, 1e-12);
}

TEST(ClassifyTest, BalancedBorderPreservesInertia) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + trial % 5;
    const int s = 1 + trial % 3;
    std::vector<Eigen::MatrixXd> ys;
    for (int i = 0; i < s; ++i) ys.push_back(random_symmetric(m, rng));
    const KktSystem sys =
        build_kkt_system(random_unit(m, rng), random_unit(s, rng), KernelSet::from_dense(ys));
    const Eigen::MatrixXd bal = balanced_bordered(sys);
    EXPECT_EQ(bal.topLeftCorner(m + s, m + s), sys.h);
    EXPECT_EQ(inertia_of(bal), general_eigen_inertia(sys.k, 1e-9)) << "trial " << trial;
  }
}

TEST(ClassifyTest, ClassificationIsScaleInvariant) {
  SyntheticConfig cfg;
  cfg.m = 10;
  cfg.n = 200;
  cfg.s = 3;
  cfg.sigma = 0.5;
  const KernelSet k = build_kernels(gen_synthetic(cfg).data);
  SolveOptions opts;
  opts.eps_tol = 1e-10;
  const SolveReport r = solve_dipca_II(k, opts);
  ASSERT_TRUE(r.converged);
  const FixedPointClass base = classify_fixed_point(r.state.w, r.state.beta, k);
  EXPECT_TRUE(base.is_max);
  for (double alpha : {1e-6, 1e-3, 1e3, 1e6}) {
    std::vector<Eigen::MatrixXd> ys;
    for (int i = 1; i <= k.lags(); ++i) ys.push_back(alpha * k.kernel(i));
    const FixedPointClass fp = classify_fixed_point(
        r.state.w, r.state.beta, KernelSet::from_dense(ys), 1e-4 * std::max(1.0, alpha));
    EXPECT_EQ(fp.inertia, base.inertia) << "alpha " << alpha;
    EXPECT_TRUE(fp.equivalence_holds);
    EXPECT_EQ(fp.fraction_negative, base.fraction_negative);
  }
}

}  // namespace
}  // namespace dipca
