#include "dipca/lagmat.h"

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "dipca/error.h"
#include "test_util.h"

namespace dipca {
namespace {

using testing::random_matrix;
using testing::reference_kernel;

Eigen::MatrixXd sequential_rows(int rows, int cols) {
  Eigen::MatrixXd x(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) x(i, j) = 10.0 * (i + 1) + j;
  return x;
}

TEST(TimeSeriesDataTest, Dimensions) {
  const TimeSeriesData data(sequential_rows(6, 3), 2);
  EXPECT_EQ(data.samples(), 4);
  EXPECT_EQ(data.features(), 3);
  EXPECT_EQ(data.lags(), 2);
  EXPECT_FALSE(data.centered());
  EXPECT_TRUE(data.column_means().isZero(0.0));
}

TEST(TimeSeriesDataTest, RejectsInvalidShapes) {
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  // s must be smaller than n = rows - s.
  EXPECT_EQ(code_of([] { TimeSeriesData(sequential_rows(4, 2), 2); }),
            ErrorCode::kInvalidData);
  EXPECT_EQ(code_of([] { TimeSeriesData(sequential_rows(4, 2), 0); }),
            ErrorCode::kInvalidData);
  EXPECT_EQ(code_of([] { TimeSeriesData(Eigen::MatrixXd(5, 0), 1); }),
            ErrorCode::kInvalidData);
  Eigen::MatrixXd bad = sequential_rows(5, 2);
  bad(3, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(code_of([&] { TimeSeriesData(bad, 1); }), ErrorCode::kInvalidData);
  bad(3, 1) = std::numeric_limits<double>::infinity();
  EXPECT_EQ(code_of([&] { TimeSeriesData(bad, 1); }), ErrorCode::kInvalidData);
  EXPECT_NO_THROW(TimeSeriesData(sequential_rows(5, 2), 2));
}

TEST(LagViewTest, FirstAndLastViews) {
  const Eigen::MatrixXd x = sequential_rows(4, 2);
  const TimeSeriesData data(x, 1);
  EXPECT_EQ(Eigen::MatrixXd(lag_view(data, 1)), x.topRows(3));
  EXPECT_EQ(Eigen::MatrixXd(lag_view(data, 2)), x.bottomRows(3));
}

TEST(LagViewTest, MatchesIndexLoop) {
  const Eigen::MatrixXd x = sequential_rows(6, 3);
  const TimeSeriesData data(x, 2);
  for (int i = 1; i <= 3; ++i) {
    const Eigen::MatrixXd view = lag_view(data, i);
    ASSERT_EQ(view.rows(), 4);
    for (int j = 1; j <= 4; ++j) {
      EXPECT_EQ(view.row(j - 1), x.row(i + j - 2)) << "i=" << i << " j=" << j;
    }
  }
}

TEST(LagViewTest, OutOfRange) {
  const TimeSeriesData data(sequential_rows(6, 3), 2);
  for (int i : {0, 4, -1}) {
    try {
      lag_view(data, i);
      FAIL() << "expected error for i=" << i;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kIndexOutOfRange);
    }
  }
}

TEST(BuildKernelsTest, TwoByTwoHandCase) {
  Eigen::MatrixXd x(3, 2);
  x << 1, 0, 0, 1, 1, 1;
  for (auto storage : {KernelStorage::kDense, KernelStorage::kLagged}) {
    const KernelSet k = build_kernels(TimeSeriesData(x, 1), storage);
    Eigen::MatrixXd expected(2, 2);
    expected << 0, 1, 1, 1;
    EXPECT_TRUE(k.kernel(1).isApprox(expected, 1e-15));
    EXPECT_EQ(k.lags(), 1);
    EXPECT_EQ(k.features(), 2);
  }
}

TEST(BuildKernelsTest, ScalarSeries) {
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  const KernelSet k = build_kernels(TimeSeriesData(x, 1));
  EXPECT_DOUBLE_EQ(k.kernel(1)(0, 0), 8.0);
}

TEST(BuildKernelsTest, ZeroData) {
  const KernelSet k = build_kernels(TimeSeriesData(Eigen::MatrixXd::Zero(9, 3), 3));
  ASSERT_EQ(k.lags(), 3);
  for (int i = 1; i <= 3; ++i) EXPECT_TRUE(k.kernel(i).isZero(0.0));
}

TEST(BuildKernelsTest, MatchesIndexLoopAndIsExactlySymmetric) {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd x = random_matrix(23, 5, rng);
  const TimeSeriesData data(x, 3);
  const KernelSet dense = build_kernels(data, KernelStorage::kDense);
  const KernelSet lagged = build_kernels(data, KernelStorage::kLagged);
  for (int i = 1; i <= 3; ++i) {
    const Eigen::MatrixXd ref = reference_kernel(x, 3, i);
    EXPECT_LT((dense.kernel(i) - ref).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((lagged.kernel(i) - ref).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ((dense.kernel(i) - dense.kernel(i).transpose()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((lagged.kernel(i) - lagged.kernel(i).transpose()).cwiseAbs().maxCoeff(),
              0.0);
  }
}

TEST(BuildKernelsTest, LaggedProductsMatchDense) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + trial % 7;
    const int s = 1 + trial % 4;
    const Eigen::MatrixXd x = random_matrix(2 * s + 3 + trial, m, rng);
    const TimeSeriesData data(x, s);
    const KernelSet dense = build_kernels(data, KernelStorage::kDense);
    const KernelSet lagged = build_kernels(data, KernelStorage::kLagged);
    const Eigen::VectorXd w = testing::random_unit(m, rng);
    const Eigen::VectorXd beta = testing::random_unit(s, rng);
    const Eigen::MatrixXd a = dense.apply_all(w);
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    EXPECT_LT((a - lagged.apply_all(w)).cwiseAbs().maxCoeff(), 1e-12 * scale);
    EXPECT_LT((dense.apply_combined(beta, w) - lagged.apply_combined(beta, w))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12 * scale);
    EXPECT_LT((dense.apply_combined(beta, w) - a * beta).cwiseAbs().maxCoeff(),
              1e-12 * scale);
  }
}

TEST(BuildKernelsTest, AutoPicksLaggedForWideData) {
  std::mt19937_64 rng(3);
  const TimeSeriesData wide(random_matrix(12, 200, rng), 2);
  const TimeSeriesData tall(random_matrix(300, 4, rng), 2);
  EXPECT_EQ(build_kernels(wide, KernelStorage::kAuto).storage(), KernelStorage::kLagged);
  EXPECT_EQ(build_kernels(tall, KernelStorage::kAuto).storage(), KernelStorage::kDense);
}

TEST(FromDenseTest, ValidatesInput) {
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 2, 3, 4;
  EXPECT_THROW(KernelSet::from_dense({asym}), Error);
  EXPECT_THROW(KernelSet::from_dense({}), Error);
  EXPECT_THROW(KernelSet::from_dense({Eigen::MatrixXd::Identity(2, 2),
                                      Eigen::MatrixXd::Identity(3, 3)}),
               Error);
}

TEST(CombineKernelsTest, Examples) {
  std::mt19937_64 rng(5);
  const TimeSeriesData data(random_matrix(14, 4, rng), 2);
  const KernelSet k = build_kernels(data);

  EXPECT_EQ(combine_kernels(k, Eigen::Vector2d(1, 0)), k.kernel(1));
  EXPECT_TRUE(combine_kernels(k, Eigen::Vector2d::Zero()).isZero(0.0));

  const Eigen::MatrixXd half = combine_kernels(k, Eigen::Vector2d(0.5, 0.5));
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      EXPECT_NEAR(half(a, b), 0.5 * k.kernel(1)(a, b) + 0.5 * k.kernel(2)(a, b), 1e-14);

  try {
    combine_kernels(k, Eigen::Vector3d(1, 0, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(CombineKernelsTest, LinearInBeta) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const int s = 1 + trial % 4;
    const KernelSet k = build_kernels(TimeSeriesData(random_matrix(3 * s + 5, 4, rng), s));
    const Eigen::VectorXd b1 = random_matrix(s, 1, rng);
    const Eigen::VectorXd b2 = random_matrix(s, 1, rng);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    const double a = coef(rng);
    const double b = coef(rng);
    const Eigen::MatrixXd lhs = combine_kernels(k, a * b1 + b * b2);
    const Eigen::MatrixXd rhs = a * combine_kernels(k, b1) + b * combine_kernels(k, b2);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, lhs.norm()));
    EXPECT_EQ((lhs - lhs.transpose()).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(CenterColumnsTest, SimpleColumn) {
  Eigen::MatrixXd x(3, 2);
  x << 1, 0, 3, 0, 2, 0;
  const TimeSeriesData c = center_columns(TimeSeriesData(x, 1));
  EXPECT_TRUE(c.centered());
  EXPECT_DOUBLE_EQ(c.column_means()(0), 2.0);
  EXPECT_DOUBLE_EQ(c.column_means()(1), 0.0);
  EXPECT_DOUBLE_EQ(c.x()(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(c.x()(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(c.x()(2, 0), 0.0);
}

TEST(CenterColumnsTest, AlreadyCenteredIsUnchanged) {
  Eigen::MatrixXd x(4, 1);
  x << -1, 1, -2, 2;
  const TimeSeriesData c = center_columns(TimeSeriesData(x, 1));
  EXPECT_EQ(c.x(), x);
  EXPECT_EQ(c.column_means()(0), 0.0);
}

TEST(CenterColumnsTest, RandomColumnSumsVanish) {
  std::mt19937_64 rng(13);
  const Eigen::MatrixXd x = random_matrix(10, 3, rng).array() + 5.0;
  const TimeSeriesData c = center_columns(TimeSeriesData(x, 2));
  EXPECT_LT(c.x().colwise().sum().cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((c.column_means().transpose() - x.colwise().mean()).cwiseAbs().maxCoeff(),
            1e-14);
}

}  // namespace
}  // namespace dipca
