#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "morphalign/error.hpp"
#include "morphalign/minres.hpp"

namespace morphalign {
namespace {

LinearOperator dense_op(const Eigen::MatrixXd& m) {
  return [m](std::span<const double> x, std::span<double> out) {
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size())) = m * xv;
  };
}

Eigen::MatrixXd random_symmetric(int n, unsigned seed, double shift) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = nd(rng);
  Eigen::MatrixXd s = 0.5 * (a + a.transpose());
  s.diagonal().array() += shift;
  return s;
}

std::vector<double> random_vector(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (double& x : v) x = nd(rng);
  return v;
}

TEST(Minres, IdentityConvergesInOneIteration) {
  const std::vector<double> b{1.0, -2.0, 3.0};
  const MinresResult r = minres_solve(dense_op(Eigen::MatrixXd::Identity(3, 3)), b, 1e-12, 10);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(r.x[i], b[i], 1e-14);
}

TEST(Minres, DiagonalSystem) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(5, 5);
  d.diagonal() << 1.0, 2.0, 4.0, 8.0, 16.0;
  const std::vector<double> b{1, 1, 1, 1, 1};
  const MinresResult r = minres_solve(dense_op(d), b, 1e-12, 50);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 5);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(r.x[i], 1.0 / d(i, i), 1e-10);
  EXPECT_LE(r.relative_residual, 1e-10);
}

TEST(Minres, MatchesDenseSolveOnSpdSystem) {
  const Eigen::MatrixXd m = random_symmetric(40, 1, 20.0);
  const std::vector<double> b = random_vector(40, 2);
  const MinresResult r = minres_solve(dense_op(m), b, 1e-12, 200);
  const Eigen::VectorXd ref = m.ldlt().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), 40));
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(r.x.data(), 40);
  EXPECT_TRUE(r.converged);
  EXPECT_LE((x - ref).norm() / ref.norm(), 1e-9);
}

TEST(Minres, HandlesIndefiniteSystems) {
  const Eigen::MatrixXd m = random_symmetric(30, 3, 0.0);
  const std::vector<double> b = random_vector(30, 4);
  const MinresResult r = minres_solve(dense_op(m), b, 1e-11, 500);
  const Eigen::VectorXd ref =
      m.fullPivLu().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), 30));
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(r.x.data(), 30);
  EXPECT_TRUE(r.converged);
  EXPECT_LE((x - ref).norm() / ref.norm(), 1e-7);
}

TEST(Minres, SingularConsistentSystemGivesMinimumNormSolution) {
  // Rank-2 projector-like matrix; b in its range.
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
  m(0, 0) = 2.0;
  m(1, 1) = 3.0;
  const std::vector<double> b{4.0, 6.0, 0.0, 0.0};
  const MinresResult r = minres_solve(dense_op(m), b, 1e-12, 20);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 2.0, 1e-12);
  EXPECT_NEAR(r.x[1], 2.0, 1e-12);
  EXPECT_EQ(r.x[2], 0.0);
  EXPECT_EQ(r.x[3], 0.0);
}

TEST(Minres, ZeroRhsReturnsZero) {
  const std::vector<double> b(6, 0.0);
  const MinresResult r = minres_solve(dense_op(Eigen::MatrixXd::Identity(6, 6)), b, 1e-8, 10);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  for (double v : r.x) EXPECT_EQ(v, 0.0);
}

TEST(Minres, ResidualHistoryIsNonIncreasing) {
  const Eigen::MatrixXd m = random_symmetric(50, 5, 3.0);
  const std::vector<double> b = random_vector(50, 6);
  const MinresResult r = minres_solve(dense_op(m), b, 1e-10, 500);
  ASSERT_FALSE(r.residual_history.empty());
  for (std::size_t i = 1; i < r.residual_history.size(); ++i)
    EXPECT_LE(r.residual_history[i], r.residual_history[i - 1] * (1.0 + 1e-12));
}

TEST(Minres, IterationCapIsReportedAsNotConverged) {
  const Eigen::MatrixXd m = random_symmetric(60, 7, 10.0);
  const std::vector<double> b = random_vector(60, 8);
  const MinresResult r = minres_solve(dense_op(m), b, 1e-14, 3);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 3);
  EXPECT_GT(r.relative_residual, 1e-14);
}

TEST(Minres, NanOperatorRaisesNumericalError) {
  const LinearOperator bad = [](std::span<const double>, std::span<double> out) {
    for (double& v : out) v = std::numeric_limits<double>::quiet_NaN();
  };
  const std::vector<double> b{1.0, 2.0};
  EXPECT_THROW(minres_solve(bad, b, 1e-8, 10), NumericalError);
}

TEST(Minres, ValidatesArguments) {
  const auto op = dense_op(Eigen::MatrixXd::Identity(4, 4));
  const std::vector<double> b{1, 2, 3, 4};
  EXPECT_THROW(minres_solve(op, b, 0.0, 10), ParameterError);
  EXPECT_THROW(minres_solve(op, b, 1e-6, 0), ParameterError);
  EXPECT_THROW(minres_solve(op, b, 1e-6, 10, 3), ParameterError);
}

TEST(BlockDot, AgreesWithPlainDotAndIsHalfSwapSymmetric) {
  const std::vector<double> a = random_vector(4096, 9), b = random_vector(4096, 10);
  double plain = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) plain += a[i] * b[i];
  EXPECT_NEAR(block_dot(a, b, 4), plain, 1e-10);

  std::vector<double> as(a.size()), bs(b.size());
  const std::size_t half = a.size() / 2;
  for (std::size_t i = 0; i < half; ++i) {
    as[i] = a[half + i];
    as[half + i] = a[i];
    bs[i] = b[half + i];
    bs[half + i] = b[i];
  }
  EXPECT_EQ(block_dot(as, bs, 4), block_dot(a, b, 4));
}

}  // namespace
}  // namespace morphalign
