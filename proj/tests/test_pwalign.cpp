#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dense_system.hpp"
#include "morphalign/error.hpp"
#include "morphalign/pwalign.hpp"
#include "morphalign/synthbench.hpp"

namespace morphalign {
namespace {

using testing::assemble_A;
using testing::test_pattern;
using testing::to_eigen;

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (double& x : v) x = nd(rng);
  return v;
}

WarpField random_field(int w, int h, unsigned seed, double scale) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  WarpField f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      f.dx(x, y) = u(rng);
      f.dy(x, y) = u(rng);
    }
  return f;
}

TEST(Energy, SmoothnessAndBorderByHand) {
  WarpField w(3, 2);
  w.dx(1, 0) = 1.0;  // differs from (0,0), (2,0) and (1,1)
  w.dy(2, 1) = 2.0;  // differs from (1,1) and (2,0)
  EXPECT_DOUBLE_EQ(smoothness_energy(w), 3.0 + 2.0 * 4.0);
  EXPECT_DOUBLE_EQ(border_energy(w), 1.0 + 4.0);
  // Inside a 1x1 ROI there are no pairs; the single pixel is perimeter.
  EXPECT_DOUBLE_EQ(smoothness_energy(w, PixelRect{1, 0, 1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(border_energy(w, PixelRect{1, 0, 1, 1}), 1.0);
}

TEST(Energy, BorderOnlyCountsRoiPerimeter) {
  const WarpField w(5, 5, 1.0, 0.0);
  EXPECT_DOUBLE_EQ(border_energy(w), 16.0);
  EXPECT_DOUBLE_EQ(border_energy(w, PixelRect{1, 1, 3, 3}), 8.0);
  EXPECT_DOUBLE_EQ(smoothness_energy(w), 0.0);
}

TEST(Energy, DataEnergyMatchesLoopOracle) {
  const ImageF h1 = test_pattern(9, 7, 0.1), h2 = test_pattern(9, 7, 0.9);
  const WarpField w1 = random_field(9, 7, 1, 1.5), w2 = random_field(9, 7, 2, 1.5);
  double oracle = 0.0;
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 9; ++x) {
      const double d = sample_bilinear(h1, x + w1.dx(x, y), y + w1.dy(x, y)) -
                       sample_bilinear(h2, x + w2.dx(x, y), y + w2.dy(x, y));
      oracle += d * d;
    }
  EXPECT_NEAR(data_energy(h1, h2, w1, w2), oracle, 1e-12 * oracle);
}

TEST(Energy, TotalCombinesTerms) {
  const ImageF h1 = test_pattern(8, 6, 0.3), h2 = test_pattern(8, 6, 0.5);
  const WarpField w1 = random_field(8, 6, 3, 1.0), w2 = random_field(8, 6, 4, 1.0);
  AlignParams p;
  p.lambda = 0.7;
  const double expected =
      data_energy(h1, h2, w1, w2) + 0.7 * (smoothness_energy(w1) + border_energy(w1) +
                                           smoothness_energy(w2) + border_energy(w2));
  EXPECT_NEAR(total_energy(h1, h2, w1, w2, p), expected, 1e-12 * expected);
  EXPECT_THROW(data_energy(h1, h2, WarpField(7, 6), w2), ParameterError);
}

struct OperatorCase {
  int w, h;
  double lambda;
  PixelRect roi;
};

class OperatorOracle : public ::testing::TestWithParam<OperatorCase> {};

TEST_P(OperatorOracle, MatchesAssembledMatrix) {
  const OperatorCase c = GetParam();
  const GradientPair g1 = gradient(test_pattern(c.w, c.h, 0.2));
  const GradientPair g2 = gradient(test_pattern(c.w, c.h, 1.1));
  const NormalOperator op(g1, g2, c.lambda, c.roi);
  const Eigen::SparseMatrix<double> A = assemble_A(g1, g2, c.lambda, c.roi);
  ASSERT_EQ(static_cast<std::size_t>(A.rows()), op.rows());
  ASSERT_EQ(static_cast<std::size_t>(A.cols()), op.unknowns());

  const std::vector<double> x = random_vector(op.unknowns(), 7);
  const std::vector<double> y = random_vector(op.rows(), 8);
  EXPECT_LE((to_eigen(apply_A(op, x)) - A * to_eigen(x)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((to_eigen(apply_At(op, y)) - A.transpose() * to_eigen(y)).cwiseAbs().maxCoeff(),
            1e-12);

  std::vector<double> nx(op.unknowns());
  op.apply_normal(x, nx);
  const Eigen::VectorXd ref = A.transpose() * (A * to_eigen(x));
  EXPECT_LE((to_eigen(nx) - ref).cwiseAbs().maxCoeff(), 1e-11 * (1.0 + ref.cwiseAbs().maxCoeff()));
}

TEST_P(OperatorOracle, GaussNewtonRhsIsAtTimesResidualAndNegatedRegularizer) {
  const OperatorCase c = GetParam();
  const GradientPair g1 = gradient(test_pattern(c.w, c.h, 0.4));
  const GradientPair g2 = gradient(test_pattern(c.w, c.h, 0.8));
  const NormalOperator op(g1, g2, c.lambda, c.roi);
  const Eigen::SparseMatrix<double> A = assemble_A(g1, g2, c.lambda, c.roi);
  const std::vector<double> r = random_vector(op.pixels(), 9);
  const std::vector<double> w = random_vector(op.unknowns(), 10);

  // b = [r; -P w] where P is the regularizer block of A.
  const Eigen::Index n = static_cast<Eigen::Index>(op.pixels());
  Eigen::VectorXd b(A.rows());
  b.head(n) = to_eigen(r);
  const Eigen::VectorXd Aw = A * to_eigen(w);
  b.tail(A.rows() - n) = -Aw.tail(A.rows() - n);
  std::vector<double> out(op.unknowns());
  op.gauss_newton_rhs(r, w, out);
  EXPECT_LE((to_eigen(out) - A.transpose() * b).cwiseAbs().maxCoeff(), 1e-11);
}

INSTANTIATE_TEST_SUITE_P(
    Shapes, OperatorOracle,
    ::testing::Values(OperatorCase{2, 2, 0.0, {0, 0, 2, 2}}, OperatorCase{3, 3, 0.1, {0, 0, 3, 3}},
                      OperatorCase{4, 4, 1.0, {0, 0, 4, 4}}, OperatorCase{5, 3, 10.0, {0, 0, 5, 3}},
                      OperatorCase{7, 6, 0.5, {2, 1, 4, 3}}, OperatorCase{6, 6, 0.3, {1, 1, 1, 4}}));

TEST(Operator, AdjointIdentity) {
  const GradientPair g1 = gradient(test_pattern(12, 9, 0.1));
  const GradientPair g2 = gradient(test_pattern(12, 9, 0.6));
  const NormalOperator op(g1, g2, 0.25, {0, 0, 12, 9});
  for (unsigned s = 0; s < 20; ++s) {
    const std::vector<double> x = random_vector(op.unknowns(), 100 + s);
    const std::vector<double> y = random_vector(op.rows(), 200 + s);
    const std::vector<double> ax = apply_A(op, x), aty = apply_At(op, y);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) lhs += ax[i] * y[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * aty[i];
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(Operator, NormalOperatorIsSymmetricAndLinear) {
  const GradientPair g1 = gradient(test_pattern(10, 8, 0.3));
  const GradientPair g2 = gradient(test_pattern(10, 8, 0.7));
  const NormalOperator op(g1, g2, 0.05, {0, 0, 10, 8});
  const auto u = random_vector(op.unknowns(), 1), v = random_vector(op.unknowns(), 2);
  std::vector<double> nu(op.unknowns()), nv(op.unknowns()), nsum(op.unknowns()), sum(u.size());
  op.apply_normal(u, nu);
  op.apply_normal(v, nv);
  EXPECT_NEAR(op.dot(u, nv), op.dot(nu, v), 1e-10);
  for (std::size_t i = 0; i < u.size(); ++i) sum[i] = 2.0 * u[i] - 3.0 * v[i];
  op.apply_normal(sum, nsum);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(nsum[i], 2.0 * nu[i] - 3.0 * nv[i], 1e-10);
}

TEST(Operator, RejectsWrongLengths) {
  const GradientPair g = gradient(test_pattern(4, 4, 0.0));
  const NormalOperator op(g, g, 0.1, {0, 0, 4, 4});
  std::vector<double> x(op.unknowns() - 1), y(op.rows());
  EXPECT_THROW(op.apply_A(x, y), ParameterError);
  EXPECT_THROW(NormalOperator(g, g, -1.0, {0, 0, 4, 4}), ParameterError);
}

TEST(Params, Validation) {
  AlignParams p;
  EXPECT_NO_THROW(p.validate());
  p.lambda = -0.1;
  EXPECT_THROW(p.validate(), ParameterError);
  p = {};
  p.gn_max_iters = 0;
  EXPECT_THROW(p.validate(), ParameterError);
  p = {};
  p.minres_tol = 0.0;
  EXPECT_THROW(p.validate(), ParameterError);
  p = {};
  p.hp_sigma = 0.0;
  EXPECT_THROW(p.validate(), ParameterError);
  EXPECT_THROW(effective_roi(PixelRect{3, 3, 4, 4}, 6, 6), ParameterError);
  EXPECT_EQ(effective_roi(std::nullopt, 6, 5), (PixelRect{0, 0, 6, 5}));
}

TEST(GaussNewton, IdenticalImagesGiveExactlyZeroFields) {
  const SyntheticPair p = make_pair({ShapeKind::ring, 48, {0, 0}, 0.0, 1});
  const AlignResult r = gauss_newton_align(p.img1, p.img1, AlignParams{});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.initial_energy, 0.0);
  EXPECT_EQ(r.iterations_used, 0);
  for (double v : r.w1.dx()) EXPECT_EQ(v, 0.0);
  for (double v : r.w2.dy()) EXPECT_EQ(v, 0.0);
}

TEST(GaussNewton, ConstantImagesGiveExactlyZeroFields) {
  const ImageF a(40, 40, 3, 0.25), b(40, 40, 3, 0.75);
  const AlignResult r = gauss_newton_align(a, b, AlignParams{});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.w1.max_magnitude(), 0.0);
  EXPECT_EQ(r.w2.max_magnitude(), 0.0);
}

TEST(GaussNewton, ShiftedDiskIsRecoveredAndTraceDecreases) {
  const SyntheticPair p = make_pair({ShapeKind::disk, 64, {2, 0}, 0.0, 3});
  const AlignParams params;
  const AlignResult r = gauss_newton_align(p.img1, p.img2, params);
  ASSERT_FALSE(r.energy_trace.empty());
  double prev = r.initial_energy;
  for (double e : r.energy_trace) {
    EXPECT_LE(e, prev);
    prev = e;
  }
  EXPECT_LE(r.iterations_used, params.gn_max_iters);
  EXPECT_LT(r.final_energy(), 0.1 * r.initial_energy);
  // Backward warps: w1 samples img1 toward -offset/2, w2 samples img2 toward +offset/2.
  const int c = 44;  // right edge of the disk at the midpoint position
  EXPECT_LT(r.w1.dx(c, 32), -0.3);
  EXPECT_GT(r.w2.dx(c, 32), 0.3);
  const EndpointError err = endpoint_error(r, p);
  EXPECT_LT(err.mean, 0.5);

  // Final energy reported equals the energy of the returned fields.
  const double recomputed =
      total_energy(alignment_signal(p.img1, params.hp_sigma),
                   alignment_signal(p.img2, params.hp_sigma), r.w1, r.w2, params);
  EXPECT_NEAR(r.final_energy(), recomputed, 1e-9 * recomputed);
}

TEST(GaussNewton, SwappingInputsSwapsFieldsBitExactly) {
  const SyntheticPair p = make_pair({ShapeKind::ring, 48, {1.5, -1}, 0.01, 4});
  AlignParams params;
  params.gn_max_iters = 5;
  const AlignResult ab = gauss_newton_align(p.img1, p.img2, params);
  const AlignResult ba = gauss_newton_align(p.img2, p.img1, params);
  EXPECT_EQ(ab.w1, ba.w2);
  EXPECT_EQ(ab.w2, ba.w1);
  EXPECT_EQ(ab.energy_trace, ba.energy_trace);
}

TEST(GaussNewton, HugeLambdaPinsFields) {
  const SyntheticPair p = make_pair({ShapeKind::disk, 48, {3, 1}, 0.0, 5});
  AlignParams params;
  params.lambda = 1e8;
  const AlignResult r = gauss_newton_align(p.img1, p.img2, params);
  EXPECT_LE(r.w1.max_magnitude(), 1e-3);
  EXPECT_LE(r.w2.max_magnitude(), 1e-3);
}

TEST(GaussNewton, RoiLeavesOutsideUntouched) {
  const SyntheticPair p = make_pair({ShapeKind::disk, 64, {2, 0}, 0.0, 6});
  AlignParams params;
  params.roi = PixelRect{12, 14, 40, 36};
  params.gn_max_iters = 4;
  const AlignResult r = gauss_newton_align(p.img1, p.img2, params);
  EXPECT_GT(r.w1.max_magnitude(), 0.1);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      if (x < 12 || x >= 52 || y < 14 || y >= 50) {
        ASSERT_EQ(r.w1.dx(x, y), 0.0);
        ASSERT_EQ(r.w2.dy(x, y), 0.0);
      }
}

TEST(GaussNewton, RejectsMismatchedInputs) {
  EXPECT_THROW(gauss_newton_align(ImageF(8, 8, 1), ImageF(8, 9, 1), AlignParams{}),
               ParameterError);
  EXPECT_THROW(align_signals(ImageF(8, 8, 3), ImageF(8, 8, 3), AlignParams{}), ParameterError);
}

}  // namespace
}  // namespace morphalign
