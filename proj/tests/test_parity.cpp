#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dense_system.hpp"
#include "morphalign/parallel.hpp"
#include "morphalign/pwalign.hpp"
#include "morphalign/reference.hpp"
#include "morphalign/synthbench.hpp"

namespace morphalign {
namespace {

ImageF noise_image(int w, int h, int ch, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImageF img(w, h, ch);
  for (double& v : img.samples()) v = u(rng);
  return img;
}

WarpField noise_field(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  WarpField f(w, h);
  for (double& v : f.dx()) v = u(rng);
  for (double& v : f.dy()) v = u(rng);
  return f;
}

std::vector<double> noise_vector(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (double& x : v) x = nd(rng);
  return v;
}

class ThreadCount : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override { par::set_thread_limit(GetParam()); }
  void TearDown() override { par::set_thread_limit(1); }
};

TEST_P(ThreadCount, ImageKernelsMatchSerialReferenceBitForBit) {
  const ImageF img = noise_image(67, 45, 3, 1);
  EXPECT_EQ(gaussian_blur(img, 2.0), reference::gaussian_blur(img, 2.0));
  const WarpField w = noise_field(67, 45, 2);
  EXPECT_EQ(warp_image(img, w), reference::warp_image(img, w));
  const GradientPair g = gradient(img), gr = reference::gradient(img);
  EXPECT_EQ(g.gx, gr.gx);
  EXPECT_EQ(g.gy, gr.gy);
}

TEST_P(ThreadCount, OperatorKernelsMatchSerialReference) {
  const GradientPair g1 = gradient(noise_image(53, 41, 1, 3));
  const GradientPair g2 = gradient(noise_image(53, 41, 1, 4));
  const NormalOperator op(g1, g2, 0.05, {3, 2, 47, 37});
  const auto x = noise_vector(op.unknowns(), 5), y = noise_vector(op.rows(), 6);

  EXPECT_EQ(apply_A(op, x), reference::apply_A(op, x));
  const auto at = apply_At(op, y), at_ref = reference::apply_At(op, y);
  for (std::size_t i = 0; i < at.size(); ++i) ASSERT_NEAR(at[i], at_ref[i], 1e-13);
  std::vector<double> n(op.unknowns());
  op.apply_normal(x, n);
  const auto n_ref = reference::apply_normal(op, x);
  for (std::size_t i = 0; i < n.size(); ++i) ASSERT_NEAR(n[i], n_ref[i], 1e-12);
  EXPECT_NEAR(op.dot(x, x), reference::dot(x, x), 1e-9);
}

INSTANTIATE_TEST_SUITE_P(Threads, ThreadCount, ::testing::Values(1, 2, 3, 8));

TEST(Parity, AlignmentIsIndependentOfThreadCount) {
  const SyntheticPair p = make_pair({ShapeKind::arc, 64, {1, 2}, 0.01, 8});
  AlignParams params;
  params.gn_max_iters = 4;
  par::set_thread_limit(1);
  const AlignResult serial = gauss_newton_align(p.img1, p.img2, params);
  par::set_thread_limit(4);
  const AlignResult threaded = gauss_newton_align(p.img1, p.img2, params);
  par::set_thread_limit(1);
  EXPECT_EQ(serial.w1, threaded.w1);
  EXPECT_EQ(serial.w2, threaded.w2);
  EXPECT_EQ(serial.energy_trace, threaded.energy_trace);
  EXPECT_EQ(serial.minres_iterations, threaded.minres_iterations);
}

TEST(Parity, ReductionIsIndependentOfThreadCount) {
  const auto v = noise_vector(100003, 9);
  par::set_thread_limit(1);
  const double one = par::dot(v, v);
  par::set_thread_limit(7);
  const double seven = par::dot(v, v);
  par::set_thread_limit(1);
  EXPECT_EQ(one, seven);
}

}  // namespace
}  // namespace morphalign
