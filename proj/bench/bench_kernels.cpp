// Serial reference kernels against the OpenMP versions on a portrait-sized
// raster. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "morphalign/pipeline.hpp"
#include "morphalign/pwalign.hpp"
#include "morphalign/reference.hpp"

using namespace morphalign;

namespace {

ImageF noise(int w, int h, int ch, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImageF img(w, h, ch);
  for (double& v : img.samples()) v = u(rng);
  return img;
}

WarpField field(int w, int h) {
  WarpField f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      f.dx(x, y) = 1.5 * std::sin(0.05 * y);
      f.dy(x, y) = 0.75 * std::cos(0.04 * x);
    }
  return f;
}

const ImageF& portrait_rgb() {
  static const ImageF img = noise(kPortraitWidth, kPortraitHeight, 3, 1);
  return img;
}

const NormalOperator& portrait_operator() {
  static const NormalOperator op(gradient(noise(kPortraitWidth, kPortraitHeight, 1, 2)),
                                 gradient(noise(kPortraitWidth, kPortraitHeight, 1, 3)), 0.05,
                                 {0, 0, kPortraitWidth, kPortraitHeight});
  return op;
}

std::vector<double> vec(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (double& x : v) x = nd(rng);
  return v;
}

void BM_BlurParallel(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(gaussian_blur(portrait_rgb(), 2.0));
}
void BM_BlurSerial(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(reference::gaussian_blur(portrait_rgb(), 2.0));
}

void BM_WarpParallel(benchmark::State& s) {
  const WarpField w = field(kPortraitWidth, kPortraitHeight);
  for (auto _ : s) benchmark::DoNotOptimize(warp_image(portrait_rgb(), w));
}
void BM_WarpSerial(benchmark::State& s) {
  const WarpField w = field(kPortraitWidth, kPortraitHeight);
  for (auto _ : s) benchmark::DoNotOptimize(reference::warp_image(portrait_rgb(), w));
}

void BM_GradientParallel(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(gradient(portrait_rgb()));
}
void BM_GradientSerial(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(reference::gradient(portrait_rgb()));
}

void BM_ApplyAParallel(benchmark::State& s) {
  const auto& op = portrait_operator();
  const auto x = vec(op.unknowns(), 4);
  std::vector<double> y(op.rows());
  for (auto _ : s) {
    op.apply_A(x, y);
    benchmark::DoNotOptimize(y.data());
  }
}
void BM_ApplyASerial(benchmark::State& s) {
  const auto& op = portrait_operator();
  const auto x = vec(op.unknowns(), 4);
  for (auto _ : s) benchmark::DoNotOptimize(reference::apply_A(op, x));
}

void BM_ApplyAtParallel(benchmark::State& s) {
  const auto& op = portrait_operator();
  const auto y = vec(op.rows(), 5);
  std::vector<double> x(op.unknowns());
  for (auto _ : s) {
    op.apply_At(y, x);
    benchmark::DoNotOptimize(x.data());
  }
}
void BM_ApplyAtSerial(benchmark::State& s) {
  const auto& op = portrait_operator();
  const auto y = vec(op.rows(), 5);
  for (auto _ : s) benchmark::DoNotOptimize(reference::apply_At(op, y));
}

void BM_NormalParallel(benchmark::State& s) {
  const auto& op = portrait_operator();
  const auto x = vec(op.unknowns(), 6);
  std::vector<double> out(op.unknowns());
  for (auto _ : s) {
    op.apply_normal(x, out);
    benchmark::DoNotOptimize(out.data());
  }
}
void BM_NormalSerial(benchmark::State& s) {
  const auto& op = portrait_operator();
  const auto x = vec(op.unknowns(), 6);
  for (auto _ : s) benchmark::DoNotOptimize(reference::apply_normal(op, x));
}

void BM_DotParallel(benchmark::State& s) {
  const auto& op = portrait_operator();
  const auto x = vec(op.unknowns(), 7);
  for (auto _ : s) benchmark::DoNotOptimize(op.dot(x, x));
}
void BM_DotSerial(benchmark::State& s) {
  const auto x = vec(portrait_operator().unknowns(), 7);
  for (auto _ : s) benchmark::DoNotOptimize(reference::dot(x, x));
}

}  // namespace

BENCHMARK(BM_BlurParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BlurSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WarpParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WarpSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GradientParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GradientSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ApplyAParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ApplyASerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ApplyAtParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ApplyAtSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NormalParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NormalSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DotParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DotSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
