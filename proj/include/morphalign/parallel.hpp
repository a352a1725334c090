#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include <omp.h>

namespace morphalign::par {

// Reductions are split into fixed-size chunks whose partial sums are added
// serially in chunk order, so results do not depend on the thread count.
inline constexpr std::ptrdiff_t kReduceChunk = 2048;

template <class Term>
double reduce_sum(std::ptrdiff_t n, Term&& term) {
  if (n <= 0) return 0.0;
  const std::ptrdiff_t chunks = (n + kReduceChunk - 1) / kReduceChunk;
  if (chunks == 1) {
    double s = 0.0;
    for (std::ptrdiff_t i = 0; i < n; ++i) s += term(i);
    return s;
  }
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    const std::ptrdiff_t lo = c * kReduceChunk;
    const std::ptrdiff_t hi = std::min(n, lo + kReduceChunk);
    double s = 0.0;
    for (std::ptrdiff_t i = lo; i < hi; ++i) s += term(i);
    partial[static_cast<std::size_t>(c)] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  return reduce_sum(static_cast<std::ptrdiff_t>(a.size()),
                    [&](std::ptrdiff_t i) { return a[i] * b[i]; });
}

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// Caps OpenMP threads for parallel regions started by the calling thread.
inline void set_thread_limit(int threads) {
  omp_set_num_threads(threads < 1 ? 1 : threads);
}

inline int max_threads() { return omp_get_max_threads(); }

}  // namespace morphalign::par
