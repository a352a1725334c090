#include "morphalign/minres.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "morphalign/error.hpp"
#include "morphalign/parallel.hpp"

namespace morphalign {

namespace {

void check_finite(double v, const char* what, int iteration) {
  if (!std::isfinite(v))
    throw NumericalError(std::string("MINRES breakdown: non-finite ") + what + " at iteration " +
                             std::to_string(iteration),
                         iteration);
}

double tree_sum(const double* parts, int count) {
  if (count == 1) return parts[0];
  const int half = count / 2;
  return tree_sum(parts, half) + tree_sum(parts + half, half);
}

// Sum of term(i) over [0, n), per block then combined with tree_sum.
template <class Term>
double block_reduce(std::size_t n, int blocks, Term&& term) {
  const std::size_t len = n / static_cast<std::size_t>(blocks);
  std::vector<double> parts(static_cast<std::size_t>(blocks));
  for (int b = 0; b < blocks; ++b) {
    const std::size_t off = b * len;
    parts[b] = par::reduce_sum(static_cast<std::ptrdiff_t>(len),
                               [&](std::ptrdiff_t i) { return term(off + static_cast<std::size_t>(i)); });
  }
  return tree_sum(parts.data(), blocks);
}

void check_blocks(std::size_t n, int blocks) {
  if (blocks < 1 || (blocks & (blocks - 1)) != 0 || n % static_cast<std::size_t>(blocks) != 0)
    throw ParameterError("block count must be a power of two dividing the vector length");
}

}  // namespace

double block_dot(std::span<const double> a, std::span<const double> b, int blocks) {
  if (a.size() != b.size()) throw ParameterError("block_dot: length mismatch");
  check_blocks(a.size(), blocks);
  return block_reduce(a.size(), blocks, [&](std::size_t i) { return a[i] * b[i]; });
}

MinresResult minres_solve(const LinearOperator& op, std::span<const double> rhs, double tol,
                          int max_iters, int blocks) {
  if (!(tol > 0.0)) throw ParameterError("MINRES tolerance must be > 0");
  if (max_iters < 1) throw ParameterError("MINRES iteration limit must be >= 1");
  const std::size_t n = rhs.size();
  check_blocks(n, blocks);
  const auto sn_ = static_cast<std::ptrdiff_t>(n);

  MinresResult res;
  res.x.assign(n, 0.0);

  const double beta1 = std::sqrt(block_dot(rhs, rhs, blocks));
  check_finite(beta1, "right-hand side", 0);
  if (beta1 == 0.0) {
    res.converged = true;
    return res;
  }

  // Lanczos vectors rotate through three buffers: r1 (previous), r2 (current,
  // unnormalized), y (next).
  std::vector<double> r1(rhs.begin(), rhs.end()), r2 = r1, y(n);
  std::vector<double> v(n), w1(n, 0.0), w2(n, 0.0);

  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();

  for (int itn = 1; itn <= max_iters; ++itn) {
    const double s = 1.0 / beta;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < sn_; ++i) v[i] = s * r2[i];

    op(v, y);
    const double c1 = itn >= 2 ? beta / oldb : 0.0;
    const double alfa = block_reduce(n, blocks, [&](std::size_t i) {
      y[i] -= c1 * r1[i];
      return v[i] * y[i];
    });
    check_finite(alfa, "Lanczos coefficient", itn);
    const double c2 = alfa / beta;
    const double beta_sq = block_reduce(n, blocks, [&](std::size_t i) {
      y[i] -= c2 * r2[i];
      return y[i] * y[i];
    });
    std::swap(r1, r2);
    std::swap(r2, y);
    oldb = beta;
    beta = std::sqrt(beta_sq);
    check_finite(beta, "Lanczos norm", itn);

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;

    const double gamma = std::max(std::hypot(gbar, beta), eps);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;
    check_finite(phi, "solution update", itn);

    const double denom = 1.0 / gamma;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < sn_; ++i) {
      const double wi = (v[i] - oldeps * w1[i] - delta * w2[i]) * denom;
      w1[i] = w2[i];
      w2[i] = wi;
      res.x[i] += phi * wi;
    }

    res.iterations = itn;
    const double rel = phibar / beta1;
    res.residual_history.push_back(rel);
    if (rel <= tol || beta <= eps * beta1) {
      // beta == 0: Krylov space exhausted, the iterate is the least-squares solution.
      res.converged = true;
      break;
    }
  }

  op(res.x, y);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < sn_; ++i) y[i] = rhs[i] - y[i];
  res.relative_residual = std::sqrt(block_dot(y, y, blocks)) / beta1;
  check_finite(res.relative_residual, "final residual", res.iterations);
  return res;
}

}  // namespace morphalign
