#pragma once

#include <functional>
#include <span>
#include <vector>

namespace morphalign {

// out = Op(x). Op must be self-adjoint.
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> out)>;

struct MinresResult {
  std::vector<double> x;
  // ||rhs - Op x|| / ||rhs||, recomputed from the returned x.
  double relative_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  // Recurrence estimate of the relative residual after each iteration.
  std::vector<double> residual_history;
};

// Inner product used by the solver: the vector is split into `blocks` equal
// parts whose partial sums are combined as a balanced pairwise tree, e.g.
// (b0 + b1) + (b2 + b3). Swapping the two halves leaves the result
// bit-identical. blocks must be a power of two dividing the length.
double block_dot(std::span<const double> a, std::span<const double> b, int blocks = 1);

// Matrix-free MINRES (Paige & Saunders recurrences, no preconditioner) from a
// zero initial guess. Stops when the relative residual estimate drops to tol,
// when the Krylov space is exhausted, or after max_iters. Throws
// NumericalError on NaN/Inf.
MinresResult minres_solve(const LinearOperator& op, std::span<const double> rhs, double tol,
                          int max_iters, int blocks = 1);

}  // namespace morphalign
