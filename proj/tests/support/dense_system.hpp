#pragma once

// Explicit assembly of the Gauss-Newton system, written directly from the
// row definitions so it can serve as an oracle for the matrix-free kernels.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <vector>

#include "morphalign/image.hpp"
#include "morphalign/pwalign.hpp"

namespace morphalign::testing {

inline Eigen::SparseMatrix<double> assemble_A(const GradientPair& g1, const GradientPair& g2,
                                              double lambda, const PixelRect& r) {
  const int n = r.width * r.height;
  const double s = std::sqrt(lambda);
  std::vector<Eigen::Triplet<double>> t;
  auto local = [&](int i, int j) { return j * r.width + i; };

  int row = 0;
  for (int j = 0; j < r.height; ++j)
    for (int i = 0; i < r.width; ++i, ++row) {
      const int k = local(i, j);
      t.emplace_back(row, k, g1.gx.at(r.x + i, r.y + j));
      t.emplace_back(row, n + k, g1.gy.at(r.x + i, r.y + j));
      t.emplace_back(row, 2 * n + k, -g2.gx.at(r.x + i, r.y + j));
      t.emplace_back(row, 3 * n + k, -g2.gy.at(r.x + i, r.y + j));
    }

  for (int c = 0; c < 4; ++c) {
    const int col = c * n;
    for (int j = 0; j < r.height; ++j)
      for (int i = 0; i + 1 < r.width; ++i, ++row) {
        t.emplace_back(row, col + local(i, j), s);
        t.emplace_back(row, col + local(i + 1, j), -s);
      }
    for (int j = 0; j + 1 < r.height; ++j)
      for (int i = 0; i < r.width; ++i, ++row) {
        t.emplace_back(row, col + local(i, j), s);
        t.emplace_back(row, col + local(i, j + 1), -s);
      }
    for (int j = 0; j < r.height; ++j)
      for (int i = 0; i < r.width; ++i) {
        if (i == 0 || j == 0 || i + 1 == r.width || j + 1 == r.height) {
          t.emplace_back(row, col + local(i, j), s);
          ++row;
        }
      }
  }
  Eigen::SparseMatrix<double> A(row, 4 * n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Smooth deterministic test image with structure in both directions.
inline ImageF test_pattern(int w, int h, double phase) {
  ImageF img(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.at(x, y) = std::sin(0.9 * x + phase) * std::cos(0.7 * y - phase) + 0.1 * x * y;
  return img;
}

}  // namespace morphalign::testing
