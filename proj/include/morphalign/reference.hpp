#pragma once

#include <span>
#include <vector>

#include "morphalign/image.hpp"
#include "morphalign/pwalign.hpp"
#include "morphalign/warp_field.hpp"

// Serial reference versions of the data-parallel kernels. They follow the
// same arithmetic as the OpenMP kernels (image kernels agree bit for bit)
// and exist for parity tests and the benchmark.
namespace morphalign::reference {

ImageF gaussian_blur(const ImageF& img, double sigma);
ImageF warp_image(const ImageF& img, const WarpField& w);
GradientPair gradient(const ImageF& img);

// Row-by-row scatter assembly of A x and A^T y.
std::vector<double> apply_A(const NormalOperator& op, std::span<const double> x);
std::vector<double> apply_At(const NormalOperator& op, std::span<const double> y);
// A^T (A x)
std::vector<double> apply_normal(const NormalOperator& op, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace morphalign::reference
