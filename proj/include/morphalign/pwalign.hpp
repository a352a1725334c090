#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "morphalign/image.hpp"
#include "morphalign/minres.hpp"
#include "morphalign/warp_field.hpp"

namespace morphalign {

struct PixelRect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  bool on_border(int px, int py) const noexcept {
    return px == x || py == y || px == x + width - 1 || py == y + height - 1;
  }
  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

// The ROI if set (validated against the image size), else the full image.
PixelRect effective_roi(const std::optional<PixelRect>& roi, int width, int height);

struct AlignParams {
  double lambda = 0.05;
  int gn_max_iters = 20;
  double gn_energy_tol = 1e-4;
  double minres_tol = 1e-6;
  int minres_max_iters = 2000;
  double hp_sigma = 2.0;
  int step_halvings_max = 10;
  std::optional<PixelRect> roi;

  void validate() const;
};

struct AlignResult {
  WarpField w1;
  WarpField w2;
  double initial_energy = 0.0;
  // Total energy after each accepted Gauss-Newton iteration.
  std::vector<double> energy_trace;
  bool converged = false;
  int iterations_used = 0;
  int minres_iterations = 0;

  double final_energy() const noexcept {
    return energy_trace.empty() ? initial_energy : energy_trace.back();
  }
};

// Sum over the ROI of |h1(p + w1(p)) - h2(p + w2(p))|^2, bilinear sampling.
double data_energy(const ImageF& h1, const ImageF& h2, const WarpField& w1, const WarpField& w2,
                   const std::optional<PixelRect>& roi = std::nullopt);

// Sum of squared differences over right and below neighbor pairs in the ROI.
double smoothness_energy(const WarpField& w, const std::optional<PixelRect>& roi = std::nullopt);

// Sum of |w(p)|^2 over the ROI perimeter.
double border_energy(const WarpField& w, const std::optional<PixelRect>& roi = std::nullopt);

// data + lambda * (smoothness(w1) + border(w1) + smoothness(w2) + border(w2))
double total_energy(const ImageF& h1, const ImageF& h2, const WarpField& w1, const WarpField& w2,
                    const AlignParams& params);

// Linearized least-squares system of one Gauss-Newton step, restricted to a
// pixel rectangle R with n = |R| pixels.
//
// Unknowns (length 4n): [w1x | w1y | w2x | w2y], each block row-major over R.
// Rows of A (length n + 4m):
//   n data rows        G1x w1x + G1y w1y - G2x w2x - G2y w2y, per pixel;
//   4 blocks of m rows the operator P applied to each unknown block.
// P (m rows, scaled by sqrt(lambda)) lists horizontal pairs (left pixel +,
// right pixel -) row-major, then vertical pairs (upper +, lower -) row-major,
// then one row per perimeter pixel of R, row-major.
class NormalOperator {
 public:
  // Gradients are full-image; only their values inside roi are kept.
  NormalOperator(const GradientPair& g1, const GradientPair& g2, double lambda, PixelRect roi);

  std::size_t pixels() const noexcept { return n_; }
  std::size_t unknowns() const noexcept { return 4 * n_; }
  std::size_t regularizer_rows() const noexcept { return hpairs_ + vpairs_ + border_.size(); }
  std::size_t rows() const noexcept { return n_ + 4 * regularizer_rows(); }
  const PixelRect& roi() const noexcept { return roi_; }
  double lambda() const noexcept { return lambda_; }

  void apply_A(std::span<const double> x, std::span<double> y) const;
  void apply_At(std::span<const double> y, std::span<double> x) const;
  // A^T A x, evaluated per pixel without forming A x.
  void apply_normal(std::span<const double> x, std::span<double> out) const;
  // A^T [r; -P w] for a data residual r (length n) and current fields w (4n).
  void gauss_newton_rhs(std::span<const double> residual, std::span<const double> fields,
                        std::span<double> out) const;

  // Inner product on unknown vectors, summed as (b0 + b1) + (b2 + b3) over
  // blocks so that exchanging the two fields leaves it bit-identical.
  double dot(std::span<const double> a, std::span<const double> b) const;

  // Per-pixel diagonal data in ROI order: g1x, g1y, g2x, g2y.
  std::span<const double> g1x() const noexcept { return g1x_; }
  std::span<const double> g1y() const noexcept { return g1y_; }
  std::span<const double> g2x() const noexcept { return g2x_; }
  std::span<const double> g2y() const noexcept { return g2y_; }
  // Row-major ROI-local indices of perimeter pixels.
  std::span<const int> border_pixels() const noexcept { return border_; }

 private:
  // sum_q (x_p - x_q) over ROI neighbors, plus x_p on the perimeter.
  double laplace_at(std::span<const double> x, int i, int j) const noexcept;

  PixelRect roi_;
  double lambda_;
  double sqrt_lambda_;
  std::size_t n_;
  std::size_t hpairs_, vpairs_;
  std::vector<double> g1x_, g1y_, g2x_, g2y_;
  std::vector<int> border_;
  std::vector<int> border_index_;  // ROI pixel -> border row, or -1
};

std::vector<double> apply_A(const NormalOperator& op, std::span<const double> x);
std::vector<double> apply_At(const NormalOperator& op, std::span<const double> y);

// high_pass(to_grayscale(img), sigma): the signal the alignment matches.
ImageF alignment_signal(const ImageF& img, double hp_sigma);

// Joint symmetric alignment of two pre-aligned images.
AlignResult gauss_newton_align(const ImageF& img1, const ImageF& img2, const AlignParams& params);

// Same, on already high-pass filtered single-channel signals.
AlignResult align_signals(const ImageF& h1, const ImageF& h2, const AlignParams& params);

}  // namespace morphalign
