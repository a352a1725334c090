#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace morphalign {

class WarpField;

// Row-major floating-point raster, 1 or 3 interleaved channels. Nominal
// range is [0,1]; band-pass intermediates may leave it.
class ImageF {
 public:
  ImageF() = default;
  ImageF(int width, int height, int channels, double fill = 0.0);
  ImageF(int width, int height, int channels, std::vector<double> samples);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const noexcept { return samples_.empty(); }

  double& at(int x, int y, int c = 0) noexcept {
    return samples_[index(x, y, c)];
  }
  double at(int x, int y, int c = 0) const noexcept {
    return samples_[index(x, y, c)];
  }
  std::size_t index(int x, int y, int c = 0) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  std::span<double> samples() noexcept { return samples_; }
  std::span<const double> samples() const noexcept { return samples_; }

  bool same_shape(const ImageF& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }
  bool same_size(const ImageF& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const ImageF&, const ImageF&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> samples_;
};

// Per-channel image derivatives; gx, gy have the source's shape.
struct GradientPair {
  ImageF gx;
  ImageF gy;
};

inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

ImageF to_grayscale(const ImageF& img);

// Separable Gaussian, radius ceil(3 sigma), normalized, edge-clamped.
ImageF gaussian_blur(const ImageF& img, double sigma);

// img - gaussian_blur(img, sigma)
ImageF high_pass(const ImageF& img, double sigma);

// Central differences inside, one-sided at the borders.
GradientPair gradient(const ImageF& img);

// Bilinear lookup with coordinates clamped to [0,W-1] x [0,H-1].
double sample_bilinear(const ImageF& img, double x, double y, int channel = 0);

// Backward warp: out(p) = img(p + w(p)), all channels.
ImageF warp_image(const ImageF& img, const WarpField& w);

// Image with the given channel count built from img (1 <-> 3 only).
ImageF with_channels(const ImageF& img, int channels);

double max_abs_difference(const ImageF& a, const ImageF& b);

}  // namespace morphalign
