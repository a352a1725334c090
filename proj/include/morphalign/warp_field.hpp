#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "morphalign/image.hpp"

namespace morphalign {

// Dense per-pixel displacement (dx, dy), in pixels, row-major.
class WarpField {
 public:
  WarpField() = default;
  WarpField(int width, int height);
  WarpField(int width, int height, double dx, double dy);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return dx_.size(); }

  std::span<double> dx() noexcept { return dx_; }
  std::span<double> dy() noexcept { return dy_; }
  std::span<const double> dx() const noexcept { return dx_; }
  std::span<const double> dy() const noexcept { return dy_; }

  double& dx(int x, int y) noexcept { return dx_[idx(x, y)]; }
  double& dy(int x, int y) noexcept { return dy_[idx(x, y)]; }
  double dx(int x, int y) const noexcept { return dx_[idx(x, y)]; }
  double dy(int x, int y) const noexcept { return dy_[idx(x, y)]; }

  bool all_finite() const noexcept;
  double max_magnitude() const noexcept;

  friend bool operator==(const WarpField&, const WarpField&) = default;

 private:
  std::size_t idx(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }
  int width_ = 0;
  int height_ = 0;
  std::vector<double> dx_;
  std::vector<double> dy_;
};

// Binary dump: "PWWF", u32 width, u32 height, u32 reserved (0), then the dx
// plane and the dy plane as little-endian float32, row-major.
void write_warp_field(const std::filesystem::path& path, const WarpField& w);
WarpField read_warp_field(const std::filesystem::path& path);

// Hue encodes direction, saturation encodes magnitude relative to max_magnitude
// (the field's own maximum when <= 0).
ImageF visualize_warp_field(const WarpField& w, double max_magnitude = 0.0);

}  // namespace morphalign
