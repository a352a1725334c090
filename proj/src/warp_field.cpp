#include "morphalign/warp_field.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "morphalign/error.hpp"

namespace morphalign {

namespace {

constexpr std::array<char, 4> kMagic{'P', 'W', 'W', 'F'};

void put_u32(std::ostream& os, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff),
                              static_cast<char>((v >> 24) & 0xff)};
  os.write(b.data(), 4);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_plane(std::ostream& os, std::span<const double> plane) {
  for (double v : plane) put_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

}  // namespace

WarpField::WarpField(int width, int height) : WarpField(width, height, 0.0, 0.0) {}

WarpField::WarpField(int width, int height, double dx, double dy) {
  if (width < 1 || height < 1) throw ParameterError("warp field dimensions must be positive");
  width_ = width;
  height_ = height;
  dx_.assign(static_cast<std::size_t>(width) * height, dx);
  dy_.assign(static_cast<std::size_t>(width) * height, dy);
}

bool WarpField::all_finite() const noexcept {
  return std::all_of(dx_.begin(), dx_.end(), [](double v) { return std::isfinite(v); }) &&
         std::all_of(dy_.begin(), dy_.end(), [](double v) { return std::isfinite(v); });
}

double WarpField::max_magnitude() const noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < dx_.size(); ++i) m = std::max(m, std::hypot(dx_[i], dy_[i]));
  return m;
}

void write_warp_field(const std::filesystem::path& path, const WarpField& w) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os.write(kMagic.data(), 4);
  put_u32(os, static_cast<std::uint32_t>(w.width()));
  put_u32(os, static_cast<std::uint32_t>(w.height()));
  put_u32(os, 0);
  put_plane(os, w.dx());
  put_plane(os, w.dy());
  if (!os) throw IoError("write failed: " + path.string());
}

WarpField read_warp_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic.data(), 4) != 0)
    throw FormatError("not a PWWF warp field: " + path.string());
  const auto width = get_u32(bytes.data() + 4);
  const auto height = get_u32(bytes.data() + 8);
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (width == 0 || height == 0 || bytes.size() != 16 + 8 * n)
    throw FormatError("truncated or inconsistent PWWF file: " + path.string());
  WarpField w(static_cast<int>(width), static_cast<int>(height));
  const unsigned char* p = bytes.data() + 16;
  for (std::size_t i = 0; i < n; ++i, p += 4) w.dx()[i] = std::bit_cast<float>(get_u32(p));
  for (std::size_t i = 0; i < n; ++i, p += 4) w.dy()[i] = std::bit_cast<float>(get_u32(p));
  return w;
}

ImageF visualize_warp_field(const WarpField& w, double max_magnitude) {
  if (max_magnitude <= 0.0) max_magnitude = w.max_magnitude();
  if (max_magnitude <= 0.0) max_magnitude = 1.0;
  ImageF out(w.width(), w.height(), 3);
  for (int y = 0; y < w.height(); ++y) {
    for (int x = 0; x < w.width(); ++x) {
      const double dx = w.dx(x, y), dy = w.dy(x, y);
      const double sat = std::min(1.0, std::hypot(dx, dy) / max_magnitude);
      double hue = std::atan2(dy, dx) / (2.0 * std::numbers::pi);
      if (hue < 0.0) hue += 1.0;
      // HSV with V = 1
      const double h6 = hue * 6.0;
      const int sector = static_cast<int>(h6) % 6;
      const double f = h6 - std::floor(h6);
      const double p = 1.0 - sat, q = 1.0 - sat * f, t = 1.0 - sat * (1.0 - f);
      double r = 1, g = 1, b = 1;
      switch (sector) {
        case 0: r = 1; g = t; b = p; break;
        case 1: r = q; g = 1; b = p; break;
        case 2: r = p; g = 1; b = t; break;
        case 3: r = p; g = q; b = 1; break;
        case 4: r = t; g = p; b = 1; break;
        default: r = 1; g = p; b = q; break;
      }
      out.at(x, y, 0) = r;
      out.at(x, y, 1) = g;
      out.at(x, y, 2) = b;
    }
  }
  return out;
}

}  // namespace morphalign
