#include "morphalign/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "morphalign/error.hpp"
#include "morphalign/warp_field.hpp"

namespace morphalign {

namespace {

void check_dims(int width, int height, int channels) {
  if (width < 1 || height < 1)
    throw ParameterError("image dimensions must be positive, got " +
                         std::to_string(width) + "x" + std::to_string(height));
  if (channels != 1 && channels != 3)
    throw ParameterError("image must have 1 or 3 channels, got " +
                         std::to_string(channels));
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw ParameterError("gaussian sigma must be > 0, got " +
                         std::to_string(sigma));
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace

ImageF::ImageF(int width, int height, int channels, double fill) {
  check_dims(width, height, channels);
  width_ = width;
  height_ = height;
  channels_ = channels;
  samples_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

ImageF::ImageF(int width, int height, int channels, std::vector<double> samples) {
  check_dims(width, height, channels);
  if (samples.size() != static_cast<std::size_t>(width) * height * channels)
    throw ParameterError("sample count does not match image dimensions");
  width_ = width;
  height_ = height;
  channels_ = channels;
  samples_ = std::move(samples);
}

ImageF to_grayscale(const ImageF& img) {
  if (img.channels() == 1) return img;
  if (img.channels() != 3) throw ParameterError("to_grayscale expects 1 or 3 channels");
  ImageF out(img.width(), img.height(), 1);
  const auto src = img.samples();
  auto dst = out.samples();
  const auto n = static_cast<std::ptrdiff_t>(img.pixel_count());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    dst[i] = kLumaR * src[3 * i] + kLumaG * src[3 * i + 1] + kLumaB * src[3 * i + 2];
  }
  return out;
}

// Each tap contributes w_i * (v_i - v_center); with normalized weights this
// equals the plain convolution and keeps constant regions bit-exact.
ImageF gaussian_blur(const ImageF& img, double sigma) {
  const std::vector<double> k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  const int w = img.width(), h = img.height(), ch = img.channels();

  ImageF tmp(w, h, ch);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        const double center = img.at(x, y, c);
        double acc = 0.0;
        for (int i = -r; i <= r; ++i) {
          const int xx = std::clamp(x + i, 0, w - 1);
          acc += k[i + r] * (img.at(xx, y, c) - center);
        }
        tmp.at(x, y, c) = center + acc;
      }
    }
  }

  ImageF out(w, h, ch);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        const double center = tmp.at(x, y, c);
        double acc = 0.0;
        for (int i = -r; i <= r; ++i) {
          const int yy = std::clamp(y + i, 0, h - 1);
          acc += k[i + r] * (tmp.at(x, yy, c) - center);
        }
        out.at(x, y, c) = center + acc;
      }
    }
  }
  return out;
}

ImageF high_pass(const ImageF& img, double sigma) {
  ImageF low = gaussian_blur(img, sigma);
  auto dst = low.samples();
  const auto src = img.samples();
  const auto n = static_cast<std::ptrdiff_t>(dst.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) dst[i] = src[i] - dst[i];
  return low;
}

GradientPair gradient(const ImageF& img) {
  const int w = img.width(), h = img.height(), ch = img.channels();
  if (w < 2 || h < 2)
    throw ParameterError("gradient needs an image of at least 2x2");
  GradientPair g{ImageF(w, h, ch), ImageF(w, h, ch)};
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double gx;
        if (x == 0)
          gx = img.at(1, y, c) - img.at(0, y, c);
        else if (x == w - 1)
          gx = img.at(w - 1, y, c) - img.at(w - 2, y, c);
        else
          gx = 0.5 * (img.at(x + 1, y, c) - img.at(x - 1, y, c));
        double gy;
        if (y == 0)
          gy = img.at(x, 1, c) - img.at(x, 0, c);
        else if (y == h - 1)
          gy = img.at(x, h - 1, c) - img.at(x, h - 2, c);
        else
          gy = 0.5 * (img.at(x, y + 1, c) - img.at(x, y - 1, c));
        g.gx.at(x, y, c) = gx;
        g.gy.at(x, y, c) = gy;
      }
    }
  }
  return g;
}

double sample_bilinear(const ImageF& img, double x, double y, int channel) {
  const int w = img.width(), h = img.height();
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  int x0 = static_cast<int>(x);
  int y0 = static_cast<int>(y);
  if (x0 > w - 2) x0 = std::max(w - 2, 0);
  if (y0 > h - 2) y0 = std::max(h - 2, 0);
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * img.at(x0, y0, channel) + fx * img.at(x1, y0, channel);
  const double bot = (1.0 - fx) * img.at(x0, y1, channel) + fx * img.at(x1, y1, channel);
  return (1.0 - fy) * top + fy * bot;
}

ImageF warp_image(const ImageF& img, const WarpField& w) {
  if (w.width() != img.width() || w.height() != img.height())
    throw ParameterError("warp field dimensions do not match image");
  const int width = img.width(), height = img.height(), ch = img.channels();
  ImageF out(width, height, ch);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double sx = x + w.dx(x, y);
      const double sy = y + w.dy(x, y);
      for (int c = 0; c < ch; ++c) out.at(x, y, c) = sample_bilinear(img, sx, sy, c);
    }
  }
  return out;
}

ImageF with_channels(const ImageF& img, int channels) {
  if (img.channels() == channels) return img;
  if (channels == 1) return to_grayscale(img);
  if (channels != 3 || img.channels() != 1)
    throw ParameterError("unsupported channel conversion");
  ImageF out(img.width(), img.height(), 3);
  const auto src = img.samples();
  auto dst = out.samples();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = src[i];
  return out;
}

double max_abs_difference(const ImageF& a, const ImageF& b) {
  if (!a.same_shape(b)) throw ParameterError("image shapes differ");
  double m = 0.0;
  const auto sa = a.samples(), sb = b.samples();
  for (std::size_t i = 0; i < sa.size(); ++i) m = std::max(m, std::abs(sa[i] - sb[i]));
  return m;
}

}  // namespace morphalign
