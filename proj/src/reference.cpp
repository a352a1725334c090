#include "morphalign/reference.hpp"

#include <algorithm>
#include <cmath>

#include "morphalign/error.hpp"

namespace morphalign::reference {

ImageF gaussian_blur(const ImageF& img, double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("gaussian sigma must be > 0");
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * r + 1);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) sum += k[i + r] = std::exp(-(i * i) / (2.0 * sigma * sigma));
  for (double& v : k) v /= sum;

  const int w = img.width(), h = img.height(), ch = img.channels();
  ImageF tmp(w, h, ch), out(w, h, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        const double center = img.at(x, y, c);
        double acc = 0.0;
        for (int i = -r; i <= r; ++i) acc += k[i + r] * (img.at(std::clamp(x + i, 0, w - 1), y, c) - center);
        tmp.at(x, y, c) = center + acc;
      }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        const double center = tmp.at(x, y, c);
        double acc = 0.0;
        for (int i = -r; i <= r; ++i) acc += k[i + r] * (tmp.at(x, std::clamp(y + i, 0, h - 1), c) - center);
        out.at(x, y, c) = center + acc;
      }
  return out;
}

ImageF warp_image(const ImageF& img, const WarpField& w) {
  if (w.width() != img.width() || w.height() != img.height())
    throw ParameterError("warp field dimensions do not match image");
  ImageF out(img.width(), img.height(), img.channels());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c)
        out.at(x, y, c) = sample_bilinear(img, x + w.dx(x, y), y + w.dy(x, y), c);
  return out;
}

GradientPair gradient(const ImageF& img) {
  const int w = img.width(), h = img.height(), ch = img.channels();
  if (w < 2 || h < 2) throw ParameterError("gradient needs an image of at least 2x2");
  GradientPair g{ImageF(w, h, ch), ImageF(w, h, ch)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        g.gx.at(x, y, c) = x == 0       ? img.at(1, y, c) - img.at(0, y, c)
                           : x == w - 1 ? img.at(w - 1, y, c) - img.at(w - 2, y, c)
                                        : 0.5 * (img.at(x + 1, y, c) - img.at(x - 1, y, c));
        g.gy.at(x, y, c) = y == 0       ? img.at(x, 1, c) - img.at(x, 0, c)
                           : y == h - 1 ? img.at(x, h - 1, c) - img.at(x, h - 2, c)
                                        : 0.5 * (img.at(x, y + 1, c) - img.at(x, y - 1, c));
      }
  return g;
}

std::vector<double> apply_A(const NormalOperator& op, std::span<const double> x) {
  if (x.size() != op.unknowns()) throw ParameterError("apply_A: vector length mismatch");
  const std::size_t n = op.pixels();
  const int rw = op.roi().width, rh = op.roi().height;
  const double s = std::sqrt(op.lambda());
  std::vector<double> y(op.rows(), 0.0);
  for (std::size_t k = 0; k < n; ++k)
    y[k] = (op.g1x()[k] * x[k] + op.g1y()[k] * x[n + k]) -
           (op.g2x()[k] * x[2 * n + k] + op.g2y()[k] * x[3 * n + k]);
  std::size_t row = n;
  for (int c = 0; c < 4; ++c) {
    const double* xc = x.data() + c * n;
    for (int j = 0; j < rh; ++j)
      for (int i = 0; i + 1 < rw; ++i, ++row) y[row] = s * (xc[j * rw + i] - xc[j * rw + i + 1]);
    for (int j = 0; j + 1 < rh; ++j)
      for (int i = 0; i < rw; ++i, ++row) y[row] = s * (xc[j * rw + i] - xc[(j + 1) * rw + i]);
    for (int b : op.border_pixels()) y[row++] = s * xc[b];
  }
  return y;
}

std::vector<double> apply_At(const NormalOperator& op, std::span<const double> y) {
  if (y.size() != op.rows()) throw ParameterError("apply_At: vector length mismatch");
  const std::size_t n = op.pixels();
  const int rw = op.roi().width, rh = op.roi().height;
  const double s = std::sqrt(op.lambda());
  std::vector<double> x(op.unknowns(), 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] += op.g1x()[k] * y[k];
    x[n + k] += op.g1y()[k] * y[k];
    x[2 * n + k] -= op.g2x()[k] * y[k];
    x[3 * n + k] -= op.g2y()[k] * y[k];
  }
  std::size_t row = n;
  for (int c = 0; c < 4; ++c) {
    double* xc = x.data() + c * n;
    for (int j = 0; j < rh; ++j)
      for (int i = 0; i + 1 < rw; ++i, ++row) {
        xc[j * rw + i] += s * y[row];
        xc[j * rw + i + 1] -= s * y[row];
      }
    for (int j = 0; j + 1 < rh; ++j)
      for (int i = 0; i < rw; ++i, ++row) {
        xc[j * rw + i] += s * y[row];
        xc[(j + 1) * rw + i] -= s * y[row];
      }
    for (int b : op.border_pixels()) xc[b] += s * y[row++];
  }
  return x;
}

std::vector<double> apply_normal(const NormalOperator& op, std::span<const double> x) {
  return reference::apply_At(op, reference::apply_A(op, x));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace morphalign::reference
