#include "morphalign/blend.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "morphalign/error.hpp"

namespace morphalign {

ImageF additive_blend(const ImageF& a, const ImageF& b, double alpha) {
  if (!a.same_shape(b)) throw ParameterError("additive_blend: image shapes differ");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("alpha must be in [0,1]");
  ImageF out(a.width(), a.height(), a.channels());
  const auto sa = a.samples(), sb = b.samples();
  auto so = out.samples();
  const auto n = static_cast<std::ptrdiff_t>(so.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) so[i] = sa[i] + alpha * (sb[i] - sa[i]);
  return out;
}

std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point2& p : pts) {
    while (k >= 2 && signed_area(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && signed_area(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

FaceMask face_mask_from_landmarks(const LandmarkSet& lm, int width, int height,
                                  double feather_sigma,
                                  const std::optional<std::vector<int>>& outline) {
  if (lm.size() < 3) throw ParameterError("face mask needs at least 3 landmarks");
  std::vector<Point2> pts;
  if (outline) {
    for (int i : *outline) {
      if (i < 0 || static_cast<std::size_t>(i) >= lm.size())
        throw ParameterError("face outline index " + std::to_string(i) + " out of range");
      pts.push_back(lm[i]);
    }
  } else {
    pts = lm.points;
  }
  const std::vector<Point2> hull = convex_hull(pts);
  double area = 0.0;
  for (std::size_t i = 1; i + 1 < hull.size(); ++i) area += signed_area(hull[0], hull[i], hull[i + 1]);
  if (hull.size() < 3 || area <= 1e-9)
    throw ParameterError("face outline landmarks are collinear");

  ImageF binary(width, height, 1, 0.0);
  const std::size_t m = hull.size();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Point2 p{static_cast<double>(x), static_cast<double>(y)};
      bool inside = true;
      for (std::size_t i = 0; i < m && inside; ++i)
        inside = signed_area(hull[i], hull[(i + 1) % m], p) >= -1e-9;
      if (inside) binary.at(x, y) = 1.0;
    }
  }
  ImageF feathered = gaussian_blur(binary, feather_sigma);
  for (double& v : feathered.samples()) v = std::clamp(v, 0.0, 1.0);
  return {std::move(binary), std::move(feathered)};
}

ImageF background_composite(const ImageF& morph, const ImageF& donor, const ImageF& binary_mask,
                            const ImageF& feathered_mask, double split_sigma) {
  if (!morph.same_shape(donor) || !morph.same_size(binary_mask) ||
      !morph.same_size(feathered_mask) || binary_mask.channels() != 1 ||
      feathered_mask.channels() != 1)
    throw ParameterError("background_composite: dimension mismatch");
  const ImageF low_m = gaussian_blur(morph, split_sigma);
  const ImageF low_d = gaussian_blur(donor, split_sigma);
  ImageF out(morph.width(), morph.height(), morph.channels());
  const int ch = morph.channels();
  const auto n = static_cast<std::ptrdiff_t>(morph.pixel_count());
  const auto sm = morph.samples(), sd = donor.samples(), lm = low_m.samples(), ld = low_d.samples();
  const auto bm = binary_mask.samples(), fm = feathered_mask.samples();
  auto so = out.samples();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    const double f = fm[p], b = bm[p];
    for (int c = 0; c < ch; ++c) {
      const std::size_t i = static_cast<std::size_t>(p) * ch + c;
      // donor + f (low_m - low_d) + b (high_m - high_d)
      so[i] = sd[i] + f * (lm[i] - ld[i]) + b * ((sm[i] - lm[i]) - (sd[i] - ld[i]));
    }
  }
  return out;
}

}  // namespace morphalign
