#include <algorithm>
#include <cmath>
#include <string>

#include "morphalign/error.hpp"
#include "morphalign/landmarks.hpp"

namespace morphalign {

namespace {

constexpr double kInsideTol = 1e-9;

struct Barycentric {
  double denom = 0.0;
  Point2 a, b, c;

  Barycentric(const Point2& pa, const Point2& pb, const Point2& pc) : a(pa), b(pb), c(pc) {
    denom = (b.y - c.y) * (a.x - c.x) + (c.x - b.x) * (a.y - c.y);
  }

  std::array<double, 3> operator()(double x, double y) const {
    const double l1 = ((b.y - c.y) * (x - c.x) + (c.x - b.x) * (y - c.y)) / denom;
    const double l2 = ((c.y - a.y) * (x - c.x) + (a.x - c.x) * (y - c.y)) / denom;
    return {l1, l2, 1.0 - l1 - l2};
  }
};

struct PixelBox {
  int x0, x1, y0, y1;
};

PixelBox box_of(const Point2& a, const Point2& b, const Point2& c, int w, int h) {
  return {std::max(0, static_cast<int>(std::floor(std::min({a.x, b.x, c.x}) - 1e-6))),
          std::min(w - 1, static_cast<int>(std::ceil(std::max({a.x, b.x, c.x}) + 1e-6))),
          std::max(0, static_cast<int>(std::floor(std::min({a.y, b.y, c.y}) - 1e-6))),
          std::min(h - 1, static_cast<int>(std::ceil(std::max({a.y, b.y, c.y}) + 1e-6)))};
}

std::vector<int> labels_for(const std::vector<Point2>& verts,
                            const std::vector<std::array<int, 3>>& tris, int width, int height) {
  std::vector<int> labels(static_cast<std::size_t>(width) * height, -1);
  std::vector<Barycentric> bary;
  std::vector<PixelBox> boxes;
  bary.reserve(tris.size());
  for (const auto& t : tris) {
    bary.emplace_back(verts[t[0]], verts[t[1]], verts[t[2]]);
    boxes.push_back(box_of(verts[t[0]], verts[t[1]], verts[t[2]], width, height));
  }
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    int* row = labels.data() + static_cast<std::size_t>(y) * width;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      const PixelBox& bx = boxes[t];
      if (y < bx.y0 || y > bx.y1 || bary[t].denom == 0.0) continue;
      for (int x = bx.x0; x <= bx.x1; ++x) {
        if (row[x] >= 0) continue;
        const auto l = bary[t](x, y);
        if (l[0] >= -kInsideTol && l[1] >= -kInsideTol && l[2] >= -kInsideTol)
          row[x] = static_cast<int>(t);
      }
    }
  }
  return labels;
}

}  // namespace

std::vector<int> triangle_labels(const Triangulation& tri, int width, int height) {
  return labels_for(tri.vertices, tri.triangles, width, height);
}

ImageF piecewise_affine_warp(const ImageF& img, const LandmarkSet& src, const LandmarkSet& dst,
                             const Triangulation& tri) {
  if (src.size() != dst.size() || src.size() != tri.landmark_count)
    throw ParameterError("landmark counts differ: src " + std::to_string(src.size()) + ", dst " +
                         std::to_string(dst.size()) + ", triangulation " +
                         std::to_string(tri.landmark_count));
  const int w = img.width(), h = img.height(), ch = img.channels();
  const std::size_t n = tri.landmark_count;

  std::vector<Point2> dst_v = tri.vertices;
  std::vector<Point2> src_v = tri.vertices;
  for (std::size_t i = 0; i < n; ++i) {
    dst_v[i] = dst[i];
    src_v[i] = src[i];
  }
  const std::vector<int> labels = labels_for(dst_v, tri.triangles, w, h);

  std::vector<Barycentric> bary;
  bary.reserve(tri.triangles.size());
  for (const auto& t : tri.triangles) bary.emplace_back(dst_v[t[0]], dst_v[t[1]], dst_v[t[2]]);

  ImageF out(w, h, ch);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int t = labels[static_cast<std::size_t>(y) * w + x];
      double sx = x, sy = y;
      if (t >= 0) {
        const auto& tr = tri.triangles[t];
        const auto l = bary[t](x, y);
        sx = l[0] * src_v[tr[0]].x + l[1] * src_v[tr[1]].x + l[2] * src_v[tr[2]].x;
        sy = l[0] * src_v[tr[0]].y + l[1] * src_v[tr[1]].y + l[2] * src_v[tr[2]].y;
      }
      for (int c = 0; c < ch; ++c) out.at(x, y, c) = sample_bilinear(img, sx, sy, c);
    }
  }
  return out;
}

}  // namespace morphalign
