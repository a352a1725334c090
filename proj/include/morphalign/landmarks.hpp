#pragma once

#include <array>
#include <filesystem>
#include <string_view>
#include <vector>

#include "morphalign/image.hpp"

namespace morphalign {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

// Ordered facial key points. Paired sets must share the same schema order.
struct LandmarkSet {
  std::vector<Point2> points;

  std::size_t size() const noexcept { return points.size(); }
  const Point2& operator[](std::size_t i) const { return points[i]; }
  friend bool operator==(const LandmarkSet&, const LandmarkSet&) = default;
};

// One "x y" pair per line; blank lines and lines starting with '#' are
// ignored. At least three points are required.
LandmarkSet parse_landmarks(std::string_view text, std::string_view source = "<memory>");
LandmarkSet load_landmarks(const std::filesystem::path& path);
void save_landmarks(const std::filesystem::path& path, const LandmarkSet& lm);

// point_i = (1 - alpha) a_i + alpha b_i
LandmarkSet average_landmarks(const LandmarkSet& a, const LandmarkSet& b, double alpha);

bool inside_image(const Point2& p, int width, int height) noexcept;

// Triangle vertex indices are counter-clockwise in (x, y) coordinates.
struct Triangulation {
  std::vector<Point2> vertices;  // landmarks first, then frame anchors
  std::vector<std::array<int, 3>> triangles;
  std::size_t landmark_count = 0;
};

// Corners then edge midpoints of the pixel-center rectangle [0,W-1]x[0,H-1].
std::array<Point2, 8> frame_anchors(int width, int height);

// Delaunay triangulation of the landmarks plus the eight frame anchors.
Triangulation triangulate(const LandmarkSet& points, int width, int height);

// Delaunay triangulation of the bare point set (no anchors); the hull of the
// points is covered instead of the image rectangle.
Triangulation triangulate_points(const LandmarkSet& points);

double signed_area(const Point2& a, const Point2& b, const Point2& c) noexcept;

// "i j k" per line.
void write_triangulation(const std::filesystem::path& path, const Triangulation& tri);

// Backward piecewise-affine warp of img from src geometry to dst geometry.
// tri must be built over dst (vertices beyond the landmark count, the frame
// anchors, map to themselves). Pixels outside every triangle are copied.
ImageF piecewise_affine_warp(const ImageF& img, const LandmarkSet& src,
                             const LandmarkSet& dst, const Triangulation& tri);

// Index of the triangle owning each pixel (-1 if none). A pixel on a shared
// edge belongs to the lowest-index triangle.
std::vector<int> triangle_labels(const Triangulation& tri, int width, int height);

}  // namespace morphalign
