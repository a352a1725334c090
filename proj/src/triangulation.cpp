#include "morphalign/landmarks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <utility>

#include "morphalign/error.hpp"

namespace morphalign {

namespace {

using Tri = std::array<int, 3>;

// > 0 when d lies inside the circumcircle of the positively oriented abc.
double incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return ad * (bdx * cdy - cdx * bdy) - bd * (adx * cdy - cdx * ady) +
         cd * (adx * bdy - bdx * ady);
}

bool contains(const std::vector<Point2>& v, const Tri& t, const Point2& p, double eps) {
  return signed_area(v[t[0]], v[t[1]], p) >= -eps && signed_area(v[t[1]], v[t[2]], p) >= -eps &&
         signed_area(v[t[2]], v[t[0]], p) >= -eps;
}

class Builder {
 public:
  Builder(std::vector<Point2> vertices, double extent)
      : v_(std::move(vertices)),
        circle_eps_(1e-12 * std::pow(extent, 4)),
        area_eps_(1e-12 * extent * extent) {}

  std::vector<Point2>& vertices() { return v_; }
  std::vector<Tri>& triangles() { return tris_; }

  void add_triangle(int a, int b, int c) {
    if (signed_area(v_[a], v_[b], v_[c]) < 0) std::swap(b, c);
    tris_.push_back({a, b, c});
  }

  // Bowyer-Watson insertion of vertex i into the current triangulation.
  void insert(int i) {
    const Point2& p = v_[i];
    std::vector<char> bad(tris_.size(), 0);
    bool any = false;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      const Tri& tr = tris_[t];
      if (incircle(v_[tr[0]], v_[tr[1]], v_[tr[2]], p) > circle_eps_) bad[t] = any = 1;
    }
    if (!any) {
      for (std::size_t t = 0; t < tris_.size(); ++t) {
        if (contains(v_, tris_[t], p, area_eps_)) {
          bad[t] = any = 1;
          break;
        }
      }
    }
    if (!any) throw ParameterError("point " + std::to_string(i) + " lies outside the triangulated region");

    std::map<std::pair<int, int>, int> edges;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (!bad[t]) continue;
      const Tri& tr = tris_[t];
      for (int e = 0; e < 3; ++e) ++edges[{tr[e], tr[(e + 1) % 3]}];
    }
    std::vector<Tri> next;
    next.reserve(tris_.size() + 2);
    for (std::size_t t = 0; t < tris_.size(); ++t)
      if (!bad[t]) next.push_back(tris_[t]);
    for (const auto& [edge, count] : edges) {
      if (edges.contains({edge.second, edge.first})) continue;
      // Edges through p (p on a hull edge) would give zero-area triangles.
      if (signed_area(v_[edge.first], v_[edge.second], p) <= area_eps_) continue;
      next.push_back({edge.first, edge.second, i});
    }
    tris_ = std::move(next);
  }

  void drop_vertices_from(int first_dropped) {
    std::erase_if(tris_, [&](const Tri& t) {
      return t[0] >= first_dropped || t[1] >= first_dropped || t[2] >= first_dropped;
    });
  }

  // Flip illegal edges, and on cocircular quads keep the diagonal whose
  // sorted index pair is lexicographically smallest.
  void legalize() {
    const std::size_t max_passes = 50 + 10 * tris_.size();
    for (std::size_t pass = 0; pass < max_passes; ++pass) {
      bool flipped = false;
      std::map<std::pair<int, int>, std::pair<int, int>> owner;  // directed edge -> (tri, opposite)
      for (std::size_t t = 0; t < tris_.size(); ++t)
        for (int e = 0; e < 3; ++e)
          owner[{tris_[t][e], tris_[t][(e + 1) % 3]}] = {static_cast<int>(t), tris_[t][(e + 2) % 3]};
      std::vector<char> touched(tris_.size(), 0);
      for (const auto& [edge, info] : owner) {
        const auto [a, b] = edge;
        if (a > b) continue;
        const auto it = owner.find({b, a});
        if (it == owner.end()) continue;
        const auto [t1, c] = info;
        const auto [t2, d] = it->second;
        if (touched[t1] || touched[t2]) continue;
        const double det = incircle(v_[a], v_[b], v_[c], v_[d]);
        const bool illegal = det > circle_eps_;
        const bool tie = std::abs(det) <= circle_eps_ &&
                         std::minmax(c, d) < std::minmax(a, b);
        if (!illegal && !tie) continue;
        if (signed_area(v_[a], v_[d], v_[c]) <= area_eps_ ||
            signed_area(v_[d], v_[b], v_[c]) <= area_eps_)
          continue;
        tris_[t1] = {a, d, c};
        tris_[t2] = {d, b, c};
        touched[t1] = touched[t2] = 1;
        flipped = true;
      }
      if (!flipped) return;
    }
  }

  std::vector<Tri> canonical() const {
    std::vector<Tri> out = tris_;
    for (Tri& t : out) {
      const auto m = std::min_element(t.begin(), t.end()) - t.begin();
      std::rotate(t.begin(), t.begin() + m, t.end());
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::vector<Point2> v_;
  std::vector<Tri> tris_;
  double circle_eps_;
  double area_eps_;
};

void check_duplicates(const std::vector<Point2>& pts) {
  std::vector<std::pair<std::pair<double, double>, std::size_t>> sorted;
  sorted.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) sorted.push_back({{pts[i].x, pts[i].y}, i});
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].first == sorted[i - 1].first)
      throw ParameterError("duplicate triangulation points " + std::to_string(sorted[i - 1].second) +
                           " and " + std::to_string(sorted[i].second));
}

}  // namespace

double signed_area(const Point2& a, const Point2& b, const Point2& c) noexcept {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

std::array<Point2, 8> frame_anchors(int width, int height) {
  const double r = width - 1, b = height - 1;
  return {Point2{0, 0}, Point2{r, 0}, Point2{r, b}, Point2{0, b},
          Point2{r / 2, 0}, Point2{r, b / 2}, Point2{r / 2, b}, Point2{0, b / 2}};
}

Triangulation triangulate(const LandmarkSet& points, int width, int height) {
  if (points.size() < 3) throw ParameterError("triangulation needs at least 3 landmarks");
  if (width < 2 || height < 2) throw ParameterError("triangulation needs an image of at least 2x2");
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!inside_image(points[i], width, height))
      throw ParameterError("landmark " + std::to_string(i) + " lies outside the image");

  const int n = static_cast<int>(points.size());
  std::vector<Point2> verts = points.points;
  for (const Point2& a : frame_anchors(width, height)) verts.push_back(a);
  check_duplicates(verts);

  Builder bld(verts, std::max(width, height));
  bld.add_triangle(n + 0, n + 1, n + 2);
  bld.add_triangle(n + 0, n + 2, n + 3);
  for (int i = n + 4; i < n + 8; ++i) bld.insert(i);
  for (int i = 0; i < n; ++i) bld.insert(i);
  bld.legalize();
  return {std::move(verts), bld.canonical(), points.size()};
}

Triangulation triangulate_points(const LandmarkSet& points) {
  if (points.size() < 3) throw ParameterError("triangulation needs at least 3 points");
  check_duplicates(points.points);
  double x0 = points[0].x, x1 = x0, y0 = points[0].y, y1 = y0;
  for (const auto& p : points.points) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double extent = std::max({x1 - x0, y1 - y0, 1e-9});
  const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1), m = 1e3 * extent;
  const int n = static_cast<int>(points.size());
  std::vector<Point2> verts = points.points;
  verts.push_back({cx - 2 * m, cy - m});
  verts.push_back({cx + 2 * m, cy - m});
  verts.push_back({cx, cy + 2 * m});

  Builder bld(verts, extent);
  bld.add_triangle(n, n + 1, n + 2);
  for (int i = 0; i < n; ++i) bld.insert(i);
  bld.drop_vertices_from(n);
  bld.legalize();
  auto tris = bld.canonical();
  if (tris.empty()) throw ParameterError("points are collinear; no triangle can be formed");
  return {points.points, std::move(tris), points.size()};
}

void write_triangulation(const std::filesystem::path& path, const Triangulation& tri) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  for (const auto& t : tri.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace morphalign
