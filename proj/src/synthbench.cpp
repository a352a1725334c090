#include "morphalign/synthbench.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "morphalign/error.hpp"

namespace morphalign {

namespace {

double coverage(double signed_distance) { return std::clamp(0.5 + signed_distance, 0.0, 1.0); }

constexpr double kBackground = 0.2;
constexpr double kForeground = 0.9;

double shape_distance(ShapeKind kind, int size, double px, double py, double cx, double cy) {
  const double r = std::hypot(px - cx, py - cy);
  switch (kind) {
    case ShapeKind::disk:
      return 0.18 * size - r;
    case ShapeKind::ring: {
      const double outer = 0.2 * size, thick = std::max(3.0, 0.05 * size);
      return 0.5 * thick - std::abs(r - (outer - 0.5 * thick));
    }
    case ShapeKind::dot:
      return 2.5 - r;
    case ShapeKind::arc: {
      const double radius = 0.15 * size, thick = 3.0;
      const double ring = 0.5 * thick - std::abs(r - radius);
      return std::min(ring, py - cy);
    }
  }
  return -1.0;
}

void add_noise(ImageF& img, double sigma, std::uint64_t seed) {
  if (sigma <= 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  for (double& v : img.samples()) v += n(rng);
}

// Ellipse with rough signed distance (positive inside).
struct Ellipse {
  double cx, cy, a, b;
  double sd(double x, double y) const {
    const double r = std::hypot((x - cx) / a, (y - cy) / b);
    return (1.0 - r) * std::min(a, b);
  }
};

struct Rgb {
  double r, g, b;
};

void paint(ImageF& img, const Ellipse& e, Rgb color, double opacity = 1.0) {
  const int x0 = std::max(0, static_cast<int>(e.cx - e.a - 2)),
            x1 = std::min(img.width() - 1, static_cast<int>(e.cx + e.a + 2));
  const int y0 = std::max(0, static_cast<int>(e.cy - e.b - 2)),
            y1 = std::min(img.height() - 1, static_cast<int>(e.cy + e.b + 2));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double c = opacity * coverage(e.sd(x, y));
      if (c <= 0.0) continue;
      img.at(x, y, 0) += c * (color.r - img.at(x, y, 0));
      img.at(x, y, 1) += c * (color.g - img.at(x, y, 1));
      img.at(x, y, 2) += c * (color.b - img.at(x, y, 2));
    }
}

}  // namespace

std::string_view to_string(ShapeKind kind) noexcept {
  switch (kind) {
    case ShapeKind::disk: return "disk";
    case ShapeKind::ring: return "ring";
    case ShapeKind::dot: return "dot";
    case ShapeKind::arc: return "arc";
  }
  return "unknown";
}

ShapeKind parse_shape_kind(std::string_view name) {
  for (ShapeKind k : {ShapeKind::disk, ShapeKind::ring, ShapeKind::dot, ShapeKind::arc})
    if (name == to_string(k)) return k;
  throw ParameterError("unknown shape kind: " + std::string(name));
}

ImageF shape_coverage(ShapeKind kind, int size, double cx, double cy) {
  ImageF img(size, size, 1);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) img.at(x, y) = coverage(shape_distance(kind, size, x, y, cx, cy));
  return img;
}

SyntheticPair make_pair(const PairDescriptor& desc) {
  if (desc.size < 32) throw ParameterError("synthetic pair size must be >= 32");
  if (!(std::hypot(desc.offset.x, desc.offset.y) <= 10.0))
    throw ParameterError("synthetic offset magnitude must be <= 10 px");
  if (!(desc.noise_sigma >= 0.0)) throw ParameterError("noise sigma must be >= 0");
  const double c = 0.5 * (desc.size - 1);
  auto render = [&](double cx, double cy) {
    ImageF cov = shape_coverage(desc.kind, desc.size, cx, cy);
    for (double& v : cov.samples()) v = kBackground + (kForeground - kBackground) * v;
    return cov;
  };
  SyntheticPair pair{render(c, c), render(c + desc.offset.x, c + desc.offset.y), desc.offset, desc};
  add_noise(pair.img1, desc.noise_sigma, desc.seed * 2 + 1);
  add_noise(pair.img2, desc.noise_sigma, desc.seed * 2 + 2);
  return pair;
}

Point2 ground_truth_w1(const SyntheticPair& pair, double alpha) {
  return {-alpha * pair.gt_offset.x, -alpha * pair.gt_offset.y};
}

Point2 ground_truth_w2(const SyntheticPair& pair, double alpha) {
  return {(1.0 - alpha) * pair.gt_offset.x, (1.0 - alpha) * pair.gt_offset.y};
}

EndpointError endpoint_error(const AlignResult& result, const SyntheticPair& pair, double alpha) {
  const int size = pair.descriptor.size;
  if (result.w1.width() != size || result.w1.height() != size)
    throw ParameterError("alignment result does not match the synthetic pair dimensions");
  const double c = 0.5 * (size - 1);
  const ImageF support = shape_coverage(pair.descriptor.kind, size, c + alpha * pair.gt_offset.x,
                                        c + alpha * pair.gt_offset.y);
  const Point2 gt = ground_truth_w1(pair, alpha);
  EndpointError err;
  double sum = 0.0;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      if (support.at(x, y) <= 0.5) continue;
      const double e = std::hypot(result.w1.dx(x, y) - gt.x, result.w1.dy(x, y) - gt.y);
      sum += e;
      err.max = std::max(err.max, e);
      ++err.support_pixels;
    }
  if (err.support_pixels > 0) err.mean = sum / static_cast<double>(err.support_pixels);
  return err;
}

double residual_reduction(const SyntheticPair& pair, const AlignResult& result,
                          const AlignParams& params) {
  const ImageF h1 = alignment_signal(pair.img1, params.hp_sigma);
  const ImageF h2 = alignment_signal(pair.img2, params.hp_sigma);
  const WarpField zero(h1.width(), h1.height());
  const double before = data_energy(h1, h2, zero, zero, params.roi);
  if (before == 0.0)
    throw RangeError("residual reduction undefined: the pair has zero initial data energy");
  return data_energy(h1, h2, result.w1, result.w2, params.roi) / before;
}

SyntheticPortrait make_portrait(std::uint64_t seed, int width, int height) {
  if (width < 200 || height < 240) throw ParameterError("portrait canvas too small");
  std::mt19937_64 rng(seed);
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  const double scale = std::min(width / 600.0, height / 720.0);
  const double d = u(110.0, 135.0) * scale;
  const double cx = width / 2.0 + u(-15.0, 15.0) * scale;
  const double ey = height * 0.43 + u(-15.0, 15.0) * scale;
  const Ellipse face{cx, ey + 0.35 * d, 0.95 * d * u(0.95, 1.05), 1.35 * d * u(0.95, 1.05)};

  const Rgb bg0{u(0.55, 0.8), u(0.6, 0.8), u(0.65, 0.85)};
  const Rgb bg1{bg0.r * 0.8, bg0.g * 0.8, bg0.b * 0.85};
  const double tone = u(0.0, 1.0);
  const Rgb skin{0.55 + 0.35 * tone, 0.38 + 0.3 * tone, 0.28 + 0.28 * tone};
  const Rgb hair{u(0.05, 0.35), u(0.04, 0.25), u(0.02, 0.15)};
  const Rgb iris{u(0.1, 0.45), u(0.15, 0.45), u(0.1, 0.5)};
  const Rgb shirt{u(0.1, 0.8), u(0.1, 0.8), u(0.1, 0.8)};

  ImageF img(width, height, 3);
  for (int y = 0; y < height; ++y) {
    const double t = static_cast<double>(y) / (height - 1);
    for (int x = 0; x < width; ++x) {
      img.at(x, y, 0) = bg0.r + t * (bg1.r - bg0.r);
      img.at(x, y, 1) = bg0.g + t * (bg1.g - bg0.g);
      img.at(x, y, 2) = bg0.b + t * (bg1.b - bg0.b);
    }
  }
  paint(img, {cx, ey + 3.0 * d, 2.4 * d, 1.6 * d}, shirt);
  paint(img, {cx, ey - 0.15 * d, face.a * 1.15, face.b * 0.98}, hair);
  paint(img, {cx, ey + 1.5 * d, 0.45 * d, 0.8 * d}, {skin.r * 0.9, skin.g * 0.9, skin.b * 0.9});
  paint(img, face, skin);
  // soft shading toward the face border
  paint(img, {face.cx, face.cy, face.a * 0.8, face.b * 0.8},
        {std::min(1.0, skin.r * 1.06), std::min(1.0, skin.g * 1.06), std::min(1.0, skin.b * 1.06)}, 0.5);

  const double ir = 0.1 * d;
  for (int side = -1; side <= 1; side += 2) {
    const double ex = cx + side * d / 2.0;
    paint(img, {ex, ey - 0.28 * d, 0.28 * d, 0.05 * d}, {hair.r * 0.8, hair.g * 0.8, hair.b * 0.8});
    paint(img, {ex, ey, 0.26 * d, 0.11 * d}, {0.93, 0.92, 0.9});
    paint(img, {ex, ey, ir, ir}, iris);
    paint(img, {ex, ey, 0.045 * d, 0.045 * d}, {0.03, 0.03, 0.03});
    const double sx = ex + u(-0.4, 0.4) * ir, sy = ey + u(-0.5, 0.0) * ir;
    paint(img, {sx, sy, 0.02 * d, 0.02 * d}, {1.0, 1.0, 1.0});
  }
  const Point2 nose{cx + u(-3.0, 3.0) * scale, ey + 0.55 * d};
  const Point2 nl{cx - 0.14 * d, ey + 0.62 * d}, nr{cx + 0.14 * d, ey + 0.62 * d};
  paint(img, {nose.x, nose.y, 0.1 * d, 0.06 * d}, {skin.r * 0.93, skin.g * 0.9, skin.b * 0.9});
  paint(img, {nl.x, nl.y, 0.06 * d, 0.035 * d}, {skin.r * 0.35, skin.g * 0.3, skin.b * 0.3});
  paint(img, {nr.x, nr.y, 0.06 * d, 0.035 * d}, {skin.r * 0.35, skin.g * 0.3, skin.b * 0.3});
  const Point2 mouth{cx, ey + 0.95 * d};
  const double mw = 0.32 * d * u(0.9, 1.1), mh = 0.08 * d;
  paint(img, {mouth.x, mouth.y, mw, mh}, {0.7, 0.3 + 0.1 * tone, 0.3 + 0.1 * tone});
  paint(img, {mouth.x, mouth.y, mw * 0.95, 0.012 * d}, {0.3, 0.1, 0.1});

  // skin and sensor texture
  std::normal_distribution<double> grain(0.0, 0.035);
  for (double& v : img.samples()) v = std::clamp(v * (1.0 + grain(rng)), 0.0, 1.0);

  SyntheticPortrait out{std::move(img), {}};
  auto& p = out.landmarks.points;
  p = {{cx - d / 2.0, ey},           {cx + d / 2.0, ey},
       {cx - d / 2.0 - 0.26 * d, ey}, {cx - d / 2.0 + 0.26 * d, ey},
       {cx + d / 2.0 - 0.26 * d, ey}, {cx + d / 2.0 + 0.26 * d, ey},
       nose,                          nl,
       nr,                            {mouth.x - mw, mouth.y},
       {mouth.x + mw, mouth.y},       {mouth.x, mouth.y - mh},
       {mouth.x, mouth.y + mh}};
  for (int k = 0; k <= 8; ++k) {
    const double th = std::numbers::pi - k * std::numbers::pi / 8.0;
    p.push_back({face.cx + face.a * std::cos(th), face.cy + face.b * std::sin(th)});
  }
  for (double th : {-0.75 * std::numbers::pi, -0.5 * std::numbers::pi, -0.25 * std::numbers::pi})
    p.push_back({face.cx + face.a * std::cos(th), face.cy + face.b * std::sin(th)});
  return out;
}

}  // namespace morphalign
