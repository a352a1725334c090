#include "morphalign/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <string>
#include <tuple>

#include "morphalign/error.hpp"
#include "morphalign/warp_field.hpp"

namespace morphalign {

namespace {

double eye_distance(const LandmarkSet& lm, EyeIndices eyes) {
  const Point2& l = lm[static_cast<std::size_t>(eyes.first)];
  const Point2& r = lm[static_cast<std::size_t>(eyes.second)];
  return std::hypot(r.x - l.x, r.y - l.y);
}

bool valid_eye_indices(const LandmarkSet& lm, EyeIndices eyes) {
  const auto n = static_cast<int>(lm.size());
  return eyes.first >= 0 && eyes.second >= 0 && eyes.first < n && eyes.second < n &&
         eyes.first != eyes.second;
}

void dump_debug(const std::filesystem::path& dir, const MorphOutcome& out) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create dump directory " + dir.string() + ": " + ec.message());
  write_triangulation(dir / "triangles.txt", out.triangulation);
  save_image(dir / "mask.png", out.mask.feathered);
  if (out.alignment) {
    const auto& a = *out.alignment;
    write_warp_field(dir / "w1.pwwf", a.w1);
    write_warp_field(dir / "w2.pwwf", a.w2);
    const double scale = std::max(a.w1.max_magnitude(), a.w2.max_magnitude());
    save_image(dir / "w1.png", visualize_warp_field(a.w1, scale));
    save_image(dir / "w2.png", visualize_warp_field(a.w2, scale));
  }
}

}  // namespace

GeometryReport validate_geometry(const ImageF& img, const LandmarkSet& lm, EyeIndices eyes,
                                 double min_eye_distance) {
  GeometryReport rep;
  if (!valid_eye_indices(lm, eyes)) {
    rep.reason = "eye indices " + std::to_string(eyes.first) + "," + std::to_string(eyes.second) +
                 " invalid for " + std::to_string(lm.size()) + " landmarks";
    return rep;
  }
  rep.eye_distance = eye_distance(lm, eyes);
  for (std::size_t i = 0; i < lm.size(); ++i) {
    if (!inside_image(lm[i], img.width(), img.height())) {
      rep.reason = "landmark " + std::to_string(i) + " out of bounds";
      return rep;
    }
  }
  if (rep.eye_distance < min_eye_distance) {
    rep.reason = "inter-eye distance " + std::to_string(rep.eye_distance) + " px below minimum " +
                 std::to_string(min_eye_distance);
    return rep;
  }
  rep.ok = true;
  return rep;
}

Portrait crop_resize_portrait(const ImageF& img, const LandmarkSet& lm, EyeIndices eyes,
                              const CropConfig& cfg) {
  if (!valid_eye_indices(lm, eyes)) throw ParameterError("invalid eye indices");
  const double d = eye_distance(lm, eyes);
  if (!(d > 0.0)) throw GeometryError("eye landmarks coincide");
  const Point2& l = lm[static_cast<std::size_t>(eyes.first)];
  const Point2& r = lm[static_cast<std::size_t>(eyes.second)];
  const Point2 mid{0.5 * (l.x + r.x), 0.5 * (l.y + r.y)};

  const double crop_h = cfg.height_per_eye_distance * d;
  const double scale = cfg.out_height / crop_h;  // output px per source px
  const double crop_w = cfg.out_width / scale;
  const double ox = mid.x - 0.5 * cfg.out_width / scale;
  const double oy = mid.y - cfg.eye_line * cfg.out_height / scale;

  const double over_left = std::max(0.0, -ox) / crop_w;
  const double over_right = std::max(0.0, ox + crop_w - (img.width() - 1)) / crop_w;
  const double over_top = std::max(0.0, -oy) / crop_h;
  const double over_bottom = std::max(0.0, oy + crop_h - (img.height() - 1)) / crop_h;
  const double worst = std::max({over_left, over_right, over_top, over_bottom});
  if (worst > cfg.max_overshoot)
    throw GeometryError("crop exceeds the source image by " + std::to_string(100.0 * worst) +
                        "% on one side");

  Portrait out{ImageF(cfg.out_width, cfg.out_height, img.channels()), {}};
  const int ch = img.channels();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < cfg.out_height; ++y)
    for (int x = 0; x < cfg.out_width; ++x)
      for (int c = 0; c < ch; ++c)
        out.image.at(x, y, c) = sample_bilinear(img, ox + x / scale, oy + y / scale, c);
  out.landmarks.points.reserve(lm.size());
  for (const Point2& p : lm.points) out.landmarks.points.push_back({(p.x - ox) * scale, (p.y - oy) * scale});
  return out;
}

std::string to_string(Method m) { return m == Method::pw ? "pw" : "simple"; }

Method parse_method(const std::string& s) {
  if (s == "pw") return Method::pw;
  if (s == "simple") return Method::simple;
  throw ParameterError("unknown method \"" + s + "\" (expected pw or simple)");
}

PixelRect face_roi(const LandmarkSet& lm, int width, int height, int margin) {
  double x0 = lm[0].x, x1 = x0, y0 = lm[0].y, y1 = y0;
  for (const Point2& p : lm.points) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const int ix0 = std::clamp(static_cast<int>(std::floor(x0)) - margin, 0, width - 1);
  const int iy0 = std::clamp(static_cast<int>(std::floor(y0)) - margin, 0, height - 1);
  const int ix1 = std::clamp(static_cast<int>(std::ceil(x1)) + margin, 0, width - 1);
  const int iy1 = std::clamp(static_cast<int>(std::ceil(y1)) + margin, 0, height - 1);
  return {ix0, iy0, std::max(2, ix1 - ix0 + 1), std::max(2, iy1 - iy0 + 1)};
}

MorphOutcome morph_portraits(const Portrait& a, const Portrait& b, double alpha, Method method,
                             const MorphSettings& settings) {
  if (!a.image.same_shape(b.image)) throw ParameterError("portraits differ in size or channels");
  const int w = a.image.width(), h = a.image.height();

  MorphOutcome out;
  out.geometry = average_landmarks(a.landmarks, b.landmarks, alpha);
  out.triangulation = triangulate(out.geometry, w, h);
  out.aligned_a = piecewise_affine_warp(a.image, a.landmarks, out.geometry, out.triangulation);
  out.aligned_b = piecewise_affine_warp(b.image, b.landmarks, out.geometry, out.triangulation);

  if (method == Method::pw) {
    AlignParams params = settings.align;
    if (!params.roi && settings.roi_mode == RoiMode::face)
      params.roi = face_roi(out.geometry, w, h, settings.roi_margin);
    out.alignment = gauss_newton_align(out.aligned_a, out.aligned_b, params);
    out.aligned_a = warp_image(out.aligned_a, out.alignment->w1);
    out.aligned_b = warp_image(out.aligned_b, out.alignment->w2);
  }

  const ImageF blended = additive_blend(out.aligned_a, out.aligned_b, alpha);
  out.mask = face_mask_from_landmarks(out.geometry, w, h, settings.feather_sigma, settings.face_outline);
  out.morph = background_composite(blended, settings.donor_is_a ? out.aligned_a : out.aligned_b,
                                   out.mask.binary, out.mask.feathered, settings.split_sigma);
  return out;
}

JpegTarget parse_jpeg_target(const std::string& s) {
  const auto colon = s.find(':');
  JpegTarget t;
  try {
    if (colon == std::string::npos) throw std::invalid_argument(s);
    std::size_t used = 0;
    t.min_kb = std::stod(s.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument(s);
    const std::string rest = s.substr(colon + 1);
    t.max_kb = std::stod(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(s);
  } catch (const std::logic_error&) {
    throw ParameterError("jpeg target must look like MIN:MAX in kB, got \"" + s + "\"");
  }
  if (!(t.min_kb >= 1.0 && t.min_kb < t.max_kb))
    throw ParameterError("jpeg target needs 1 <= min < max, got \"" + s + "\"");
  return t;
}

Bytes jpeg_compress_to_target(const ImageF& img, double min_kb, double max_kb, int* chosen_quality) {
  if (!(min_kb >= 1.0 && min_kb < max_kb)) throw ParameterError("jpeg target needs 1 <= min < max");
  const double max_bytes = max_kb * kBytesPerKb, min_bytes = min_kb * kBytesPerKb;

  Bytes lo_bytes = encode_jpeg(img, 1);
  if (static_cast<double>(lo_bytes.size()) > max_bytes) {
    const Bytes hi = encode_jpeg(img, 100);
    throw RangeError("no JPEG quality fits " + std::to_string(min_kb) + ".." + std::to_string(max_kb) +
                     " kB: size at q=1 is " + std::to_string(lo_bytes.size()) + " B, at q=100 is " +
                     std::to_string(hi.size()) + " B");
  }
  int lo = 1, hi = 100;
  Bytes best = std::move(lo_bytes);
  Bytes top = encode_jpeg(img, 100);
  if (static_cast<double>(top.size()) <= max_bytes) {
    lo = 100;
    best = std::move(top);
  } else {
    // invariant: size(lo) <= max < size(hi)
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      Bytes enc = encode_jpeg(img, mid);
      if (static_cast<double>(enc.size()) <= max_bytes) {
        lo = mid;
        best = std::move(enc);
      } else {
        hi = mid;
      }
    }
  }
  if (static_cast<double>(best.size()) < min_bytes) {
    const std::size_t q1 = lo == 1 ? best.size() : encode_jpeg(img, 1).size();
    throw RangeError("no JPEG quality fits " + std::to_string(min_kb) + ".." + std::to_string(max_kb) +
                     " kB: size at q=1 is " + std::to_string(q1) + " B, at q=100 is " +
                     std::to_string(encode_jpeg(img, 100).size()) + " B");
  }
  if (chosen_quality) *chosen_quality = lo;
  return best;
}

ManifestRow run_job_or_throw(const MorphJob& job) {
  ManifestRow row;
  row.id = job.id;
  row.image_a = job.image_a.string();
  row.image_b = job.image_b.string();
  row.landmarks_a = job.landmarks_a.string();
  row.landmarks_b = job.landmarks_b.string();
  row.method = to_string(job.method);
  row.alpha = job.alpha;
  row.output = job.output.string();
  if (!(job.alpha >= 0.0 && job.alpha <= 1.0)) throw ParameterError("alpha must be in [0,1]");

  const ImageF img_a = load_image(job.image_a);
  const ImageF img_b = load_image(job.image_b);
  const LandmarkSet lm_a = load_landmarks(job.landmarks_a);
  const LandmarkSet lm_b = load_landmarks(job.landmarks_b);
  if (lm_a.size() != lm_b.size())
    throw FormatError("landmark files disagree in point count: " + std::to_string(lm_a.size()) +
                      " vs " + std::to_string(lm_b.size()));

  const EyeIndices eyes = job.settings.eyes;
  for (const auto& [img, lm, name] : {std::tuple{&img_a, &lm_a, "A"}, std::tuple{&img_b, &lm_b, "B"}}) {
    const GeometryReport rep = validate_geometry(*img, *lm, eyes);
    if (!rep.ok) throw GeometryError(std::string("image ") + name + ": " + rep.reason);
  }
  const Portrait pa = crop_resize_portrait(img_a, lm_a, eyes, job.settings.crop);
  const Portrait pb = crop_resize_portrait(img_b, lm_b, eyes, job.settings.crop);

  const MorphOutcome out = morph_portraits(pa, pb, job.alpha, job.method, job.settings);
  if (out.alignment) {
    row.initial_energy = out.alignment->initial_energy;
    row.final_energy = out.alignment->final_energy();
    row.iterations = out.alignment->iterations_used;
  }

  Bytes encoded;
  if (job.jpeg_target) {
    encoded = jpeg_compress_to_target(out.morph, job.jpeg_target->min_kb, job.jpeg_target->max_kb);
  } else {
    std::string ext = job.output.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png")
      encoded = encode_png(out.morph);
    else if (ext == ".jpg" || ext == ".jpeg")
      encoded = encode_jpeg(out.morph, 95);
    else
      throw IoError("unsupported output extension: " + job.output.string());
  }
  if (job.output.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(job.output.parent_path(), ec);
  }
  write_bytes(job.output, encoded);
  if (job.dump_dir) dump_debug(*job.dump_dir, out);
  row.output_bytes = encoded.size();
  row.status = "ok";
  return row;
}

ManifestRow run_job(const MorphJob& job) {
  try {
    return run_job_or_throw(job);
  } catch (const Error& e) {
    ManifestRow row;
    row.id = job.id;
    row.image_a = job.image_a.string();
    row.image_b = job.image_b.string();
    row.landmarks_a = job.landmarks_a.string();
    row.landmarks_b = job.landmarks_b.string();
    row.method = to_string(job.method);
    row.alpha = job.alpha;
    row.output = job.output.string();
    row.status = "failed:" + std::string(to_string(e.kind()));
    row.message = e.what();
    return row;
  }
}

}  // namespace morphalign
