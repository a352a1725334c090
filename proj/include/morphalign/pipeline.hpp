#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "morphalign/blend.hpp"
#include "morphalign/image.hpp"
#include "morphalign/image_io.hpp"
#include "morphalign/landmarks.hpp"
#include "morphalign/pwalign.hpp"

namespace morphalign {

// Passport raster: 431 wide, 513 high.
inline constexpr int kPortraitWidth = 431;
inline constexpr int kPortraitHeight = 513;
inline constexpr double kMinEyeDistance = 90.0;
inline constexpr double kBytesPerKb = 1024.0;

using EyeIndices = std::pair<int, int>;

struct GeometryReport {
  bool ok = false;
  double eye_distance = 0.0;
  std::string reason;
};

// Passes iff the inter-eye distance is >= min_eye_distance and every landmark
// lies inside the image.
GeometryReport validate_geometry(const ImageF& img, const LandmarkSet& lm, EyeIndices eyes,
                                 double min_eye_distance = kMinEyeDistance);

struct CropConfig {
  double height_per_eye_distance = 4.5;
  double eye_line = 0.45;  // fraction of the crop height from the top
  int out_width = kPortraitWidth;
  int out_height = kPortraitHeight;
  double max_overshoot = 0.10;  // per side, fraction of the crop extent
};

struct Portrait {
  ImageF image;
  LandmarkSet landmarks;
};

// Crop centered on the eye midpoint, scaled so the crop height is
// height_per_eye_distance eye distances, then resampled bilinearly.
Portrait crop_resize_portrait(const ImageF& img, const LandmarkSet& lm, EyeIndices eyes,
                              const CropConfig& config = {});

enum class Method { simple, pw };
std::string to_string(Method m);
Method parse_method(const std::string& s);

enum class RoiMode { face, full };

struct MorphSettings {
  AlignParams align;
  EyeIndices eyes{0, 1};
  CropConfig crop;
  double feather_sigma = 6.0;
  double split_sigma = 8.0;
  bool donor_is_a = true;
  // Where pixel-wise alignment runs when align.roi is unset.
  RoiMode roi_mode = RoiMode::face;
  int roi_margin = 24;
  std::optional<std::vector<int>> face_outline;
};

struct MorphOutcome {
  ImageF morph;      // after background compositing
  ImageF aligned_a;  // key-point (and, for pw, pixel-wise) aligned inputs
  ImageF aligned_b;
  LandmarkSet geometry;  // alpha-averaged landmarks
  Triangulation triangulation;
  FaceMask mask;
  std::optional<AlignResult> alignment;
};

// Pixel rectangle enclosing the landmarks plus margin, clipped to the image.
PixelRect face_roi(const LandmarkSet& lm, int width, int height, int margin);

// Morph of two cropped portraits of equal size.
MorphOutcome morph_portraits(const Portrait& a, const Portrait& b, double alpha, Method method,
                             const MorphSettings& settings);

struct JpegTarget {
  double min_kb = 15.0;
  double max_kb = 20.0;
};
JpegTarget parse_jpeg_target(const std::string& s);  // "15:20"

// Largest JPEG quality in 1..100 whose size is <= max_kb; succeeds iff that
// size is also >= min_kb (kB = 1024 bytes). Throws RangeError otherwise.
Bytes jpeg_compress_to_target(const ImageF& img, double min_kb, double max_kb,
                              int* chosen_quality = nullptr);

struct MorphJob {
  std::string id;
  std::filesystem::path image_a, image_b, landmarks_a, landmarks_b;
  double alpha = 0.5;
  Method method = Method::pw;
  MorphSettings settings;
  std::filesystem::path output;
  std::optional<JpegTarget> jpeg_target;
  std::optional<std::filesystem::path> dump_dir;
};

struct ManifestRow {
  std::string id;
  std::string image_a, image_b, landmarks_a, landmarks_b;
  std::string method;
  double alpha = 0.5;
  std::string output;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  int iterations = 0;
  std::size_t output_bytes = 0;
  std::string status;  // "ok" or "failed:<kind>"
  std::string message;  // not serialized
};

// Runs one job end to end. Throws on failure.
ManifestRow run_job_or_throw(const MorphJob& job);
// Runs one job; any library error is captured in the row status.
ManifestRow run_job(const MorphJob& job);

// Input manifest: header "id,image_a,image_b,lm_a,lm_b,method,alpha,output"
// with an optional trailing "jpeg_target" column. Relative paths are taken
// relative to the manifest's directory.
std::vector<MorphJob> read_manifest(const std::filesystem::path& path, const MorphSettings& base);
std::vector<MorphJob> parse_manifest(const std::string& text, const std::filesystem::path& base_dir,
                                     const MorphSettings& base);

// Jobs run on at most `parallelism` workers; rows come back in input order.
// With strict set, the first failing row (in input order) is rethrown.
std::vector<ManifestRow> run_batch(const std::vector<MorphJob>& jobs, int parallelism,
                                   bool strict = false);

std::string format_manifest(const std::vector<ManifestRow>& rows);

// Worker count honoring MORPHALIGN_THREADS.
int capped_parallelism(int requested);

}  // namespace morphalign
