#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "morphalign/image.hpp"
#include "morphalign/landmarks.hpp"
#include "morphalign/pwalign.hpp"

namespace morphalign {

// Ghosting prototypes: disk (iris), ring (iris border), dot (specular
// highlight), arc (nostril rim).
enum class ShapeKind { disk, ring, dot, arc };

std::string_view to_string(ShapeKind kind) noexcept;
ShapeKind parse_shape_kind(std::string_view name);

struct PairDescriptor {
  ShapeKind kind = ShapeKind::disk;
  int size = 64;
  Point2 offset;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct SyntheticPair {
  ImageF img1;  // shape centered at ((size-1)/2, (size-1)/2)
  ImageF img2;  // the same shape displaced by offset
  Point2 gt_offset;
  PairDescriptor descriptor;
};

// Single-channel pair; noise is i.i.d. Gaussian with independent streams
// derived from seed. Requires |offset| <= 10 and size >= 32.
SyntheticPair make_pair(const PairDescriptor& desc);

// Anti-aliased coverage of the shape centered at (cx, cy), in [0,1].
ImageF shape_coverage(ShapeKind kind, int size, double cx, double cy);

// Fields that superimpose both shapes at the alpha-interpolated position:
// w1 = -alpha * offset, w2 = (1 - alpha) * offset.
Point2 ground_truth_w1(const SyntheticPair& pair, double alpha = 0.5);
Point2 ground_truth_w2(const SyntheticPair& pair, double alpha = 0.5);

struct EndpointError {
  double mean = 0.0;
  double max = 0.0;
  std::size_t support_pixels = 0;
};

// Error of w1 against the ground-truth split, over pixels where the shape,
// placed at its alpha-interpolated position, has coverage > 0.5.
EndpointError endpoint_error(const AlignResult& result, const SyntheticPair& pair,
                             double alpha = 0.5);

// data_energy(after) / data_energy(zero warps) on the alignment signals.
// Throws RangeError when the pair has zero initial data energy.
double residual_reduction(const SyntheticPair& pair, const AlignResult& result,
                          const AlignParams& params);

// Face-like test portrait with landmarks in the schema below.
struct SyntheticPortrait {
  ImageF image;  // 3 channels
  LandmarkSet landmarks;
};

namespace portrait_landmarks {
inline constexpr int kLeftEye = 0;
inline constexpr int kRightEye = 1;
inline constexpr int kCount = 25;
}  // namespace portrait_landmarks

// 0/1 eye centers, 2-5 eye corners, 6 nose tip, 7/8 nostrils, 9-12 mouth,
// 13-21 jaw from left temple to right temple, 22-24 forehead.
SyntheticPortrait make_portrait(std::uint64_t seed, int width = 600, int height = 720);

}  // namespace morphalign
