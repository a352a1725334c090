#pragma once

#include <optional>
#include <vector>

#include "morphalign/image.hpp"
#include "morphalign/landmarks.hpp"

namespace morphalign {

// (1 - alpha) a + alpha b, per sample, evaluated as a + alpha (b - a).
ImageF additive_blend(const ImageF& a, const ImageF& b, double alpha);

struct FaceMask {
  ImageF binary;     // 1 inside the landmark hull, 0 outside
  ImageF feathered;  // gaussian_blur(binary, feather_sigma) clamped to [0,1]
};

// Convex hull (counter-clockwise, no collinear points) of the given points.
std::vector<Point2> convex_hull(std::vector<Point2> points);

// Mask of the convex hull of the landmarks (or of the listed subset).
// Throws ParameterError when the hull has no area.
FaceMask face_mask_from_landmarks(const LandmarkSet& lm, int width, int height,
                                  double feather_sigma,
                                  const std::optional<std::vector<int>>& outline = std::nullopt);

// Two-band composite of the morph into the donor: low frequencies
// (gaussian_blur at split_sigma) cross over with the feathered mask, the
// high-frequency residual switches with the binary mask.
ImageF background_composite(const ImageF& morph, const ImageF& donor, const ImageF& binary_mask,
                            const ImageF& feathered_mask, double split_sigma);

}  // namespace morphalign
