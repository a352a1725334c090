#include <gtest/gtest.h>

#include <cmath>

#include "morphalign/error.hpp"
#include "morphalign/image.hpp"
#include "morphalign/warp_field.hpp"

namespace morphalign {
namespace {

ImageF power_ramp() {
  // r(x, y) = (7y + x)^1.5 / 100 on a 7x5 grid
  ImageF img(7, 5, 1);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x) img.at(x, y) = std::pow(7.0 * y + x, 1.5) / 100.0;
  return img;
}

TEST(Image, RejectsBadDimensions) {
  EXPECT_THROW(ImageF(0, 3, 1), ParameterError);
  EXPECT_THROW(ImageF(3, 3, 2), ParameterError);
  EXPECT_THROW(ImageF(2, 2, 1, std::vector<double>(3)), ParameterError);
}

TEST(Image, GrayscaleUsesLumaWeights) {
  ImageF rgb(1, 1, 3);
  rgb.at(0, 0, 0) = 1.0;
  EXPECT_DOUBLE_EQ(to_grayscale(rgb).at(0, 0), 0.299);
  rgb.at(0, 0, 1) = 1.0;
  rgb.at(0, 0, 2) = 1.0;
  EXPECT_NEAR(to_grayscale(rgb).at(0, 0), 1.0, 1e-15);
}

// Reference values from scipy.ndimage.gaussian_filter (mode "nearest").
TEST(Image, BlurImpulseMatchesScipy) {
  ImageF img(9, 9, 1);
  img.at(4, 4) = 1.0;
  const ImageF b = gaussian_blur(img, 1.0);
  EXPECT_NEAR(b.at(4, 4), 0.15924112569070245, 1e-12);
  EXPECT_NEAR(b.at(5, 4), 0.09658462501856413, 1e-12);
  EXPECT_NEAR(b.at(5, 3), 0.05858153633060701, 1e-12);
  EXPECT_NEAR(b.at(7, 4), 0.0017690091140438213, 1e-12);
  double sum = 0.0;
  for (double v : b.samples()) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Image, BlurReplicatesBordersLikeScipy) {
  const ImageF b = gaussian_blur(power_ramp(), 1.5);
  EXPECT_NEAR(b.at(0, 0), 0.15980309838103246, 1e-12);
  EXPECT_NEAR(b.at(3, 2), 0.7803871008361338, 1e-12);
  EXPECT_NEAR(b.at(6, 4), 1.6236236102412298, 1e-12);
}

TEST(Image, BlurOfConstantIsExact) {
  const ImageF c(13, 11, 3, 0.3);
  EXPECT_EQ(gaussian_blur(c, 2.0), c);
  for (double v : high_pass(c, 2.0).samples()) EXPECT_EQ(v, 0.0);
}

TEST(Image, BlurRejectsNonPositiveSigma) {
  EXPECT_THROW(gaussian_blur(ImageF(4, 4, 1), 0.0), ParameterError);
  EXPECT_THROW(gaussian_blur(ImageF(4, 4, 1), -1.0), ParameterError);
}

TEST(Image, HighPassIsImageMinusBlur) {
  const ImageF r = power_ramp();
  const ImageF hp = high_pass(r, 1.5), lp = gaussian_blur(r, 1.5);
  for (std::size_t i = 0; i < hp.samples().size(); ++i)
    EXPECT_DOUBLE_EQ(hp.samples()[i], r.samples()[i] - lp.samples()[i]);
}

TEST(Image, GradientOfLinearRampIsExact) {
  ImageF img(6, 4, 1);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x) img.at(x, y) = 0.25 * x - 0.5 * y;
  const GradientPair g = gradient(img);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x) {
      EXPECT_DOUBLE_EQ(g.gx.at(x, y), 0.25);
      EXPECT_DOUBLE_EQ(g.gy.at(x, y), -0.5);
    }
}

TEST(Image, GradientUsesCentralAndOneSidedDifferences) {
  ImageF img(3, 2, 1, std::vector<double>{0, 1, 4, 2, 3, 9});
  const GradientPair g = gradient(img);
  EXPECT_DOUBLE_EQ(g.gx.at(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(g.gx.at(1, 0), 2.0);
  EXPECT_DOUBLE_EQ(g.gx.at(2, 0), 3.0);
  EXPECT_DOUBLE_EQ(g.gy.at(2, 0), 5.0);
  EXPECT_DOUBLE_EQ(g.gy.at(2, 1), 5.0);
  EXPECT_THROW(gradient(ImageF(1, 3, 1)), ParameterError);
}

// Reference values from scipy.ndimage.map_coordinates (order 1, mode "nearest").
TEST(Image, BilinearMatchesScipy) {
  const ImageF r = power_ramp();
  EXPECT_NEAR(sample_bilinear(r, 2.75, 1.25), 0.3999271102010342, 1e-13);
  EXPECT_NEAR(sample_bilinear(r, 0.1, 3.5), 1.2294621966231118, 1e-13);
}

TEST(Image, BilinearIsExactAtNodesAndClamps) {
  const ImageF r = power_ramp();
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x) EXPECT_EQ(sample_bilinear(r, x, y), r.at(x, y));
  EXPECT_EQ(sample_bilinear(r, -3.0, -1.0), r.at(0, 0));
  EXPECT_EQ(sample_bilinear(r, 40.0, 2.0), r.at(6, 2));
}

TEST(Image, ZeroWarpIsIdentity) {
  const ImageF r = power_ramp();
  EXPECT_EQ(warp_image(r, WarpField(7, 5)), r);
}

TEST(Image, IntegerWarpShiftsSamples) {
  const ImageF r = power_ramp();
  const ImageF s = warp_image(r, WarpField(7, 5, 1.0, 0.0));
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 6; ++x) EXPECT_EQ(s.at(x, y), r.at(x + 1, y));
  EXPECT_THROW(warp_image(r, WarpField(6, 5)), ParameterError);
}

TEST(Image, WarpSamplesEveryChannel) {
  ImageF rgb(4, 4, 3);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x)
      for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = x + 10.0 * c;
  const ImageF s = warp_image(rgb, WarpField(4, 4, 0.5, 0.0));
  EXPECT_DOUBLE_EQ(s.at(1, 2, 0), 1.5);
  EXPECT_DOUBLE_EQ(s.at(1, 2, 2), 21.5);
}

TEST(Image, ChannelConversion) {
  const ImageF g(2, 2, 1, 0.5);
  const ImageF rgb = with_channels(g, 3);
  EXPECT_EQ(rgb.channels(), 3);
  EXPECT_EQ(rgb.at(1, 1, 2), 0.5);
  EXPECT_NEAR(max_abs_difference(with_channels(rgb, 1), g), 0.0, 1e-15);
}

}  // namespace
}  // namespace morphalign
