#include <cstdint>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "facekit/image.hpp"
#include "facekit/pgm.hpp"
#include "facekit/rng.hpp"

namespace facekit {
namespace {

std::vector<std::uint8_t> bytes_of(const std::string& header, std::vector<std::uint8_t> raster) {
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), raster.begin(), raster.end());
  return out;
}

GrayImage random_image(Rng& rng, std::size_t w, std::size_t h) {
  std::vector<double> px(w * h);
  for (double& v : px) v = static_cast<double>(rng.index(256));
  return GrayImage(w, h, std::move(px));
}

TEST(Pgm, ParsesCheckerboard) {
  const auto img = parse_pgm(bytes_of("P5 2 2 255\n", {0, 255, 255, 0}));
  ASSERT_EQ(img.width(), 2u);
  ASSERT_EQ(img.height(), 2u);
  EXPECT_EQ(img.at(0, 0), 0);
  EXPECT_EQ(img.at(0, 1), 255);
  EXPECT_EQ(img.at(1, 0), 255);
  EXPECT_EQ(img.at(1, 1), 0);
}

TEST(Pgm, ParsesSinglePixel) {
  const auto img = parse_pgm(bytes_of("P5 1 1 255\n", {128}));
  ASSERT_EQ(img.size(), 1u);
  EXPECT_EQ(img.at(0, 0), 128);
}

TEST(Pgm, SkipsComments) {
  const auto img = parse_pgm(bytes_of("P5\n# made by hand\n2 # width\n1\n255\n", {7, 9}));
  EXPECT_EQ(img.width(), 2u);
  EXPECT_EQ(img.at(0, 1), 9);
}

TEST(Pgm, RasterMayStartWithWhitespaceByte) {
  // The single separator after maxval is consumed; a raster byte of '\n' is data.
  const auto img = parse_pgm(bytes_of("P5 1 1 255\n", {'\n'}));
  EXPECT_EQ(img.at(0, 0), 10);
}

TEST(Pgm, RejectsWrongMagic) {
  try {
    parse_pgm(bytes_of("P6 1 1 255\n", {1, 2, 3}));
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
}

TEST(Pgm, RejectsTruncatedRaster) {
  const auto data = bytes_of("P5 2 2 255\n", {1, 2, 3});
  try {
    parse_pgm(data);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), data.size());
    EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos);
  }
}

TEST(Pgm, RejectsWideMaxval) {
  try {
    parse_pgm(bytes_of("P5 1 1 65535\n", {0, 0}));
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 7u);
  }
}

TEST(Pgm, RejectsMissingField) {
  EXPECT_THROW(parse_pgm(bytes_of("P5 2 ", {})), FormatError);
  EXPECT_THROW(parse_pgm(bytes_of("P5x", {})), FormatError);
}

TEST(Pgm, EncodeParseRoundTrip) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto img = random_image(rng, 1 + rng.index(40), 1 + rng.index(40));
    EXPECT_EQ(parse_pgm(encode_pgm(img)), img);
  }
}

TEST(Grayscale, WhiteAndBlack) {
  std::vector<Rgb> white(6, {255, 255, 255}), black(6, {0, 0, 0});
  const auto w = to_grayscale(3, 2, white);
  const auto b = to_grayscale(3, 2, black);
  for (double v : w.pixels()) EXPECT_NEAR(v, 255.0, 1e-9);
  for (double v : b.pixels()) EXPECT_EQ(v, 0.0);
}

TEST(Grayscale, Bt601Weights) {
  const std::vector<Rgb> px{{100, 200, 50}};
  EXPECT_NEAR(to_grayscale(1, 1, px).at(0, 0), 153.0, 1e-12);
}

TEST(Grayscale, RejectsBadGrid) {
  const std::vector<Rgb> px{{1, 2, 3}};
  EXPECT_THROW(to_grayscale(2, 1, px), InvalidArgument);
  const std::vector<Rgb> bad{{300, 0, 0}};
  EXPECT_THROW(to_grayscale(1, 1, bad), InvalidArgument);
}

TEST(Resize, ConstantUpscale) {
  const auto out = resize_nearest(GrayImage(1, 1, 42.0), 2, 2);
  ASSERT_EQ(out.size(), 4u);
  for (double v : out.pixels()) EXPECT_EQ(v, 42.0);
}

TEST(Resize, FloorSamplingPicksOrigin) {
  const GrayImage img(2, 2, std::vector<double>{0, 255, 255, 0});
  const auto out = resize_nearest(img, 1, 1);
  EXPECT_EQ(out.at(0, 0), 0.0);
}

TEST(Resize, SameSizeIsIdentity) {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto img = random_image(rng, 1 + rng.index(120), 1 + rng.index(120));
    EXPECT_EQ(resize_nearest(img, img.width(), img.height()), img);
  }
}

TEST(Resize, RejectsZeroDimension) {
  EXPECT_THROW(resize_nearest(GrayImage(3, 3), 0, 4), InvalidArgument);
  EXPECT_THROW(resize_nearest(GrayImage(3, 3), 4, 0), InvalidArgument);
}

TEST(Patches, ConstantImage) {
  const auto patches = split_patches(GrayImage(100, 100, 7.0));
  for (const auto& p : patches) {
    for (double v : p.pixels) EXPECT_EQ(v, 7.0);
  }
}

TEST(Patches, CornerPixelsLandInCornerPatches) {
  GrayImage first(100, 100), last(100, 100);
  first.set(0, 0, 1.0);
  last.set(99, 99, 1.0);
  const auto a = split_patches(first);
  const auto b = split_patches(last);
  for (std::size_t i = 0; i < kPatchCount; ++i) {
    double sa = 0, sb = 0;
    for (double v : a[i].pixels) sa += v;
    for (double v : b[i].pixels) sb += v;
    EXPECT_EQ(sa != 0, i == 0) << i;
    EXPECT_EQ(sb != 0, i == 24) << i;
  }
}

TEST(Patches, OriginsAreRowMajorMultiplesOf20) {
  const auto patches = split_patches(GrayImage(100, 100));
  for (std::size_t i = 0; i < kPatchCount; ++i) {
    EXPECT_EQ(patches[i].row, (i / 5) * 20);
    EXPECT_EQ(patches[i].col, (i % 5) * 20);
  }
}

TEST(Patches, SplitThenAssembleIsIdentity) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto img = random_image(rng, 100, 100);
    EXPECT_EQ(assemble_patches(split_patches(img)), img);
  }
}

TEST(Patches, RejectsWrongSize) {
  EXPECT_THROW(split_patches(GrayImage(99, 100)), InvalidArgument);
}

TEST(GrayImageType, RejectsOutOfRangeValues) {
  EXPECT_THROW(GrayImage(1, 1, std::vector<double>{256.0}), InvalidArgument);
  EXPECT_THROW(GrayImage(1, 1, std::vector<double>{-1.0}), InvalidArgument);
  EXPECT_THROW(GrayImage(2, 1, std::vector<double>{1.0}), InvalidArgument);
}

TEST(Crop, ExtractsBox) {
  GrayImage img(4, 3);
  img.set(1, 2, 9.0);
  const auto c = crop(img, {1, 1, 2, 3});
  EXPECT_EQ(c.width(), 3u);
  EXPECT_EQ(c.height(), 2u);
  EXPECT_EQ(c.at(0, 1), 9.0);
  EXPECT_THROW(crop(img, {0, 0, 3, 0}), InvalidArgument);
}

}  // namespace
}  // namespace facekit
