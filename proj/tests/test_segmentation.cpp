#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "facekit/rng.hpp"
#include "facekit/segmentation.hpp"
#include "oracles.hpp"

namespace facekit {
namespace {

TEST(Otsu, TwoModesSeparated) {
  std::vector<double> px(100 * 100, 0.0);
  for (std::size_t i = px.size() / 2; i < px.size(); ++i) px[i] = 255.0;
  const GrayImage img(100, 100, px);
  const int t = otsu_threshold(img);
  EXPECT_EQ(t, oracle::otsu_exhaustive(img));
  const auto mask = foreground_mask(img, t);
  for (std::size_t i = 0; i < px.size(); ++i) EXPECT_EQ(mask.bits[i] != 0, px[i] == 255.0);
}

TEST(Otsu, ConstantImageGivesZero) {
  EXPECT_EQ(otsu_threshold(GrayImage(10, 10, 77.0)), 0);
}

TEST(Otsu, ThresholdBetweenModes) {
  std::vector<double> px(100);
  for (std::size_t i = 0; i < 100; ++i) px[i] = i < 50 ? 10.0 : 200.0;
  const GrayImage img(10, 10, px);
  const int t = otsu_threshold(img);
  EXPECT_GT(t, 10);
  EXPECT_LT(t, 200);
  EXPECT_EQ(t, oracle::otsu_exhaustive(img));
}

TEST(Otsu, MatchesExhaustiveScanOnRandomImages) {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t w = 4 + rng.index(30), h = 4 + rng.index(30);
    std::vector<double> px(w * h);
    // Mixture of two clusters with random centers so thresholds vary.
    const double c0 = rng.uniform(0, 128), c1 = rng.uniform(128, 255);
    for (double& v : px) v = std::clamp(std::round(rng.normal(rng.uniform() < 0.5 ? c0 : c1, 20.0)), 0.0, 255.0);
    const GrayImage img(w, h, px);
    EXPECT_EQ(otsu_threshold(img), oracle::otsu_exhaustive(img)) << "trial " << trial;
  }
}

TEST(Components, EmptyMask) {
  EXPECT_TRUE(connected_components(BinaryMask(50, 50)).empty());
}

TEST(Components, SolidSquare) {
  BinaryMask mask(60, 60);
  for (std::size_t r = 10; r < 40; ++r)
    for (std::size_t c = 10; c < 40; ++c) mask.set(r, c);
  const auto boxes = connected_components(mask);
  ASSERT_EQ(boxes.size(), 1u);
  EXPECT_EQ(boxes[0], (BoundingBox{10, 10, 39, 39}));
}

TEST(Components, TwoEqualSquaresOrderedByPosition) {
  BinaryMask mask(80, 80);
  auto fill = [&](std::size_t top, std::size_t left) {
    for (std::size_t r = top; r < top + 25; ++r)
      for (std::size_t c = left; c < left + 25; ++c) mask.set(r, c);
  };
  fill(40, 5);
  fill(2, 50);
  const auto boxes = connected_components(mask);
  ASSERT_EQ(boxes.size(), 2u);
  EXPECT_EQ(boxes[0], (BoundingBox{2, 50, 26, 74}));
  EXPECT_EQ(boxes[1], (BoundingBox{40, 5, 64, 29}));
}

TEST(Components, LargerRegionFirstAndSmallOnesDropped) {
  BinaryMask mask(100, 100);
  for (std::size_t r = 0; r < 21; ++r)
    for (std::size_t c = 0; c < 21; ++c) mask.set(r, c);       // 441 px
  for (std::size_t r = 50; r < 80; ++r)
    for (std::size_t c = 50; c < 80; ++c) mask.set(r, c);      // 900 px
  for (std::size_t r = 90; r < 99; ++r)
    for (std::size_t c = 0; c < 9; ++c) mask.set(r, c);        // 81 px, dropped
  const auto boxes = connected_components(mask);
  ASSERT_EQ(boxes.size(), 2u);
  EXPECT_EQ(boxes[0], (BoundingBox{50, 50, 79, 79}));
  EXPECT_EQ(boxes[1], (BoundingBox{0, 0, 20, 20}));
}

TEST(Components, DiagonalNeighborsAreSeparate) {
  BinaryMask mask(60, 60);
  for (std::size_t r = 0; r < 20; ++r)
    for (std::size_t c = 0; c < 20; ++c) mask.set(r, c);
  for (std::size_t r = 20; r < 40; ++r)
    for (std::size_t c = 20; c < 40; ++c) mask.set(r, c);
  EXPECT_EQ(connected_components(mask).size(), 2u);
}

// Regions agree with a union-find labeling: same count of kept regions, every
// foreground pixel of a kept region inside its box, and region pixel sets disjoint.
TEST(Components, AgreeWithUnionFindLabeling) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t w = 40 + rng.index(40), h = 40 + rng.index(40);
    BinaryMask mask(w, h);
    for (int blob = 0; blob < 6; ++blob) {
      const std::size_t r0 = rng.index(h), c0 = rng.index(w);
      const std::size_t bh = 5 + rng.index(30), bw = 5 + rng.index(30);
      for (std::size_t r = r0; r < std::min(h, r0 + bh); ++r)
        for (std::size_t c = c0; c < std::min(w, c0 + bw); ++c) mask.set(r, c);
    }
    const auto labels = oracle::label_components(mask.bits, w, h);
    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] >= 0) members[labels[i]].push_back(i);
    std::size_t kept = 0;
    for (const auto& [label, px] : members) kept += px.size() >= kMinRegionPixels;

    const auto regions = connected_regions(mask);
    ASSERT_EQ(regions.size(), kept);
    for (const auto& [label, px] : members) {
      if (px.size() < kMinRegionPixels) continue;
      std::size_t owners = 0;
      for (const auto& reg : regions) {
        bool all_inside = true;
        for (std::size_t i : px) all_inside = all_inside && reg.box.contains(i / w, i % w);
        if (all_inside && reg.area == px.size()) ++owners;
      }
      EXPECT_GE(owners, 1u);
    }
    for (std::size_t k = 1; k < regions.size(); ++k) EXPECT_GE(regions[k - 1].area, regions[k].area);
  }
}

}  // namespace
}  // namespace facekit
