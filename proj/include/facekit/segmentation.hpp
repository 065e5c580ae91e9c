#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "facekit/image.hpp"

namespace facekit {

/// Connected regions smaller than this are discarded: they cannot hold even one patch.
inline constexpr std::size_t kMinRegionPixels = kPatchPixels;

inline std::array<std::size_t, 256> luminance_histogram(const GrayImage& img) {
  std::array<std::size_t, 256> hist{};
  for (double v : img.pixels()) ++hist[static_cast<std::size_t>(std::lround(v))];
  return hist;
}

/// Otsu's global threshold. Foreground is {v >= t}; returns the smallest t in
/// [0, 255] maximizing the between-class variance of the 256-bin histogram.
inline int otsu_threshold(const GrayImage& img) {
  if (img.empty()) throw InvalidArgument("otsu_threshold on an empty image");
  const auto hist = luminance_histogram(img);
  const double total = static_cast<double>(img.size());
  double grand_sum = 0.0;
  for (std::size_t b = 0; b < 256; ++b) grand_sum += static_cast<double>(b * hist[b]);

  // Below-threshold class is bins [0, t).
  double below_count = 0.0;
  double below_sum = 0.0;
  double best = -1.0;
  int best_t = 0;
  for (int t = 0; t < 256; ++t) {
    double between = 0.0;
    const double above_count = total - below_count;
    if (below_count > 0.0 && above_count > 0.0) {
      const double mean_below = below_sum / below_count;
      const double mean_above = (grand_sum - below_sum) / above_count;
      const double diff = mean_below - mean_above;
      between = (below_count / total) * (above_count / total) * diff * diff;
    }
    if (between > best) {
      best = between;
      best_t = t;
    }
    below_count += static_cast<double>(hist[t]);
    below_sum += static_cast<double>(t) * static_cast<double>(hist[t]);
  }
  return best_t;
}

struct BinaryMask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> bits;  // row-major, 1 = foreground

  BinaryMask() = default;
  BinaryMask(std::size_t w, std::size_t h) : width(w), height(h), bits(w * h, 0) {}

  bool at(std::size_t r, std::size_t c) const { return bits[r * width + c] != 0; }
  void set(std::size_t r, std::size_t c, bool on = true) { bits[r * width + c] = on ? 1 : 0; }
};

inline BinaryMask foreground_mask(const GrayImage& img, int threshold) {
  BinaryMask mask(img.width(), img.height());
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) {
      mask.set(r, c, std::lround(img.at(r, c)) >= threshold);
    }
  }
  return mask;
}

/// A labeled foreground region: bounding box plus pixel count.
struct Region {
  BoundingBox box;
  std::size_t area = 0;
};

/// 4-connected foreground regions of at least `min_pixels` pixels, largest
/// first; equal areas ordered by (top, left).
inline std::vector<Region> connected_regions(const BinaryMask& mask,
                                             std::size_t min_pixels = kMinRegionPixels) {
  std::vector<Region> regions;
  std::vector<std::uint8_t> seen(mask.bits.size(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < mask.bits.size(); ++start) {
    if (!mask.bits[start] || seen[start]) continue;
    Region region;
    region.box = {start / mask.width, start % mask.width, start / mask.width, start % mask.width};
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      const std::size_t r = idx / mask.width;
      const std::size_t c = idx % mask.width;
      ++region.area;
      region.box.top = std::min(region.box.top, r);
      region.box.bottom = std::max(region.box.bottom, r);
      region.box.left = std::min(region.box.left, c);
      region.box.right = std::max(region.box.right, c);
      auto visit = [&](std::size_t n) {
        if (mask.bits[n] && !seen[n]) {
          seen[n] = 1;
          stack.push_back(n);
        }
      };
      if (r > 0) visit(idx - mask.width);
      if (r + 1 < mask.height) visit(idx + mask.width);
      if (c > 0) visit(idx - 1);
      if (c + 1 < mask.width) visit(idx + 1);
    }
    if (region.area >= min_pixels) regions.push_back(region);
  }
  std::stable_sort(regions.begin(), regions.end(), [](const Region& a, const Region& b) {
    if (a.area != b.area) return a.area > b.area;
    if (a.box.top != b.box.top) return a.box.top < b.box.top;
    return a.box.left < b.box.left;
  });
  return regions;
}

inline std::vector<BoundingBox> connected_components(const BinaryMask& mask) {
  std::vector<BoundingBox> boxes;
  for (const Region& r : connected_regions(mask)) boxes.push_back(r.box);
  return boxes;
}

/// Otsu foreground, then its 4-connected object boxes.
inline std::vector<BoundingBox> segment_objects(const GrayImage& img) {
  return connected_components(foreground_mask(img, otsu_threshold(img)));
}

}  // namespace facekit
