#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>

#include "facekit/image.hpp"

namespace facekit {

inline constexpr std::size_t kFeatureDims = 4;
using FeatureArray = std::array<double, kFeatureDims>;

/// Descriptor of one patch: (mean gray, FFT statistic, histogram low, histogram high).
struct PatchFeatureVector {
  FeatureArray values{};

  double mean_gray() const noexcept { return values[0]; }
  double fft_stat() const noexcept { return values[1]; }
  double hist_low() const noexcept { return values[2]; }
  double hist_high() const noexcept { return values[3]; }

  friend bool operator==(const PatchFeatureVector&, const PatchFeatureVector&) = default;
};

inline double mean_grayness(const Patch& p) {
  double sum = 0.0;
  for (double v : p.pixels) sum += v;
  return sum / static_cast<double>(kPatchPixels);
}

namespace detail {

struct DftTwiddles {
  std::array<std::complex<double>, kPatchSide> w{};
  DftTwiddles() {
    for (std::size_t k = 0; k < kPatchSide; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / kPatchSide;
      w[k] = {std::cos(angle), std::sin(angle)};
    }
  }
};

inline const DftTwiddles& twiddles() {
  static const DftTwiddles t;
  return t;
}

}  // namespace detail

/// Mean magnitude of the 399 non-DC coefficients of the 20x20 DFT, divided by 400.
/// Computed by direct (row-column) summation.
inline double fft_statistic(const Patch& p) {
  constexpr std::size_t n = kPatchSide;
  const auto& w = detail::twiddles().w;
  // rows[r][v] = sum_c p(r,c) e^{-2 pi i v c / n}
  std::array<std::array<std::complex<double>, n>, n> rows{};
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t v = 0; v < n; ++v) {
      std::complex<double> acc = 0.0;
      for (std::size_t c = 0; c < n; ++c) acc += p.at(r, c) * w[(v * c) % n];
      rows[r][v] = acc;
    }
  }
  double magnitude_sum = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u == 0 && v == 0) continue;
      std::complex<double> acc = 0.0;
      for (std::size_t r = 0; r < n; ++r) acc += rows[r][v] * w[(u * r) % n];
      magnitude_sum += std::abs(acc);
    }
  }
  return magnitude_sum / static_cast<double>(kPatchPixels - 1) / static_cast<double>(kPatchPixels);
}

/// Two-bin histogram: values below 128, and values >= 128, as fractions.
inline std::array<double, 2> gray_histogram(const Patch& p) {
  std::size_t high = 0;
  for (double v : p.pixels) high += v >= 128.0 ? 1 : 0;
  const double hi = static_cast<double>(high) / static_cast<double>(kPatchPixels);
  return {static_cast<double>(kPatchPixels - high) / static_cast<double>(kPatchPixels), hi};
}

inline PatchFeatureVector raw_descriptor(const Patch& p) {
  const auto hist = gray_histogram(p);
  return {{mean_grayness(p), fft_statistic(p), hist[0], hist[1]}};
}

/// Per-dimension min-max affine map fitted on a training corpus.
/// A zero-range dimension maps to 0.
struct FeatureNormalization {
  FeatureArray min{0.0, 0.0, 0.0, 0.0};
  FeatureArray max{1.0, 1.0, 1.0, 1.0};

  static FeatureNormalization identity() { return {}; }

  static FeatureNormalization fit(std::span<const PatchFeatureVector> corpus) {
    if (corpus.empty()) throw InvalidArgument("cannot fit normalization on an empty corpus");
    FeatureNormalization n;
    n.min = corpus.front().values;
    n.max = corpus.front().values;
    for (const auto& f : corpus) {
      for (std::size_t d = 0; d < kFeatureDims; ++d) {
        n.min[d] = std::min(n.min[d], f.values[d]);
        n.max[d] = std::max(n.max[d], f.values[d]);
      }
    }
    return n;
  }

  PatchFeatureVector apply(const PatchFeatureVector& f) const {
    PatchFeatureVector out;
    for (std::size_t d = 0; d < kFeatureDims; ++d) {
      const double range = max[d] - min[d];
      out.values[d] = range > 0.0 ? (f.values[d] - min[d]) / range : 0.0;
    }
    return out;
  }

  friend bool operator==(const FeatureNormalization&, const FeatureNormalization&) = default;
};

inline PatchFeatureVector patch_descriptor(const Patch& p, const FeatureNormalization& norm) {
  return norm.apply(raw_descriptor(p));
}

}  // namespace facekit
