#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "facekit/dataset.hpp"
#include "facekit/image.hpp"
#include "facekit/pgm.hpp"
#include "facekit/rng.hpp"

namespace facekit::synthetic {

/// Each class is a fixed 100x100 template of smooth noise; each sample is
/// the template plus i.i.d. Gaussian pixel noise, clipped and rounded to 8 bits.
struct SyntheticSpec {
  std::size_t classes = 10;
  std::size_t per_class = 10;
  double noise_sigma = 10.0;
  std::uint64_t seed = 0;
  // Control-point grid of the template (bilinear interpolation between points).
  std::size_t control_points = 6;
  double template_min = 40.0;
  double template_max = 215.0;
};

inline GrayImage smooth_template(Rng& rng, const SyntheticSpec& spec) {
  const std::size_t k = std::max<std::size_t>(spec.control_points, 2);
  std::vector<double> grid(k * k);
  for (double& v : grid) v = rng.uniform(spec.template_min, spec.template_max);
  std::vector<double> out(kFaceSide * kFaceSide);
  const double scale = static_cast<double>(k - 1) / static_cast<double>(kFaceSide - 1);
  for (std::size_t r = 0; r < kFaceSide; ++r) {
    const double gy = static_cast<double>(r) * scale;
    const std::size_t y0 = std::min(static_cast<std::size_t>(gy), k - 2);
    const double fy = gy - static_cast<double>(y0);
    for (std::size_t c = 0; c < kFaceSide; ++c) {
      const double gx = static_cast<double>(c) * scale;
      const std::size_t x0 = std::min(static_cast<std::size_t>(gx), k - 2);
      const double fx = gx - static_cast<double>(x0);
      const double top = grid[y0 * k + x0] * (1 - fx) + grid[y0 * k + x0 + 1] * fx;
      const double bottom = grid[(y0 + 1) * k + x0] * (1 - fx) + grid[(y0 + 1) * k + x0 + 1] * fx;
      out[r * kFaceSide + c] = top * (1 - fy) + bottom * fy;
    }
  }
  return GrayImage(kFaceSide, kFaceSide, std::move(out));
}

inline GrayImage noisy_sample(const GrayImage& tmpl, Rng& rng, double sigma) {
  std::vector<double> out(tmpl.size());
  const auto px = tmpl.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    out[i] = std::round(std::clamp(px[i] + sigma * rng.normal(), 0.0, 255.0));
  }
  return GrayImage(tmpl.width(), tmpl.height(), std::move(out));
}

inline std::string class_name(std::size_t c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "class%02zu", c);
  return buf;
}

inline std::string sample_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample%02zu.pgm", i);
  return buf;
}

inline Dataset make_dataset(const SyntheticSpec& spec = {}) {
  Rng rng(spec.seed);
  Dataset ds;
  std::vector<GrayImage> templates;
  for (std::size_t c = 0; c < spec.classes; ++c) templates.push_back(smooth_template(rng, spec));
  for (std::size_t c = 0; c < spec.classes; ++c) {
    ds.classes.push_back(class_name(c));
    for (std::size_t i = 0; i < spec.per_class; ++i) {
      ds.samples.push_back({noisy_sample(templates[c], rng, spec.noise_sigma), class_name(c),
                            std::filesystem::path(class_name(c)) / sample_name(i)});
    }
  }
  return ds;
}

/// Writes root/<class>/<sample>.pgm for every sample.
inline void write_dataset(const Dataset& ds, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  for (const auto& s : ds.samples) {
    const fs::path target = root / s.source;
    fs::create_directories(target.parent_path());
    write_pgm_file(target, s.image);
  }
}

}  // namespace facekit::synthetic
