#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "facekit/error.hpp"

namespace facekit {

/// Side length of the normalized face image.
inline constexpr std::size_t kFaceSide = 100;
/// Side length of one patch; a face splits into a 5x5 grid of them.
inline constexpr std::size_t kPatchSide = 20;
inline constexpr std::size_t kPatchGrid = kFaceSide / kPatchSide;
inline constexpr std::size_t kPatchCount = kPatchGrid * kPatchGrid;
inline constexpr std::size_t kPatchPixels = kPatchSide * kPatchSide;

/// Row-major grid of luminance values in [0, 255].
class GrayImage {
 public:
  GrayImage() = default;

  GrayImage(std::size_t width, std::size_t height, double fill = 0.0)
      : width_(width), height_(height), data_(width * height, fill) {
    check_value(fill);
  }

  GrayImage(std::size_t width, std::size_t height, std::vector<double> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != width_ * height_) {
      throw InvalidArgument("image data has " + std::to_string(data_.size()) +
                            " samples, expected " + std::to_string(width_ * height_));
    }
    for (double v : data_) check_value(v);
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double at(std::size_t row, std::size_t col) const { return data_[row * width_ + col]; }

  void set(std::size_t row, std::size_t col, double v) {
    check_value(v);
    data_[row * width_ + col] = v;
  }

  std::span<const double> pixels() const noexcept { return data_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  static void check_value(double v) {
    if (!(v >= 0.0 && v <= 255.0)) {
      throw InvalidArgument("luminance value " + std::to_string(v) + " outside [0, 255]");
    }
  }

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> data_;
};

/// One 20x20 tile of a normalized face, with its top-left corner in the source.
struct Patch {
  std::array<double, kPatchPixels> pixels{};
  std::size_t row = 0;
  std::size_t col = 0;

  double at(std::size_t r, std::size_t c) const { return pixels[r * kPatchSide + c]; }
};

/// Inclusive pixel bounds.
struct BoundingBox {
  std::size_t top = 0;
  std::size_t left = 0;
  std::size_t bottom = 0;
  std::size_t right = 0;

  std::size_t width() const noexcept { return right - left + 1; }
  std::size_t height() const noexcept { return bottom - top + 1; }
  bool contains(std::size_t r, std::size_t c) const noexcept {
    return r >= top && r <= bottom && c >= left && c <= right;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Rgb {
  double r = 0, g = 0, b = 0;
};

/// BT.601 luma.
inline GrayImage to_grayscale(std::size_t width, std::size_t height, std::span<const Rgb> rgb) {
  if (rgb.size() != width * height) {
    throw InvalidArgument("rgb grid has " + std::to_string(rgb.size()) + " pixels, expected " +
                          std::to_string(width * height));
  }
  std::vector<double> out;
  out.reserve(rgb.size());
  for (const Rgb& p : rgb) {
    for (double c : {p.r, p.g, p.b}) {
      if (!(c >= 0.0 && c <= 255.0)) throw InvalidArgument("rgb component outside [0, 255]");
    }
    out.push_back(0.299 * p.r + 0.587 * p.g + 0.114 * p.b);
  }
  return GrayImage(width, height, std::move(out));
}

/// Nearest-neighbor resampling with floor index mapping.
inline GrayImage resize_nearest(const GrayImage& img, std::size_t out_w, std::size_t out_h) {
  if (out_w == 0 || out_h == 0) throw InvalidArgument("resize target has a zero dimension");
  if (img.empty()) throw InvalidArgument("cannot resize an empty image");
  std::vector<double> out(out_w * out_h);
  for (std::size_t i = 0; i < out_h; ++i) {
    const std::size_t src_r = i * img.height() / out_h;
    for (std::size_t j = 0; j < out_w; ++j) {
      out[i * out_w + j] = img.at(src_r, j * img.width() / out_w);
    }
  }
  return GrayImage(out_w, out_h, std::move(out));
}

inline GrayImage to_face(const GrayImage& img) {
  if (img.width() == kFaceSide && img.height() == kFaceSide) return img;
  return resize_nearest(img, kFaceSide, kFaceSide);
}

/// 25 tiles of a 100x100 image, row-major.
inline std::array<Patch, kPatchCount> split_patches(const GrayImage& img) {
  if (img.width() != kFaceSide || img.height() != kFaceSide) {
    throw InvalidArgument("split_patches needs a 100x100 image, got " + std::to_string(img.width()) +
                          "x" + std::to_string(img.height()));
  }
  std::array<Patch, kPatchCount> patches;
  for (std::size_t p = 0; p < kPatchCount; ++p) {
    Patch& patch = patches[p];
    patch.row = (p / kPatchGrid) * kPatchSide;
    patch.col = (p % kPatchGrid) * kPatchSide;
    for (std::size_t r = 0; r < kPatchSide; ++r) {
      for (std::size_t c = 0; c < kPatchSide; ++c) {
        patch.pixels[r * kPatchSide + c] = img.at(patch.row + r, patch.col + c);
      }
    }
  }
  return patches;
}

/// Inverse of split_patches.
inline GrayImage assemble_patches(const std::array<Patch, kPatchCount>& patches) {
  std::vector<double> out(kFaceSide * kFaceSide);
  for (const Patch& patch : patches) {
    for (std::size_t r = 0; r < kPatchSide; ++r) {
      for (std::size_t c = 0; c < kPatchSide; ++c) {
        out[(patch.row + r) * kFaceSide + patch.col + c] = patch.pixels[r * kPatchSide + c];
      }
    }
  }
  return GrayImage(kFaceSide, kFaceSide, std::move(out));
}

inline GrayImage crop(const GrayImage& img, const BoundingBox& box) {
  if (box.top > box.bottom || box.left > box.right || box.bottom >= img.height() ||
      box.right >= img.width()) {
    throw InvalidArgument("crop box outside image bounds");
  }
  std::vector<double> out;
  out.reserve(box.width() * box.height());
  for (std::size_t r = box.top; r <= box.bottom; ++r) {
    for (std::size_t c = box.left; c <= box.right; ++c) out.push_back(img.at(r, c));
  }
  return GrayImage(box.width(), box.height(), std::move(out));
}

/// Flattened 100x100 face as a 10000-vector.
inline Eigen::VectorXd face_vector(const GrayImage& img) {
  const GrayImage face = to_face(img);
  const auto px = face.pixels();
  return Eigen::Map<const Eigen::VectorXd>(px.data(), static_cast<Eigen::Index>(px.size()));
}

}  // namespace facekit
