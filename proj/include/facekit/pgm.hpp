#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "facekit/error.hpp"
#include "facekit/image.hpp"

namespace facekit {

namespace detail {

class PgmHeaderReader {
 public:
  explicit PgmHeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Skips whitespace and '#' comments, then reads a decimal field.
  std::size_t read_uint(const char* field) {
    skip_separators();
    const std::size_t start = pos_;
    field_start_ = start;
    std::size_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1u << 30)) throw FormatError(std::string("PGM ") + field + " too large", start);
      ++pos_;
    }
    if (pos_ == start) {
      throw FormatError(std::string("PGM header: expected ") + field, pos_);
    }
    return value;
  }

  std::size_t pos() const noexcept { return pos_; }
  std::size_t field_start() const noexcept { return field_start_; }
  void advance(std::size_t n) noexcept { pos_ += n; }

 private:
  void skip_separators() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::size_t field_start_ = 0;
};

}  // namespace detail

/// Decodes a binary (P5) PGM with maxval <= 255. Sample values are kept as stored.
inline GrayImage parse_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw FormatError("not a binary PGM: magic must be \"P5\"", 0);
  }
  detail::PgmHeaderReader reader(bytes);
  reader.advance(2);
  if (reader.pos() >= bytes.size() || !std::isspace(bytes[reader.pos()])) {
    throw FormatError("PGM header: expected whitespace after magic", reader.pos());
  }
  const std::size_t width = reader.read_uint("width");
  const std::size_t height = reader.read_uint("height");
  const std::size_t maxval = reader.read_uint("maxval");
  const std::size_t maxval_offset = reader.field_start();
  if (width == 0 || height == 0) throw FormatError("PGM has a zero dimension", maxval_offset);
  if (maxval == 0 || maxval > 255) {
    throw FormatError("PGM maxval " + std::to_string(maxval) + " unsupported (must be 1..255)",
                      maxval_offset);
  }
  if (reader.pos() >= bytes.size() || !std::isspace(bytes[reader.pos()])) {
    throw FormatError("PGM header: expected single whitespace before raster", reader.pos());
  }
  reader.advance(1);
  const std::size_t raster = reader.pos();
  const std::size_t count = width * height;
  if (bytes.size() - raster < count) {
    throw FormatError("PGM raster truncated: need " + std::to_string(count) + " bytes, have " +
                          std::to_string(bytes.size() - raster),
                      bytes.size());
  }
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t v = bytes[raster + i];
    if (v > maxval) throw FormatError("PGM sample exceeds maxval", raster + i);
    data[i] = v;
  }
  return GrayImage(width, height, std::move(data));
}

/// Encodes as P5 with maxval 255; samples are rounded to the nearest integer.
inline std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.size());
  for (double v : img.pixels()) out.push_back(static_cast<std::uint8_t>(std::lround(v)));
  return out;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline GrayImage read_pgm_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return parse_pgm(bytes);
  } catch (const FormatError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

inline void write_pgm_file(const std::filesystem::path& path, const GrayImage& img) {
  const auto bytes = encode_pgm(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("short write to " + path.string());
}

}  // namespace facekit
