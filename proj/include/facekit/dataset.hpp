#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "facekit/error.hpp"
#include "facekit/image.hpp"
#include "facekit/pgm.hpp"

namespace facekit {

struct Sample {
  GrayImage image;
  std::string label;
  std::filesystem::path source;
};

/// Labeled images; classes are the sorted labels that have at least one sample.
struct Dataset {
  std::vector<Sample> samples;
  std::vector<std::string> classes;
};

inline bool is_pgm(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm";
}

/// PGM files directly inside `dir` (or anywhere below it), sorted by path.
inline std::vector<std::filesystem::path> list_pgm_files(const std::filesystem::path& dir, bool recursive) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  auto consider = [&](const fs::directory_entry& e) {
    if (e.is_regular_file() && is_pgm(e.path())) files.push_back(e.path());
  };
  if (recursive) {
    for (const auto& e : fs::recursive_directory_iterator(dir)) consider(e);
  } else {
    for (const auto& e : fs::directory_iterator(dir)) consider(e);
  }
  std::sort(files.begin(), files.end());
  return files;
}

/// One subdirectory per class, each holding PGM files. Classes and files
/// are visited in lexicographic order.
inline Dataset load_dataset(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw DataError(root.string() + " is not a directory");
  std::vector<fs::path> class_dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) class_dirs.push_back(e.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end());
  Dataset ds;
  for (const auto& dir : class_dirs) {
    const auto files = list_pgm_files(dir, false);
    if (files.empty()) continue;
    const std::string label = dir.filename().string();
    ds.classes.push_back(label);
    for (const auto& f : files) ds.samples.push_back({read_pgm_file(f), label, f});
  }
  if (ds.samples.empty()) throw DataError("dataset " + root.string() + " contains no labeled PGM images");
  return ds;
}

/// Every PGM under `dir`, recursively, in path order.
inline std::vector<GrayImage> load_images(const std::filesystem::path& dir) {
  std::vector<GrayImage> out;
  for (const auto& f : list_pgm_files(dir, true)) out.push_back(read_pgm_file(f));
  if (out.empty()) throw DataError("no PGM images under " + dir.string());
  return out;
}

}  // namespace facekit
