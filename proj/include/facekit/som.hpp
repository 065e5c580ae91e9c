#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "facekit/error.hpp"
#include "facekit/features.hpp"
#include "facekit/image.hpp"
#include "facekit/rng.hpp"
#include "facekit/segmentation.hpp"

namespace facekit::som {

inline constexpr std::size_t kGridSide = 5;
inline constexpr std::size_t kNeurons = kGridSide * kGridSide;
inline constexpr int kFormatVersion = 1;

/// A 5x5 map of 4-dimensional neurons; neuron i sits at grid (i / 5, i % 5).
struct SomGrid {
  std::array<FeatureArray, kNeurons> neurons{};

  friend bool operator==(const SomGrid&, const SomGrid&) = default;
};

struct SomTrainConfig {
  double alpha0 = 0.9;
  int dist0 = 4;
  // Number of epochs; 0 means one epoch per training image.
  std::size_t num_iter = 0;
  std::uint64_t seed = 0;
  // Close-match threshold stored in the trained detector.
  int m = 10;

  double time_constant() const {
    return static_cast<double>(num_iter) / std::log(static_cast<double>(dist0) + 1.0);
  }

  void validate() const {
    if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw InvalidArgument("alpha0 must lie in (0, 1]");
    if (dist0 < 0) throw InvalidArgument("dist0 must be >= 0");
    if (m < 0 || m > static_cast<int>(kNeurons)) throw InvalidArgument("m must lie in [0, 25]");
  }

  friend bool operator==(const SomTrainConfig&, const SomTrainConfig&) = default;
};

enum class MatchKind { ExactMatch, CloseMatch, Dissimilar };

inline std::string_view to_string(MatchKind k) {
  switch (k) {
    case MatchKind::ExactMatch: return "exact match";
    case MatchKind::CloseMatch: return "close match";
    case MatchKind::Dissimilar: return "dissimilar";
  }
  return "?";
}

struct MatchVerdict {
  MatchKind kind = MatchKind::Dissimilar;
  std::size_t mismatches = 0;

  friend bool operator==(const MatchVerdict&, const MatchVerdict&) = default;
};

/// 0 mismatches is exact; fewer than m is close; anything else is dissimilar.
inline MatchVerdict verdict_for(std::size_t mismatches, int m) {
  if (mismatches == 0) return {MatchKind::ExactMatch, 0};
  if (mismatches < static_cast<std::size_t>(m)) return {MatchKind::CloseMatch, mismatches};
  return {MatchKind::Dissimilar, mismatches};
}

using Winners = std::array<std::size_t, kPatchCount>;

struct SomDetector {
  SomTrainConfig config;
  std::array<SomGrid, kPatchCount> maps{};
  Winners reference_winners{};
  FeatureNormalization norm;
  int m = 10;

  friend bool operator==(const SomDetector&, const SomDetector&) = default;
};

inline double squared_distance(const FeatureArray& a, const FeatureArray& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < kFeatureDims; ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

/// Index of the neuron closest to w in Euclidean distance; ties go to the smallest index.
inline std::size_t find_winner(const SomGrid& grid, const PatchFeatureVector& w) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kNeurons; ++i) {
    const double d = squared_distance(grid.neurons[i], w.values);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

inline std::size_t grid_distance(std::size_t a, std::size_t b) {
  const auto ar = static_cast<long>(a / kGridSide), ac = static_cast<long>(a % kGridSide);
  const auto br = static_cast<long>(b / kGridSide), bc = static_cast<long>(b % kGridSide);
  return static_cast<std::size_t>(std::max(std::labs(ar - br), std::labs(ac - bc)));
}

/// Moves every neuron within Chebyshev grid distance `dist` of the winner
/// toward w: w_n += alpha * (w - w_n).
inline SomGrid update_neighborhood(SomGrid grid, std::size_t winner, const PatchFeatureVector& w,
                                   double alpha, int dist) {
  if (winner >= kNeurons) throw InvalidArgument("winner index out of range");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  if (dist < 0) throw InvalidArgument("dist must be >= 0");
  for (std::size_t i = 0; i < kNeurons; ++i) {
    if (grid_distance(i, winner) > static_cast<std::size_t>(dist)) continue;
    for (std::size_t d = 0; d < kFeatureDims; ++d) {
      grid.neurons[i][d] += alpha * (w.values[d] - grid.neurons[i][d]);
    }
  }
  return grid;
}

struct ScheduleStep {
  double alpha = 0.0;
  int dist = 0;

  friend bool operator==(const ScheduleStep&, const ScheduleStep&) = default;
};

/// Stepwise learning-rate / radius decay. Each advance to epoch e multiplies
/// alpha by exp(-e / num_iter) and dist by exp(-e / time_constant), rounding
/// dist half-up.
class DecaySchedule {
 public:
  explicit DecaySchedule(const SomTrainConfig& cfg)
      : num_iter_(static_cast<double>(cfg.num_iter)),
        time_constant_(cfg.dist0 > 0 ? cfg.time_constant() : 0.0),
        step_{cfg.alpha0, cfg.dist0} {
    if (cfg.num_iter == 0) throw InvalidArgument("decay schedule needs num_iter >= 1");
  }

  const ScheduleStep& current() const noexcept { return step_; }
  std::size_t epoch() const noexcept { return epoch_; }

  void advance() {
    ++epoch_;
    const double e = static_cast<double>(epoch_);
    step_.alpha *= std::exp(-e / num_iter_);
    if (step_.dist > 0) {
      const double scaled = static_cast<double>(step_.dist) * std::exp(-e / time_constant_);
      step_.dist = std::max(0, static_cast<int>(std::floor(scaled + 0.5)));
    }
  }

 private:
  double num_iter_;
  double time_constant_;
  ScheduleStep step_;
  std::size_t epoch_ = 0;
};

inline ScheduleStep decay_schedule(const SomTrainConfig& cfg, std::size_t epoch) {
  DecaySchedule s(cfg);
  for (std::size_t e = 0; e < epoch; ++e) s.advance();
  return s.current();
}

/// 25 raw descriptors of one image after normalizing it to 100x100.
inline std::array<PatchFeatureVector, kPatchCount> image_descriptors(
    const GrayImage& img, const FeatureNormalization& norm) {
  const auto patches = split_patches(to_face(img));
  std::array<PatchFeatureVector, kPatchCount> out;
  for (std::size_t p = 0; p < kPatchCount; ++p) out[p] = patch_descriptor(patches[p], norm);
  return out;
}

using ImageDescriptors = std::array<PatchFeatureVector, kPatchCount>;

inline Winners winners_of(const std::array<SomGrid, kPatchCount>& maps, const ImageDescriptors& d) {
  Winners w{};
  for (std::size_t p = 0; p < kPatchCount; ++p) w[p] = find_winner(maps[p], d[p]);
  return w;
}

/// Mean Euclidean distance from each patch descriptor to its winner neuron.
inline double quantization_error(const std::array<SomGrid, kPatchCount>& maps,
                                 std::span<const ImageDescriptors> corpus) {
  if (corpus.empty()) return 0.0;
  double total = 0.0;
  for (const auto& desc : corpus) {
    for (std::size_t p = 0; p < kPatchCount; ++p) {
      const std::size_t win = find_winner(maps[p], desc[p]);
      total += std::sqrt(squared_distance(maps[p].neurons[win], desc[p].values));
    }
  }
  return total / static_cast<double>(corpus.size() * kPatchCount);
}

struct TrainTrace {
  SomDetector detector;
  std::vector<ImageDescriptors> descriptors;  // normalized training descriptors
  std::vector<double> quantization_errors;    // [0] before training, [e] after epoch e
};

namespace detail {

inline std::vector<ImageDescriptors> normalized_corpus(std::span<const GrayImage> images,
                                                       FeatureNormalization& norm) {
  std::vector<ImageDescriptors> raw;
  raw.reserve(images.size());
  std::vector<PatchFeatureVector> flat;
  flat.reserve(images.size() * kPatchCount);
  for (const GrayImage& img : images) {
    raw.push_back(image_descriptors(img, FeatureNormalization::identity()));
    flat.insert(flat.end(), raw.back().begin(), raw.back().end());
  }
  norm = FeatureNormalization::fit(flat);
  for (auto& desc : raw) {
    for (auto& f : desc) f = norm.apply(f);
  }
  return raw;
}

}  // namespace detail

/// Trains all 25 maps. Each epoch draws one random training image and
/// updates every map with that image's patch at the map's position.
/// Reference winners are the per-map modal winner over the training set.
inline TrainTrace train_traced(std::span<const GrayImage> images, SomTrainConfig cfg,
                               bool record_errors = true) {
  if (images.empty()) throw InvalidArgument("SOM training needs at least one image");
  cfg.validate();
  if (cfg.num_iter == 0) cfg.num_iter = images.size();

  TrainTrace trace;
  SomDetector& det = trace.detector;
  det.config = cfg;
  det.m = cfg.m;
  trace.descriptors = detail::normalized_corpus(images, det.norm);

  Rng rng(cfg.seed);
  for (auto& grid : det.maps) {
    for (auto& neuron : grid.neurons) {
      for (double& v : neuron) v = rng.uniform();
    }
  }
  if (record_errors) trace.quantization_errors.push_back(quantization_error(det.maps, trace.descriptors));

  DecaySchedule schedule(cfg);
  for (std::size_t epoch = 0; epoch < cfg.num_iter; ++epoch) {
    const ScheduleStep step = schedule.current();
    const auto& desc = trace.descriptors[rng.index(trace.descriptors.size())];
    for (std::size_t p = 0; p < kPatchCount; ++p) {
      const std::size_t win = find_winner(det.maps[p], desc[p]);
      det.maps[p] = update_neighborhood(det.maps[p], win, desc[p], step.alpha, step.dist);
    }
    schedule.advance();
    if (record_errors) trace.quantization_errors.push_back(quantization_error(det.maps, trace.descriptors));
  }

  std::array<std::array<std::size_t, kNeurons>, kPatchCount> votes{};
  for (const auto& desc : trace.descriptors) {
    const Winners w = winners_of(det.maps, desc);
    for (std::size_t p = 0; p < kPatchCount; ++p) ++votes[p][w[p]];
  }
  for (std::size_t p = 0; p < kPatchCount; ++p) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < kNeurons; ++i) {
      if (votes[p][i] > votes[p][best]) best = i;
    }
    det.reference_winners[p] = best;
  }
  return trace;
}

inline SomDetector train(std::span<const GrayImage> images, const SomTrainConfig& cfg) {
  return train_traced(images, cfg, false).detector;
}

inline Winners test_winners(const SomDetector& det, const GrayImage& img) {
  return winners_of(det.maps, image_descriptors(img, det.norm));
}

/// Verdict for an image that is already a single object (no segmentation).
inline MatchVerdict match_whole(const SomDetector& det, const GrayImage& img) {
  const Winners w = test_winners(det, img);
  std::size_t mismatches = 0;
  for (std::size_t p = 0; p < kPatchCount; ++p) mismatches += w[p] != det.reference_winners[p];
  return verdict_for(mismatches, det.m);
}

struct ObjectMatch {
  BoundingBox box;
  MatchVerdict verdict;
};

/// Segments the test image and matches every object crop against the reference winners.
inline std::vector<ObjectMatch> match(const SomDetector& det, const GrayImage& test) {
  std::vector<ObjectMatch> out;
  for (const BoundingBox& box : segment_objects(test)) {
    out.push_back({box, match_whole(det, crop(test, box))});
  }
  return out;
}

// Serialization

inline nlohmann::json to_json(const SomDetector& det) {
  nlohmann::json maps = nlohmann::json::array();
  for (const auto& grid : det.maps) {
    nlohmann::json neurons = nlohmann::json::array();
    for (const auto& n : grid.neurons) neurons.push_back(n);
    maps.push_back(std::move(neurons));
  }
  return {
      {"format", "facekit-som"},
      {"version", kFormatVersion},
      {"config",
       {{"alpha0", det.config.alpha0},
        {"dist0", det.config.dist0},
        {"num_iter", det.config.num_iter},
        {"seed", det.config.seed}}},
      {"m", det.m},
      {"normalization", {{"min", det.norm.min}, {"max", det.norm.max}}},
      {"reference_winners", det.reference_winners},
      {"maps", std::move(maps)},
  };
}

inline SomDetector from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "facekit-som") throw DataError("not a SOM detector document");
    if (j.at("version") != kFormatVersion) {
      throw DataError("unsupported SOM detector version " + j.at("version").dump());
    }
    SomDetector det;
    const auto& cfg = j.at("config");
    det.config.alpha0 = cfg.at("alpha0").get<double>();
    det.config.dist0 = cfg.at("dist0").get<int>();
    det.config.num_iter = cfg.at("num_iter").get<std::size_t>();
    det.config.seed = cfg.at("seed").get<std::uint64_t>();
    det.m = j.at("m").get<int>();
    det.config.m = det.m;
    det.config.validate();
    det.norm.min = j.at("normalization").at("min").get<FeatureArray>();
    det.norm.max = j.at("normalization").at("max").get<FeatureArray>();
    det.reference_winners = j.at("reference_winners").get<Winners>();
    for (std::size_t w : det.reference_winners) {
      if (w >= kNeurons) throw DataError("reference winner out of range");
    }
    const auto& maps = j.at("maps");
    if (!maps.is_array() || maps.size() != kPatchCount) throw DataError("SOM detector needs 25 maps");
    for (std::size_t p = 0; p < kPatchCount; ++p) {
      det.maps[p].neurons = maps[p].get<std::array<FeatureArray, kNeurons>>();
      for (const auto& n : det.maps[p].neurons) {
        for (double v : n) {
          if (!std::isfinite(v)) throw DataError("non-finite neuron weight");
        }
      }
    }
    return det;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed SOM detector: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("invalid SOM detector: ") + e.what());
  }
}

}  // namespace facekit::som
