#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "facekit/evaluation.hpp"
#include "facekit/multiclass.hpp"
#include "facekit/som.hpp"
#include "facekit/subspace.hpp"

// Trainer factories that plug each recognizer into the evaluation protocols.
namespace facekit::eval {

inline std::vector<subspace::ImageVector> face_vectors(const SampleRefs& samples) {
  std::vector<subspace::ImageVector> out;
  out.reserve(samples.size());
  for (const Sample* s : samples) out.push_back({face_vector(s->image), s->label});
  return out;
}

/// Exhaustive nearest neighbor on the raw 10000-dimensional face vectors.
inline Trainer nearest_neighbor_trainer() {
  return [](const SampleRefs& train) -> Predictor {
    auto gallery = std::make_shared<std::vector<subspace::GalleryEntry>>();
    for (auto& v : face_vectors(train)) gallery->push_back({std::move(v.values), v.label});
    return [gallery](const GrayImage& img) { return subspace::nearest_projected(*gallery, face_vector(img)).label; };
  };
}

inline Trainer random_projection_trainer(Eigen::Index dim, std::uint64_t seed) {
  return [dim, seed](const SampleRefs& train) -> Predictor {
    const auto vectors = face_vectors(train);
    auto basis = subspace::random_basis(vectors.front().values.size(), dim, seed);
    auto model = std::make_shared<const subspace::SubspaceModel>(subspace::fit(std::move(basis), vectors));
    return [model](const GrayImage& img) { return subspace::nearest_neighbor(*model, face_vector(img)).label; };
  };
}

inline Trainer pca_trainer(Eigen::Index dim) {
  return [dim](const SampleRefs& train) -> Predictor {
    const auto vectors = face_vectors(train);
    auto model = std::make_shared<const subspace::SubspaceModel>(
        subspace::fit(subspace::pca_basis(vectors, dim), vectors));
    return [model](const GrayImage& img) { return subspace::nearest_neighbor(*model, face_vector(img)).label; };
  };
}

inline Trainer svm_trainer(const svm::SvmTrainOptions& opts) {
  return [opts](const SampleRefs& train) -> Predictor {
    auto model = std::make_shared<const svm::SvmClassifier>(svm::train_classifier(face_vectors(train), opts));
    return [model](const GrayImage& img) { return model->predict(face_vector(img)); };
  };
}

/// One SOM detector per class; predicts the class whose reference winners
/// disagree with the query's winners on the fewest maps (ties: smallest label).
inline Trainer som_trainer(const som::SomTrainConfig& cfg) {
  return [cfg](const SampleRefs& train) -> Predictor {
    std::map<std::string, std::vector<GrayImage>> by_class;
    for (const Sample* s : train) by_class[s->label].push_back(s->image);
    auto detectors = std::make_shared<std::vector<std::pair<std::string, som::SomDetector>>>();
    for (const auto& [label, images] : by_class) detectors->emplace_back(label, som::train(images, cfg));
    return [detectors](const GrayImage& img) {
      std::size_t best = std::numeric_limits<std::size_t>::max();
      std::string label;
      for (const auto& [name, det] : *detectors) {
        const std::size_t mm = som::match_whole(det, img).mismatches;
        if (mm < best) {
          best = mm;
          label = name;
        }
      }
      return label;
    };
  };
}

}  // namespace facekit::eval
