#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "facekit/dataset.hpp"
#include "facekit/error.hpp"
#include "facekit/rng.hpp"

namespace facekit::eval {

using SampleRefs = std::vector<const Sample*>;
using Predictor = std::function<std::string(const GrayImage&)>;
/// Builds a predictor from a training split. Must be safe to call from several threads.
using Trainer = std::function<Predictor(const SampleRefs&)>;

class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, std::size_t fold) : Error(what), fold_(fold) {}
  std::size_t fold() const noexcept { return fold_; }

 private:
  std::size_t fold_;
};

enum class ProtocolKind { LeaveOneOut, Holdout };

struct Protocol {
  ProtocolKind kind = ProtocolKind::LeaveOneOut;
  double fraction = 0.3;
  std::uint64_t seed = 0;

  friend bool operator==(const Protocol&, const Protocol&) = default;
};

struct EvalReport {
  Protocol protocol;
  std::string method;
  std::vector<std::string> classes;
  std::vector<std::size_t> correct;
  std::vector<std::size_t> total;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  double wall_seconds = 0.0;

  std::size_t total_correct() const {
    std::size_t s = 0;
    for (auto c : correct) s += c;
    return s;
  }
  std::size_t total_count() const {
    std::size_t s = 0;
    for (auto t : total) s += t;
    return s;
  }
  double accuracy() const {
    const auto n = total_count();
    return n == 0 ? 0.0 : static_cast<double>(total_correct()) / static_cast<double>(n);
  }
  double class_accuracy(std::size_t c) const {
    return total[c] == 0 ? 0.0 : static_cast<double>(correct[c]) / static_cast<double>(total[c]);
  }
};

namespace detail {

inline EvalReport empty_report(const Dataset& ds, Protocol protocol) {
  EvalReport r;
  r.protocol = protocol;
  r.classes = ds.classes;
  r.correct.assign(ds.classes.size(), 0);
  r.total.assign(ds.classes.size(), 0);
  r.confusion.assign(ds.classes.size(), std::vector<std::size_t>(ds.classes.size(), 0));
  return r;
}

inline std::size_t class_index(const std::vector<std::string>& classes, const std::string& label) {
  const auto it = std::lower_bound(classes.begin(), classes.end(), label);
  if (it == classes.end() || *it != label) throw DataError("unknown label \"" + label + "\"");
  return static_cast<std::size_t>(it - classes.begin());
}

inline void tally(EvalReport& r, const std::string& truth, const std::string& predicted) {
  const std::size_t t = class_index(r.classes, truth);
  const std::size_t p = class_index(r.classes, predicted);
  ++r.total[t];
  ++r.confusion[t][p];
  if (t == p) ++r.correct[t];
}

// Runs fold(i) for i in [0, count) on a small thread pool. Each result lands in
// its own slot, so merging afterwards is independent of scheduling.
inline std::vector<std::string> run_folds(std::size_t count, unsigned threads,
                                          const std::function<std::string(std::size_t)>& fold) {
  std::vector<std::string> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = fold(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw EvaluationError("fold " + std::to_string(i) + " failed: " + e.what(), i);
    }
  }
  return out;
}

}  // namespace detail

/// Leave-one-out: fold i trains on every sample except i and predicts i.
inline EvalReport leave_one_out(const Dataset& ds, const Trainer& trainer, unsigned threads = 0) {
  if (ds.samples.size() < 2) throw InvalidArgument("leave-one-out needs at least two samples");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = ds.samples.size();
  const auto predictions = detail::run_folds(n, threads, [&](std::size_t i) {
    SampleRefs train;
    train.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) train.push_back(&ds.samples[j]);
    }
    return trainer(train)(ds.samples[i].image);
  });
  EvalReport r = detail::empty_report(ds, {ProtocolKind::LeaveOneOut, 0.0, 0});
  for (std::size_t i = 0; i < n; ++i) detail::tally(r, ds.samples[i].label, predictions[i]);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified split: each class sends round(fraction * n_c) of its samples
/// to the test side, chosen by a seeded shuffle. Both sides must keep every class.
inline Split stratified_split(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("holdout fraction must lie in (0, 1)");
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) by_class[ds.samples[i].label].push_back(i);
  Rng rng(seed);
  Split split;
  for (auto& [label, idx] : by_class) {
    const auto n_test = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    if (n_test == 0 || n_test >= idx.size()) {
      throw InvalidArgument("class \"" + label + "\" with " + std::to_string(idx.size()) +
                            " samples cannot be stratified at fraction " + std::to_string(fraction));
    }
    rng.shuffle(idx);
    split.test.insert(split.test.end(), idx.begin(), idx.begin() + static_cast<long>(n_test));
    split.train.insert(split.train.end(), idx.begin() + static_cast<long>(n_test), idx.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

inline EvalReport holdout(const Dataset& ds, double fraction, std::uint64_t seed, const Trainer& trainer,
                          unsigned threads = 0) {
  const auto start = std::chrono::steady_clock::now();
  const Split split = stratified_split(ds, fraction, seed);
  SampleRefs train;
  for (std::size_t i : split.train) train.push_back(&ds.samples[i]);
  Predictor predict;
  try {
    predict = trainer(train);
  } catch (const std::exception& e) {
    throw EvaluationError(std::string("training failed: ") + e.what(), 0);
  }
  const auto predictions = detail::run_folds(split.test.size(), threads, [&](std::size_t k) {
    return predict(ds.samples[split.test[k]].image);
  });
  EvalReport r = detail::empty_report(ds, {ProtocolKind::Holdout, fraction, seed});
  for (std::size_t k = 0; k < split.test.size(); ++k) {
    detail::tally(r, ds.samples[split.test[k]].label, predictions[k]);
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace facekit::eval
