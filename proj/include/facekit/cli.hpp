#pragma once

#include <filesystem>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "facekit/dataset.hpp"
#include "facekit/error.hpp"
#include "facekit/evaluation.hpp"
#include "facekit/io.hpp"
#include "facekit/multiclass.hpp"
#include "facekit/pgm.hpp"
#include "facekit/recognizers.hpp"
#include "facekit/report.hpp"
#include "facekit/som.hpp"
#include "facekit/subspace.hpp"
#include "facekit/synthetic.hpp"

namespace facekit::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2 };

namespace detail {

struct Options {
  std::string data, out, model, image;
  // som
  double alpha = 0.9;
  int dist = 4;
  int m = 10;
  bool whole_image = false;
  // recognition
  std::string method;
  Eigen::Index dim = 0;
  std::uint64_t seed = 0;
  // svm
  std::string kernel = "poly2";
  double c = 1.0;
  double gamma = 0.0;
  double tol = svm::kDefaultTolerance;
  Eigen::Index pca_dim = 0;
  // evaluate
  std::string protocol = "loo";
  std::string format = "text";
  double fraction = 0.3;
  unsigned threads = 0;
  bool timing = false;
  // make-synthetic
  std::size_t classes = 10;
  std::size_t per_class = 10;
  double noise = 10.0;
};

inline Eigen::Index default_dim(const std::string& method) {
  return method == "rp" ? 100 : 20;
}

inline svm::KernelSpec kernel_for(const Options& o, Eigen::Index feature_dim) {
  if (o.kernel == "linear") return svm::KernelSpec::linear();
  if (o.kernel == "poly2") return svm::KernelSpec::quadratic();
  const double gamma = o.gamma > 0.0 ? o.gamma : 1.0 / static_cast<double>(feature_dim);
  return svm::KernelSpec::rbf(gamma);
}

inline svm::SvmTrainOptions svm_options(const Options& o, bool with_pca) {
  svm::SvmTrainOptions opts;
  if (with_pca) opts.pca_dim = o.pca_dim > 0 ? o.pca_dim : default_dim("pca-svm");
  opts.kernel = kernel_for(o, with_pca ? *opts.pca_dim : static_cast<Eigen::Index>(kFaceSide * kFaceSide));
  opts.C = o.c;
  opts.tol = o.tol;
  return opts;
}

inline std::vector<subspace::ImageVector> dataset_vectors(const Dataset& ds) {
  std::vector<subspace::ImageVector> out;
  for (const auto& s : ds.samples) out.push_back({face_vector(s.image), s.label});
  return out;
}

inline void require_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw DataError("no such file: " + path);
}

inline int som_train(const Options& o, std::ostream& out) {
  const auto images = load_images(o.data);
  som::SomTrainConfig cfg;
  cfg.alpha0 = o.alpha;
  cfg.dist0 = o.dist;
  cfg.seed = o.seed;
  cfg.m = o.m;
  const auto det = som::train(images, cfg);
  write_file_atomic(o.out, dump_model(som::to_json(det)));
  out << "trained SOM detector on " << images.size() << " images -> " << o.out << '\n';
  return kOk;
}

inline int som_match(const Options& o, std::ostream& out) {
  require_file(o.model);
  require_file(o.image);
  const auto det = som::from_json(read_json_file(o.model));
  const auto img = read_pgm_file(o.image);
  std::vector<som::ObjectMatch> matches;
  if (o.whole_image) {
    matches.push_back({{0, 0, img.height() - 1, img.width() - 1}, som::match_whole(det, img)});
  } else {
    matches = som::match(det, img);
  }
  if (matches.empty()) {
    out << "no objects found\n";
    return kOk;
  }
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const auto& [box, verdict] = matches[i];
    out << "object " << i << " [" << box.top << "," << box.left << "," << box.bottom << "," << box.right
        << "]: " << som::to_string(verdict.kind) << " (" << verdict.mismatches << " mismatches)\n";
  }
  return kOk;
}

inline int rec_train(const Options& o, std::ostream& out) {
  const auto ds = load_dataset(o.data);
  const auto vectors = dataset_vectors(ds);
  const Eigen::Index dim = o.dim > 0 ? o.dim : default_dim(o.method);
  auto basis = o.method == "rp" ? subspace::random_basis(vectors.front().values.size(), dim, o.seed)
                                : subspace::pca_basis(vectors, dim);
  const auto model = subspace::fit(std::move(basis), vectors);
  write_file_atomic(o.out, dump_model(subspace::to_json(model)));
  out << "trained " << o.method << " recognizer (d=" << dim << ") on " << vectors.size() << " images -> "
      << o.out << '\n';
  return kOk;
}

inline int rec_predict(const Options& o, std::ostream& out) {
  require_file(o.model);
  require_file(o.image);
  const auto model = subspace::from_json(read_json_file(o.model));
  const auto hit = subspace::nearest_neighbor(model, face_vector(read_pgm_file(o.image)));
  out << hit.label << ' ' << std::setprecision(6) << std::fixed << hit.distance << '\n';
  return kOk;
}

inline int svm_train(const Options& o, std::ostream& out) {
  const auto ds = load_dataset(o.data);
  const auto clf = svm::train_classifier(dataset_vectors(ds), svm_options(o, o.pca_dim > 0));
  write_file_atomic(o.out, dump_model(svm::to_json(clf)));
  out << "trained SVM (" << o.kernel << ", C=" << o.c << ", " << clf.svm.classes.size() << " classes) -> "
      << o.out << '\n';
  return kOk;
}

inline int svm_predict(const Options& o, std::ostream& out) {
  require_file(o.model);
  require_file(o.image);
  const auto clf = svm::from_json(read_json_file(o.model));
  out << clf.predict(face_vector(read_pgm_file(o.image))) << '\n';
  return kOk;
}

inline eval::Trainer trainer_for(const Options& o) {
  if (o.method == "nn") return eval::nearest_neighbor_trainer();
  if (o.method == "rp") return eval::random_projection_trainer(o.dim > 0 ? o.dim : 100, o.seed);
  if (o.method == "pca") return eval::pca_trainer(o.dim > 0 ? o.dim : 20);
  if (o.method == "svm") return eval::svm_trainer(svm_options(o, false));
  if (o.method == "pca-svm") {
    Options with_dim = o;
    if (o.pca_dim == 0 && o.dim > 0) with_dim.pca_dim = o.dim;
    return eval::svm_trainer(svm_options(with_dim, true));
  }
  som::SomTrainConfig cfg;
  cfg.alpha0 = o.alpha;
  cfg.dist0 = o.dist;
  cfg.seed = o.seed;
  cfg.m = o.m;
  return eval::som_trainer(cfg);
}

inline int evaluate(const Options& o, std::ostream& out) {
  const auto ds = load_dataset(o.data);
  const auto trainer = trainer_for(o);
  auto report = o.protocol == "loo" ? eval::leave_one_out(ds, trainer, o.threads)
                                    : eval::holdout(ds, o.fraction, o.seed, trainer, o.threads);
  report.method = o.method;
  const auto format = o.format == "csv"    ? eval::ReportFormat::Csv
                      : o.format == "json" ? eval::ReportFormat::Json
                                           : eval::ReportFormat::Text;
  out << eval::render_report(report, format, {o.timing});
  return kOk;
}

inline int make_synthetic(const Options& o, std::ostream& out) {
  synthetic::SyntheticSpec spec;
  spec.classes = o.classes;
  spec.per_class = o.per_class;
  spec.noise_sigma = o.noise;
  spec.seed = o.seed;
  const auto ds = synthetic::make_dataset(spec);
  synthetic::write_dataset(ds, o.out);
  out << "wrote " << ds.samples.size() << " images in " << ds.classes.size() << " classes to " << o.out << '\n';
  return kOk;
}

}  // namespace detail

/// Runs one command line (without the program name). Usage errors return 1,
/// data and model errors return 2.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  detail::Options o;
  CLI::App app{"facekit: SOM face detection, subspace and SVM face recognition", "facekit"};
  app.require_subcommand(1);

  auto* som_train = app.add_subcommand("som-train", "Train a 25-map SOM detector on a directory of PGM faces");
  som_train->add_option("--data", o.data, "Directory of training images (searched recursively)")->required();
  som_train->add_option("--out", o.out, "Output model file")->required();
  som_train->add_option("--alpha", o.alpha, "Initial learning rate")->check(CLI::Range(0.0, 1.0));
  som_train->add_option("--dist", o.dist, "Initial neighborhood radius")->check(CLI::Range(0, 4));
  som_train->add_option("--seed", o.seed, "Random seed");
  som_train->add_option("--m", o.m, "Close-match mismatch threshold")->check(CLI::Range(0, 25));

  auto* som_match = app.add_subcommand("som-match", "Match the objects in an image against a SOM detector");
  som_match->add_option("--model", o.model, "SOM model file")->required();
  som_match->add_option("--image", o.image, "Test image (PGM)")->required();
  som_match->add_flag("--whole-image", o.whole_image, "Treat the whole image as one object");

  auto* rec_train = app.add_subcommand("rec-train", "Train a projection + nearest-neighbor recognizer");
  rec_train->add_option("--data", o.data, "Dataset root (one subdirectory per class)")->required();
  rec_train->add_option("--method", o.method, "rp or pca")->required()->check(CLI::IsMember({"rp", "pca"}));
  rec_train->add_option("--dim", o.dim, "Projection dimension")->check(CLI::PositiveNumber);
  rec_train->add_option("--out", o.out, "Output model file")->required();
  rec_train->add_option("--seed", o.seed, "Random seed (rp)");

  auto* rec_predict = app.add_subcommand("rec-predict", "Recognize one face image");
  rec_predict->add_option("--model", o.model, "Recognizer model file")->required();
  rec_predict->add_option("--image", o.image, "Query image (PGM)")->required();

  auto* svm_train = app.add_subcommand("svm-train", "Train a one-vs-rest SVM face recognizer");
  svm_train->add_option("--data", o.data, "Dataset root (one subdirectory per class)")->required();
  svm_train->add_option("--kernel", o.kernel, "linear, poly2 or rbf")
      ->check(CLI::IsMember({"linear", "poly2", "rbf"}));
  svm_train->add_option("--c", o.c, "Box constraint C")->check(CLI::PositiveNumber);
  svm_train->add_option("--gamma", o.gamma, "RBF gamma (default 1/feature dimension)")->check(CLI::PositiveNumber);
  svm_train->add_option("--tol", o.tol, "KKT tolerance")->check(CLI::PositiveNumber);
  svm_train->add_option("--pca-dim", o.pca_dim, "Project onto this many principal components first")
      ->check(CLI::PositiveNumber);
  svm_train->add_option("--out", o.out, "Output model file")->required();

  auto* svm_predict = app.add_subcommand("svm-predict", "Classify one face image with an SVM model");
  svm_predict->add_option("--model", o.model, "SVM model file")->required();
  svm_predict->add_option("--image", o.image, "Query image (PGM)")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Measure recognition accuracy on a dataset");
  evaluate->add_option("--data", o.data, "Dataset root (one subdirectory per class)")->required();
  evaluate->add_option("--method", o.method, "som, rp, pca, svm, pca-svm or nn")
      ->required()
      ->check(CLI::IsMember({"som", "rp", "pca", "svm", "pca-svm", "nn"}));
  evaluate->add_option("--protocol", o.protocol, "loo or holdout")->check(CLI::IsMember({"loo", "holdout"}));
  evaluate->add_option("--format", o.format, "text, csv or json")->check(CLI::IsMember({"text", "csv", "json"}));
  evaluate->add_option("--dim", o.dim, "Projection dimension (rp: 100, pca/pca-svm: 20)")->check(CLI::PositiveNumber);
  evaluate->add_option("--fraction", o.fraction, "Holdout test fraction")->check(CLI::Range(0.0, 1.0));
  evaluate->add_option("--seed", o.seed, "Random seed (rp basis, holdout split, som)");
  evaluate->add_option("--kernel", o.kernel, "SVM kernel")->check(CLI::IsMember({"linear", "poly2", "rbf"}));
  evaluate->add_option("--c", o.c, "SVM box constraint C")->check(CLI::PositiveNumber);
  evaluate->add_option("--gamma", o.gamma, "RBF gamma")->check(CLI::PositiveNumber);
  evaluate->add_option("--tol", o.tol, "SVM KKT tolerance")->check(CLI::PositiveNumber);
  evaluate->add_option("--alpha", o.alpha, "SOM initial learning rate")->check(CLI::Range(0.0, 1.0));
  evaluate->add_option("--dist", o.dist, "SOM initial radius")->check(CLI::Range(0, 4));
  evaluate->add_option("--m", o.m, "SOM close-match threshold")->check(CLI::Range(0, 25));
  evaluate->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  evaluate->add_flag("--timing", o.timing, "Include wall time in the report");

  auto* synth = app.add_subcommand("make-synthetic", "Write the synthetic face dataset");
  synth->add_option("--out", o.out, "Output dataset root")->required();
  synth->add_option("--seed", o.seed, "Random seed");
  synth->add_option("--classes", o.classes, "Number of classes")->check(CLI::PositiveNumber);
  synth->add_option("--per-class", o.per_class, "Samples per class")->check(CLI::PositiveNumber);
  synth->add_option("--noise", o.noise, "Pixel noise sigma")->check(CLI::NonNegativeNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (som_train->parsed()) return detail::som_train(o, out);
    if (som_match->parsed()) return detail::som_match(o, out);
    if (rec_train->parsed()) return detail::rec_train(o, out);
    if (rec_predict->parsed()) return detail::rec_predict(o, out);
    if (svm_train->parsed()) return detail::svm_train(o, out);
    if (svm_predict->parsed()) return detail::svm_predict(o, out);
    if (evaluate->parsed()) return detail::evaluate(o, out);
    if (synth->parsed()) return detail::make_synthetic(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  err << app.help();
  return kUsage;
}

}  // namespace facekit::cli
