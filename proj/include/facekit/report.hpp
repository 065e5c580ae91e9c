#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "json.hpp"

#include "facekit/evaluation.hpp"

namespace facekit::eval {

inline constexpr int kReportVersion = 1;

enum class ReportFormat { Text, Csv, Json };

struct RenderOptions {
  // Wall time varies run to run, so it is left out unless asked for.
  bool include_timing = false;
};

namespace detail {

inline std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

inline double round4(double v) { return std::round(v * 1e4) / 1e4; }

inline std::string protocol_name(const Protocol& p) {
  return p.kind == ProtocolKind::LeaveOneOut ? "loo" : "holdout";
}

inline std::string protocol_detail(const Protocol& p) {
  if (p.kind == ProtocolKind::LeaveOneOut) return "loo";
  return "holdout(fraction=" + fixed4(p.fraction) + ", seed=" + std::to_string(p.seed) + ")";
}

}  // namespace detail

inline nlohmann::json report_to_json(const EvalReport& r, const RenderOptions& opts = {}) {
  nlohmann::json protocol = {{"kind", detail::protocol_name(r.protocol)}};
  if (r.protocol.kind == ProtocolKind::Holdout) {
    protocol["fraction"] = r.protocol.fraction;
    protocol["seed"] = r.protocol.seed;
  }
  nlohmann::json classes = nlohmann::json::array();
  for (std::size_t c = 0; c < r.classes.size(); ++c) {
    classes.push_back({{"label", r.classes[c]},
                       {"correct", r.correct[c]},
                       {"total", r.total[c]},
                       {"accuracy", detail::round4(r.class_accuracy(c))}});
  }
  nlohmann::json out = {
      {"format", "facekit-report"},
      {"version", kReportVersion},
      {"method", r.method},
      {"protocol", std::move(protocol)},
      {"classes", std::move(classes)},
      {"overall",
       {{"correct", r.total_correct()}, {"total", r.total_count()}, {"accuracy", detail::round4(r.accuracy())}}},
      {"confusion", {{"labels", r.classes}, {"matrix", r.confusion}}},
  };
  if (opts.include_timing) out["wall_seconds"] = r.wall_seconds;
  return out;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "facekit-report") throw DataError("not a report document");
    if (j.at("version") != kReportVersion) throw DataError("unsupported report version");
    EvalReport r;
    r.method = j.at("method").get<std::string>();
    const auto& p = j.at("protocol");
    if (p.at("kind") == "loo") {
      r.protocol = {ProtocolKind::LeaveOneOut, 0.0, 0};
    } else {
      r.protocol = {ProtocolKind::Holdout, p.at("fraction").get<double>(), p.at("seed").get<std::uint64_t>()};
    }
    for (const auto& c : j.at("classes")) {
      r.classes.push_back(c.at("label").get<std::string>());
      r.correct.push_back(c.at("correct").get<std::size_t>());
      r.total.push_back(c.at("total").get<std::size_t>());
    }
    r.confusion = j.at("confusion").at("matrix").get<std::vector<std::vector<std::size_t>>>();
    if (j.contains("wall_seconds")) r.wall_seconds = j.at("wall_seconds").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

inline std::string render_report(const EvalReport& r, ReportFormat format, const RenderOptions& opts = {}) {
  std::ostringstream out;
  switch (format) {
    case ReportFormat::Json:
      out << report_to_json(r, opts).dump(2) << '\n';
      break;
    case ReportFormat::Csv:
      out << "version," << kReportVersion << '\n';
      out << "method," << r.method << '\n';
      out << "protocol," << detail::protocol_detail(r.protocol) << '\n';
      out << "class,accuracy\n";
      for (std::size_t c = 0; c < r.classes.size(); ++c) {
        out << r.classes[c] << ',' << detail::fixed4(r.class_accuracy(c)) << '\n';
      }
      out << "overall," << detail::fixed4(r.accuracy()) << '\n';
      if (opts.include_timing) out << "wall_seconds," << r.wall_seconds << '\n';
      break;
    case ReportFormat::Text: {
      std::size_t width = std::string("overall").size();
      for (const auto& c : r.classes) width = std::max(width, c.size());
      auto row = [&](const std::string& name, const std::string& correct, const std::string& total,
                     const std::string& acc) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-*s  %8s  %8s  %8s\n", static_cast<int>(width), name.c_str(),
                      correct.c_str(), total.c_str(), acc.c_str());
        out << buf;
      };
      out << "method:   " << r.method << '\n';
      out << "protocol: " << detail::protocol_detail(r.protocol) << "\n\n";
      row("class", "correct", "total", "accuracy");
      for (std::size_t c = 0; c < r.classes.size(); ++c) {
        row(r.classes[c], std::to_string(r.correct[c]), std::to_string(r.total[c]),
            detail::fixed4(r.class_accuracy(c)));
      }
      row("overall", std::to_string(r.total_correct()), std::to_string(r.total_count()),
          detail::fixed4(r.accuracy()));
      if (opts.include_timing) out << "\nwall time: " << r.wall_seconds << " s\n";
      break;
    }
  }
  return out.str();
}

}  // namespace facekit::eval
