#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "turnkan/errors.hpp"
#include "turnkan/experiment/config.hpp"
#include "turnkan/kv.hpp"
#include "turnkan/metrics/report.hpp"
#include "turnkan/stats/harness.hpp"

namespace turnkan::exp {

using Json = nlohmann::ordered_json;

// One trained model scored on one subject's test windows.
struct RunEntry {
  std::string subject;
  ModelConfig config;
  std::string training = "specific";  // or "pooled"
  metrics::EvalReport report;
  double train_seconds = 0;
  std::optional<double> latency;  // seconds per window
  std::size_t train_windows = 0;
  std::size_t test_windows = 0;

  std::string model() const { return std::string(models::to_string(config.family)); }
};

struct RunArtifact {
  ExperimentConfig config;
  std::vector<RunEntry> runs;
  std::vector<stats::HarnessReport> hypotheses;
  std::map<std::string, std::string> fold_checksums;  // subject -> division checksum
  Json extra = Json::object();                       // mode-specific additions to metrics.json
};

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    if (!out.flush()) throw IoError("write failed for '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

inline std::string csv_number(double v) { return kv::format_double(v); }

inline Json test_json(const stats::TestResult& r) {
  return Json{{"statistic", r.statistic}, {"p", r.p}, {"n", r.n}, {"method", r.method}, {"direction", r.direction}};
}

inline Json metrics_json(const RunArtifact& a) {
  Json runs = Json::array();
  for (const auto& r : a.runs) {
    Json per_class = Json::object();
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      const auto& s = r.report.per_class[k];
      per_class[std::string(to_string(label_from_index(k)))] =
          Json{{"precision", 100 * s.precision}, {"recall", 100 * s.recall}, {"f1", 100 * s.f1}};
    }
    Json raw = Json::array(), norm = Json::array();
    const auto rn = r.report.confusion.row_normalized();
    for (std::size_t i = 0; i < kNumClasses; ++i) {
      raw.push_back(r.report.confusion.counts[i]);
      Json row = Json::array();
      for (double v : rn[i]) row.push_back(100 * v);
      norm.push_back(row);
    }
    Json divisions = Json::array();
    for (double v : r.report.division_f1) divisions.push_back(100 * v);
    runs.push_back(Json{{"subject", r.subject},
                        {"model", r.model()},
                        {"training", r.training},
                        {"window", r.config.window_size},
                        {"config", models::to_kv(r.config)},
                        {"train_windows", r.train_windows},
                        {"test_windows", r.test_windows},
                        {"macro_f1", 100 * r.report.macro_f1},
                        {"per_class", per_class},
                        {"confusion", raw},
                        {"confusion_row_normalized", norm},
                        {"division_f1", divisions},
                        {"division_checksum", r.report.division_checksum}});
  }
  Json j{{"mode", std::string(to_string(a.config.mode))}, {"seed", a.config.seed}, {"units", "percent"}, {"runs", runs}};
  for (const auto& [k, v] : a.extra.items()) j[k] = v;
  return j;
}

inline Json stats_json(const RunArtifact& a) {
  Json hyps = Json::array();
  for (const auto& h : a.hypotheses) {
    Json per = Json::array();
    for (const auto& o : h.per_subject) {
      per.push_back(Json{{"subject", o.subject},
                         {"a", o.a},
                         {"b", o.b},
                         {"mean_f1_a", 100 * o.mean_a},
                         {"mean_f1_b", 100 * o.mean_b},
                         {"fold_checksum", o.checksum},
                         {"wilcoxon", o.wilcoxon ? test_json(*o.wilcoxon) : Json(nullptr)},
                         {"significant", o.significant},
                         {"verdict", o.verdict}});
    }
    Json across = Json::array();
    for (const auto& o : h.across) {
      across.push_back(Json{{"a", o.a},
                            {"b", o.b},
                            {"subjects", o.subjects},
                            {"t_test", o.t_test ? test_json(*o.t_test) : Json(nullptr)},
                            {"bayes_factor_10", o.bayes_factor ? Json(*o.bayes_factor) : Json(nullptr)},
                            {"bayes_note", o.bayes_note},
                            {"significant", o.significant},
                            {"verdict", o.verdict}});
    }
    hyps.push_back(Json{{"hypothesis", h.hypothesis}, {"per_subject", per}, {"across_subjects", across}});
  }
  return Json{{"alpha", stats::kAlpha}, {"seed", a.config.seed}, {"fold_checksums", a.fold_checksums}, {"hypotheses", hyps}};
}

inline std::string confusion_csv(const RunArtifact& a) {
  std::ostringstream out;
  out << "subject,model,training,kind,true,pred_SW,pred_ST,pred_SP\n";
  for (const auto& r : a.runs) {
    const auto rn = r.report.confusion.row_normalized();
    for (const char* kind : {"raw", "row_normalized"}) {
      for (std::size_t i = 0; i < kNumClasses; ++i) {
        out << r.subject << ',' << r.model() << ',' << r.training << ',' << kind << ',' << to_string(label_from_index(i));
        for (std::size_t j = 0; j < kNumClasses; ++j) {
          out << ',';
          if (kind[0] == 'r' && kind[1] == 'a') out << r.report.confusion.counts[i][j];
          else out << csv_number(rn[i][j]);
        }
        out << '\n';
      }
    }
  }
  return out.str();
}

inline std::string divisions_csv(const RunArtifact& a) {
  std::ostringstream out;
  out << "subject,model,training,division,macro_f1,checksum\n";
  for (const auto& r : a.runs) {
    for (std::size_t d = 0; d < r.report.division_f1.size(); ++d) {
      out << r.subject << ',' << r.model() << ',' << r.training << ',' << d << ',' << csv_number(100 * r.report.division_f1[d])
          << ',' << r.report.division_checksum << '\n';
    }
  }
  return out.str();
}

inline std::string timing_csv(const RunArtifact& a) {
  std::ostringstream out;
  out << "subject,model,training,train_windows,test_windows,train_seconds,inference_seconds_per_window\n";
  for (const auto& r : a.runs) {
    out << r.subject << ',' << r.model() << ',' << r.training << ',' << r.train_windows << ',' << r.test_windows << ','
        << csv_number(r.train_seconds) << ',' << (r.latency ? csv_number(*r.latency) : std::string()) << '\n';
  }
  return out.str();
}

// Writes every report of the artifact into dir. Timing lives only in timing.csv so
// the other files are reproducible byte for byte.
inline void emit_reports(const RunArtifact& a, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  write_atomic(dir / "config.txt", kv::render(to_kv(a.config)));
  write_atomic(dir / "metrics.json", metrics_json(a).dump(2) + "\n");
  write_atomic(dir / "confusion.csv", confusion_csv(a));
  write_atomic(dir / "divisions.csv", divisions_csv(a));
  write_atomic(dir / "timing.csv", timing_csv(a));
  if (!a.hypotheses.empty()) write_atomic(dir / "stats.json", stats_json(a).dump(2) + "\n");
}

}  // namespace turnkan::exp
