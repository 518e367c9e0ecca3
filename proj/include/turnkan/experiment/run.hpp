#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "turnkan/data/csv.hpp"
#include "turnkan/data/synth.hpp"
#include "turnkan/experiment/config.hpp"
#include "turnkan/experiment/pipeline.hpp"
#include "turnkan/experiment/reports.hpp"
#include "turnkan/hyperopt/search.hpp"
#include "turnkan/models/serialize.hpp"
#include "turnkan/stats/harness.hpp"

namespace turnkan::exp {

using Log = std::function<void(const std::string&)>;

namespace detail {

inline std::vector<data::Window> pick(const std::vector<data::Window>& all, const std::vector<std::size_t>& idx) {
  std::vector<data::Window> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(all[i]);
  return out;
}

inline std::uint64_t model_seed(std::uint64_t seed, Family f, const std::string& who) {
  return rnd::mix(rnd::mix(seed, static_cast<std::uint64_t>(f) + 1), text_hash(who));
}

inline Dataset load_dataset(const ExperimentConfig& c) {
  if (!std::filesystem::exists(c.data)) throw IoError("dataset '" + c.data + "' not found");
  auto trials = data::ingest_csv(c.data);
  if (trials.empty()) throw DataError("dataset '" + c.data + "' contains no trials");
  return Dataset(std::move(trials), c.seed, c.smoothing);
}

inline std::vector<std::string> compared_subjects(const ExperimentConfig& c, const Dataset& d) {
  if (c.subjects.empty()) return d.subjects();
  for (const auto& s : c.subjects) {
    if (!d.has(s)) throw DataError("dataset: no subject '" + s + "'");
  }
  return c.subjects;
}

inline RunEntry score(Fitted& f, const std::string& subject, const SubjectWindows& w, const std::string& training) {
  RunEntry e;
  e.subject = subject;
  e.config = f.model.config();
  e.training = training;
  e.report = assess(f.model, w);
  e.train_seconds = f.train_seconds;
  e.train_windows = f.train_windows;
  e.test_windows = w.test.size();
  return e;
}

// Compare modes score every model on identical folds, so they share one window size.
inline int shared_window(const ExperimentConfig& c) { return c.window.value_or(20); }

inline stats::DivisionScores division_scores(const RunEntry& e, const std::string& name) {
  return {e.subject, name, e.report.division_f1, e.report.division_checksum};
}

}  // namespace detail

// generate: synthesize one subject per profile and write the dataset CSV.
inline RunArtifact run_generate(const ExperimentConfig& c, const Log& log) {
  std::vector<data::SubjectProfile> profiles;
  if (c.profiles.empty()) profiles = data::default_profiles();
  for (const auto& path : c.profiles) profiles.push_back(data::load_profile(path));
  std::vector<data::Trial> all;
  Json summary = Json::array();
  for (const auto& p : profiles) {
    auto trials = data::synth_subject(p, c.seed);
    const auto split = data::split_trials(trials, rnd::mix(c.seed, text_hash(p.subject)));
    for (int W : {10, 20, 30}) {
      for (const auto* part : {&split.train, &split.test}) {
        std::vector<data::Trial> sel;
        for (auto i : *part) sel.push_back(data::smooth_acceleration(trials[i]));
        const auto prop = data::class_proportions(data::make_windows(sel, W));
        summary.push_back(Json{{"subject", p.subject},
                               {"window", W},
                               {"split", part == &split.train ? "train" : "test"},
                               {"SW", 100 * prop[0]},
                               {"ST", 100 * prop[1]},
                               {"SP", 100 * prop[2]}});
      }
    }
    log("generated " + p.subject + ": " + std::to_string(trials.size()) + " trials");
    all.insert(all.end(), std::make_move_iterator(trials.begin()), std::make_move_iterator(trials.end()));
  }
  data::export_csv(all, c.data);
  RunArtifact a;
  a.config = c;
  a.extra["dataset"] = c.data;
  a.extra["class_proportions"] = summary;
  return a;
}

// train: one model, subject-specific or pooled. A pooled model is scored on every subject.
inline RunArtifact run_train(const ExperimentConfig& c, const Log& log) {
  auto d = detail::load_dataset(c);
  RunArtifact a;
  a.config = c;
  const auto cfg = c.model_config(c.family, c.subject);
  const bool pooled = c.subject == kPooled;
  Fitted f;
  if (pooled) {
    const auto train = d.pooled_train(cfg.window_size);
    f = fit(cfg, train, detail::model_seed(c.seed, c.family, kPooled));
  } else {
    f = fit(cfg, d.windows(c.subject, cfg.window_size).train, detail::model_seed(c.seed, c.family, c.subject));
  }
  log("trained " + std::string(models::to_string(c.family)) + " on " + c.subject + " in " +
      kv::format_double(f.train_seconds) + " s");
  for (const auto& s : pooled ? d.subjects() : std::vector<std::string>{c.subject}) {
    const auto& w = d.windows(s, cfg.window_size);
    a.runs.push_back(detail::score(f, s, w, pooled ? "pooled" : "specific"));
    a.fold_checksums[s] = w.divisions.checksum;
  }
  write_atomic(std::filesystem::path(c.out) / "model.json", models::to_json(f.model).dump(1) + "\n");
  return a;
}

// evaluate: score a serialized model on one subject's (or every subject's) test windows.
inline RunArtifact run_evaluate(const ExperimentConfig& c, const Log&) {
  auto model = models::load_model(c.model);
  auto d = detail::load_dataset(c);
  RunArtifact a;
  a.config = c;
  const int W = model.config().window_size;
  Fitted f{std::move(model), 0, 0};
  for (const auto& s : c.subject == kPooled ? d.subjects() : std::vector<std::string>{c.subject}) {
    const auto& w = d.windows(s, W);
    a.runs.push_back(detail::score(f, s, w, c.subject == kPooled ? "pooled" : "specific"));
    a.fold_checksums[s] = w.divisions.checksum;
  }
  return a;
}

// hyperopt: Bayesian search on a stratified validation split of the training windows,
// then the best configuration is retrained on all training windows and tested.
inline RunArtifact run_hyperopt(const ExperimentConfig& c, const Log& log) {
  auto d = detail::load_dataset(c);
  const bool pooled = c.subject == kPooled;
  const auto space = hopt::space_for(c.family);
  const auto base = c.model_config(c.family, c.subject);
  std::map<int, std::vector<data::Window>> train_by_window;
  std::map<int, data::Holdout> holdouts;
  auto prepare = [&](int W) -> const data::Holdout& {
    if (!holdouts.count(W)) {
      train_by_window[W] = pooled ? d.pooled_train(W) : d.windows(c.subject, W).train;
      holdouts[W] = data::stratified_holdout(train_by_window[W], c.validation_fraction, rnd::mix(c.seed, 0x4a11d + W));
    }
    return holdouts[W];
  };
  auto objective = [&](const hopt::Assignment& x, std::uint64_t trial_seed) {
    const auto cfg = hopt::to_config(space, x, base);
    const auto& h = prepare(cfg.window_size);
    const auto& all = train_by_window[cfg.window_size];
    auto f = fit(cfg, detail::pick(all, h.train), trial_seed);
    const auto val = detail::pick(all, h.validation);
    const auto batch = data::to_batch(val);
    return metrics::macro_f1(batch.labels, models::predict_labels(f.model, batch.inputs));
  };
  const auto history_path = std::filesystem::path(c.out) / "history.jsonl";
  std::filesystem::create_directories(c.out);
  auto prior = hopt::load_history(space, history_path);
  if (prior.size() > static_cast<std::size_t>(c.budget)) prior.resize(static_cast<std::size_t>(c.budget));
  if (!prior.empty()) log("resuming search after " + std::to_string(prior.size()) + " evaluations");
  const auto result = hopt::optimize(objective, space, c.budget, c.seed, prior, [&](const hopt::TrialRecord& r) {
    hopt::append_history(space, history_path, r);
    log("iteration " + std::to_string(r.iteration) + ": validation macro-F1 " + kv::format_double(r.score) +
        (r.error.empty() ? "" : " (failed: " + r.error + ")"));
  });
  const auto& best = result.history[result.best];
  const auto cfg = hopt::to_config(space, best.assignment, base);
  write_atomic(std::filesystem::path(c.out) / "best_config.txt", kv::render(models::to_kv(cfg)));

  RunArtifact a;
  a.config = c;
  Fitted f = pooled ? fit(cfg, d.pooled_train(cfg.window_size), detail::model_seed(c.seed, c.family, kPooled))
                    : fit(cfg, d.windows(c.subject, cfg.window_size).train, detail::model_seed(c.seed, c.family, c.subject));
  for (const auto& s : pooled ? d.subjects() : std::vector<std::string>{c.subject}) {
    const auto& w = d.windows(s, cfg.window_size);
    a.runs.push_back(detail::score(f, s, w, pooled ? "pooled" : "specific"));
    a.fold_checksums[s] = w.divisions.checksum;
  }
  Json curve = Json::array();
  for (double v : result.best_so_far) curve.push_back(100 * v);
  a.extra["search"] = Json{{"space", space.name()},
                           {"budget", c.budget},
                           {"best_iteration", result.best},
                           {"best_validation_f1", 100 * best.score},
                           {"best_so_far", curve}};
  write_atomic(std::filesystem::path(c.out) / "model.json", models::to_json(f.model).dump(1) + "\n");
  return a;
}

// compare-hp1: subject-specific models, KAN vs MLP and FKAN vs CNN on the ten divisions.
inline RunArtifact run_compare_hp1(const ExperimentConfig& c, const Log& log) {
  auto d = detail::load_dataset(c);
  const int W = detail::shared_window(c);
  auto cc = c;
  cc.window = W;
  RunArtifact a;
  a.config = cc;
  const auto families = cc.model_list();
  const auto has = [&](Family f) { return std::find(families.begin(), families.end(), f) != families.end(); };
  std::vector<stats::Pairing> pairings;
  for (const auto& s : detail::compared_subjects(cc, d)) {
    const auto& w = d.windows(s, W);
    a.fold_checksums[s] = w.divisions.checksum;
    std::map<Family, std::size_t> at;
    for (Family f : families) {
      auto fitted = fit(cc.model_config(f, s), w.train, detail::model_seed(cc.seed, f, s));
      at[f] = a.runs.size();
      a.runs.push_back(detail::score(fitted, s, w, "specific"));
      log(s + " " + std::string(models::to_string(f)) + ": macro-F1 " + kv::format_double(a.runs.back().report.macro_f1));
    }
    for (auto [x, y] : {std::pair{Family::KAN, Family::MLP}, std::pair{Family::FKAN, Family::CNN}}) {
      if (!has(x) || !has(y)) continue;
      pairings.push_back({detail::division_scores(a.runs[at[x]], std::string(models::to_string(x))),
                          detail::division_scores(a.runs[at[y]], std::string(models::to_string(y)))});
    }
  }
  if (!pairings.empty()) a.hypotheses.push_back(stats::hypothesis_harness("HP1: learnable activations improve macro-F1", pairings));
  return a;
}

// compare-hp2: per family, subject-specific models against one pooled model, both
// scored on each subject's ten divisions.
inline RunArtifact run_compare_hp2(const ExperimentConfig& c, const Log& log) {
  auto d = detail::load_dataset(c);
  const int W = detail::shared_window(c);
  auto cc = c;
  cc.window = W;
  RunArtifact a;
  a.config = cc;
  const auto subjects = detail::compared_subjects(cc, d);
  std::vector<stats::Pairing> pairings;
  for (Family f : cc.model_list()) {
    const std::string name(models::to_string(f));
    auto pooled = fit(cc.model_config(f, kPooled), d.pooled_train(W), detail::model_seed(cc.seed, f, kPooled));
    log("trained pooled " + name + " in " + kv::format_double(pooled.train_seconds) + " s");
    for (const auto& s : subjects) {
      const auto& w = d.windows(s, W);
      a.fold_checksums[s] = w.divisions.checksum;
      auto specific = fit(cc.model_config(f, s), w.train, detail::model_seed(cc.seed, f, s));
      a.runs.push_back(detail::score(specific, s, w, "specific"));
      a.runs.push_back(detail::score(pooled, s, w, "pooled"));
      const auto& sp = a.runs[a.runs.size() - 2];
      const auto& po = a.runs.back();
      log(s + " " + name + ": specific " + kv::format_double(sp.report.macro_f1) + ", pooled " +
          kv::format_double(po.report.macro_f1));
      pairings.push_back({detail::division_scores(sp, name + " specific"), detail::division_scores(po, name + " pooled")});
    }
  }
  a.hypotheses.push_back(stats::hypothesis_harness("HP2: subject-specific training beats pooled training", pairings));
  return a;
}

// bench: train each model on one subject and time single-window inference.
inline RunArtifact run_bench(const ExperimentConfig& c, const Log& log) {
  auto d = detail::load_dataset(c);
  RunArtifact a;
  a.config = c;
  for (Family f : c.model_list()) {
    const auto cfg = c.model_config(f, c.subject);
    const auto& w = d.windows(c.subject, cfg.window_size);
    auto fitted = fit(cfg, w.train, detail::model_seed(c.seed, f, c.subject));
    auto e = detail::score(fitted, c.subject, w, "specific");
    e.latency = inference_latency(fitted.model, w.test, c.repetitions);
    log(c.subject + " " + e.model() + ": train " + kv::format_double(e.train_seconds) + " s, inference " +
        kv::format_double(*e.latency * 1e6) + " us per window");
    a.fold_checksums[c.subject] = w.divisions.checksum;
    a.runs.push_back(std::move(e));
  }
  return a;
}

inline RunArtifact run(const ExperimentConfig& c, const Log& log = [](const std::string&) {}) {
  c.validate();
  switch (c.mode) {
    case Mode::Generate: return run_generate(c, log);
    case Mode::Train: return run_train(c, log);
    case Mode::Evaluate: return run_evaluate(c, log);
    case Mode::Hyperopt: return run_hyperopt(c, log);
    case Mode::CompareHp1: return run_compare_hp1(c, log);
    case Mode::CompareHp2: return run_compare_hp2(c, log);
    case Mode::Bench: return run_bench(c, log);
  }
  throw ConfigError("mode: unsupported");
}

}  // namespace turnkan::exp
