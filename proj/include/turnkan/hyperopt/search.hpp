#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "turnkan/errors.hpp"
#include "turnkan/hyperopt/gp.hpp"
#include "turnkan/hyperopt/space.hpp"
#include "turnkan/random.hpp"

namespace turnkan::hopt {

struct TrialRecord {
  std::size_t iteration = 0;
  Assignment assignment;
  double score = 0;  // validation macro-F1; 0 when the evaluation failed
  double seconds = 0;
  std::uint64_t seed = 0;
  std::string error;
};

struct SuggestOptions {
  std::size_t initial = 10;      // space-filling points before the surrogate takes over
  std::size_t candidates = 1000;  // points scored by expected improvement
  double noise = 1e-6;
};

namespace detail {

inline bool degenerate(const std::vector<TrialRecord>& history) {
  return std::all_of(history.begin(), history.end(), [&](const TrialRecord& r) { return r.score == history.front().score; });
}

// Copy of `a` with a few coordinates moved: numeric ones by a Gaussian step in
// unit coordinates, categorical ones re-drawn.
inline Assignment perturb(const SearchSpace& s, Assignment a, rnd::Engine& g) {
  const auto& dims = s.dims();
  const double rate = 2.0 / static_cast<double>(dims.size());
  bool moved = false;
  while (!moved) {
    for (std::size_t i = 0; i < dims.size(); ++i) {
      if (rnd::uniform01(g) >= rate) continue;
      moved = true;
      const auto& d = dims[i];
      if (d.kind == Dimension::Kind::Categorical) {
        a.values[i] = s.draw(i, rnd::uniform01(g));
        continue;
      }
      const double lo = d.log ? std::log10(d.lo) : d.lo, hi = d.log ? std::log10(d.hi) : d.hi;
      const double cur = d.log ? std::log10(a.values[i]) : a.values[i];
      double next = std::clamp(cur + 0.15 * (hi - lo) * rnd::normal(g), lo, hi);
      if (d.log) next = std::clamp(std::pow(10.0, next), d.lo, d.hi);
      else if (d.kind == Dimension::Kind::Integer) next = std::round(next);
      a.values[i] = next;
    }
  }
  return a;
}

}  // namespace detail

// Next point to evaluate given the history. The first `initial` suggestions are rows of
// a seeded Latin hypercube; afterwards a GP is fit to the history and the candidate with
// the largest expected improvement is returned. Deterministic in (history, seed).
inline Assignment suggest(const std::vector<TrialRecord>& history, const SearchSpace& space, std::uint64_t seed,
                          const SuggestOptions& opts = {}) {
  if (history.size() < opts.initial) {
    rnd::Engine design(rnd::mix(seed, 0x1a7));
    return space.canonical(space.latin_hypercube(opts.initial, design)[history.size()]);
  }
  rnd::Engine g(rnd::mix(seed, history.size()));
  if (detail::degenerate(history)) return space.canonical(space.sample(g));

  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  std::set<std::vector<double>> seen;
  for (const auto& r : history) {
    const auto c = space.canonical(r.assignment);
    xs.push_back(space.unit(c));
    ys.push_back(r.score);
    seen.insert(c.values);
  }
  GaussianProcess gp(opts.noise);
  gp.fit(xs, ys);
  const double best = *std::max_element(ys.begin(), ys.end());

  // Most candidates are uniform draws; the rest are local moves around the best points.
  std::vector<std::size_t> order(history.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return ys[i] > ys[j]; });
  const std::size_t elite = std::min<std::size_t>(5, order.size());
  const std::size_t local = opts.candidates * 3 / 10;

  Assignment choice;
  double choice_ei = -1;
  for (std::size_t c = 0; c < opts.candidates; ++c) {
    Assignment a = c < local ? detail::perturb(space, history[order[c % elite]].assignment, g) : space.sample(g);
    a = space.canonical(a);
    if (seen.count(a.values)) continue;
    const auto [mu, sd] = gp.predict(space.unit(a));
    const double ei = expected_improvement(mu, sd, best);
    if (ei > choice_ei) {
      choice_ei = ei;
      choice = a;
    }
  }
  if (choice_ei < 0) return space.canonical(space.sample(g));
  return choice;
}

using Objective = std::function<double(const Assignment&, std::uint64_t trial_seed)>;

struct SearchResult {
  std::vector<TrialRecord> history;
  std::size_t best = 0;
  std::vector<double> best_so_far;
};

namespace detail {

inline TrialRecord evaluate(const Objective& f, const Assignment& a, std::size_t iteration, std::uint64_t seed) {
  TrialRecord r;
  r.iteration = iteration;
  r.assignment = a;
  r.seed = rnd::mix(seed, 0x7e57 + iteration);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    r.score = f(a, r.seed);
    if (!(r.score >= 0 && r.score <= 1)) {
      r.error = "objective returned " + std::to_string(r.score) + ", outside [0, 1]";
      r.score = 0;
    }
  } catch (const std::exception& e) {
    r.error = e.what();
    r.score = 0;
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline void finish(SearchResult& out) {
  out.best_so_far.clear();
  double best = -1;
  for (std::size_t i = 0; i < out.history.size(); ++i) {
    if (out.history[i].score > best) {
      best = out.history[i].score;
      out.best = i;
    }
    out.best_so_far.push_back(best);
  }
}

}  // namespace detail

// Bayesian optimization for `budget` evaluations in total. Records in `prior` (a resumed
// history) count towards the budget. Failed evaluations score 0 and the search goes on.
inline SearchResult optimize(const Objective& objective, const SearchSpace& space, int budget, std::uint64_t seed,
                             std::vector<TrialRecord> prior = {},
                             const std::function<void(const TrialRecord&)>& on_record = {},
                             const SuggestOptions& opts = {}) {
  if (budget < 1) throw ConfigError("budget: must be >= 1");
  SearchResult out;
  out.history = std::move(prior);
  while (out.history.size() < static_cast<std::size_t>(budget)) {
    const auto a = suggest(out.history, space, seed, opts);
    out.history.push_back(detail::evaluate(objective, a, out.history.size(), seed));
    if (on_record) on_record(out.history.back());
  }
  detail::finish(out);
  return out;
}

// Baseline: independent uniform draws from the space.
inline SearchResult random_search(const Objective& objective, const SearchSpace& space, int budget, std::uint64_t seed) {
  if (budget < 1) throw ConfigError("budget: must be >= 1");
  SearchResult out;
  rnd::Engine g(rnd::mix(seed, 0x4a2d));
  for (int i = 0; i < budget; ++i) {
    out.history.push_back(detail::evaluate(objective, space.canonical(space.sample(g)), out.history.size(), seed));
  }
  detail::finish(out);
  return out;
}

// One JSON object per line: iteration, config (active dimensions), assignment, score,
// seed, seconds and error.
inline nlohmann::ordered_json record_to_json(const SearchSpace& space, const TrialRecord& r) {
  nlohmann::ordered_json j;
  j["iteration"] = r.iteration;
  j["config"] = space.describe(r.assignment);
  j["assignment"] = r.assignment.values;
  j["score"] = r.score;
  j["seed"] = r.seed;
  j["seconds"] = r.seconds;
  j["error"] = r.error;
  return j;
}

inline TrialRecord record_from_json(const SearchSpace& space, const nlohmann::json& j) {
  TrialRecord r;
  r.iteration = j.at("iteration").get<std::size_t>();
  r.assignment.values = j.at("assignment").get<std::vector<double>>();
  if (r.assignment.values.size() != space.dims().size()) {
    throw DataError("history: record " + std::to_string(r.iteration) + " does not belong to space " + space.name());
  }
  r.score = j.at("score").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.seconds = j.at("seconds").get<double>();
  r.error = j.at("error").get<std::string>();
  return r;
}

inline std::vector<TrialRecord> load_history(const SearchSpace& space, const std::filesystem::path& path) {
  std::vector<TrialRecord> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(space, nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (out.back().iteration != out.size() - 1) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": iterations out of order");
    }
  }
  return out;
}

inline void append_history(const SearchSpace& space, const std::filesystem::path& path, const TrialRecord& r) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot append to search history '" + path.string() + "'");
  out << record_to_json(space, r).dump() << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace turnkan::hopt
