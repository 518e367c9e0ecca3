#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "turnkan/errors.hpp"
#include "turnkan/kv.hpp"
#include "turnkan/models/config.hpp"

namespace turnkan::exp {

using models::Family;
using models::ModelConfig;

enum class Mode { Generate, Train, Hyperopt, Evaluate, CompareHp1, CompareHp2, Bench };

inline constexpr std::string_view kModeNames[] = {"generate", "train", "hyperopt", "evaluate",
                                                  "compare-hp1", "compare-hp2", "bench"};

inline std::string_view to_string(Mode m) { return kModeNames[static_cast<int>(m)]; }

inline Mode parse_mode(std::string_view s) {
  for (int i = 0; i < 7; ++i)
    if (kModeNames[i] == s) return static_cast<Mode>(i);
  throw ConfigError("mode: unknown mode '" + std::string(s) + "'");
}

inline constexpr const char* kPooled = "pooled";

// Per-subject MLP and KAN architectures; CNN and FKAN use one desk-scale
// architecture for every subject.
inline ModelConfig preset_config(Family f, const std::string& subject) {
  ModelConfig c;
  c.family = f;
  c.window_size = 20;
  c.epochs = 50;
  if (f == Family::MLP) {
    using A = basis::StaticActivation;
    static const std::map<std::string, std::pair<std::vector<int>, A>> table{
        {"A01", {{80, 35, 80, 45}, A::Tanh}},     {"A02", {{65, 50, 45}, A::Silu}},
        {"A03", {{80, 40, 70, 55}, A::Tanh}},     {"A04", {{30}, A::Silu}},
        {"A05", {{90, 65, 25, 10, 30}, A::Relu}}, {kPooled, {{50, 40, 55, 90, 90}, A::Tanh}}};
    const auto it = table.count(subject) ? table.find(subject) : table.find("A01");
    c.hidden = it->second.first;
    c.activation = it->second.second;
    c.learning_rate = 1e-3;
    c.regularization = 1e-4;
  } else if (f == Family::KAN) {
    struct K { std::vector<int> hidden; int grid, k; };
    static const std::map<std::string, K> table{{"A01", {{80}, 9, 1}},     {"A02", {{40, 55, 75}, 5, 2}},
                                                {"A03", {{55, 65}, 5, 4}}, {"A04", {{45}, 3, 2}},
                                                {"A05", {{80, 75}, 3, 4}}, {kPooled, {{100, 65, 90}, 3, 2}}};
    const auto& k = table.count(subject) ? table.at(subject) : table.at("A01");
    c.hidden = k.hidden;
    c.grid_size = k.grid;
    c.spline_order = k.k;
    c.learning_rate = 1e-3;
    c.regularization = 1e-4;
  } else {
    c.filters = {32, 32};
    c.kernels = {7, 7};
    c.pools = {2, 2};
    c.padding = models::Padding::Same;
    c.conv_activation = f == Family::CNN ? models::ConvActivation{models::ConvActivation::Kind::Relu, 0}
                                         : models::ConvActivation{models::ConvActivation::Kind::Fkan, 3};
    c.dropout = 0.2;
    c.global_pool = false;
    c.dense = {64};
    c.dense_activation = basis::StaticActivation::Relu;
    c.learning_rate = 5e-3;
  }
  return c;
}

inline std::string family_prefix(Family f) {
  std::string s(models::to_string(f));
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

struct ExperimentConfig {
  Mode mode = Mode::Train;
  std::string data = "dataset.csv";
  std::string subject = "A01";         // one id, or "pooled"
  std::vector<std::string> subjects;   // compare modes; empty means every subject in the data
  Family family = Family::MLP;
  std::vector<Family> models;          // compare and bench modes; empty means the mode's default
  std::uint64_t seed = 0;
  std::string out = "run";
  int budget = 30;
  std::optional<int> window;           // overrides every model's window size
  std::optional<int> epochs;           // overrides every model's epoch count
  std::vector<std::string> profiles;   // generate: profile files; empty means the built-in five
  int repetitions = 100;               // bench
  std::string model;                   // evaluate: serialized model
  double validation_fraction = 0.1;
  bool smoothing = true;
  std::map<Family, kv::Map> overrides;  // "<family>.<key> = value"

  std::vector<Family> model_list() const {
    if (!models.empty()) return models;
    if (mode == Mode::Bench) return {Family::KAN, Family::MLP};
    return {Family::MLP, Family::KAN, Family::CNN, Family::FKAN};
  }

  // Model configuration used for a family trained on `subject` (or "pooled").
  ModelConfig model_config(Family f, const std::string& who) const {
    ModelConfig c = preset_config(f, who);
    if (auto it = overrides.find(f); it != overrides.end()) c = models::apply_kv(c, it->second);
    if (window) c.window_size = *window;
    if (epochs) c.epochs = *epochs;
    c.family = f;
    try {
      models::validate(c);
    } catch (const ConfigError& e) {
      throw ConfigError(family_prefix(f) + "." + e.what());
    }
    return c;
  }

  void validate() const {
    if (subject.empty()) throw ConfigError("subject: must not be empty");
    if (budget < 1) throw ConfigError("budget: must be >= 1");
    if (window && *window != 10 && *window != 20 && *window != 30) throw ConfigError("window: must be 10, 20 or 30");
    if (epochs && *epochs < 1) throw ConfigError("epochs: must be >= 1");
    if (repetitions < 30) throw ConfigError("repetitions: at least 30 required");
    if (!(validation_fraction > 0 && validation_fraction < 1)) throw ConfigError("validation_fraction: must lie in (0, 1)");
    if (out.empty()) throw ConfigError("out: must not be empty");
    if (mode == Mode::Evaluate && model.empty()) throw ConfigError("model: evaluate needs a serialized model path");
    for (const auto& [f, m] : overrides) model_config(f, "A01");
  }
};

inline void apply_key(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "mode") c.mode = parse_mode(value);
  else if (key == "data") c.data = value;
  else if (key == "subject") c.subject = value;
  else if (key == "subjects") c.subjects = kv::split_list(value);
  else if (key == "family") c.family = models::parse_family(value);
  else if (key == "models") {
    c.models.clear();
    for (const auto& s : kv::split_list(value)) c.models.push_back(models::parse_family(s));
  } else if (key == "seed") {
    const auto v = kv::to_int(key, value);
    if (v < 0) throw ConfigError("seed: must be non-negative");
    c.seed = static_cast<std::uint64_t>(v);
  } else if (key == "out") c.out = value;
  else if (key == "budget") c.budget = static_cast<int>(kv::to_int(key, value));
  else if (key == "window") {
    if (value.empty() || value == "none") c.window.reset();
    else c.window = static_cast<int>(kv::to_int(key, value));
  } else if (key == "epochs") {
    if (value.empty() || value == "none") c.epochs.reset();
    else c.epochs = static_cast<int>(kv::to_int(key, value));
  } else if (key == "profiles") c.profiles = kv::split_list(value);
  else if (key == "repetitions") c.repetitions = static_cast<int>(kv::to_int(key, value));
  else if (key == "model") c.model = value;
  else if (key == "validation_fraction") c.validation_fraction = kv::to_double(key, value);
  else if (key == "smoothing") c.smoothing = kv::to_bool(key, value);
  else if (const auto dot = key.find('.'); dot != std::string::npos) {
    const Family f = models::parse_family(key.substr(0, dot));
    const std::string sub = key.substr(dot + 1);
    models::apply_kv(preset_config(f, "A01"), {{sub, value}});  // rejects unknown model keys early
    c.overrides[f][sub] = value;
  } else {
    throw ConfigError(key + ": unknown configuration key");
  }
}

inline ExperimentConfig from_kv(const kv::Map& m, ExperimentConfig base = {}) {
  for (const auto& [k, v] : m) apply_key(base, k, v);
  return base;
}

// Full resolved configuration, including the model configurations the run uses.
inline kv::Map to_kv(const ExperimentConfig& c) {
  kv::Map m;
  m["mode"] = std::string(to_string(c.mode));
  m["data"] = c.data;
  m["subject"] = c.subject;
  m["subjects"] = kv::join(c.subjects);
  m["family"] = std::string(models::to_string(c.family));
  std::vector<std::string> names;
  for (Family f : c.models) names.emplace_back(models::to_string(f));
  m["models"] = kv::join(names);
  m["seed"] = std::to_string(c.seed);
  m["out"] = c.out;
  m["budget"] = std::to_string(c.budget);
  m["window"] = c.window ? std::to_string(*c.window) : "none";
  m["epochs"] = c.epochs ? std::to_string(*c.epochs) : "none";
  m["profiles"] = kv::join(c.profiles);
  m["repetitions"] = std::to_string(c.repetitions);
  m["model"] = c.model;
  m["validation_fraction"] = kv::format_double(c.validation_fraction);
  m["smoothing"] = c.smoothing ? "true" : "false";
  for (const auto& [f, o] : c.overrides)
    for (const auto& [k, v] : o) m[family_prefix(f) + "." + k] = v;
  return m;
}

}  // namespace turnkan::exp
