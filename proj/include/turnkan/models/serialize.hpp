#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "turnkan/models/model.hpp"

namespace turnkan::models {

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kModelFormatName = "turnkan-model";

// Self-describing JSON container: format tag and version, config keys,
// normalization, history and every parameter tensor. Doubles are written in
// shortest round-trip form, so load(save(m)) predicts bit-identically.
inline nlohmann::ordered_json to_json(const Model& m) {
  nlohmann::ordered_json j;
  j["format"] = kModelFormatName;
  j["version"] = kModelFormatVersion;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : to_kv(m.config())) cfg[k] = v;
  j["config"] = cfg;
  j["normalization"] = {{"mean", m.normalization().mean}, {"stddev", m.normalization().stddev}};
  j["history"] = m.history();
  auto params = nlohmann::ordered_json::array();
  for (const auto& p : m.parameters()) {
    params.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"values", p.value.values()}});
  }
  j["parameters"] = std::move(params);
  return j;
}

inline Model from_json(const nlohmann::ordered_json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormatName) throw DataError("model file: unknown format tag");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) throw DataError("model file: unsupported version " + std::to_string(version));
    kv::Map cfg;
    for (const auto& [k, v] : j.at("config").items()) cfg[k] = v.get<std::string>();
    const ModelConfig config = from_kv(cfg);
    std::vector<Parameter> params;
    for (const auto& p : j.at("parameters")) {
      params.emplace_back(p.at("name").get<std::string>(),
                          Tensor(p.at("shape").get<num::Shape>(), p.at("values").get<std::vector<double>>()));
    }
    Model m = assemble_model(config, std::move(params));
    Normalization n;
    n.mean = j.at("normalization").at("mean").get<std::array<double, kChannels>>();
    n.stddev = j.at("normalization").at("stddev").get<std::array<double, kChannels>>();
    m.set_normalization(n);
    m.history() = j.at("history").get<std::vector<double>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

inline void save_model(const Model& m, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write model to '" + path.string() + "'");
  f << to_json(m).dump(1) << '\n';
  if (!f) throw IoError("failed writing model to '" + path.string() + "'");
}

inline Model load_model(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read model '" + path.string() + "'");
  nlohmann::ordered_json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model file '" + path.string() + "': " + e.what());
  }
  return from_json(j);
}

}  // namespace turnkan::models
