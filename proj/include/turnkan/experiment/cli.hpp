#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "turnkan/experiment/run.hpp"

namespace turnkan::exp {

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitIo = 2, kExitNumerical = 3 };

namespace detail {

inline void write_run_log(const std::string& out, const std::string& text) {
  try {
    write_atomic(std::filesystem::path(out) / "run.log", text);
  } catch (const IoError&) {
  }
}

}  // namespace detail

// Builds the configuration in precedence order: defaults, --config file, named flags,
// then --set overrides.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Turn-intent classification experiments with KAN, FKAN, MLP and CNN models", "turnkan"};
  app.require_subcommand(1);
  std::string config_file, data, subject, family, out_dir, model;
  std::optional<long long> seed;
  std::optional<int> budget, window, epochs;
  std::vector<std::string> sets;
  for (auto name : kModeNames) {
    auto* sub = app.add_subcommand(std::string(name));
    sub->add_option("--config", config_file, "key = value configuration file");
    sub->add_option("--data", data, "dataset CSV");
    sub->add_option("--subject", subject, "subject id or 'pooled'");
    sub->add_option("--family", family, "MLP, KAN, CNN or FKAN");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--budget", budget, "hyperparameter search evaluations");
    sub->add_option("--window", window, "window size override (10, 20 or 30)");
    sub->add_option("--epochs", epochs, "epoch override");
    sub->add_option("--model", model, "serialized model (evaluate)");
    sub->add_option("--set", sets, "key=value override, repeatable");
  }

  std::vector<std::string> argv{"turnkan"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::vector<const char*> cargv;
  for (const auto& a : argv) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  ExperimentConfig c;
  std::ostringstream log_text;
  auto log = [&](const std::string& line) {
    err << line << "\n";
    log_text << line << "\n";
  };
  try {
    c.mode = parse_mode(app.get_subcommands().front()->get_name());
    if (!config_file.empty()) {
      auto m = kv::load(config_file);
      m.erase("mode");
      c = from_kv(m, c);
    }
    if (!data.empty()) c.data = data;
    if (!subject.empty()) c.subject = subject;
    if (!family.empty()) c.family = models::parse_family(family);
    if (seed) apply_key(c, "seed", std::to_string(*seed));
    if (!out_dir.empty()) c.out = out_dir;
    if (budget) c.budget = *budget;
    if (window) c.window = *window;
    if (epochs) c.epochs = *epochs;
    if (!model.empty()) c.model = model;
    for (const auto& s : sets) {
      const auto [k, v] = kv::split_assignment(s, "--set");
      if (k == "mode") throw ConfigError("mode: set by the command, not by --set");
      apply_key(c, k, v);
    }
    c.validate();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const DataError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  log("turnkan " + std::string(to_string(c.mode)) + " seed=" + std::to_string(c.seed) + " out=" + c.out);
  int code = kExitOk;
  try {
    const auto a = run(c, log);
    emit_reports(a, c.out);
    log("reports written to " + c.out);
  } catch (const ConfigError& e) {
    log(std::string("config error: ") + e.what());
    code = kExitConfig;
  } catch (const IoError& e) {
    log(std::string("i/o error: ") + e.what());
    code = kExitIo;
  } catch (const DataError& e) {
    log(std::string("data error: ") + e.what());
    code = kExitIo;
  } catch (const std::exception& e) {
    log(std::string("numerical failure: ") + e.what());
    code = kExitNumerical;
  }
  detail::write_run_log(c.out, log_text.str());
  return code;
}

}  // namespace turnkan::exp
