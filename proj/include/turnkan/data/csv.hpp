#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "turnkan/data/trial.hpp"
#include "turnkan/errors.hpp"
#include "turnkan/kv.hpp"

namespace turnkan::data {

inline constexpr std::string_view kCsvHeader =
    "subject,activity,stiffness,trial,acc_x,acc_y,acc_z,gyro_x,gyro_y,gyro_z,label";

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (auto& f : out) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.remove_suffix(1);
  }
  return out;
}

}  // namespace detail

// One row per sample, trials keyed by (subject, activity, stiffness, trial)
// in order of first appearance.
inline std::vector<Trial> parse_csv(std::istream& in, const std::string& source = "csv") {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) -> void {
    throw DataError(source + ":" + std::to_string(line_no) + ": " + what);
  };
  if (!std::getline(in, line)) {
    line_no = 1;
    fail("missing header row");
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (kv::trim(line) != kCsvHeader) fail("header must be '" + std::string(kCsvHeader) + "'");

  std::vector<Trial> trials;
  std::map<std::tuple<std::string, Activity, Stiffness, int>, std::size_t> where;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (kv::trim(line).empty()) continue;
    const auto f = detail::split_fields(line);
    if (f.size() != 11) fail("expected 11 fields, got " + std::to_string(f.size()));
    if (f[0].empty()) fail("empty subject");
    Activity act{};
    Stiffness stiff{};
    Label label{};
    try {
      act = parse_activity(f[1]);
      stiff = parse_stiffness(f[2]);
      label = parse_label(f[10]);
    } catch (const DataError& e) {
      fail(e.what());
    }
    int index = 0;
    {
      const auto [p, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), index);
      if (ec != std::errc{} || p != f[3].data() + f[3].size() || index < 0) fail("bad trial number '" + std::string(f[3]) + "'");
    }
    LabeledSample s;
    s.label = label;
    for (std::size_t c = 0; c < kChannels; ++c) {
      const auto v = f[4 + c];
      const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), s.channels[c]);
      if (ec != std::errc{} || p != v.data() + v.size() || v.empty() || !std::isfinite(s.channels[c])) {
        fail("bad number '" + std::string(v) + "' in column " + std::to_string(5 + c));
      }
    }
    const auto key = std::make_tuple(std::string(f[0]), act, stiff, index);
    auto it = where.find(key);
    if (it == where.end()) {
      Trial t;
      t.subject = std::string(f[0]);
      t.activity = act;
      t.stiffness = stiff;
      t.index = index;
      it = where.emplace(key, trials.size()).first;
      trials.push_back(std::move(t));
    }
    trials[it->second].samples.push_back(s);
  }
  return trials;
}

inline std::vector<Trial> ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  return parse_csv(in, path.string());
}

inline void write_csv(std::ostream& out, const std::vector<Trial>& trials) {
  out << kCsvHeader << '\n';
  for (const auto& t : trials) {
    const std::string prefix = t.subject + "," + std::string(to_string(t.activity)) + "," +
                               std::string(to_string(t.stiffness)) + "," + std::to_string(t.index) + ",";
    for (const auto& s : t.samples) {
      out << prefix;
      for (double v : s.channels) out << kv::format_double(v) << ',';
      out << to_string(s.label) << '\n';
    }
  }
}

// Writes through a temporary file so a failed export never leaves a partial dataset.
inline void export_csv(const std::vector<Trial>& trials, const std::filesystem::path& path) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot write dataset '" + path.string() + "'");
    write_csv(out, trials);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move dataset into place at '" + path.string() + "': " + ec.message());
}

}  // namespace turnkan::data
