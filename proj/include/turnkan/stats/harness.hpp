#pragma once

#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "turnkan/errors.hpp"
#include "turnkan/stats/tests.hpp"

namespace turnkan::stats {

inline constexpr double kAlpha = 0.05;
inline constexpr const char* kNoDifference = "no significant difference detected";

// Macro-F1 of one trained model on each of the ten test divisions of one subject.
struct DivisionScores {
  std::string subject;
  std::string name;  // e.g. "KAN" or "MLP pooled"
  std::vector<double> scores;
  std::string checksum;  // fold assignment the scores were computed on

  double mean() const { return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size()); }
};

struct Pairing {
  DivisionScores a;
  DivisionScores b;
};

struct SubjectOutcome {
  std::string subject;
  std::string a, b;
  double mean_a = 0, mean_b = 0;
  std::string checksum;
  std::optional<TestResult> wilcoxon;
  bool significant = false;
  std::string verdict;
};

struct AcrossOutcome {
  std::string a, b;
  std::vector<std::string> subjects;
  std::optional<TestResult> t_test;
  std::optional<double> bayes_factor;
  bool significant = false;
  std::string verdict;
  std::string bayes_note;
};

struct HarnessReport {
  std::string hypothesis;
  std::vector<SubjectOutcome> per_subject;
  std::vector<AcrossOutcome> across;
};

inline std::string verdict_for(const TestResult& r) {
  return r.p < kAlpha ? r.direction + " (p < 0.05)" : std::string(kNoDifference);
}

// Per pairing, a one-sided Wilcoxon on the division scores (A > B); per (A, B) name
// pair, a one-sided paired t and Bayes factor on the per-subject means.
inline HarnessReport hypothesis_harness(const std::string& hypothesis, const std::vector<Pairing>& pairings) {
  HarnessReport report;
  report.hypothesis = hypothesis;
  std::map<std::pair<std::string, std::string>, std::vector<const Pairing*>> groups;
  std::vector<std::pair<std::string, std::string>> group_order;
  for (const auto& p : pairings) {
    if (p.a.subject != p.b.subject) {
      throw StatsError("harness: pairing " + p.a.name + " vs " + p.b.name + " mixes subjects " + p.a.subject + " and " +
                       p.b.subject);
    }
    if (p.a.checksum != p.b.checksum) {
      throw StatsError("harness: " + p.a.subject + " " + p.a.name + " and " + p.b.name +
                       " were scored on different division folds");
    }
    SubjectOutcome o;
    o.subject = p.a.subject;
    o.a = p.a.name;
    o.b = p.b.name;
    o.checksum = p.a.checksum;
    PairedScores ps{p.a.scores, p.b.scores, p.a.name, p.b.name};
    ps.validate();
    o.mean_a = p.a.mean();
    o.mean_b = p.b.mean();
    try {
      o.wilcoxon = wilcoxon_one_tailed(ps);
      o.significant = o.wilcoxon->p < kAlpha;
      o.verdict = verdict_for(*o.wilcoxon);
    } catch (const StatsError& e) {
      o.verdict = std::string("no evidence: ") + e.what();
    }
    report.per_subject.push_back(o);
    const auto key = std::make_pair(p.a.name, p.b.name);
    if (!groups.count(key)) group_order.push_back(key);
    groups[key].push_back(&p);
  }
  for (const auto& key : group_order) {
    AcrossOutcome o;
    o.a = key.first;
    o.b = key.second;
    PairedScores means{{}, {}, key.first, key.second};
    for (const auto* p : groups[key]) {
      o.subjects.push_back(p->a.subject);
      means.a.push_back(p->a.mean());
      means.b.push_back(p->b.mean());
    }
    try {
      o.t_test = paired_t_one_tailed(means);
      o.significant = o.t_test->p < kAlpha;
      o.verdict = verdict_for(*o.t_test);
      try {
        o.bayes_factor = jzs_bayes_factor(o.t_test->statistic, o.t_test->n);
      } catch (const NumericalError& e) {
        o.bayes_note = std::string("bayes factor failed: ") + e.what();
      }
    } catch (const StatsError& e) {
      o.verdict = std::string("no evidence: ") + e.what();
    }
    report.across.push_back(o);
  }
  return report;
}

}  // namespace turnkan::stats
