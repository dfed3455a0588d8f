#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nettwin/agents.hpp"

namespace nettwin {

// One scored validation run: a scenario variant, the ground truth for that
// variant, and what the workflow decided.
struct RunRecord {
  std::string scenario;
  std::string variant;          // "good" | "bad"
  bool ground_truth_bad = false;
  bool blocked = false;
  // Set when a blocked "good" candidate was judged on review to have a real
  // defect after all; such blocks count as meaningful despite being FPs.
  bool mislabeled = false;
  int64_t variation_index = 0;  // repeat-run index, drives the consistency metric
  std::vector<std::string> requirements;  // ground-truth requirement ids
  std::vector<TestOutcome> tests;         // what the workflow actually ran
  double duration_seconds = 0.0;

  Json to_json() const;
  static RunRecord from_json(const Json& j);  // ParseError on malformed input

  bool operator==(const RunRecord&) const = default;
};

// A ratio metric; undefined when its denominator is empty.
struct MetricValue {
  bool defined = false;
  double value = 0.0;

  Json to_json() const;  // JSON number, or the string "undefined"
};

struct MetricsReport {
  int64_t records = 0;
  int64_t runs = 0;  // distinct variation indexes
  int64_t tp = 0;    // bad candidate blocked
  int64_t fp = 0;    // good candidate blocked
  int64_t fn = 0;    // bad candidate approved
  int64_t tn = 0;    // good candidate approved

  MetricValue precision;        // TP / (TP + FP)
  MetricValue error_detection;  // TP / (TP + FN)
  MetricValue mep;              // (TP + mislabeled FP) / (TP + FP)
  MetricValue coverage;         // mean over records of covered / ground-truth requirements
  MetricValue efficiency;       // pooled: requirement-relevant tests / all tests
  MetricValue redundancy;       // pooled: 1 - distinct covered requirements / relevant tests
  MetricValue consistency;      // 1 - stddev/mean of per-variation blocked counts
  double mean_duration_seconds = 0.0;

  Json to_json() const;
};

// Scores a batch of run records. Throws EmptyRecordSet when records is empty.
MetricsReport compute_metrics(const std::vector<RunRecord>& records);

}  // namespace nettwin
