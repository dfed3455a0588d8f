#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "metric_sets.hpp"
#include "nettwin/errors.hpp"
#include "nettwin/evalharness.hpp"
#include "nettwin/metrics.hpp"

namespace nettwin {
namespace {

RunRecord simple(bool bad, bool blocked, int64_t variation = 0) {
  RunRecord r;
  r.scenario = "s";
  r.variant = bad ? "bad" : "good";
  r.ground_truth_bad = bad;
  r.blocked = blocked;
  r.variation_index = variation;
  return r;
}

// ---------------------------------------------------------------------------
// Oracle equivalence
// ---------------------------------------------------------------------------

TEST(MetricsOracle, TwentyRecordSetsMatchTheReference) {
  auto sets = testmx::metric_record_sets();
  ASSERT_EQ(sets.size(), 20u);
  for (size_t i = 0; i < sets.size(); ++i) {
    SCOPED_TRACE("set " + std::to_string(i + 1));
    MetricsReport report = compute_metrics(testmx::to_run_records(sets[i]));
    testmx::expect_matches_reference(report, oracle::ref_metrics(sets[i]));
  }
}

TEST(MetricsOracle, HandComputedValuesAnchorBothRoutes) {
  // 1 TP + 1 mislabeled FP + 1 plain FP + 1 TN.
  std::vector<testmx::RR> confusion = {
      {.bad = true, .blocked = true},
      {.blocked = true, .mislabeled = true},
      {.blocked = true},
      {},
  };
  MetricsReport rep = compute_metrics(testmx::to_run_records(confusion));
  EXPECT_DOUBLE_EQ(rep.precision.value, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(rep.mep.value, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(rep.error_detection.value, 1.0);
  oracle::RefMetrics ref = oracle::ref_metrics(confusion);
  EXPECT_DOUBLE_EQ(ref.precision, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(ref.mep, 2.0 / 3.0);

  // Coverage 0.5 and 1.0 over two records; 3 of 6 tests relevant; the two
  // relevant requirements of record 2 are hit by three tests.
  std::vector<testmx::RR> coverage = {
      {.requirement_count = 4, .test_requirements = {0, 1}},
      {.requirement_count = 2, .test_requirements = {0, 0, 1, -1}},
  };
  rep = compute_metrics(testmx::to_run_records(coverage));
  EXPECT_DOUBLE_EQ(rep.coverage.value, 0.75);
  EXPECT_DOUBLE_EQ(rep.efficiency.value, 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(rep.redundancy.value, 1.0 - 4.0 / 5.0);
  ref = oracle::ref_metrics(coverage);
  EXPECT_DOUBLE_EQ(ref.coverage, 0.75);
  EXPECT_DOUBLE_EQ(ref.efficiency, 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(ref.redundancy, 1.0 - 4.0 / 5.0);

  // Block counts 2 vs 1 across two repeats: 1 - (0.5 / 1.5).
  std::vector<testmx::RR> spread = {
      {.bad = true, .blocked = true, .variation = 0},
      {.bad = true, .blocked = true, .variation = 0},
      {.bad = true, .blocked = true, .variation = 1},
      {.bad = true, .variation = 1},
  };
  rep = compute_metrics(testmx::to_run_records(spread));
  EXPECT_DOUBLE_EQ(rep.consistency.value, 1.0 - 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(oracle::ref_metrics(spread).consistency, 1.0 - 1.0 / 3.0);
}

// ---------------------------------------------------------------------------
// Definitions and edge cases
// ---------------------------------------------------------------------------

TEST(Metrics, ConfusionCountsClassifyEveryRecord) {
  std::vector<RunRecord> records = {
      simple(true, true, 0),  simple(true, true, 0),  simple(false, true, 0),
      simple(true, false, 1), simple(false, false, 1), simple(false, false, 1),
  };
  MetricsReport rep = compute_metrics(records);
  EXPECT_EQ(rep.records, 6);
  EXPECT_EQ(rep.runs, 2);
  EXPECT_EQ(rep.tp, 2);
  EXPECT_EQ(rep.fp, 1);
  EXPECT_EQ(rep.fn, 1);
  EXPECT_EQ(rep.tn, 2);
  EXPECT_DOUBLE_EQ(rep.precision.value, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(rep.error_detection.value, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(rep.mep.value, 2.0 / 3.0);  // no mislabels
}

TEST(Metrics, UndefinedRatiosStayUndefined) {
  // Nothing blocked and nothing bad: precision, detection and MEP vanish.
  MetricsReport rep = compute_metrics({simple(false, false)});
  EXPECT_FALSE(rep.precision.defined);
  EXPECT_FALSE(rep.error_detection.defined);
  EXPECT_FALSE(rep.mep.defined);
  EXPECT_FALSE(rep.coverage.defined);    // no ground-truth requirements
  EXPECT_FALSE(rep.efficiency.defined);  // no tests generated
  EXPECT_FALSE(rep.redundancy.defined);  // no relevant tests
  EXPECT_FALSE(rep.consistency.defined);  // single variation index

  // Two variations but a zero mean still leaves consistency undefined.
  rep = compute_metrics({simple(false, false, 0), simple(false, false, 1)});
  EXPECT_FALSE(rep.consistency.defined);
  EXPECT_EQ(rep.runs, 2);
}

TEST(Metrics, EmptyRecordSetThrows) {
  try {
    compute_metrics({});
    FAIL() << "expected EmptyRecordSet";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyRecordSet);
  }
}

TEST(Metrics, ReportSerializesEveryField) {
  MetricsReport rep = compute_metrics({simple(true, true, 0), simple(false, false, 1)});
  Json j = rep.to_json();
  EXPECT_EQ(j.at("records"), 2);
  EXPECT_EQ(j.at("runs"), 2);
  EXPECT_EQ(j.at("confusion"), (Json{{"tp", 1}, {"fp", 0}, {"fn", 0}, {"tn", 1}}));
  EXPECT_EQ(j.at("precision"), Json(1.0));
  EXPECT_EQ(j.at("coverage"), Json("undefined"));
  EXPECT_TRUE(j.contains("mean_duration_seconds"));

  MetricValue undefined;
  EXPECT_EQ(undefined.to_json(), Json("undefined"));
  MetricValue defined{true, 0.25};
  EXPECT_EQ(defined.to_json(), Json(0.25));
}

// ---------------------------------------------------------------------------
// Run records
// ---------------------------------------------------------------------------

TEST(RunRecords, RoundTripThroughJson) {
  RunRecord r;
  r.scenario = "s2-acl-lockdown";
  r.variant = "bad";
  r.ground_truth_bad = true;
  r.blocked = true;
  r.mislabeled = false;
  r.variation_index = 3;
  r.requirements = {"guest-blocked", "corp-reachable"};
  TestOutcome t;
  t.id = "t1";
  t.requirement = "guest-blocked";
  t.tool = "REACHABILITY";
  t.status = VerifyStatus::Error;
  t.findings = 2;
  r.tests = {t};
  r.duration_seconds = 12.5;

  EXPECT_EQ(RunRecord::from_json(r.to_json()), r);
}

TEST(RunRecords, FromJsonAppliesDefaultsAndRejectsGarbage) {
  RunRecord r = RunRecord::from_json(Json::object());
  EXPECT_EQ(r, RunRecord{});

  r = RunRecord::from_json(Json{
      {"scenario", "x"},
      {"tests", Json::array({Json{{"id", "t1"}, {"status", "BOGUS"}}})}});
  ASSERT_EQ(r.tests.size(), 1u);
  EXPECT_EQ(r.tests[0].status, VerifyStatus::Error);  // unknown names degrade to ERROR

  try {
    RunRecord::from_json(Json::array());
    FAIL() << "expected ParseError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
}

// ---------------------------------------------------------------------------
// Frozen reference summary
// ---------------------------------------------------------------------------

TEST(HeadlineRecords, PinTheReferenceSummary) {
  std::vector<RunRecord> records = headline_records();
  ASSERT_EQ(records.size(), 74u);
  MetricsReport m = compute_metrics(records);

  EXPECT_EQ(m.tp, 30);
  EXPECT_EQ(m.fp, 17);
  EXPECT_EQ(m.fn, 2);
  EXPECT_EQ(m.tn, 25);
  EXPECT_DOUBLE_EQ(m.error_detection.value, 0.9375);
  EXPECT_DOUBLE_EQ(m.precision.value, 30.0 / 47.0);
  EXPECT_DOUBLE_EQ(m.mep.value, 42.0 / 47.0);
  EXPECT_DOUBLE_EQ(m.mean_duration_seconds, 223.0);

  // Rounded to two decimals: 0.94 / 0.64 / 0.89.
  auto round2 = [](double v) { return std::round(v * 100.0) / 100.0; };
  EXPECT_DOUBLE_EQ(round2(m.error_detection.value), 0.94);
  EXPECT_DOUBLE_EQ(round2(m.precision.value), 0.64);
  EXPECT_DOUBLE_EQ(round2(m.mep.value), 0.89);

  // The reference set carries no requirement bookkeeping.
  EXPECT_FALSE(m.coverage.defined);
  EXPECT_FALSE(m.efficiency.defined);
  EXPECT_FALSE(m.redundancy.defined);
  EXPECT_FALSE(m.consistency.defined);
}

}  // namespace
}  // namespace nettwin
