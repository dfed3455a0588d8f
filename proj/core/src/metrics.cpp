#include "nettwin/metrics.hpp"

#include <cmath>
#include <map>
#include <set>

#include "nettwin/errors.hpp"
#include "nettwin/toolreg.hpp"

namespace nettwin {

namespace {

VerifyStatus status_from_name(const std::string& name) {
  if (name == "PASS") return VerifyStatus::Pass;
  if (name == "FAIL") return VerifyStatus::Fail;
  return VerifyStatus::Error;
}

MetricValue ratio(double numerator, double denominator) {
  if (denominator <= 0.0) return MetricValue{false, 0.0};
  return MetricValue{true, numerator / denominator};
}

}  // namespace

Json RunRecord::to_json() const {
  Json tests_json = Json::array();
  for (const auto& t : tests) {
    tests_json.push_back(Json{{"id", t.id},
                              {"requirement", t.requirement},
                              {"tool", t.tool},
                              {"status", verify_status_name(t.status)},
                              {"findings", t.findings}});
  }
  return Json{{"scenario", scenario},
              {"variant", variant},
              {"ground_truth_bad", ground_truth_bad},
              {"blocked", blocked},
              {"mislabeled", mislabeled},
              {"variation_index", variation_index},
              {"requirements", requirements},
              {"tests", tests_json},
              {"duration_seconds", duration_seconds}};
}

RunRecord RunRecord::from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "run record must be an object");
  RunRecord r;
  r.scenario = j.value("scenario", "");
  r.variant = j.value("variant", "");
  r.ground_truth_bad = j.value("ground_truth_bad", false);
  r.blocked = j.value("blocked", false);
  r.mislabeled = j.value("mislabeled", false);
  r.variation_index = j.value("variation_index", int64_t{0});
  if (j.contains("requirements")) {
    r.requirements = j.at("requirements").get<std::vector<std::string>>();
  }
  for (const auto& tj : j.value("tests", Json::array())) {
    TestOutcome t;
    t.id = tj.value("id", "");
    t.requirement = tj.value("requirement", "");
    t.tool = tj.value("tool", "");
    t.status = status_from_name(tj.value("status", "ERROR"));
    t.findings = tj.value("findings", 0);
    r.tests.push_back(std::move(t));
  }
  r.duration_seconds = j.value("duration_seconds", 0.0);
  return r;
}

Json MetricValue::to_json() const {
  if (!defined) return Json("undefined");
  return Json(value);
}

Json MetricsReport::to_json() const {
  return Json{{"records", records},
              {"runs", runs},
              {"confusion", Json{{"tp", tp}, {"fp", fp}, {"fn", fn}, {"tn", tn}}},
              {"precision", precision.to_json()},
              {"error_detection", error_detection.to_json()},
              {"mep", mep.to_json()},
              {"coverage", coverage.to_json()},
              {"efficiency", efficiency.to_json()},
              {"redundancy", redundancy.to_json()},
              {"consistency", consistency.to_json()},
              {"mean_duration_seconds", mean_duration_seconds}};
}

MetricsReport compute_metrics(const std::vector<RunRecord>& records) {
  if (records.empty()) {
    throw Error(ErrorCode::EmptyRecordSet, "no run records to score");
  }
  MetricsReport rep;
  rep.records = static_cast<int64_t>(records.size());

  int64_t mislabeled_fp = 0;
  double duration_sum = 0.0;
  double coverage_sum = 0.0;
  int64_t coverage_n = 0;
  int64_t tests_generated = 0;
  int64_t tests_relevant = 0;
  int64_t requirements_covered = 0;
  std::map<int64_t, int64_t> blocked_by_variation;

  for (const auto& r : records) {
    if (r.ground_truth_bad && r.blocked) {
      ++rep.tp;
    } else if (!r.ground_truth_bad && r.blocked) {
      ++rep.fp;
      if (r.mislabeled) ++mislabeled_fp;
    } else if (r.ground_truth_bad && !r.blocked) {
      ++rep.fn;
    } else {
      ++rep.tn;
    }
    duration_sum += r.duration_seconds;

    const std::set<std::string> ground_truth(r.requirements.begin(), r.requirements.end());
    std::set<std::string> covered;
    int64_t relevant = 0;
    for (const auto& t : r.tests) {
      if (!t.requirement.empty() && ground_truth.count(t.requirement)) {
        ++relevant;
        covered.insert(t.requirement);
      }
    }
    tests_generated += static_cast<int64_t>(r.tests.size());
    tests_relevant += relevant;
    requirements_covered += static_cast<int64_t>(covered.size());
    if (!ground_truth.empty()) {
      coverage_sum += static_cast<double>(covered.size()) / ground_truth.size();
      ++coverage_n;
    }

    blocked_by_variation[r.variation_index];  // ensure the index exists
    if (r.blocked) ++blocked_by_variation[r.variation_index];
  }

  rep.runs = static_cast<int64_t>(blocked_by_variation.size());
  rep.precision = ratio(rep.tp, rep.tp + rep.fp);
  rep.error_detection = ratio(rep.tp, rep.tp + rep.fn);
  rep.mep = ratio(rep.tp + mislabeled_fp, rep.tp + rep.fp);
  rep.coverage = coverage_n > 0 ? MetricValue{true, coverage_sum / coverage_n}
                                : MetricValue{false, 0.0};
  rep.efficiency = ratio(tests_relevant, tests_generated);
  if (tests_relevant > 0) {
    rep.redundancy =
        MetricValue{true, 1.0 - static_cast<double>(requirements_covered) / tests_relevant};
  }
  if (blocked_by_variation.size() >= 2) {
    double mean = 0.0;
    for (const auto& entry : blocked_by_variation) mean += entry.second;
    mean /= blocked_by_variation.size();
    if (mean > 0.0) {
      double variance = 0.0;
      for (const auto& entry : blocked_by_variation) {
        variance += (entry.second - mean) * (entry.second - mean);
      }
      variance /= blocked_by_variation.size();
      rep.consistency = MetricValue{true, 1.0 - std::sqrt(variance) / mean};
    }
  }
  rep.mean_duration_seconds = duration_sum / records.size();
  return rep;
}

}  // namespace nettwin
