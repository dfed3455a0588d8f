#include "nettwin/evalharness.hpp"

#include <fstream>

#include "nettwin/errors.hpp"
#include "nettwin/snapshot_store.hpp"
#include "nettwin/toolreg.hpp"

namespace nettwin {

EvalOutcome run_eval(const EvalOptions& options) {
  if (options.runs < 1) {
    throw Error(ErrorCode::InvalidParams, "runs must be at least 1");
  }
  if (options.work_dir.empty()) {
    throw Error(ErrorCode::InvalidParams, "work_dir must be set");
  }
  PolicyFn policy = options.policy ? options.policy : scripted_policy();

  std::vector<const Scenario*> scenarios;
  if (options.scenario_ids.empty()) {
    for (const auto& s : builtin_scenarios()) scenarios.push_back(&s);
  } else {
    for (const auto& id : options.scenario_ids) {
      const Scenario* s = find_scenario(id);
      if (!s) throw Error(ErrorCode::InvalidParams, "unknown scenario " + id);
      scenarios.push_back(s);
    }
  }

  std::filesystem::create_directories(options.work_dir);
  EvalOutcome outcome;

  for (int64_t run = 0; run < options.runs; ++run) {
    for (const Scenario* scenario : scenarios) {
      for (const bool bad : {false, true}) {
        const std::string variant = bad ? "bad" : "good";
        const auto dir =
            options.work_dir / ("run-" + std::to_string(run)) / (scenario->id + "-" + variant);

        Repository repo = Repository::open(dir / "repo");
        commit_network(repo, "main", scenario->base, "baseline for " + scenario->id);
        repo.fork("main", "change");
        NetworkSpec candidate =
            apply_delta(scenario->base, bad ? scenario->bad_delta : scenario->good_delta);
        commit_network(repo, "change", candidate, variant + " candidate for " + scenario->id);

        TicketStore tickets(dir / "tickets");
        Ticket ticket;
        ticket.id = scenario->id + "-" + variant;
        ticket.title = scenario->title;
        ticket.description = "candidate change on branch \"change\" for " + scenario->id;
        ticket.change = Json{{"branch", "change"},
                             {"requirements", requirements_to_json(scenario->requirements)}};
        tickets.create(ticket);

        Validator validator(repo, tickets, dir / "memory", policy, options.acl_compare_cap);
        ValidationRequest request;
        request.ticket_id = ticket.id;
        request.snapshot_a = repo.head("main");
        request.snapshot_b = repo.head("change");
        request.policy_name = options.policy_name;
        request.react_budget = options.react_budget;
        ValidationReport report = validator.validate_change(request);

        RunRecord record;
        record.scenario = scenario->id;
        record.variant = variant;
        record.ground_truth_bad = bad;
        record.blocked = report.verdict == "BLOCKED";
        record.variation_index = run;
        for (const auto& r : scenario->requirements) record.requirements.push_back(r.id);
        record.tests = report.tests;
        record.duration_seconds = report.duration_seconds;
        outcome.records.push_back(std::move(record));
        outcome.reports.push_back(std::move(report));
      }
    }
  }

  outcome.metrics = compute_metrics(outcome.records);
  {
    std::ofstream out(options.work_dir / "records.jsonl", std::ios::trunc);
    for (const auto& r : outcome.records) out << r.to_json().dump() << "\n";
  }
  {
    std::ofstream out(options.work_dir / "metrics.json", std::ios::trunc);
    out << outcome.metrics.to_json().dump(2) << "\n";
  }
  return outcome;
}

std::vector<RunRecord> headline_records() {
  std::vector<RunRecord> records;
  auto add = [&](int count, bool bad, bool blocked, bool mislabeled) {
    for (int i = 0; i < count; ++i) {
      RunRecord r;
      r.scenario = "ref-" + std::to_string(records.size() + 1);
      r.variant = bad ? "bad" : "good";
      r.ground_truth_bad = bad;
      r.blocked = blocked;
      r.mislabeled = mislabeled;
      r.duration_seconds = 223.0;
      records.push_back(std::move(r));
    }
  };
  add(30, true, true, false);    // true positives
  add(12, false, true, true);    // blocked good candidates with a real defect on review
  add(5, false, true, false);    // blocked good candidates, block not justified
  add(2, true, false, false);    // missed bad candidates
  add(25, false, false, false);  // approved good candidates
  return records;
}

}  // namespace nettwin
