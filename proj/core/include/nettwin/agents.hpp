#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nettwin/toolreg.hpp"

namespace nettwin {

// ---------------------------------------------------------------------------
// Tickets
// ---------------------------------------------------------------------------

struct TicketNote {
  std::string author;
  std::string text;
  std::string created_at;

  bool operator==(const TicketNote&) const = default;
};

struct Ticket {
  std::string id;
  std::string title;
  std::string description;
  Json change = Json::object();  // structured change request (branch, requirements, ...)
  std::string status = "OPEN";   // OPEN | APPROVED | BLOCKED
  std::vector<TicketNote> notes;
  std::string created_at;

  Json to_json() const;
  static Ticket from_json(const Json& j);
};

// One JSON file per ticket under `dir`; mutations serialize on an flock.
class TicketStore {
 public:
  explicit TicketStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }

  Ticket create(Ticket ticket);                       // ValidationError on duplicate id
  Ticket get(const std::string& id) const;            // UnknownTicket
  Ticket append_note(const std::string& id, const std::string& author, const std::string& text);
  Ticket set_status(const std::string& id, const std::string& status);
  std::vector<std::string> list() const;               // sorted ids

 private:
  Ticket load(const std::string& id) const;
  void save(const Ticket& ticket) const;

  std::filesystem::path dir_;
};

// ---------------------------------------------------------------------------
// Agent framework
// ---------------------------------------------------------------------------

enum class AgentRole : uint8_t { Assistant = 0, NdmQuery, Impact, TestPlanner, TestExecutor };

inline constexpr size_t kAgentRoleCount = 5;
inline constexpr int kDefaultReactBudget = 16;

const char* agent_role_name(AgentRole r);  // "ASSISTANT", "NDM_QUERY", ...
std::optional<AgentRole> agent_role_from_name(const std::string& name);

// Tool names a role may call, in stable order.
std::vector<std::string> role_tools(AgentRole role);

struct Message {
  std::string role;  // system | user | assistant | tool
  std::string content;

  bool operator==(const Message&) const = default;
};

// A policy maps the transcript to the next assistant completion. Completions
// must be JSON actions: {"action":"tool","tool":...,"params":{...}} or
// {"action":"final","output":{...}}.
using PolicyFn = std::function<std::string(AgentRole, const std::vector<Message>&)>;

// The deterministic built-in policy driving the five-stage workflow.
PolicyFn scripted_policy();

struct RemotePolicyConfig {
  std::string url;          // e.g. http://127.0.0.1:8700/complete
  int timeout_ms = 30000;
  int retries = 2;          // extra attempts on transport failure
};

// Bridges the loop to an external completion endpoint speaking
//   POST url  {"role": "...", "messages": [{"role","content"}...]}
//   -> 200    {"completion": "..."}
// Transport failures retry, then raise RemoteUnavailable.
PolicyFn remote_policy(const RemotePolicyConfig& config);

struct AgentRun {
  AgentRole role = AgentRole::Assistant;
  std::vector<Message> messages;
  Json output = Json::object();  // final output when completed
  bool completed = false;
  int iterations = 0;
  int tool_calls = 0;
  double duration_seconds = 0.0;
};

// ---------------------------------------------------------------------------
// Change validation workflow
// ---------------------------------------------------------------------------

struct ValidationRequest {
  std::string ticket_id;
  std::string snapshot_a;  // reference snapshot id
  std::string snapshot_b;  // candidate snapshot id
  std::string policy_name = "scripted";  // recorded in the report
  int react_budget = kDefaultReactBudget;
};

struct StageSummary {
  std::string role;
  int iterations = 0;
  int tool_calls = 0;
  double duration_seconds = 0.0;
  std::string transcript;  // working-memory file, relative to the memory dir
};

struct TestOutcome {
  std::string id;
  std::string requirement;  // requirement id the test covers ("" = unplanned)
  std::string tool;         // capability name
  VerifyStatus status = VerifyStatus::Pass;
  int findings = 0;

  bool operator==(const TestOutcome&) const = default;
};

struct ValidationReport {
  std::string ticket;
  std::string snapshot_a;
  std::string snapshot_b;
  std::string verdict;  // APPROVED | BLOCKED
  std::string reason;
  std::string policy;
  std::vector<StageSummary> stages;
  std::vector<TestOutcome> tests;
  std::string created_at;
  double duration_seconds = 0.0;

  Json to_json() const;
};

// Report JSON with volatile fields (timestamps, durations, transcript paths)
// removed; equal fingerprints mean behaviourally identical runs.
Json report_fingerprint(const ValidationReport& report);

// Drives the ASSISTANT agent (which orchestrates NDM_QUERY, IMPACT,
// TEST_PLANNER and TEST_EXECUTOR as sub-agents) over the snapshot pair, then
// derives the verdict: BLOCKED iff at least one executed test failed or
// errored. Transcripts are written under memory_dir/<ticket>/ and the ticket
// status is updated. Throws BudgetExhausted when any agent runs out of
// iterations (transcripts are still written).
class Validator {
 public:
  Validator(Repository& repo, TicketStore& tickets, std::filesystem::path memory_dir,
            PolicyFn policy, uint64_t acl_compare_cap = kDefaultHeaderSpaceCap);

  ValidationReport validate_change(const ValidationRequest& request);

 private:
  Repository* repo_;
  TicketStore* tickets_;
  std::filesystem::path memory_dir_;
  PolicyFn policy_;
  uint64_t acl_compare_cap_;
};

}  // namespace nettwin
