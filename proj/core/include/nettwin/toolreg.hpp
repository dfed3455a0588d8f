#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nettwin/dataplane.hpp"
#include "nettwin/sla.hpp"
#include "nettwin/snapshot_store.hpp"

namespace nettwin {

// ---------------------------------------------------------------------------
// Verification capabilities
// ---------------------------------------------------------------------------

enum class Capability : uint8_t {
  MtuConsistency = 0,
  Reachability,
  DifferentialReachability,
  LoopDetection,
  Traceroute,
  AclSearch,
  AclCompare,
  SlaVerifySim,
  SlaVerifyPredictor,
  ConfigAnomaly,
};

inline constexpr size_t kCapabilityCount = 10;

const char* capability_name(Capability c);  // e.g. "MTU_CONSISTENCY"
std::optional<Capability> capability_from_name(const std::string& name);

enum class VerifyStatus : uint8_t { Pass = 0, Fail, Error };

const char* verify_status_name(VerifyStatus s);

struct Finding {
  std::string code;     // stable machine-readable identifier
  std::string message;  // human-readable one-liner
  Json details = Json::object();

  bool operator==(const Finding&) const = default;
};

struct VerificationResult {
  Capability capability = Capability::MtuConsistency;
  VerifyStatus status = VerifyStatus::Pass;
  std::vector<Finding> findings;
  Json evidence = Json::object();
  double duration_seconds = 0.0;

  Json to_json() const;
};

// ---------------------------------------------------------------------------
// Twin context: the reference snapshot "a" and the candidate snapshot "b"
// ---------------------------------------------------------------------------

// Caches snapshot content, the reconstructed spec and the computed dataplane
// per snapshot id, so repeated tool calls against the same pair stay cheap.
class TwinContext {
 public:
  TwinContext(Repository& repo, std::string snapshot_a, std::string snapshot_b);

  Repository& repo() { return *repo_; }
  const std::string& snapshot_a() const { return a_; }
  const std::string& snapshot_b() const { return b_; }

  // "a" / "b" aliases resolve to the configured pair; anything else is
  // treated as a literal snapshot id.
  std::string resolve(const std::string& ref) const;

  const SnapshotContent& content(const std::string& ref);
  const NetworkSpec& spec(const std::string& ref);
  const Dataplane& dataplane(const std::string& ref);

 private:
  struct Entry {
    std::unique_ptr<SnapshotContent> content;
    std::unique_ptr<NetworkSpec> spec;
    std::unique_ptr<Dataplane> dataplane;
  };

  Entry& entry(const std::string& ref);

  Repository* repo_;
  std::string a_;
  std::string b_;
  std::map<std::string, Entry> cache_;  // keyed by resolved snapshot id
};

// ---------------------------------------------------------------------------
// Tool registry
// ---------------------------------------------------------------------------

struct ToolSpec {
  std::string name;         // "ndm.query", "ndt.verify.REACHABILITY", ...
  std::string description;
  Json params;              // {"type":"object","required":[...],"properties":{...}}
  Json example;             // params object that validates against `params`

  bool operator==(const ToolSpec&) const = default;
};

// Read/verify tools exposed to agents and to the RPC surface. Tool order is
// stable: ndm.schema, ndm.query, ndt.impact_diff, then the ten
// ndt.verify.<CAPABILITY> tools in Capability declaration order.
class ToolRegistry {
 public:
  explicit ToolRegistry(TwinContext& ctx, uint64_t acl_compare_cap = kDefaultHeaderSpaceCap);

  std::vector<ToolSpec> list_tools() const;
  bool has_tool(const std::string& name) const;
  const ToolSpec& tool_spec(const std::string& name) const;  // UnknownTool

  // Validates params against the tool's schema (InvalidParams on missing or
  // mistyped fields), dispatches, and returns the observation payload.
  // Verify tools report runtime problems as status=ERROR results instead of
  // throwing, so an agent loop always gets an observation back.
  Json call_tool(const std::string& name, const Json& params);

  VerificationResult verify(Capability cap, const Json& params);

 private:
  VerificationResult dispatch(Capability cap, const Json& params);
  VerificationResult verify_mtu(const Json& params);
  VerificationResult verify_reachability(const Json& params);
  VerificationResult verify_differential(const Json& params);
  VerificationResult verify_loops(const Json& params);
  VerificationResult verify_traceroute(const Json& params);
  VerificationResult verify_acl_search(const Json& params);
  VerificationResult verify_acl_compare(const Json& params);
  VerificationResult verify_sla(const Json& params, bool predictor_tool);
  VerificationResult verify_config_anomaly(const Json& params);

  PacketSpec packet_from_params(const Json& params, const std::string& ref);

  TwinContext* ctx_;
  uint64_t acl_compare_cap_;
};

// ---------------------------------------------------------------------------
// Ingestion pipeline
// ---------------------------------------------------------------------------

// Upserts all base layers plus the computed ROUTING layer into the working
// copy and commits it. `converged` (optional) reports the route fixed point.
SnapshotMeta commit_network(Repository& repo, OpenSnapshot& snapshot, const NetworkSpec& spec,
                            const std::string& message, bool* converged = nullptr);

// Convenience overload committing onto an existing branch head.
SnapshotMeta commit_network(Repository& repo, const std::string& branch, const NetworkSpec& spec,
                            const std::string& message, bool* converged = nullptr);

}  // namespace nettwin
