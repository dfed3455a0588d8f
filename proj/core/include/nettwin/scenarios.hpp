#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nettwin/netspec.hpp"

namespace nettwin {

// ---------------------------------------------------------------------------
// Typed config deltas
// ---------------------------------------------------------------------------

// A change candidate is a list of edit operations over a base spec. Supported
// ops (args fields in parentheses):
//   set_interface       (device, interface, field: mtu|enabled|v4_addr|v6_addr, value)
//   add_static_route    (device, prefix, next_hop | out_interface, metric?)
//   remove_static_route (device, prefix)
//   add_acl_rule        (device, acl, rule {seq, action, protocol, src_prefix,
//                        dst_prefix, src_ports?, dst_ports?})
//   remove_acl_rule     (device, acl, seq)
//   set_redistribute    (device, process, from_process, metric?, metric_type?)
//   set_summary         (device, process, prefix, present)
//   set_link_capacity   (device, interface, capacity_bps)
struct DeltaOp {
  std::string op;
  Json args = Json::object();

  bool operator==(const DeltaOp&) const = default;
};

Json delta_to_json(const std::vector<DeltaOp>& ops);
std::vector<DeltaOp> delta_from_json(const Json& j);  // ParseError on malformed input

// Applies the ops in order and re-validates the result; throws
// ValidationError when an op references missing config or produces an
// invalid spec.
NetworkSpec apply_delta(const NetworkSpec& base, const std::vector<DeltaOp>& ops);

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

// A requirement is the ground-truth contract a change must satisfy; the
// planner compiles requirements 1:1 into verification tests.
struct Requirement {
  std::string id;
  std::string description;
  std::string tool;  // capability name, e.g. "REACHABILITY"
  Json params = Json::object();

  bool operator==(const Requirement&) const = default;
};

Json requirements_to_json(const std::vector<Requirement>& reqs);
std::vector<Requirement> requirements_from_json(const Json& j);

// A validation scenario: one base network, one intended (good) candidate and
// one subtly broken (bad) candidate, plus the requirements both candidates
// are judged against.
struct Scenario {
  std::string id;
  std::string title;
  std::string category;  // ROUTE_CHANGE, ACL_CHANGE, ACL_EQUIVALENCE, MTU_CHANGE,
                         // VLAN_RENUMBER, LINK_MIGRATION, REDISTRIBUTION, SUMMARIZATION
  std::string bad_rationale;  // what the bad candidate breaks
  NetworkSpec base;
  std::vector<DeltaOp> good_delta;
  std::vector<DeltaOp> bad_delta;
  std::vector<Requirement> requirements;
};

// The built-in desk-scale scenario suite (10 scenarios across 8 categories).
const std::vector<Scenario>& builtin_scenarios();
const Scenario* find_scenario(const std::string& id);  // nullptr when unknown

// Bundle layout: <dir>/scenario.json (id, title, category, rationale,
// deltas), <dir>/network.json (base spec), <dir>/requirements.json.
void write_scenario_bundle(const Scenario& scenario, const std::filesystem::path& dir);
Scenario load_scenario_bundle(const std::filesystem::path& dir);  // ParseError/StorageError

}  // namespace nettwin
