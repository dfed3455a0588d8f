#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nettwin/dataplane.hpp"

namespace nettwin {

// Fluid (flow-level) traffic model. Offered demand is split across ECMP
// branches (share divides evenly at every fan-out); per-direction link loads
// come from the offered shares; each congested link drops the excess
// fraction and adds an M/M/1-style queueing delay on top of propagation.
// ACLs are not modeled here: the simulation is volumetric.

inline constexpr double kQueueDelayMs = 1.0;   // queueing scale factor
inline constexpr double kMaxUtilization = 0.99;
inline constexpr double kSlaEpsilon = 1e-9;

struct LinkLoad {
  std::string from_device;
  std::string out_interface;
  std::string to_device;
  int64_t capacity_bps = 0;
  double load_bps = 0.0;
  double utilization = 0.0;  // min(load/capacity, kMaxUtilization)
  double loss = 0.0;         // max(0, (load - capacity) / load)
  double delay_ms = 0.0;     // propagation + kQueueDelayMs * u / (1 - u)

  bool operator==(const LinkLoad&) const = default;
};

struct FlowBranch {
  double share = 1.0;                  // fraction of the flow on this branch
  std::vector<std::string> path;       // device sequence
  bool delivered = false;              // branch terminated at the destination
  double delivered_fraction = 0.0;     // share * prod(1 - loss_e)
  double delay_ms = 0.0;               // sum of link delays along the branch

  bool operator==(const FlowBranch&) const = default;
};

struct FlowResult {
  std::string flow;
  std::string sla_class;
  int64_t rate_bps = 0;
  double delivered_fraction = 0.0;       // over all branches
  double loss_fraction = 1.0;            // 1 - delivered_fraction
  std::optional<double> mean_delay_ms;   // delivery-weighted; absent if nothing arrives
  bool loss_ok = false;
  bool delay_ok = false;
  bool pass = false;
  std::vector<FlowBranch> branches;

  bool operator==(const FlowResult&) const = default;
};

struct SlaReport {
  std::vector<FlowResult> flows;  // ordered by flow id
  std::vector<LinkLoad> links;    // per direction, ordered by (device, interface)
  bool pass = true;               // every flow within its class thresholds

  bool operator==(const SlaReport&) const = default;
};

// Requires demands and SLA classes in the spec; throws InvalidParams when a
// demand references an unknown class or has an unparsable destination.
SlaReport simulate_sla(const Dataplane& dp);

// Pluggable predictor hook; "default" is pre-registered and backed by the
// fluid simulation above.
using SlaPredictor = std::function<SlaReport(const Dataplane&)>;
void register_sla_predictor(const std::string& name, SlaPredictor predictor);
SlaPredictor get_sla_predictor(const std::string& name);  // throws UnknownTool

}  // namespace nettwin
