#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nettwin/ingest.hpp"
#include "nettwin/ip.hpp"
#include "nettwin/netspec.hpp"

namespace nettwin {

// ---------------------------------------------------------------------------
// Routes
// ---------------------------------------------------------------------------

enum class RouteProtocol : uint8_t { Connected, Static, Igp, SummaryDiscard };

const char* route_protocol_name(RouteProtocol p);

// Administrative distances used when merging candidate routes.
inline constexpr int kAdConnected = 0;
inline constexpr int kAdStatic = 1;
inline constexpr int kAdSummaryDiscard = 5;
inline constexpr int kAdIgp = 115;

// Iteration cap for the route computation fixed point.
inline constexpr int kDefaultMaxIterations = 32;
inline constexpr int kDefaultHopBudget = 64;

struct NextHop {
  std::string out_interface;
  std::string next_device;  // empty when the prefix is directly attached (stub)

  auto operator<=>(const NextHop&) const = default;
};

struct RibEntry {
  Prefix prefix;
  RouteProtocol protocol = RouteProtocol::Connected;
  int64_t metric = 0;
  int admin_distance = 0;
  std::string metric_type = "internal";        // internal | external
  std::optional<std::string> origin_process;   // preserved only by external routes
  std::optional<std::string> learned_via;      // IGP process for protocol == Igp
  std::vector<NextHop> next_hops;              // sorted; empty for discard entries

  bool operator==(const RibEntry&) const = default;
};

using DeviceFib = std::map<Prefix, RibEntry>;

struct RouteComputation {
  std::map<std::string, DeviceFib> fibs;
  bool converged = true;
  int iterations = 0;

  bool operator==(const RouteComputation&) const = default;
};

// Computes per-device FIBs: connected + resolved static routes, link-state
// IGP shortest paths, redistribution between processes and route
// summarization. Runs synchronous rounds until tables stop changing; if the
// cap is hit the last iteration's routes are kept and `converged` is false.
RouteComputation compute_routes(const NetworkSpec& spec,
                                int max_iterations = kDefaultMaxIterations);

// Materializes FIBs as the ROUTING layer (rib-entry nodes, OWN edges, CONNECT
// edges between adjacent devices' entries for the same prefix).
LayerPayload routing_payload(const RouteComputation& routes);

// ---------------------------------------------------------------------------
// ACL evaluation
// ---------------------------------------------------------------------------

struct AclPacket {
  IpAddr src_ip;
  IpAddr dst_ip;
  std::string protocol = "icmp";  // tcp | udp | icmp
  int64_t src_port = 0;
  int64_t dst_port = 0;

  auto operator<=>(const AclPacket&) const = default;
};

struct AclVerdict {
  bool permit = true;
  std::optional<int64_t> seq;  // matching rule; nullopt means implicit deny

  bool operator==(const AclVerdict&) const = default;
};

// First-match evaluation; falls through to implicit deny.
AclVerdict eval_acl(const AclCfg& acl, const AclPacket& pkt);

struct HeaderSpace {
  std::vector<Prefix> src_prefixes;
  std::vector<Prefix> dst_prefixes;
  std::vector<std::string> protocols;
  std::vector<std::array<int64_t, 2>> src_ports{{0, 0}};
  std::vector<std::array<int64_t, 2>> dst_ports{{0, 0}};
};

struct AclWitness {
  AclPacket packet;
  AclVerdict verdict_a;
  AclVerdict verdict_b;

  bool operator==(const AclWitness&) const = default;
};

inline constexpr uint64_t kDefaultHeaderSpaceCap = 1ull << 20;

// Enumerates the header space (every address of every prefix x protocols x
// ports) and reports packets the two ACLs treat differently, in canonical
// (src, dst, protocol, src_port, dst_port) order. Throws HeaderSpaceTooLarge
// when the product exceeds `cap`.
std::vector<AclWitness> acl_compare(const AclCfg& a, const AclCfg& b, const HeaderSpace& space,
                                    uint64_t cap = kDefaultHeaderSpaceCap);

// ---------------------------------------------------------------------------
// Forwarding
// ---------------------------------------------------------------------------

struct PacketSpec {
  std::string src_device;
  IpAddr src_ip;
  IpAddr dst_ip;
  std::string protocol = "icmp";
  int64_t src_port = 0;
  int64_t dst_port = 0;

  auto operator<=>(const PacketSpec&) const = default;
};

enum class Disposition : uint8_t { Delivered, NoRoute, AclDenied, Loop, Discarded };

const char* disposition_name(Disposition d);

struct AclDecision {
  std::string acl;
  std::string direction;  // in | out
  bool permit = true;
  std::optional<int64_t> seq;

  bool operator==(const AclDecision&) const = default;
};

struct TraceHop {
  std::string device;
  std::optional<std::string> matched_prefix;
  std::optional<std::string> out_interface;
  std::optional<std::string> next_device;
  std::vector<AclDecision> acl_decisions;

  bool operator==(const TraceHop&) const = default;
};

struct ForwardingTrace {
  std::vector<TraceHop> hops;
  Disposition disposition = Disposition::Delivered;

  bool operator==(const ForwardingTrace&) const = default;
};

struct LoopReport {
  Prefix prefix;
  std::vector<std::string> cycle;  // canonical rotation, smallest device first

  auto operator<=>(const LoopReport&) const = default;
};

// A spec bound to its computed routes plus the adjacency caches needed for
// packet walks. All per-snapshot verification goes through this type.
class Dataplane {
 public:
  explicit Dataplane(NetworkSpec spec, int max_iterations = kDefaultMaxIterations);
  static Dataplane from_content(const SnapshotContent& content);

  const NetworkSpec& spec() const { return spec_; }
  const RouteComputation& routes() const { return routes_; }

  // Explores every ECMP branch; one trace per branch. Budget exhaustion is
  // reported as LOOP. Throws UnknownDevice / InvalidParams on bad packets.
  std::vector<ForwardingTrace> forward(const PacketSpec& packet,
                                       int hop_budget = kDefaultHopBudget) const;

  // Strict reachability: true iff every branch ends DELIVERED.
  bool reachable(const PacketSpec& packet) const;
  // DELIVERED when all branches deliver; otherwise the first non-DELIVERED
  // disposition in branch order.
  Disposition strict_disposition(const PacketSpec& packet) const;

  // Longest-prefix match against the device FIB; nullptr when no route.
  const RibEntry* lpm(const std::string& device, const IpAddr& dst) const;

  // Per-prefix next-hop graph walk; distinct cycles reported once.
  std::vector<LoopReport> detect_loops() const;

  const AclCfg* find_acl(const std::string& device, const std::string& acl) const;

 private:
  struct PortKey {
    std::string device;
    std::string interface;
    auto operator<=>(const PortKey&) const = default;
  };
  struct Peer {
    std::string device;
    std::string interface;
  };

  const InterfaceCfg* find_interface(const std::string& device, const std::string& name) const;
  const AclCfg* bound_acl(const std::string& device, const std::string& interface,
                          const std::string& direction) const;
  bool owns_address(const std::string& device, const IpAddr& ip) const;

  void walk(const std::string& device, const std::optional<std::string>& in_interface,
            const AclPacket& pkt, std::vector<TraceHop> path, std::set<std::string> visited,
            int hop_budget, std::vector<ForwardingTrace>& out) const;

  NetworkSpec spec_;
  RouteComputation routes_;
  std::map<PortKey, Peer> peers_;
};

struct ProbeDifference {
  PacketSpec probe;
  Disposition disposition_a = Disposition::Delivered;
  Disposition disposition_b = Disposition::Delivered;

  bool operator==(const ProbeDifference&) const = default;
};

// Runs each probe against both models and keeps the ones whose strict
// dispositions differ, in probe order.
std::vector<ProbeDifference> differential_reachability(const Dataplane& a, const Dataplane& b,
                                                       const std::vector<PacketSpec>& probes);

}  // namespace nettwin
