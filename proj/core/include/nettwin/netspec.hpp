#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nettwin {

using Json = nlohmann::json;

// Typed model of the vendor-neutral network description consumed by `ingest`.
// The on-disk format is JSON; see docs/netspec.md for the full field list.

struct InterfaceCfg {
  std::string name;
  int64_t mtu = 1500;
  bool enabled = true;
  std::optional<std::string> v4_addr;  // address with prefix length, e.g. 10.0.0.1/30
  std::optional<std::string> v6_addr;

  bool operator==(const InterfaceCfg&) const = default;
};

struct StaticRouteCfg {
  std::string prefix;
  std::optional<std::string> next_hop;       // exactly one of next_hop /
  std::optional<std::string> out_interface;  // out_interface must be set
  int64_t metric = 1;

  bool operator==(const StaticRouteCfg&) const = default;
};

struct IgpInterfaceCfg {
  std::string name;
  int64_t metric = 10;

  bool operator==(const IgpInterfaceCfg&) const = default;
};

struct RedistributeCfg {
  std::string from_process;
  int64_t metric = 10;
  std::string metric_type = "internal";  // internal | external

  bool operator==(const RedistributeCfg&) const = default;
};

struct SummaryCfg {
  std::string prefix;

  bool operator==(const SummaryCfg&) const = default;
};

struct IgpProcessCfg {
  std::string process_id;
  std::string family = "v4";  // v4 | v6
  std::vector<IgpInterfaceCfg> interfaces;
  std::vector<RedistributeCfg> redistribute;
  std::vector<SummaryCfg> summaries;

  bool operator==(const IgpProcessCfg&) const = default;
};

struct AclRuleCfg {
  int64_t seq = 0;
  std::string action = "permit";  // permit | deny
  std::string protocol = "any";   // any | tcp | udp | icmp
  std::string src_prefix;
  std::string dst_prefix;
  std::array<int64_t, 2> src_ports{0, 65535};
  std::array<int64_t, 2> dst_ports{0, 65535};

  bool operator==(const AclRuleCfg&) const = default;
};

struct AclBindingCfg {
  std::string interface;
  std::string direction;  // in | out

  bool operator==(const AclBindingCfg&) const = default;
};

struct AclCfg {
  std::string name;
  std::vector<AclRuleCfg> rules;
  std::vector<AclBindingCfg> applied;

  bool operator==(const AclCfg&) const = default;
};

struct DeviceConfig {
  std::string hostname;
  std::vector<InterfaceCfg> interfaces;
  std::vector<StaticRouteCfg> static_routes;
  std::vector<IgpProcessCfg> igp_processes;
  std::vector<AclCfg> acls;

  bool operator==(const DeviceConfig&) const = default;
};

struct LinkCfg {
  std::string a_device;
  std::string a_interface;
  std::string b_device;
  std::string b_interface;
  int64_t capacity_bps = 10'000'000'000;
  double prop_delay_ms = 1.0;

  bool operator==(const LinkCfg&) const = default;
};

struct TrafficDemand {
  std::string flow;
  std::string src;
  std::string dst_ip;
  int64_t rate_bps = 0;
  std::string sla_class;

  bool operator==(const TrafficDemand&) const = default;
};

struct SlaClassCfg {
  std::string name;
  double max_delay_ms = 0.0;
  double max_loss = 0.0;

  bool operator==(const SlaClassCfg&) const = default;
};

struct NetworkSpec {
  std::vector<DeviceConfig> devices;
  std::vector<LinkCfg> links;
  std::vector<TrafficDemand> demands;
  std::vector<SlaClassCfg> sla_classes;

  bool operator==(const NetworkSpec&) const = default;

  const DeviceConfig* find_device(const std::string& hostname) const;
};

struct Diagnostic {
  std::string path;  // e.g. devices[0].interfaces[1].mtu
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

struct ParseResult {
  std::optional<NetworkSpec> spec;  // set only when no diagnostics were produced
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return spec.has_value(); }
};

ParseResult parse_network_spec(const std::string& text);
std::string serialize_network_spec(const NetworkSpec& spec);  // canonical, round-trips

Json network_spec_to_json(const NetworkSpec& spec);
Json device_to_json(const DeviceConfig& dev);
// Throws ParseError/ValidationError; used for RAW_CONFIG payloads produced by
// serialize_device, which are trusted to be well-formed.
DeviceConfig device_from_json(const Json& j);
std::string serialize_device(const DeviceConfig& dev);  // canonical compact JSON

// Flattens a device config into path -> scalar entries keyed by names (not
// positions), e.g. "interfaces[eth0].mtu" -> 9000. Used by the configuration
// anomaly heuristic.
std::map<std::string, Json> flatten_device_config(const DeviceConfig& dev);

}  // namespace nettwin
