#include "nettwin/scenarios.hpp"

#include <algorithm>
#include <fstream>

#include "nettwin/errors.hpp"

namespace nettwin {

// ---------------------------------------------------------------------------
// Delta serialization
// ---------------------------------------------------------------------------

Json delta_to_json(const std::vector<DeltaOp>& ops) {
  Json out = Json::array();
  for (const auto& op : ops) out.push_back(Json{{"op", op.op}, {"args", op.args}});
  return out;
}

std::vector<DeltaOp> delta_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "delta must be an array of ops");
  std::vector<DeltaOp> ops;
  for (const auto& entry : j) {
    if (!entry.is_object() || !entry.contains("op") || !entry.at("op").is_string()) {
      throw Error(ErrorCode::ParseError, "each delta op needs a string \"op\" field");
    }
    ops.push_back(DeltaOp{entry.at("op").get<std::string>(),
                          entry.value("args", Json::object())});
  }
  return ops;
}

// ---------------------------------------------------------------------------
// Delta application
// ---------------------------------------------------------------------------

namespace {

std::string require_string(const Json& args, const char* key, const std::string& op) {
  if (!args.contains(key) || !args.at(key).is_string()) {
    throw Error(ErrorCode::ValidationError,
                op + ": missing or non-string arg \"" + key + "\"");
  }
  return args.at(key).get<std::string>();
}

DeviceConfig& require_device(NetworkSpec& spec, const std::string& hostname,
                             const std::string& op) {
  for (auto& d : spec.devices) {
    if (d.hostname == hostname) return d;
  }
  throw Error(ErrorCode::ValidationError, op + ": no device " + hostname);
}

InterfaceCfg& require_interface(DeviceConfig& dev, const std::string& name,
                                const std::string& op) {
  for (auto& i : dev.interfaces) {
    if (i.name == name) return i;
  }
  throw Error(ErrorCode::ValidationError,
              op + ": no interface " + name + " on " + dev.hostname);
}

AclCfg& require_acl(DeviceConfig& dev, const std::string& name, const std::string& op) {
  for (auto& a : dev.acls) {
    if (a.name == name) return a;
  }
  throw Error(ErrorCode::ValidationError, op + ": no ACL " + name + " on " + dev.hostname);
}

IgpProcessCfg& require_process(DeviceConfig& dev, const std::string& id,
                               const std::string& op) {
  for (auto& p : dev.igp_processes) {
    if (p.process_id == id) return p;
  }
  throw Error(ErrorCode::ValidationError,
              op + ": no IGP process " + id + " on " + dev.hostname);
}

void apply_op(NetworkSpec& spec, const DeltaOp& op) {
  const Json& args = op.args;
  if (op.op == "set_interface") {
    auto& itf = require_interface(require_device(spec, require_string(args, "device", op.op), op.op),
                                  require_string(args, "interface", op.op), op.op);
    const std::string field = require_string(args, "field", op.op);
    const Json& value = args.contains("value") ? args.at("value") : Json(nullptr);
    if (field == "mtu") {
      if (!value.is_number_integer()) {
        throw Error(ErrorCode::ValidationError, "set_interface: mtu value must be an integer");
      }
      itf.mtu = value.get<int64_t>();
    } else if (field == "enabled") {
      if (!value.is_boolean()) {
        throw Error(ErrorCode::ValidationError, "set_interface: enabled value must be a bool");
      }
      itf.enabled = value.get<bool>();
    } else if (field == "v4_addr" || field == "v6_addr") {
      auto& slot = field == "v4_addr" ? itf.v4_addr : itf.v6_addr;
      if (value.is_null()) {
        slot.reset();
      } else if (value.is_string()) {
        slot = value.get<std::string>();
      } else {
        throw Error(ErrorCode::ValidationError,
                    "set_interface: " + field + " value must be a string or null");
      }
    } else {
      throw Error(ErrorCode::ValidationError, "set_interface: unknown field " + field);
    }
    return;
  }
  if (op.op == "add_static_route") {
    auto& dev = require_device(spec, require_string(args, "device", op.op), op.op);
    StaticRouteCfg route;
    route.prefix = require_string(args, "prefix", op.op);
    if (args.contains("next_hop")) route.next_hop = args.at("next_hop").get<std::string>();
    if (args.contains("out_interface")) {
      route.out_interface = args.at("out_interface").get<std::string>();
    }
    route.metric = args.value("metric", int64_t{1});
    dev.static_routes.push_back(std::move(route));
    return;
  }
  if (op.op == "remove_static_route") {
    auto& dev = require_device(spec, require_string(args, "device", op.op), op.op);
    const std::string prefix = require_string(args, "prefix", op.op);
    auto before = dev.static_routes.size();
    std::erase_if(dev.static_routes,
                  [&](const StaticRouteCfg& r) { return r.prefix == prefix; });
    if (dev.static_routes.size() == before) {
      throw Error(ErrorCode::ValidationError,
                  "remove_static_route: no route for " + prefix + " on " + dev.hostname);
    }
    return;
  }
  if (op.op == "add_acl_rule") {
    auto& dev = require_device(spec, require_string(args, "device", op.op), op.op);
    auto& acl = require_acl(dev, require_string(args, "acl", op.op), op.op);
    if (!args.contains("rule") || !args.at("rule").is_object()) {
      throw Error(ErrorCode::ValidationError, "add_acl_rule: missing \"rule\" object");
    }
    const Json& rj = args.at("rule");
    AclRuleCfg rule;
    rule.seq = rj.value("seq", int64_t{0});
    rule.action = rj.value("action", "permit");
    rule.protocol = rj.value("protocol", "any");
    rule.src_prefix = rj.value("src_prefix", "");
    rule.dst_prefix = rj.value("dst_prefix", "");
    if (rj.contains("src_ports")) {
      rule.src_ports = {rj.at("src_ports").at(0).get<int64_t>(),
                        rj.at("src_ports").at(1).get<int64_t>()};
    }
    if (rj.contains("dst_ports")) {
      rule.dst_ports = {rj.at("dst_ports").at(0).get<int64_t>(),
                        rj.at("dst_ports").at(1).get<int64_t>()};
    }
    for (const auto& existing : acl.rules) {
      if (existing.seq == rule.seq) {
        throw Error(ErrorCode::ValidationError,
                    "add_acl_rule: seq " + std::to_string(rule.seq) + " already exists in " +
                        acl.name);
      }
    }
    acl.rules.push_back(std::move(rule));
    std::sort(acl.rules.begin(), acl.rules.end(),
              [](const AclRuleCfg& a, const AclRuleCfg& b) { return a.seq < b.seq; });
    return;
  }
  if (op.op == "remove_acl_rule") {
    auto& dev = require_device(spec, require_string(args, "device", op.op), op.op);
    auto& acl = require_acl(dev, require_string(args, "acl", op.op), op.op);
    if (!args.contains("seq") || !args.at("seq").is_number_integer()) {
      throw Error(ErrorCode::ValidationError, "remove_acl_rule: missing integer \"seq\"");
    }
    const int64_t seq = args.at("seq").get<int64_t>();
    auto before = acl.rules.size();
    std::erase_if(acl.rules, [&](const AclRuleCfg& r) { return r.seq == seq; });
    if (acl.rules.size() == before) {
      throw Error(ErrorCode::ValidationError,
                  "remove_acl_rule: no seq " + std::to_string(seq) + " in " + acl.name);
    }
    return;
  }
  if (op.op == "set_redistribute") {
    auto& dev = require_device(spec, require_string(args, "device", op.op), op.op);
    auto& proc = require_process(dev, require_string(args, "process", op.op), op.op);
    const std::string from = require_string(args, "from_process", op.op);
    RedistributeCfg* stmt = nullptr;
    for (auto& r : proc.redistribute) {
      if (r.from_process == from) stmt = &r;
    }
    if (!stmt) {
      proc.redistribute.push_back(RedistributeCfg{from, 10, "internal"});
      stmt = &proc.redistribute.back();
    }
    if (args.contains("metric")) stmt->metric = args.at("metric").get<int64_t>();
    if (args.contains("metric_type")) {
      stmt->metric_type = args.at("metric_type").get<std::string>();
    }
    return;
  }
  if (op.op == "set_summary") {
    auto& dev = require_device(spec, require_string(args, "device", op.op), op.op);
    auto& proc = require_process(dev, require_string(args, "process", op.op), op.op);
    const std::string prefix = require_string(args, "prefix", op.op);
    const bool present = args.value("present", true);
    auto it = std::find_if(proc.summaries.begin(), proc.summaries.end(),
                           [&](const SummaryCfg& s) { return s.prefix == prefix; });
    if (present) {
      if (it != proc.summaries.end()) {
        throw Error(ErrorCode::ValidationError,
                    "set_summary: " + prefix + " already configured on " + dev.hostname);
      }
      proc.summaries.push_back(SummaryCfg{prefix});
    } else {
      if (it == proc.summaries.end()) {
        throw Error(ErrorCode::ValidationError,
                    "set_summary: " + prefix + " not configured on " + dev.hostname);
      }
      proc.summaries.erase(it);
    }
    return;
  }
  if (op.op == "set_link_capacity") {
    const std::string device = require_string(args, "device", op.op);
    const std::string interface = require_string(args, "interface", op.op);
    if (!args.contains("capacity_bps") || !args.at("capacity_bps").is_number_integer()) {
      throw Error(ErrorCode::ValidationError,
                  "set_link_capacity: missing integer \"capacity_bps\"");
    }
    for (auto& link : spec.links) {
      bool matches = (link.a_device == device && link.a_interface == interface) ||
                     (link.b_device == device && link.b_interface == interface);
      if (matches) {
        link.capacity_bps = args.at("capacity_bps").get<int64_t>();
        return;
      }
    }
    throw Error(ErrorCode::ValidationError,
                "set_link_capacity: no link attached to " + device + ":" + interface);
  }
  throw Error(ErrorCode::ValidationError, "unknown delta op \"" + op.op + "\"");
}

}  // namespace

NetworkSpec apply_delta(const NetworkSpec& base, const std::vector<DeltaOp>& ops) {
  NetworkSpec spec = base;
  for (const auto& op : ops) apply_op(spec, op);
  // Round-trip through the parser so every delta result obeys the same rules
  // as hand-written input.
  ParseResult result = parse_network_spec(serialize_network_spec(spec));
  if (!result.ok()) {
    std::string detail = "delta produced an invalid spec";
    if (!result.diagnostics.empty()) {
      detail += ": " + result.diagnostics.front().path + ": " +
                result.diagnostics.front().message;
    }
    throw Error(ErrorCode::ValidationError, detail);
  }
  return *result.spec;
}

// ---------------------------------------------------------------------------
// Requirements serialization
// ---------------------------------------------------------------------------

Json requirements_to_json(const std::vector<Requirement>& reqs) {
  Json out = Json::array();
  for (const auto& r : reqs) {
    out.push_back(Json{{"id", r.id},
                       {"description", r.description},
                       {"tool", r.tool},
                       {"params", r.params}});
  }
  return out;
}

std::vector<Requirement> requirements_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "requirements must be an array");
  std::vector<Requirement> reqs;
  for (const auto& entry : j) {
    if (!entry.is_object() || !entry.contains("id") || !entry.contains("tool")) {
      throw Error(ErrorCode::ParseError, "each requirement needs id and tool fields");
    }
    reqs.push_back(Requirement{entry.at("id").get<std::string>(),
                               entry.value("description", ""),
                               entry.at("tool").get<std::string>(),
                               entry.value("params", Json::object())});
  }
  return reqs;
}

// ---------------------------------------------------------------------------
// Built-in scenarios
// ---------------------------------------------------------------------------

namespace {

InterfaceCfg mk_if(std::string name, std::optional<std::string> v4 = std::nullopt,
                   std::optional<std::string> v6 = std::nullopt) {
  InterfaceCfg i;
  i.name = std::move(name);
  i.v4_addr = std::move(v4);
  i.v6_addr = std::move(v6);
  return i;
}

LinkCfg mk_link(std::string ad, std::string ai, std::string bd, std::string bi,
                int64_t capacity_bps = 10'000'000'000) {
  LinkCfg l;
  l.a_device = std::move(ad);
  l.a_interface = std::move(ai);
  l.b_device = std::move(bd);
  l.b_interface = std::move(bi);
  l.capacity_bps = capacity_bps;
  return l;
}

StaticRouteCfg via(std::string prefix, std::string next_hop, int64_t metric = 1) {
  StaticRouteCfg r;
  r.prefix = std::move(prefix);
  r.next_hop = std::move(next_hop);
  r.metric = metric;
  return r;
}

IgpProcessCfg igp(std::string id, std::string family,
                  std::vector<IgpInterfaceCfg> interfaces) {
  IgpProcessCfg p;
  p.process_id = std::move(id);
  p.family = std::move(family);
  p.interfaces = std::move(interfaces);
  return p;
}

AclRuleCfg rule(int64_t seq, std::string action, std::string protocol, std::string src,
                std::string dst, std::array<int64_t, 2> dst_ports = {0, 65535}) {
  AclRuleCfg r;
  r.seq = seq;
  r.action = std::move(action);
  r.protocol = std::move(protocol);
  r.src_prefix = std::move(src);
  r.dst_prefix = std::move(dst);
  r.dst_ports = dst_ports;
  return r;
}

DeltaOp set_if(std::string device, std::string interface, std::string field, Json value) {
  return DeltaOp{"set_interface", Json{{"device", std::move(device)},
                                       {"interface", std::move(interface)},
                                       {"field", std::move(field)},
                                       {"value", std::move(value)}}};
}

DeltaOp add_route(std::string device, std::string prefix, std::string next_hop,
                  int64_t metric = 1) {
  return DeltaOp{"add_static_route", Json{{"device", std::move(device)},
                                          {"prefix", std::move(prefix)},
                                          {"next_hop", std::move(next_hop)},
                                          {"metric", metric}}};
}

DeltaOp drop_route(std::string device, std::string prefix) {
  return DeltaOp{"remove_static_route",
                 Json{{"device", std::move(device)}, {"prefix", std::move(prefix)}}};
}

Json reach_params(std::string src_device, std::string dst_ip, bool expect,
                  std::optional<std::string> src_ip = std::nullopt) {
  Json p{{"snapshot", "b"},
         {"src_device", std::move(src_device)},
         {"dst_ip", std::move(dst_ip)},
         {"expect_reachable", expect}};
  if (src_ip) p["src_ip"] = *src_ip;
  return p;
}

Scenario scenario_static_route() {
  Scenario s;
  s.id = "s1-static-route";
  s.title = "Turn up a new service subnet with static routes";
  s.category = "ROUTE_CHANGE";
  s.bad_rationale = "the relay router's next hop is typo'd to an address outside the "
                    "transit subnet, so its route never resolves and traffic dies there";

  DeviceConfig r1;
  r1.hostname = "r1";
  r1.interfaces = {mk_if("eth0", "10.0.12.1/30"), mk_if("lo0", "10.1.1.1/32")};
  r1.static_routes = {via("10.0.23.0/30", "10.0.12.2")};
  DeviceConfig r2;
  r2.hostname = "r2";
  r2.interfaces = {mk_if("eth0", "10.0.12.2/30"), mk_if("eth1", "10.0.23.1/30")};
  DeviceConfig r3;
  r3.hostname = "r3";
  r3.interfaces = {mk_if("eth1", "10.0.23.2/30"), mk_if("svc0", "10.30.0.1/24")};
  r3.static_routes = {via("10.0.12.0/30", "10.0.23.1")};
  s.base.devices = {r1, r2, r3};
  s.base.links = {mk_link("r1", "eth0", "r2", "eth0"), mk_link("r2", "eth1", "r3", "eth1")};

  s.good_delta = {add_route("r1", "10.30.0.0/24", "10.0.12.2"),
                  add_route("r2", "10.30.0.0/24", "10.0.23.2")};
  s.bad_delta = {add_route("r1", "10.30.0.0/24", "10.0.12.2"),
                 add_route("r2", "10.30.0.0/24", "10.0.23.6")};

  s.requirements = {
      {"svc-reachable", "the edge router reaches the new service subnet", "REACHABILITY",
       reach_params("r1", "10.30.0.1", true)},
      {"svc-via-r2", "service traffic transits r2 on the new route", "TRACEROUTE",
       Json{{"snapshot", "b"},
            {"src_device", "r1"},
            {"dst_ip", "10.30.0.1"},
            {"expect_disposition", "DELIVERED"},
            {"expect_matched", Json{{"r2", "10.30.0.0/24"}}}}},
      {"no-loops", "the change introduces no forwarding loops", "LOOP_DETECTION",
       Json{{"snapshot", "b"}}},
  };
  return s;
}

Scenario scenario_acl_lockdown() {
  Scenario s;
  s.id = "s2-acl-lockdown";
  s.title = "Block the guest subnet from the application servers";
  s.category = "ACL_CHANGE";
  s.bad_rationale = "the deny rule uses a /16 instead of the guest /24, so the corporate "
                    "subnet inside the same aggregate is blocked as collateral damage";

  DeviceConfig edge;
  edge.hostname = "edge";
  edge.interfaces = {mk_if("eth0", "10.0.1.1/30"), mk_if("g0", "10.2.1.1/24"),
                     mk_if("c0", "10.2.2.1/24")};
  edge.static_routes = {via("10.9.0.0/24", "10.0.1.2")};
  AclCfg to_core;
  to_core.name = "to-core";
  to_core.rules = {rule(10, "permit", "any", "10.2.0.0/16", "0.0.0.0/0")};
  to_core.applied = {AclBindingCfg{"eth0", "out"}};
  edge.acls = {to_core};
  DeviceConfig core;
  core.hostname = "core";
  core.interfaces = {mk_if("eth0", "10.0.1.2/30"), mk_if("eth1", "10.0.2.1/30")};
  core.static_routes = {via("10.9.0.0/24", "10.0.2.2")};
  DeviceConfig srv;
  srv.hostname = "srv";
  srv.interfaces = {mk_if("eth1", "10.0.2.2/30"), mk_if("app0", "10.9.0.1/24")};
  s.base.devices = {core, edge, srv};
  s.base.links = {mk_link("edge", "eth0", "core", "eth0"),
                  mk_link("core", "eth1", "srv", "eth1")};

  auto deny = [](std::string src) {
    return DeltaOp{"add_acl_rule",
                   Json{{"device", "edge"},
                        {"acl", "to-core"},
                        {"rule", Json{{"seq", 5},
                                      {"action", "deny"},
                                      {"protocol", "any"},
                                      {"src_prefix", std::move(src)},
                                      {"dst_prefix", "10.9.0.0/24"}}}}};
  };
  s.good_delta = {deny("10.2.1.0/24")};
  s.bad_delta = {deny("10.2.0.0/16")};

  s.requirements = {
      {"guest-blocked", "guest clients can no longer reach the app servers", "REACHABILITY",
       reach_params("edge", "10.9.0.1", false, "10.2.1.5")},
      {"corp-reachable", "corporate clients still reach the app servers", "REACHABILITY",
       reach_params("edge", "10.9.0.1", true, "10.2.2.5")},
      {"corp-permitted", "the edge ACL still permits corporate web traffic", "ACL_SEARCH",
       Json{{"snapshot", "b"},
            {"device", "edge"},
            {"interface", "eth0"},
            {"direction", "out"},
            {"packet", Json{{"src_ip", "10.2.2.5"},
                            {"dst_ip", "10.9.0.1"},
                            {"protocol", "tcp"},
                            {"dst_port", 443}}},
            {"expect_decision", "permit"}}},
  };
  return s;
}

Scenario scenario_acl_refactor() {
  Scenario s;
  s.id = "s3-acl-refactor";
  s.title = "Collapse two ACL permits into one aggregate rule";
  s.category = "ACL_EQUIVALENCE";
  s.bad_rationale = "the merged rule keeps the /25 of the first permit instead of the "
                    "/24 union, silently dropping the upper half of the subnet";

  DeviceConfig fw;
  fw.hostname = "fw";
  fw.interfaces = {mk_if("lan0", "10.0.0.1/24"), mk_if("wan0", "192.0.2.1/30")};
  AclCfg edge_in;
  edge_in.name = "edge-in";
  edge_in.rules = {rule(10, "permit", "tcp", "10.9.9.9/32", "10.0.0.0/25", {443, 443}),
                   rule(20, "permit", "tcp", "10.9.9.9/32", "10.0.0.128/25", {443, 443}),
                   rule(30, "deny", "any", "0.0.0.0/0", "0.0.0.0/0")};
  edge_in.applied = {AclBindingCfg{"wan0", "in"}};
  fw.acls = {edge_in};
  s.base.devices = {fw};

  auto rewrite = [](std::string dst) {
    return std::vector<DeltaOp>{
        DeltaOp{"remove_acl_rule", Json{{"device", "fw"}, {"acl", "edge-in"}, {"seq", 10}}},
        DeltaOp{"remove_acl_rule", Json{{"device", "fw"}, {"acl", "edge-in"}, {"seq", 20}}},
        DeltaOp{"add_acl_rule",
                Json{{"device", "fw"},
                     {"acl", "edge-in"},
                     {"rule", Json{{"seq", 10},
                                   {"action", "permit"},
                                   {"protocol", "tcp"},
                                   {"src_prefix", "10.9.9.9/32"},
                                   {"dst_prefix", std::move(dst)},
                                   {"dst_ports", Json::array({443, 443})}}}}}};
  };
  s.good_delta = rewrite("10.0.0.0/24");
  s.bad_delta = rewrite("10.0.0.0/25");

  s.requirements = {
      {"acl-equivalent", "the refactored ACL filters exactly like the original",
       "ACL_COMPARE",
       Json{{"device", "fw"},
            {"acl", "edge-in"},
            {"header_space",
             Json{{"src_prefixes", Json::array({"10.9.9.9/32"})},
                  {"dst_prefixes", Json::array({"10.0.0.0/24"})},
                  {"protocols", Json::array({"tcp"})},
                  {"src_ports", Json::array({Json::array({1024, 1024})})},
                  {"dst_ports", Json::array({Json::array({443, 443})})}}},
            {"expect_equivalent", true}}},
      {"upper-half-permitted", "hosts in the upper half of the subnet stay reachable",
       "ACL_SEARCH",
       Json{{"snapshot", "b"},
            {"device", "fw"},
            {"interface", "wan0"},
            {"direction", "in"},
            {"packet", Json{{"src_ip", "10.9.9.9"},
                            {"dst_ip", "10.0.0.200"},
                            {"protocol", "tcp"},
                            {"dst_port", 443}}},
            {"expect_decision", "permit"}}},
  };
  return s;
}

Scenario scenario_jumbo_mtu() {
  Scenario s;
  s.id = "s4-jumbo-mtu";
  s.title = "Enable jumbo frames on the inter-router link";
  s.category = "MTU_CHANGE";
  s.bad_rationale = "only one end of the link is raised to 9000, leaving an MTU mismatch "
                    "that silently blackholes large frames";

  DeviceConfig r1;
  r1.hostname = "r1";
  r1.interfaces = {mk_if("eth0", "10.0.0.1/30")};
  DeviceConfig r2;
  r2.hostname = "r2";
  r2.interfaces = {mk_if("eth0", "10.0.0.2/30")};
  s.base.devices = {r1, r2};
  s.base.links = {mk_link("r1", "eth0", "r2", "eth0")};

  s.good_delta = {set_if("r1", "eth0", "mtu", 9000), set_if("r2", "eth0", "mtu", 9000)};
  s.bad_delta = {set_if("r1", "eth0", "mtu", 9000)};

  s.requirements = {
      {"mtu-consistent", "both ends of every link agree on MTU", "MTU_CONSISTENCY",
       Json{{"snapshot", "b"}}},
      {"forwarding-unchanged", "reachability over the link is untouched",
       "DIFFERENTIAL_REACHABILITY",
       Json{{"probes",
             Json::array({Json{{"src_device", "r1"}, {"dst_ip", "10.0.0.2"}}})}}},
  };
  return s;
}

Scenario scenario_vlan_renumber() {
  Scenario s;
  s.id = "s5-vlan-renumber";
  s.title = "Renumber the access VLANs into the 10.20.0.0/16 block";
  s.category = "VLAN_RENUMBER";
  s.bad_rationale = "access switch a3 never gets its VLAN interface renumbered, so the "
                    "new distribution route for it points at a subnet nobody owns";

  DeviceConfig d1;
  d1.hostname = "d1";
  d1.interfaces = {mk_if("ge1", "10.255.1.1/30"), mk_if("ge2", "10.255.2.1/30"),
                   mk_if("ge3", "10.255.3.1/30")};
  d1.static_routes = {via("10.10.1.0/24", "10.255.1.2"), via("10.10.2.0/24", "10.255.2.2"),
                      via("10.10.3.0/24", "10.255.3.2")};
  auto access = [](const std::string& name, const std::string& up,
                   const std::string& vlan) {
    DeviceConfig a;
    a.hostname = name;
    a.interfaces = {mk_if("up0", up), mk_if("vlan10", vlan)};
    return a;
  };
  s.base.devices = {access("a1", "10.255.1.2/30", "10.10.1.1/24"),
                    access("a2", "10.255.2.2/30", "10.10.2.1/24"),
                    access("a3", "10.255.3.2/30", "10.10.3.1/24"), d1};
  s.base.links = {mk_link("d1", "ge1", "a1", "up0"), mk_link("d1", "ge2", "a2", "up0"),
                  mk_link("d1", "ge3", "a3", "up0")};

  auto renumber = [&](bool include_a3) {
    std::vector<DeltaOp> ops;
    ops.push_back(set_if("a1", "vlan10", "v4_addr", "10.20.1.1/24"));
    ops.push_back(set_if("a2", "vlan10", "v4_addr", "10.20.2.1/24"));
    if (include_a3) ops.push_back(set_if("a3", "vlan10", "v4_addr", "10.20.3.1/24"));
    for (int i = 1; i <= 3; ++i) {
      ops.push_back(add_route("d1", "10.20." + std::to_string(i) + ".0/24",
                              "10.255." + std::to_string(i) + ".2"));
      ops.push_back(drop_route("d1", "10.10." + std::to_string(i) + ".0/24"));
    }
    return ops;
  };
  s.good_delta = renumber(true);
  s.bad_delta = renumber(false);

  s.requirements = {
      {"new-a1-reachable", "distribution reaches a1's renumbered VLAN", "REACHABILITY",
       reach_params("d1", "10.20.1.1", true)},
      {"new-a2-reachable", "distribution reaches a2's renumbered VLAN", "REACHABILITY",
       reach_params("d1", "10.20.2.1", true)},
      {"new-a3-reachable", "distribution reaches a3's renumbered VLAN", "REACHABILITY",
       reach_params("d1", "10.20.3.1", true)},
      {"old-a3-retired", "the old a3 VLAN subnet is withdrawn from routing",
       "REACHABILITY", reach_params("d1", "10.10.3.1", false)},
      {"fleet-consistent", "no access switch missed the fleet-wide change",
       "CONFIG_ANOMALY", Json::object()},
  };
  return s;
}

Scenario scenario_link_migration() {
  Scenario s;
  s.id = "s6-link-migration";
  s.title = "Decommission the direct link and ride the relay path";
  s.category = "LINK_MIGRATION";
  s.bad_rationale = "the relay path is still at 4 Gbps when the 6 Gbps service flow "
                    "lands on it, so a third of the traffic is dropped";

  DeviceConfig m1;
  m1.hostname = "m1";
  m1.interfaces = {mk_if("d0", "10.60.0.1/30"), mk_if("a0", "10.60.1.1/30")};
  m1.static_routes = {via("10.99.0.0/24", "10.60.0.2", 1),
                      via("10.99.0.0/24", "10.60.1.2", 10)};
  DeviceConfig rly;
  rly.hostname = "rly";
  rly.interfaces = {mk_if("a0", "10.60.1.2/30"), mk_if("a1", "10.60.2.1/30")};
  rly.static_routes = {via("10.99.0.0/24", "10.60.2.2")};
  DeviceConfig m2;
  m2.hostname = "m2";
  m2.interfaces = {mk_if("d0", "10.60.0.2/30"), mk_if("a1", "10.60.2.2/30"),
                   mk_if("svc0", "10.99.0.1/24")};
  s.base.devices = {m1, m2, rly};
  s.base.links = {mk_link("m1", "d0", "m2", "d0", 10'000'000'000),
                  mk_link("m1", "a0", "rly", "a0", 4'000'000'000),
                  mk_link("rly", "a1", "m2", "a1", 4'000'000'000)};
  s.base.demands = {TrafficDemand{"svc-flow", "m1", "10.99.0.1", 6'000'000'000, "gold"}};
  s.base.sla_classes = {SlaClassCfg{"gold", 10.0, 0.001}};

  auto disable_direct = std::vector<DeltaOp>{set_if("m1", "d0", "enabled", false),
                                             set_if("m2", "d0", "enabled", false)};
  s.good_delta = {
      DeltaOp{"set_link_capacity",
              Json{{"device", "m1"}, {"interface", "a0"}, {"capacity_bps", 10'000'000'000}}},
      DeltaOp{"set_link_capacity",
              Json{{"device", "rly"}, {"interface", "a1"}, {"capacity_bps", 10'000'000'000}}},
      disable_direct[0], disable_direct[1]};
  s.bad_delta = disable_direct;

  s.requirements = {
      {"sla-gold-held", "the gold service flow stays within its SLA", "SLA_VERIFY_SIM",
       Json{{"snapshot", "b"}}},
      {"svc-reachable", "the service prefix stays reachable over the relay path",
       "REACHABILITY", reach_params("m1", "10.99.0.1", true)},
      {"no-loops", "the migration leaves no forwarding loops", "LOOP_DETECTION",
       Json{{"snapshot", "b"}}},
  };
  return s;
}

Scenario scenario_redistribution_v4() {
  Scenario s;
  s.id = "s7-igp-redistribution";
  s.title = "Leak the legacy IGP into the fabric IGP at both borders";
  s.category = "REDISTRIBUTION";
  s.bad_rationale = "internal metric-type erases route origin, each border then prefers "
                    "the other border's cheap leaked copy over its own native path and "
                    "the pair forwards in a circle";

  DeviceConfig r1;
  r1.hostname = "r1";
  r1.interfaces = {mk_if("e0", "10.7.1.1/30"), mk_if("lo0", "10.77.0.1/32")};
  r1.igp_processes = {igp("P1", "v4", {{"e0", 100}, {"lo0", 1}})};
  DeviceConfig b1;
  b1.hostname = "b1";
  b1.interfaces = {mk_if("e0", "10.7.1.2/30"), mk_if("e1", "10.7.2.1/30")};
  b1.igp_processes = {igp("P1", "v4", {{"e0", 100}, {"e1", 10}}),
                      igp("P2", "v4", {{"e1", 10}})};
  DeviceConfig b2;
  b2.hostname = "b2";
  b2.interfaces = {mk_if("e1", "10.7.2.2/30"), mk_if("e2", "10.7.3.1/30")};
  b2.igp_processes = {igp("P1", "v4", {{"e1", 10}}),
                      igp("P2", "v4", {{"e1", 10}, {"e2", 10}})};
  DeviceConfig r2;
  r2.hostname = "r2";
  r2.interfaces = {mk_if("e2", "10.7.3.2/30")};
  r2.igp_processes = {igp("P2", "v4", {{"e2", 10}})};
  s.base.devices = {b1, b2, r1, r2};
  s.base.links = {mk_link("r1", "e0", "b1", "e0"), mk_link("b1", "e1", "b2", "e1"),
                  mk_link("b2", "e2", "r2", "e2")};

  auto leak = [](const std::string& metric_type) {
    std::vector<DeltaOp> ops;
    for (const char* dev : {"b1", "b2"}) {
      ops.push_back(DeltaOp{"set_redistribute", Json{{"device", dev},
                                                     {"process", "P2"},
                                                     {"from_process", "P1"},
                                                     {"metric", 5},
                                                     {"metric_type", metric_type}}});
    }
    return ops;
  };
  s.good_delta = leak("external");
  s.bad_delta = leak("internal");

  s.requirements = {
      {"legacy-loopback-reachable", "fabric-only routers reach the legacy loopback",
       "REACHABILITY", reach_params("r2", "10.77.0.1", true)},
      {"no-loops", "redistribution introduces no forwarding loops", "LOOP_DETECTION",
       Json{{"snapshot", "b"}}},
      {"border-route-specific", "the border forwards on the specific leaked route",
       "TRACEROUTE",
       Json{{"snapshot", "b"},
            {"src_device", "r2"},
            {"dst_ip", "10.77.0.1"},
            {"expect_disposition", "DELIVERED"},
            {"expect_matched", Json{{"b2", "10.77.0.1/32"}}}}},
  };
  return s;
}

Scenario scenario_summarization_v6() {
  Scenario s;
  s.id = "s8-route-summarization";
  s.title = "Summarize the customer block toward the core";
  s.category = "SUMMARIZATION";
  s.bad_rationale = "the change also retires a2's attachment to the first customer LAN, "
                    "so a2 advertises a summary it cannot fully serve and its discard "
                    "route blackholes half the ECMP traffic";

  DeviceConfig c1;
  c1.hostname = "c1";
  c1.interfaces = {mk_if("e1", std::nullopt, "fd00:0:0:1::1/64"),
                   mk_if("e2", std::nullopt, "fd00:0:0:2::1/64")};
  c1.igp_processes = {igp("agg", "v6", {{"e1", 10}, {"e2", 10}})};
  auto agg_dev = [](const std::string& name, const std::string& uplink,
                    const std::string& c1addr, const std::string& c2addr) {
    DeviceConfig a;
    a.hostname = name;
    a.interfaces = {mk_if("e0", std::nullopt, uplink),
                    mk_if("c1if", std::nullopt, c1addr),
                    mk_if("c2if", std::nullopt, c2addr)};
    a.igp_processes = {igp("agg", "v6", {{"e0", 10}, {"c1if", 1}, {"c2if", 1}})};
    return a;
  };
  s.base.devices = {agg_dev("a1", "fd00:0:0:1::2/64", "2001:db8:1::1/48", "2001:db8:2::1/48"),
                    agg_dev("a2", "fd00:0:0:2::2/64", "2001:db8:1::2/48", "2001:db8:2::2/48"),
                    c1};
  s.base.links = {mk_link("c1", "e1", "a1", "e0"), mk_link("c1", "e2", "a2", "e0")};

  auto summarize = [](const char* dev) {
    return DeltaOp{"set_summary", Json{{"device", dev},
                                       {"process", "agg"},
                                       {"prefix", "2001:db8::/32"},
                                       {"present", true}}};
  };
  s.good_delta = {summarize("a1"), summarize("a2")};
  s.bad_delta = {summarize("a1"), summarize("a2"),
                 set_if("a2", "c1if", "enabled", false)};

  s.requirements = {
      {"cust1-reachable", "every core ECMP branch still delivers to customer LAN 1",
       "REACHABILITY", reach_params("c1", "2001:db8:1::1", true)},
      {"cust2-reachable", "every core ECMP branch still delivers to customer LAN 2",
       "REACHABILITY", reach_params("c1", "2001:db8:2::1", true)},
      {"summary-in-core", "the core holds only the summary for the customer block",
       "TRACEROUTE",
       Json{{"snapshot", "b"},
            {"src_device", "c1"},
            {"dst_ip", "2001:db8:1::1"},
            {"expect_matched", Json{{"c1", "2001:db8::/32"}}}}},
      {"no-loops", "summarization introduces no forwarding loops", "LOOP_DETECTION",
       Json{{"snapshot", "b"}}},
  };
  return s;
}

Scenario scenario_redistribution_v6() {
  Scenario s;
  s.id = "s9-igp-redistribution-v6";
  s.title = "Leak the legacy v6 IGP into the fabric IGP at both backbones";
  s.category = "REDISTRIBUTION";
  s.bad_rationale = "internal metric-type erases route origin; both backbone borders "
                    "prefer each other's leaked copy of the legacy loopback and bounce "
                    "traffic between themselves";

  DeviceConfig gw1;
  gw1.hostname = "gw1";
  gw1.interfaces = {mk_if("x0", std::nullopt, "fd00:9:1::1/64"),
                    mk_if("lo", std::nullopt, "2001:db8:99::1/128")};
  gw1.igp_processes = {igp("legacy", "v6", {{"x0", 100}, {"lo", 1}})};
  DeviceConfig bb1;
  bb1.hostname = "bb1";
  bb1.interfaces = {mk_if("x0", std::nullopt, "fd00:9:1::2/64"),
                    mk_if("x1", std::nullopt, "fd00:9:2::1/64")};
  bb1.igp_processes = {igp("legacy", "v6", {{"x0", 100}, {"x1", 10}}),
                       igp("fabric", "v6", {{"x1", 10}})};
  DeviceConfig bb2;
  bb2.hostname = "bb2";
  bb2.interfaces = {mk_if("x1", std::nullopt, "fd00:9:2::2/64"),
                    mk_if("x2", std::nullopt, "fd00:9:3::1/64")};
  bb2.igp_processes = {igp("legacy", "v6", {{"x1", 10}}),
                       igp("fabric", "v6", {{"x1", 10}, {"x2", 10}})};
  DeviceConfig gw2;
  gw2.hostname = "gw2";
  gw2.interfaces = {mk_if("x2", std::nullopt, "fd00:9:3::2/64")};
  gw2.igp_processes = {igp("fabric", "v6", {{"x2", 10}})};
  s.base.devices = {bb1, bb2, gw1, gw2};
  s.base.links = {mk_link("gw1", "x0", "bb1", "x0"), mk_link("bb1", "x1", "bb2", "x1"),
                  mk_link("bb2", "x2", "gw2", "x2")};

  auto leak = [](const std::string& metric_type) {
    std::vector<DeltaOp> ops;
    for (const char* dev : {"bb1", "bb2"}) {
      ops.push_back(DeltaOp{"set_redistribute", Json{{"device", dev},
                                                     {"process", "fabric"},
                                                     {"from_process", "legacy"},
                                                     {"metric", 5},
                                                     {"metric_type", metric_type}}});
    }
    return ops;
  };
  s.good_delta = leak("external");
  s.bad_delta = leak("internal");

  s.requirements = {
      {"legacy-loopback-reachable", "fabric-only gateways reach the legacy loopback",
       "REACHABILITY", reach_params("gw2", "2001:db8:99::1", true)},
      {"no-loops", "redistribution introduces no forwarding loops", "LOOP_DETECTION",
       Json{{"snapshot", "b"}}},
      {"border-route-specific", "the border forwards on the specific leaked route",
       "TRACEROUTE",
       Json{{"snapshot", "b"},
            {"src_device", "gw2"},
            {"dst_ip", "2001:db8:99::1"},
            {"expect_disposition", "DELIVERED"},
            {"expect_matched", Json{{"bb2", "2001:db8:99::1/128"}}}}},
  };
  return s;
}

Scenario scenario_summarization_3tier() {
  Scenario s;
  s.id = "s10-summarization-3tier";
  s.title = "Summarize the legacy aggregation block during pod migration";
  s.category = "SUMMARIZATION";
  s.bad_rationale = "the summary template is applied to the new aggregation device too, "
                    "although it does not serve the legacy-only customer LAN; its "
                    "discard route then blackholes that LAN on one ECMP branch";

  DeviceConfig core1;
  core1.hostname = "core1";
  core1.interfaces = {mk_if("e1", std::nullopt, "fd00:1::1/64"),
                      mk_if("e2", std::nullopt, "fd00:2::1/64")};
  core1.igp_processes = {igp("pod", "v6", {{"e1", 10}, {"e2", 10}})};
  DeviceConfig agg_old;
  agg_old.hostname = "agg-old";
  agg_old.interfaces = {mk_if("e0", std::nullopt, "fd00:1::2/64"),
                        mk_if("c10", std::nullopt, "2001:db8:10::1/48"),
                        mk_if("c20", std::nullopt, "2001:db8:20::1/48"),
                        mk_if("c30", std::nullopt, "2001:db8:30::1/48")};
  agg_old.igp_processes = {
      igp("pod", "v6", {{"e0", 10}, {"c10", 1}, {"c20", 1}, {"c30", 1}})};
  DeviceConfig agg_new;
  agg_new.hostname = "agg-new";
  agg_new.interfaces = {mk_if("e0", std::nullopt, "fd00:2::2/64"),
                        mk_if("c10", std::nullopt, "2001:db8:10::2/48"),
                        mk_if("c20", std::nullopt, "2001:db8:20::2/48")};
  agg_new.igp_processes = {igp("pod", "v6", {{"e0", 10}, {"c10", 1}, {"c20", 1}})};
  s.base.devices = {agg_new, agg_old, core1};
  s.base.links = {mk_link("core1", "e1", "agg-old", "e0"),
                  mk_link("core1", "e2", "agg-new", "e0")};

  auto summarize = [](const char* dev) {
    return DeltaOp{"set_summary", Json{{"device", dev},
                                       {"process", "pod"},
                                       {"prefix", "2001:db8::/42"},
                                       {"present", true}}};
  };
  s.good_delta = {summarize("agg-old")};
  s.bad_delta = {summarize("agg-old"), summarize("agg-new")};

  s.requirements = {
      {"legacy-cust-reachable", "the legacy-only customer LAN stays reachable",
       "REACHABILITY", reach_params("core1", "2001:db8:30::5", true)},
      {"migrated-cust-reachable", "migrated customer LANs stay reachable",
       "REACHABILITY", reach_params("core1", "2001:db8:10::5", true)},
      {"summary-in-core", "the core uses the aggregation summary for legacy traffic",
       "TRACEROUTE",
       Json{{"snapshot", "b"},
            {"src_device", "core1"},
            {"dst_ip", "2001:db8:30::5"},
            {"expect_matched", Json{{"core1", "2001:db8::/42"}}}}},
      {"no-loops", "summarization introduces no forwarding loops", "LOOP_DETECTION",
       Json{{"snapshot", "b"}}},
  };
  return s;
}

}  // namespace

const std::vector<Scenario>& builtin_scenarios() {
  static const std::vector<Scenario> scenarios = {
      scenario_static_route(),      scenario_acl_lockdown(),
      scenario_acl_refactor(),      scenario_jumbo_mtu(),
      scenario_vlan_renumber(),     scenario_link_migration(),
      scenario_redistribution_v4(), scenario_summarization_v6(),
      scenario_redistribution_v6(), scenario_summarization_3tier(),
  };
  return scenarios;
}

const Scenario* find_scenario(const std::string& id) {
  for (const auto& s : builtin_scenarios()) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Bundles
// ---------------------------------------------------------------------------

void write_scenario_bundle(const Scenario& scenario, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    Json meta{{"id", scenario.id},
              {"title", scenario.title},
              {"category", scenario.category},
              {"bad_rationale", scenario.bad_rationale},
              {"good_delta", delta_to_json(scenario.good_delta)},
              {"bad_delta", delta_to_json(scenario.bad_delta)}};
    std::ofstream out(dir / "scenario.json", std::ios::trunc);
    out << meta.dump(2) << "\n";
  }
  {
    std::ofstream out(dir / "network.json", std::ios::trunc);
    out << serialize_network_spec(scenario.base);
  }
  {
    std::ofstream out(dir / "requirements.json", std::ios::trunc);
    out << requirements_to_json(scenario.requirements).dump(2) << "\n";
  }
}

Scenario load_scenario_bundle(const std::filesystem::path& dir) {
  auto read_json = [&](const char* name) {
    std::ifstream in(dir / name);
    if (!in) {
      throw Error(ErrorCode::StorageError,
                  "missing " + std::string(name) + " in " + dir.string());
    }
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::ParseError, std::string(name) + " is not valid JSON");
    }
    return j;
  };
  Json meta = read_json("scenario.json");
  Scenario s;
  s.id = meta.value("id", "");
  s.title = meta.value("title", "");
  s.category = meta.value("category", "");
  s.bad_rationale = meta.value("bad_rationale", "");
  s.good_delta = delta_from_json(meta.value("good_delta", Json::array()));
  s.bad_delta = delta_from_json(meta.value("bad_delta", Json::array()));

  std::ifstream net(dir / "network.json");
  if (!net) throw Error(ErrorCode::StorageError, "missing network.json in " + dir.string());
  std::string text((std::istreambuf_iterator<char>(net)), std::istreambuf_iterator<char>());
  ParseResult parsed = parse_network_spec(text);
  if (!parsed.ok()) {
    std::string detail = "network.json is not a valid spec";
    if (!parsed.diagnostics.empty()) {
      detail += ": " + parsed.diagnostics.front().path + ": " +
                parsed.diagnostics.front().message;
    }
    throw Error(ErrorCode::ParseError, detail);
  }
  s.base = *parsed.spec;
  s.requirements = requirements_from_json(read_json("requirements.json"));
  return s;
}

}  // namespace nettwin
