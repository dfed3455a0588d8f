#include "nettwin/toolreg.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>

#include "nettwin/errors.hpp"
#include "nettwin/ingest.hpp"

namespace nettwin {

namespace {

constexpr const char* kCapabilityNames[kCapabilityCount] = {
    "MTU_CONSISTENCY",    "REACHABILITY", "DIFFERENTIAL_REACHABILITY",
    "LOOP_DETECTION",     "TRACEROUTE",   "ACL_SEARCH",
    "ACL_COMPARE",        "SLA_VERIFY_SIM",
    "SLA_VERIFY_PREDICTOR", "CONFIG_ANOMALY",
};

Json verdict_to_json(const AclVerdict& v) {
  return Json{{"permit", v.permit}, {"seq", v.seq ? Json(*v.seq) : Json(nullptr)}};
}

Json acl_packet_to_json(const AclPacket& p) {
  return Json{{"src_ip", p.src_ip.str()},   {"dst_ip", p.dst_ip.str()},
              {"protocol", p.protocol},     {"src_port", p.src_port},
              {"dst_port", p.dst_port}};
}

Json hop_to_json(const TraceHop& h) {
  Json j{{"device", h.device}};
  if (h.matched_prefix) j["matched_prefix"] = *h.matched_prefix;
  if (h.out_interface) j["out_interface"] = *h.out_interface;
  if (h.next_device) j["next_device"] = *h.next_device;
  if (!h.acl_decisions.empty()) {
    Json decisions = Json::array();
    for (const auto& d : h.acl_decisions) {
      decisions.push_back(Json{{"acl", d.acl},
                               {"direction", d.direction},
                               {"permit", d.permit},
                               {"seq", d.seq ? Json(*d.seq) : Json(nullptr)}});
    }
    j["acl_decisions"] = decisions;
  }
  return j;
}

Json trace_to_json(const ForwardingTrace& t) {
  Json hops = Json::array();
  for (const auto& h : t.hops) hops.push_back(hop_to_json(h));
  return Json{{"hops", hops}, {"disposition", disposition_name(t.disposition)}};
}

Json traces_to_json(const std::vector<ForwardingTrace>& traces) {
  Json out = Json::array();
  for (const auto& t : traces) out.push_back(trace_to_json(t));
  return out;
}

Disposition strict_of(const std::vector<ForwardingTrace>& traces) {
  for (const auto& t : traces) {
    if (t.disposition != Disposition::Delivered) return t.disposition;
  }
  return Disposition::Delivered;
}

Json sla_report_to_json(const SlaReport& report) {
  Json flows = Json::array();
  for (const auto& f : report.flows) {
    Json branches = Json::array();
    for (const auto& b : f.branches) {
      branches.push_back(Json{{"share", b.share},
                              {"path", b.path},
                              {"delivered", b.delivered},
                              {"delivered_fraction", b.delivered_fraction},
                              {"delay_ms", b.delay_ms}});
    }
    flows.push_back(Json{{"flow", f.flow},
                         {"class", f.sla_class},
                         {"rate_bps", f.rate_bps},
                         {"delivered_fraction", f.delivered_fraction},
                         {"loss_fraction", f.loss_fraction},
                         {"mean_delay_ms", f.mean_delay_ms ? Json(*f.mean_delay_ms) : Json(nullptr)},
                         {"loss_ok", f.loss_ok},
                         {"delay_ok", f.delay_ok},
                         {"pass", f.pass},
                         {"branches", branches}});
  }
  Json links = Json::array();
  for (const auto& l : report.links) {
    links.push_back(Json{{"from_device", l.from_device},
                         {"out_interface", l.out_interface},
                         {"to_device", l.to_device},
                         {"capacity_bps", l.capacity_bps},
                         {"load_bps", l.load_bps},
                         {"utilization", l.utilization},
                         {"loss", l.loss},
                         {"delay_ms", l.delay_ms}});
  }
  return Json{{"flows", flows}, {"links", links}, {"pass", report.pass}};
}

Json prop(const char* type, const char* description) {
  return Json{{"type", type}, {"description", description}};
}

Json object_schema(Json properties, std::vector<std::string> required) {
  return Json{{"type", "object"}, {"properties", std::move(properties)},
              {"required", std::move(required)}};
}

const std::vector<ToolSpec>& tool_table() {
  static const std::vector<ToolSpec> specs = [] {
    std::vector<ToolSpec> t;
    t.push_back({"ndm.schema",
                 "Describe the knowledge-graph schema: layers, node kinds, attributes and "
                 "example queries.",
                 object_schema({{"layer", prop("string", "restrict to one layer name")}}, {}),
                 Json::object()});
    t.push_back(
        {"ndm.query",
         "Run a structured query against a snapshot's knowledge graph. `snapshot` is \"a\" "
         "(reference), \"b\" (candidate, default) or a snapshot id.",
         object_schema({{"snapshot", prop("string", "a | b | snapshot id")},
                        {"query", prop("object", "query document; see ndm.schema examples")}},
                       {"query"}),
         Json{{"snapshot", "b"},
              {"query",
               Json{{"start", Json{{"layer", "INTERFACES"}, {"kind", "interface"}}},
                    {"project", Json::array({"device", "name", "mtu"})},
                    {"limit", 5}}}}});
    t.push_back({"ndt.impact_diff",
                 "Structural diff between two snapshots: changed slices with node- and "
                 "edge-level detail.",
                 object_schema({{"a", prop("string", "left snapshot (default reference)")},
                                {"b", prop("string", "right snapshot (default candidate)")}},
                               {}),
                 Json::object()});
    t.push_back({"ndt.verify.MTU_CONSISTENCY",
                 "Check that both endpoint interfaces of every link agree on MTU.",
                 object_schema({{"snapshot", prop("string", "a | b | snapshot id")}}, {}),
                 Json{{"snapshot", "b"}}});
    t.push_back(
        {"ndt.verify.REACHABILITY",
         "Forward a probe from a device to a destination address across every ECMP branch "
         "and compare strict reachability with the expectation.",
         object_schema({{"snapshot", prop("string", "a | b | snapshot id")},
                        {"src_device", prop("string", "origin device hostname")},
                        {"dst_ip", prop("string", "destination address")},
                        {"src_ip", prop("string", "source address (default: first enabled "
                                                  "address of src_device in the dst family)")},
                        {"protocol", prop("string", "icmp | tcp | udp (default icmp)")},
                        {"src_port", prop("integer", "source port (default 0)")},
                        {"dst_port", prop("integer", "destination port (default 0)")},
                        {"expect_reachable", prop("boolean", "expected verdict (default true)")}},
                       {"src_device", "dst_ip"}),
         Json{{"src_device", "r1"}, {"dst_ip", "10.0.0.1"}, {"expect_reachable", true}}});
    t.push_back(
        {"ndt.verify.DIFFERENTIAL_REACHABILITY",
         "Run the same probes against the reference and candidate snapshots and report "
         "probes whose strict disposition changed.",
         object_schema({{"a", prop("string", "left snapshot (default reference)")},
                        {"b", prop("string", "right snapshot (default candidate)")},
                        {"probes", prop("array", "objects with src_device, dst_ip and optional "
                                                 "src_ip/protocol/src_port/dst_port")}},
                       {"probes"}),
         Json{{"probes", Json::array({Json{{"src_device", "r1"}, {"dst_ip", "10.0.0.1"}}})}}});
    t.push_back({"ndt.verify.LOOP_DETECTION",
                 "Walk every FIB prefix's next-hop graph and report forwarding cycles.",
                 object_schema({{"snapshot", prop("string", "a | b | snapshot id")}}, {}),
                 Json{{"snapshot", "b"}}});
    t.push_back(
        {"ndt.verify.TRACEROUTE",
         "Trace a probe hop by hop. Optional expectations pin the strict disposition "
         "and/or the FIB prefix matched at given devices.",
         object_schema({{"snapshot", prop("string", "a | b | snapshot id")},
                        {"src_device", prop("string", "origin device hostname")},
                        {"dst_ip", prop("string", "destination address")},
                        {"src_ip", prop("string", "source address override")},
                        {"protocol", prop("string", "icmp | tcp | udp (default icmp)")},
                        {"src_port", prop("integer", "source port (default 0)")},
                        {"dst_port", prop("integer", "destination port (default 0)")},
                        {"expect_disposition",
                         prop("string", "DELIVERED | NO_ROUTE | ACL_DENIED | LOOP | DISCARDED")},
                        {"expect_matched",
                         prop("object", "device -> FIB prefix that must be matched there")}},
                       {"src_device", "dst_ip"}),
         Json{{"src_device", "r1"},
              {"dst_ip", "10.0.0.1"},
              {"expect_matched", Json{{"r2", "10.0.0.0/24"}}}}});
    t.push_back(
        {"ndt.verify.ACL_SEARCH",
         "Evaluate a packet against the ACLs bound on a device and report the decision. "
         "The decision is deny when any consulted binding denies.",
         object_schema({{"snapshot", prop("string", "a | b | snapshot id")},
                        {"device", prop("string", "device hostname")},
                        {"interface", prop("string", "restrict to one interface")},
                        {"direction", prop("string", "in | out (default: both)")},
                        {"packet", prop("object", "src_ip, dst_ip and optional "
                                                  "protocol/src_port/dst_port")},
                        {"expect_decision", prop("string", "permit | deny")}},
                       {"device", "packet"}),
         Json{{"device", "r1"},
              {"packet", Json{{"src_ip", "10.2.2.5"}, {"dst_ip", "10.0.0.1"},
                              {"protocol", "tcp"}, {"dst_port", 443}}},
              {"expect_decision", "permit"}}});
    t.push_back(
        {"ndt.verify.ACL_COMPARE",
         "Enumerate a bounded header space and report packets the reference and candidate "
         "versions of an ACL treat differently.",
         object_schema(
             {{"snapshot_a", prop("string", "left snapshot (default reference)")},
              {"snapshot_b", prop("string", "right snapshot (default candidate)")},
              {"device", prop("string", "device hostname")},
              {"acl", prop("string", "ACL name on the left snapshot")},
              {"acl_b", prop("string", "ACL name on the right snapshot (default: same)")},
              {"header_space",
               prop("object", "src_prefixes[], dst_prefixes[], protocols[] (default [icmp]), "
                              "src_ports[[lo,hi]], dst_ports[[lo,hi]] (default [[0,0]])")},
              {"expect_equivalent", prop("boolean", "expected verdict (default true)")}},
             {"device", "acl", "header_space"}),
         Json{{"device", "r1"},
              {"acl", "edge"},
              {"header_space", Json{{"src_prefixes", Json::array({"10.9.9.9/32"})},
                                    {"dst_prefixes", Json::array({"10.0.0.0/24"})},
                                    {"protocols", Json::array({"tcp"})},
                                    {"dst_ports", Json::array({Json::array({443, 443})})}}}}});
    t.push_back({"ndt.verify.SLA_VERIFY_SIM",
                 "Run the fluid traffic simulation over the declared demands and check "
                 "every flow against its SLA class thresholds.",
                 object_schema({{"snapshot", prop("string", "a | b | snapshot id")}}, {}),
                 Json{{"snapshot", "b"}}});
    t.push_back(
        {"ndt.verify.SLA_VERIFY_PREDICTOR",
         "Like SLA_VERIFY_SIM but through a named registered predictor.",
         object_schema({{"snapshot", prop("string", "a | b | snapshot id")},
                        {"predictor", prop("string", "registered predictor name")}},
                       {"predictor"}),
         Json{{"snapshot", "b"}, {"predictor", "default"}}});
    t.push_back(
        {"ndt.verify.CONFIG_ANOMALY",
         "Infer per-role change templates between the snapshots and flag the one device "
         "in a group (3+ peers) that missed a change every other member received.",
         object_schema({{"a", prop("string", "left snapshot (default reference)")},
                        {"b", prop("string", "right snapshot (default candidate)")}},
                       {}),
         Json::object()});
    return t;
  }();
  return specs;
}

void validate_params(const ToolSpec& spec, const Json& params) {
  if (!params.is_object()) {
    throw Error(ErrorCode::InvalidParams, spec.name + ": params must be an object");
  }
  const Json& props = spec.params.at("properties");
  for (const auto& req : spec.params.at("required")) {
    if (!params.contains(req.get<std::string>())) {
      throw Error(ErrorCode::InvalidParams,
                  spec.name + ": missing required param \"" + req.get<std::string>() + "\"");
    }
  }
  for (const auto& [key, value] : params.items()) {
    if (!props.contains(key)) {
      throw Error(ErrorCode::InvalidParams, spec.name + ": unknown param \"" + key + "\"");
    }
    const std::string type = props.at(key).at("type").get<std::string>();
    bool ok = type == "string"    ? value.is_string()
              : type == "integer" ? value.is_number_integer()
              : type == "number"  ? value.is_number()
              : type == "boolean" ? value.is_boolean()
              : type == "object"  ? value.is_object()
              : type == "array"   ? value.is_array()
                                  : true;
    if (!ok) {
      throw Error(ErrorCode::InvalidParams,
                  spec.name + ": param \"" + key + "\" must be a " + type);
    }
  }
}

IpAddr parse_addr_param(const Json& value, const std::string& what) {
  if (!value.is_string()) throw Error(ErrorCode::InvalidParams, what + " must be a string");
  auto addr = IpAddr::parse(value.get<std::string>());
  if (!addr) {
    throw Error(ErrorCode::ParseError, "cannot parse " + what + " \"" +
                                           value.get<std::string>() + "\"");
  }
  return *addr;
}

Prefix parse_prefix_param(const Json& value, const std::string& what) {
  if (!value.is_string()) throw Error(ErrorCode::InvalidParams, what + " must be a string");
  auto pfx = Prefix::parse(value.get<std::string>());
  if (!pfx) {
    throw Error(ErrorCode::ParseError, "cannot parse " + what + " \"" +
                                           value.get<std::string>() + "\"");
  }
  return *pfx;
}

VerificationResult not_converged(const Dataplane& dp) {
  VerificationResult r;
  r.status = VerifyStatus::Error;
  r.findings.push_back({"ROUTING_NOT_CONVERGED",
                        "route computation hit the iteration cap; dataplane results are "
                        "unreliable",
                        Json{{"iterations", dp.routes().iterations}}});
  return r;
}

const InterfaceCfg* find_interface_cfg(const DeviceConfig& dev, const std::string& name) {
  for (const auto& itf : dev.interfaces) {
    if (itf.name == name) return &itf;
  }
  return nullptr;
}

AclPacket packet_of(const PacketSpec& p) {
  return AclPacket{p.src_ip, p.dst_ip, p.protocol, p.src_port, p.dst_port};
}

}  // namespace

const char* capability_name(Capability c) {
  return kCapabilityNames[static_cast<size_t>(c)];
}

std::optional<Capability> capability_from_name(const std::string& name) {
  for (size_t i = 0; i < kCapabilityCount; ++i) {
    if (name == kCapabilityNames[i]) return static_cast<Capability>(i);
  }
  return std::nullopt;
}

const char* verify_status_name(VerifyStatus s) {
  switch (s) {
    case VerifyStatus::Pass: return "PASS";
    case VerifyStatus::Fail: return "FAIL";
    case VerifyStatus::Error: return "ERROR";
  }
  return "ERROR";
}

Json VerificationResult::to_json() const {
  Json fs = Json::array();
  for (const auto& f : findings) {
    fs.push_back(Json{{"code", f.code}, {"message", f.message}, {"details", f.details}});
  }
  return Json{{"capability", capability_name(capability)},
              {"status", verify_status_name(status)},
              {"findings", fs},
              {"evidence", evidence},
              {"duration_seconds", duration_seconds}};
}

// ---------------------------------------------------------------------------
// TwinContext
// ---------------------------------------------------------------------------

TwinContext::TwinContext(Repository& repo, std::string snapshot_a, std::string snapshot_b)
    : repo_(&repo), a_(std::move(snapshot_a)), b_(std::move(snapshot_b)) {}

std::string TwinContext::resolve(const std::string& ref) const {
  if (ref == "a") return a_;
  if (ref == "b") return b_;
  return ref;
}

TwinContext::Entry& TwinContext::entry(const std::string& ref) { return cache_[resolve(ref)]; }

const SnapshotContent& TwinContext::content(const std::string& ref) {
  Entry& e = entry(ref);
  if (!e.content) {
    e.content = std::make_unique<SnapshotContent>(repo_->content(resolve(ref)));
  }
  return *e.content;
}

const NetworkSpec& TwinContext::spec(const std::string& ref) {
  Entry& e = entry(ref);
  if (!e.spec) e.spec = std::make_unique<NetworkSpec>(extract_network_spec(content(ref)));
  return *e.spec;
}

const Dataplane& TwinContext::dataplane(const std::string& ref) {
  Entry& e = entry(ref);
  if (!e.dataplane) e.dataplane = std::make_unique<Dataplane>(spec(ref));
  return *e.dataplane;
}

// ---------------------------------------------------------------------------
// ToolRegistry
// ---------------------------------------------------------------------------

ToolRegistry::ToolRegistry(TwinContext& ctx, uint64_t acl_compare_cap)
    : ctx_(&ctx), acl_compare_cap_(acl_compare_cap) {}

std::vector<ToolSpec> ToolRegistry::list_tools() const { return tool_table(); }

bool ToolRegistry::has_tool(const std::string& name) const {
  for (const auto& t : tool_table()) {
    if (t.name == name) return true;
  }
  return false;
}

const ToolSpec& ToolRegistry::tool_spec(const std::string& name) const {
  for (const auto& t : tool_table()) {
    if (t.name == name) return t;
  }
  throw Error(ErrorCode::UnknownTool, "no tool named \"" + name + "\"");
}

Json ToolRegistry::call_tool(const std::string& name, const Json& params) {
  const ToolSpec& spec = tool_spec(name);
  const Json effective = params.is_null() ? Json::object() : params;
  validate_params(spec, effective);

  if (name == "ndm.schema") {
    std::optional<LayerId> layer;
    if (effective.contains("layer")) {
      layer = layer_from_name(effective.at("layer").get<std::string>());
      if (!layer) {
        throw Error(ErrorCode::UnknownLayer,
                    "no layer named \"" + effective.at("layer").get<std::string>() + "\"");
      }
    }
    return schema_describe(layer);
  }
  if (name == "ndm.query") {
    const SnapshotContent& content = ctx_->content(effective.value("snapshot", "b"));
    GraphQuery q = query_from_json(effective.at("query"));
    validate_query(q);
    Json rows = run_query(content, q);
    return Json{{"rows", rows}, {"count", rows.size()}};
  }
  if (name == "ndt.impact_diff") {
    std::string a = ctx_->resolve(effective.value("a", "a"));
    std::string b = ctx_->resolve(effective.value("b", "b"));
    return snapshot_diff_to_json(ctx_->repo().diff(a, b));
  }
  static const std::string kVerifyPrefix = "ndt.verify.";
  auto cap = capability_from_name(name.substr(kVerifyPrefix.size()));
  if (!cap) throw Error(ErrorCode::UnknownTool, "no tool named \"" + name + "\"");
  return verify(*cap, effective).to_json();
}

VerificationResult ToolRegistry::verify(Capability cap, const Json& params) {
  auto start = std::chrono::steady_clock::now();
  VerificationResult result;
  try {
    result = dispatch(cap, params.is_null() ? Json::object() : params);
  } catch (const Error& e) {
    result = VerificationResult{};
    result.status = VerifyStatus::Error;
    result.findings.push_back(
        {error_code_name(e.code()), e.what(), Json{{"detail", e.detail()}}});
  } catch (const std::exception& e) {
    result = VerificationResult{};
    result.status = VerifyStatus::Error;
    result.findings.push_back({"InternalError", e.what(), Json::object()});
  }
  result.capability = cap;
  result.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

VerificationResult ToolRegistry::dispatch(Capability cap, const Json& params) {
  switch (cap) {
    case Capability::MtuConsistency: return verify_mtu(params);
    case Capability::Reachability: return verify_reachability(params);
    case Capability::DifferentialReachability: return verify_differential(params);
    case Capability::LoopDetection: return verify_loops(params);
    case Capability::Traceroute: return verify_traceroute(params);
    case Capability::AclSearch: return verify_acl_search(params);
    case Capability::AclCompare: return verify_acl_compare(params);
    case Capability::SlaVerifySim: return verify_sla(params, false);
    case Capability::SlaVerifyPredictor: return verify_sla(params, true);
    case Capability::ConfigAnomaly: return verify_config_anomaly(params);
  }
  throw Error(ErrorCode::InternalError, "unhandled capability");
}

PacketSpec ToolRegistry::packet_from_params(const Json& params, const std::string& ref) {
  PacketSpec p;
  p.src_device = params.at("src_device").get<std::string>();
  p.dst_ip = parse_addr_param(params.at("dst_ip"), "dst_ip");
  if (params.contains("src_ip")) {
    p.src_ip = parse_addr_param(params.at("src_ip"), "src_ip");
  } else {
    const NetworkSpec& spec = ctx_->spec(ref);
    const DeviceConfig* dev = spec.find_device(p.src_device);
    if (!dev) throw Error(ErrorCode::UnknownDevice, "no device " + p.src_device);
    bool found = false;
    for (const auto& itf : dev->interfaces) {
      if (!itf.enabled) continue;
      const auto& addr = p.dst_ip.family == IpFamily::V4 ? itf.v4_addr : itf.v6_addr;
      if (!addr) continue;
      auto pfx = Prefix::parse(*addr);
      if (!pfx) continue;
      p.src_ip = pfx->addr;
      found = true;
      break;
    }
    if (!found) {
      throw Error(ErrorCode::InvalidParams,
                  "device " + p.src_device + " has no enabled " +
                      family_name(p.dst_ip.family) + " address; pass src_ip explicitly");
    }
  }
  p.protocol = params.value("protocol", "icmp");
  p.src_port = params.value("src_port", int64_t{0});
  p.dst_port = params.value("dst_port", int64_t{0});
  return p;
}

VerificationResult ToolRegistry::verify_mtu(const Json& params) {
  const NetworkSpec& spec = ctx_->spec(params.value("snapshot", "b"));
  VerificationResult r;
  int checked = 0;
  for (const auto& link : spec.links) {
    const DeviceConfig* da = spec.find_device(link.a_device);
    const DeviceConfig* db = spec.find_device(link.b_device);
    const InterfaceCfg* ia = da ? find_interface_cfg(*da, link.a_interface) : nullptr;
    const InterfaceCfg* ib = db ? find_interface_cfg(*db, link.b_interface) : nullptr;
    if (!ia || !ib) continue;  // extraction validates endpoints; belt and braces
    ++checked;
    if (ia->mtu != ib->mtu) {
      r.findings.push_back(
          {"MTU_MISMATCH",
           link.a_device + ":" + link.a_interface + " mtu " + std::to_string(ia->mtu) +
               " != " + link.b_device + ":" + link.b_interface + " mtu " +
               std::to_string(ib->mtu),
           Json{{"a_device", link.a_device},
                {"a_interface", link.a_interface},
                {"a_mtu", ia->mtu},
                {"b_device", link.b_device},
                {"b_interface", link.b_interface},
                {"b_mtu", ib->mtu}}});
    }
  }
  r.evidence = Json{{"links_checked", checked}, {"mismatches", r.findings.size()}};
  r.status = r.findings.empty() ? VerifyStatus::Pass : VerifyStatus::Fail;
  return r;
}

VerificationResult ToolRegistry::verify_reachability(const Json& params) {
  const std::string ref = params.value("snapshot", "b");
  const Dataplane& dp = ctx_->dataplane(ref);
  if (!dp.routes().converged) return not_converged(dp);
  PacketSpec p = packet_from_params(params, ref);
  bool expect = params.value("expect_reachable", true);
  auto traces = dp.forward(p);
  Disposition disp = strict_of(traces);
  bool reachable = disp == Disposition::Delivered;
  VerificationResult r;
  r.evidence = Json{{"reachable", reachable},
                    {"disposition", disposition_name(disp)},
                    {"traces", traces_to_json(traces)}};
  if (reachable != expect) {
    r.status = VerifyStatus::Fail;
    r.findings.push_back({"REACHABILITY_MISMATCH",
                          p.src_device + " -> " + p.dst_ip.str() + " expected " +
                              (expect ? "reachable" : "unreachable") + ", got " +
                              disposition_name(disp),
                          Json{{"src_device", p.src_device},
                               {"dst_ip", p.dst_ip.str()},
                               {"expected_reachable", expect},
                               {"disposition", disposition_name(disp)}}});
  }
  return r;
}

VerificationResult ToolRegistry::verify_differential(const Json& params) {
  const std::string ref_a = params.value("a", "a");
  const std::string ref_b = params.value("b", "b");
  const Dataplane& dpa = ctx_->dataplane(ref_a);
  if (!dpa.routes().converged) return not_converged(dpa);
  const Dataplane& dpb = ctx_->dataplane(ref_b);
  if (!dpb.routes().converged) return not_converged(dpb);

  std::vector<PacketSpec> probes;
  for (const auto& probe : params.at("probes")) {
    if (!probe.is_object()) {
      throw Error(ErrorCode::InvalidParams, "each probe must be an object");
    }
    if (!probe.contains("src_device") || !probe.contains("dst_ip")) {
      throw Error(ErrorCode::InvalidParams, "each probe needs src_device and dst_ip");
    }
    probes.push_back(packet_from_params(probe, ref_b));
  }
  auto diffs = differential_reachability(dpa, dpb, probes);
  VerificationResult r;
  Json diff_json = Json::array();
  for (const auto& d : diffs) {
    Json detail{{"src_device", d.probe.src_device},
                {"dst_ip", d.probe.dst_ip.str()},
                {"before", disposition_name(d.disposition_a)},
                {"after", disposition_name(d.disposition_b)}};
    diff_json.push_back(detail);
    r.findings.push_back({"BEHAVIOR_CHANGED",
                          d.probe.src_device + " -> " + d.probe.dst_ip.str() + " was " +
                              disposition_name(d.disposition_a) + ", now " +
                              disposition_name(d.disposition_b),
                          detail});
  }
  r.evidence = Json{{"probes_run", probes.size()}, {"differences", diff_json}};
  r.status = diffs.empty() ? VerifyStatus::Pass : VerifyStatus::Fail;
  return r;
}

VerificationResult ToolRegistry::verify_loops(const Json& params) {
  const Dataplane& dp = ctx_->dataplane(params.value("snapshot", "b"));
  if (!dp.routes().converged) return not_converged(dp);
  auto loops = dp.detect_loops();
  VerificationResult r;
  Json loops_json = Json::array();
  for (const auto& loop : loops) {
    Json detail{{"prefix", loop.prefix.str()}, {"cycle", loop.cycle}};
    loops_json.push_back(detail);
    std::string path;
    for (const auto& d : loop.cycle) {
      if (!path.empty()) path += " -> ";
      path += d;
    }
    r.findings.push_back(
        {"FORWARDING_LOOP", "prefix " + loop.prefix.str() + " cycles through " + path, detail});
  }
  r.evidence = Json{{"loops", loops_json}, {"count", loops.size()}};
  r.status = loops.empty() ? VerifyStatus::Pass : VerifyStatus::Fail;
  return r;
}

VerificationResult ToolRegistry::verify_traceroute(const Json& params) {
  const std::string ref = params.value("snapshot", "b");
  const Dataplane& dp = ctx_->dataplane(ref);
  if (!dp.routes().converged) return not_converged(dp);
  PacketSpec p = packet_from_params(params, ref);
  auto traces = dp.forward(p);
  Disposition disp = strict_of(traces);
  VerificationResult r;
  r.evidence = Json{{"disposition", disposition_name(disp)}, {"traces", traces_to_json(traces)}};

  if (params.contains("expect_disposition")) {
    const std::string want = params.at("expect_disposition").get<std::string>();
    static const char* kNames[] = {"DELIVERED", "NO_ROUTE", "ACL_DENIED", "LOOP", "DISCARDED"};
    bool known = std::find_if(std::begin(kNames), std::end(kNames), [&](const char* n) {
                   return want == n;
                 }) != std::end(kNames);
    if (!known) {
      throw Error(ErrorCode::InvalidParams, "unknown disposition \"" + want + "\"");
    }
    if (want != disposition_name(disp)) {
      r.findings.push_back({"DISPOSITION_MISMATCH",
                            "expected " + want + ", got " + disposition_name(disp),
                            Json{{"expected", want}, {"actual", disposition_name(disp)}}});
    }
  }
  if (params.contains("expect_matched")) {
    for (const auto& [device, want] : params.at("expect_matched").items()) {
      if (!want.is_string()) {
        throw Error(ErrorCode::InvalidParams, "expect_matched values must be prefix strings");
      }
      const std::string want_prefix = want.get<std::string>();
      bool seen = false;
      for (const auto& t : traces) {
        for (const auto& hop : t.hops) {
          if (hop.device != device) continue;
          seen = true;
          const std::string actual = hop.matched_prefix.value_or("");
          if (actual != want_prefix) {
            r.findings.push_back(
                {"ROUTE_MISMATCH",
                 device + " matched " + (actual.empty() ? "no prefix" : actual) +
                     ", expected " + want_prefix,
                 Json{{"device", device},
                      {"expected_prefix", want_prefix},
                      {"actual_prefix", actual.empty() ? Json(nullptr) : Json(actual)}}});
          }
        }
      }
      if (!seen) {
        r.findings.push_back({"DEVICE_NOT_ON_PATH",
                              device + " does not appear on any forwarding branch",
                              Json{{"device", device}}});
      }
    }
  }
  r.status = r.findings.empty() ? VerifyStatus::Pass : VerifyStatus::Fail;
  return r;
}

VerificationResult ToolRegistry::verify_acl_search(const Json& params) {
  const std::string ref = params.value("snapshot", "b");
  const NetworkSpec& spec = ctx_->spec(ref);
  const std::string device = params.at("device").get<std::string>();
  const DeviceConfig* dev = spec.find_device(device);
  if (!dev) throw Error(ErrorCode::UnknownDevice, "no device " + device);

  const Json& pkt_json = params.at("packet");
  if (!pkt_json.contains("src_ip") || !pkt_json.contains("dst_ip")) {
    throw Error(ErrorCode::InvalidParams, "packet needs src_ip and dst_ip");
  }
  AclPacket pkt;
  pkt.src_ip = parse_addr_param(pkt_json.at("src_ip"), "packet.src_ip");
  pkt.dst_ip = parse_addr_param(pkt_json.at("dst_ip"), "packet.dst_ip");
  pkt.protocol = pkt_json.value("protocol", "icmp");
  pkt.src_port = pkt_json.value("src_port", int64_t{0});
  pkt.dst_port = pkt_json.value("dst_port", int64_t{0});

  std::optional<std::string> want_interface;
  if (params.contains("interface")) want_interface = params.at("interface").get<std::string>();
  std::optional<std::string> want_direction;
  if (params.contains("direction")) {
    want_direction = params.at("direction").get<std::string>();
    if (*want_direction != "in" && *want_direction != "out") {
      throw Error(ErrorCode::InvalidParams, "direction must be \"in\" or \"out\"");
    }
  }

  Json consulted = Json::array();
  bool permit = true;
  for (const auto& acl : dev->acls) {
    for (const auto& binding : acl.applied) {
      if (want_interface && binding.interface != *want_interface) continue;
      if (want_direction && binding.direction != *want_direction) continue;
      AclVerdict v = eval_acl(acl, pkt);
      consulted.push_back(Json{{"interface", binding.interface},
                               {"direction", binding.direction},
                               {"acl", acl.name},
                               {"permit", v.permit},
                               {"seq", v.seq ? Json(*v.seq) : Json(nullptr)}});
      permit = permit && v.permit;
    }
  }
  const std::string decision = permit ? "permit" : "deny";
  VerificationResult r;
  r.evidence = Json{{"decision", decision},
                    {"consulted", consulted},
                    {"bindings_checked", consulted.size()}};
  if (params.contains("expect_decision")) {
    const std::string want = params.at("expect_decision").get<std::string>();
    if (want != "permit" && want != "deny") {
      throw Error(ErrorCode::InvalidParams, "expect_decision must be \"permit\" or \"deny\"");
    }
    if (want != decision) {
      r.status = VerifyStatus::Fail;
      r.findings.push_back({"ACL_DECISION_MISMATCH",
                            device + " " + decision + "s the packet, expected " + want,
                            Json{{"device", device},
                                 {"expected", want},
                                 {"actual", decision},
                                 {"packet", acl_packet_to_json(pkt)}}});
    }
  }
  return r;
}

VerificationResult ToolRegistry::verify_acl_compare(const Json& params) {
  const std::string ref_a = params.value("snapshot_a", "a");
  const std::string ref_b = params.value("snapshot_b", "b");
  const std::string device = params.at("device").get<std::string>();
  const std::string acl_a_name = params.at("acl").get<std::string>();
  const std::string acl_b_name = params.value("acl_b", acl_a_name);

  auto lookup = [&](const std::string& ref, const std::string& acl_name) -> const AclCfg& {
    const NetworkSpec& spec = ctx_->spec(ref);
    const DeviceConfig* dev = spec.find_device(device);
    if (!dev) throw Error(ErrorCode::UnknownDevice, "no device " + device);
    for (const auto& acl : dev->acls) {
      if (acl.name == acl_name) return acl;
    }
    throw Error(ErrorCode::UnknownNodeReference,
                "no ACL \"" + acl_name + "\" on device " + device);
  };
  const AclCfg& acl_a = lookup(ref_a, acl_a_name);
  const AclCfg& acl_b = lookup(ref_b, acl_b_name);

  const Json& hs_json = params.at("header_space");
  HeaderSpace space;
  space.src_ports = {{0, 0}};
  space.dst_ports = {{0, 0}};
  for (const auto& p : hs_json.value("src_prefixes", Json::array())) {
    space.src_prefixes.push_back(parse_prefix_param(p, "src_prefixes entry"));
  }
  for (const auto& p : hs_json.value("dst_prefixes", Json::array())) {
    space.dst_prefixes.push_back(parse_prefix_param(p, "dst_prefixes entry"));
  }
  if (hs_json.contains("protocols")) {
    space.protocols.clear();
    for (const auto& p : hs_json.at("protocols")) space.protocols.push_back(p.get<std::string>());
  } else {
    space.protocols = {"icmp"};
  }
  auto parse_ports = [&](const char* key, std::vector<std::array<int64_t, 2>>& out) {
    if (!hs_json.contains(key)) return;
    out.clear();
    for (const auto& range : hs_json.at(key)) {
      if (!range.is_array() || range.size() != 2) {
        throw Error(ErrorCode::InvalidParams, std::string(key) + " entries must be [lo, hi]");
      }
      out.push_back({range[0].get<int64_t>(), range[1].get<int64_t>()});
    }
  };
  parse_ports("src_ports", space.src_ports);
  parse_ports("dst_ports", space.dst_ports);
  if (space.src_prefixes.empty() || space.dst_prefixes.empty()) {
    throw Error(ErrorCode::InvalidParams, "header_space needs src_prefixes and dst_prefixes");
  }

  auto witnesses = acl_compare(acl_a, acl_b, space, acl_compare_cap_);
  bool equivalent = witnesses.empty();
  bool expect = params.value("expect_equivalent", true);

  VerificationResult r;
  Json wit_json = Json::array();
  for (const auto& w : witnesses) {
    wit_json.push_back(Json{{"packet", acl_packet_to_json(w.packet)},
                            {"verdict_a", verdict_to_json(w.verdict_a)},
                            {"verdict_b", verdict_to_json(w.verdict_b)}});
  }
  r.evidence = Json{{"equivalent", equivalent},
                    {"witness_count", witnesses.size()},
                    {"witnesses", wit_json}};
  if (equivalent != expect) {
    r.status = VerifyStatus::Fail;
    r.findings.push_back(
        {"ACL_EQUIVALENCE_MISMATCH",
         "ACLs are " + std::string(equivalent ? "equivalent" : "not equivalent") +
             " over the header space, expected " +
             (expect ? "equivalent" : "not equivalent"),
         Json{{"witness_count", witnesses.size()}}});
  }
  return r;
}

VerificationResult ToolRegistry::verify_sla(const Json& params, bool predictor_tool) {
  const std::string ref = params.value("snapshot", "b");
  const Dataplane& dp = ctx_->dataplane(ref);
  if (!dp.routes().converged) return not_converged(dp);
  const std::string predictor_name =
      predictor_tool ? params.at("predictor").get<std::string>() : std::string("default");
  SlaPredictor predictor = get_sla_predictor(predictor_name);
  SlaReport report = predictor(dp);

  VerificationResult r;
  for (const auto& flow : report.flows) {
    if (flow.pass) continue;
    const SlaClassCfg* cls = nullptr;
    for (const auto& c : dp.spec().sla_classes) {
      if (c.name == flow.sla_class) cls = &c;
    }
    Json detail{{"flow", flow.flow},
                {"class", flow.sla_class},
                {"loss_fraction", flow.loss_fraction},
                {"mean_delay_ms", flow.mean_delay_ms ? Json(*flow.mean_delay_ms) : Json(nullptr)},
                {"loss_ok", flow.loss_ok},
                {"delay_ok", flow.delay_ok}};
    if (cls) {
      detail["max_loss"] = cls->max_loss;
      detail["max_delay_ms"] = cls->max_delay_ms;
    }
    r.findings.push_back({"SLA_VIOLATION",
                          "flow " + flow.flow + " violates class " + flow.sla_class,
                          detail});
  }
  r.evidence = Json{{"predictor", predictor_name}, {"report", sla_report_to_json(report)}};
  r.status = report.pass ? VerifyStatus::Pass : VerifyStatus::Fail;
  return r;
}

VerificationResult ToolRegistry::verify_config_anomaly(const Json& params) {
  const NetworkSpec& spec_a = ctx_->spec(params.value("a", "a"));
  const NetworkSpec& spec_b = ctx_->spec(params.value("b", "b"));

  auto role_of = [](const std::string& hostname) {
    size_t end = hostname.size();
    while (end > 0 && std::isdigit(static_cast<unsigned char>(hostname[end - 1]))) --end;
    return hostname.substr(0, end);
  };

  std::map<std::string, std::map<std::string, Json>> flat_a, flat_b;
  std::map<std::string, std::set<std::string>> groups;
  for (const auto& dev : spec_a.devices) {
    flat_a[dev.hostname] = flatten_device_config(dev);
    groups[role_of(dev.hostname)].insert(dev.hostname);
  }
  for (const auto& dev : spec_b.devices) {
    flat_b[dev.hostname] = flatten_device_config(dev);
    groups[role_of(dev.hostname)].insert(dev.hostname);
  }

  VerificationResult r;
  Json groups_json = Json::array();
  for (const auto& [role, devices] : groups) {
    if (devices.size() < 3) {
      groups_json.push_back(Json{{"role", role},
                                 {"devices", devices},
                                 {"skipped", "group smaller than 3; no template inferred"}});
      continue;
    }
    std::set<std::string> keys;
    for (const auto& d : devices) {
      for (const auto& [k, v] : flat_a[d]) keys.insert(k);
      for (const auto& [k, v] : flat_b[d]) keys.insert(k);
    }
    size_t flagged_keys = 0;
    for (const auto& key : keys) {
      std::set<std::string> changed;
      for (const auto& d : devices) {
        const auto& fa = flat_a[d];
        const auto& fb = flat_b[d];
        auto ia = fa.find(key);
        auto ib = fb.find(key);
        bool same = ia != fa.end() && ib != fb.end() && ia->second == ib->second;
        if (ia == fa.end() && ib == fb.end()) same = true;
        if (!same) changed.insert(d);
      }
      if (changed.size() != devices.size() - 1) continue;
      ++flagged_keys;
      for (const auto& d : devices) {
        if (changed.count(d)) continue;
        r.findings.push_back(
            {"MISSED_CHANGE",
             d + " did not receive the change to " + key + " applied to every other \"" +
                 role + "\" device",
             Json{{"device", d},
                  {"key", key},
                  {"role", role},
                  {"changed_devices", changed}}});
      }
    }
    groups_json.push_back(
        Json{{"role", role}, {"devices", devices}, {"keys_flagged", flagged_keys}});
  }
  r.evidence = Json{{"groups", groups_json}};
  r.status = r.findings.empty() ? VerifyStatus::Pass : VerifyStatus::Fail;
  return r;
}

// ---------------------------------------------------------------------------
// Ingestion pipeline
// ---------------------------------------------------------------------------

SnapshotMeta commit_network(Repository& repo, OpenSnapshot& snapshot, const NetworkSpec& spec,
                            const std::string& message, bool* converged) {
  for (auto& payload : base_layer_payloads(spec)) {
    snapshot.upsert(payload.layer, std::move(payload.nodes), std::move(payload.edges));
  }
  RouteComputation routes = compute_routes(spec);
  if (converged) *converged = routes.converged;
  LayerPayload routing = routing_payload(routes);
  snapshot.upsert(routing.layer, std::move(routing.nodes), std::move(routing.edges));
  return repo.commit(snapshot, message);
}

SnapshotMeta commit_network(Repository& repo, const std::string& branch, const NetworkSpec& spec,
                            const std::string& message, bool* converged) {
  OpenSnapshot snapshot = repo.checkout(branch);
  return commit_network(repo, snapshot, spec, message, converged);
}

}  // namespace nettwin
