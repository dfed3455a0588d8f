#include "nettwin/kg.hpp"

#include <algorithm>
#include <unordered_map>

#include "nettwin/digest.hpp"

namespace nettwin {

// ---------------------------------------------------------------------------
// Layers
// ---------------------------------------------------------------------------

const char* layer_name(LayerId layer) {
  switch (layer) {
    case LayerId::Device: return "DEVICE";
    case LayerId::Interfaces: return "INTERFACES";
    case LayerId::IpSettings: return "IP_SETTINGS";
    case LayerId::Routing: return "ROUTING";
    case LayerId::Acl: return "ACL";
    case LayerId::RawConfig: return "RAW_CONFIG";
    case LayerId::Metrics: return "METRICS";
  }
  return "?";
}

std::optional<LayerId> layer_from_name(const std::string& name) {
  for (LayerId l : kAllLayers) {
    if (name == layer_name(l)) return l;
  }
  return std::nullopt;
}

std::vector<LayerId> dependents_of(LayerId layer) {
  switch (layer) {
    case LayerId::RawConfig:
      return {LayerId::Interfaces, LayerId::IpSettings, LayerId::Acl};
    case LayerId::Interfaces:
    case LayerId::IpSettings:
    case LayerId::Acl:
      return {LayerId::Routing};
    default:
      return {};
  }
}

std::set<LayerId> dependency_closure(const std::set<LayerId>& layers) {
  std::set<LayerId> out = layers;
  std::vector<LayerId> work(layers.begin(), layers.end());
  while (!work.empty()) {
    LayerId l = work.back();
    work.pop_back();
    for (LayerId d : dependents_of(l)) {
      if (out.insert(d).second) work.push_back(d);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Attr values
// ---------------------------------------------------------------------------

Json attr_to_json(const AttrValue& v) {
  return std::visit([](const auto& x) { return Json(x); }, v);
}

AttrValue attr_from_json(const Json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer() || j.is_number_unsigned()) return j.get<int64_t>();
  if (j.is_number_float()) return j.get<double>();
  throw Error(ErrorCode::SchemaViolation, "attr value must be string/int/number/bool");
}

namespace {

AttrType attr_value_type(const AttrValue& v) {
  switch (v.index()) {
    case 0: return AttrType::Str;
    case 1: return AttrType::Int;
    case 2: return AttrType::Num;
    default: return AttrType::Bool;
  }
}

std::string attr_value_str(const AttrValue& v) {
  return attr_to_json(v).dump();
}

}  // namespace

const char* attr_type_name(AttrType t) {
  switch (t) {
    case AttrType::Str: return "str";
    case AttrType::Int: return "int";
    case AttrType::Num: return "num";
    case AttrType::Bool: return "bool";
  }
  return "?";
}

const char* edge_kind_name(EdgeKind k) { return k == EdgeKind::Own ? "OWN" : "CONNECT"; }

std::optional<EdgeKind> edge_kind_from_name(const std::string& name) {
  if (name == "OWN") return EdgeKind::Own;
  if (name == "CONNECT") return EdgeKind::Connect;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// JSON codecs
// ---------------------------------------------------------------------------

Json node_to_json(const KgNode& n) {
  Json attrs = Json::object();
  for (const auto& [k, v] : n.attrs) attrs[k] = attr_to_json(v);
  return Json{{"id", n.id},
              {"device", n.device},
              {"layer", layer_name(n.layer)},
              {"kind", n.kind},
              {"attrs", attrs}};
}

KgNode node_from_json(const Json& j) {
  KgNode n;
  n.id = j.at("id").get<std::string>();
  n.device = j.at("device").get<std::string>();
  auto layer = layer_from_name(j.at("layer").get<std::string>());
  if (!layer) throw Error(ErrorCode::SchemaViolation, "unknown layer in node payload");
  n.layer = *layer;
  n.kind = j.at("kind").get<std::string>();
  for (const auto& [k, v] : j.at("attrs").items()) n.attrs[k] = attr_from_json(v);
  return n;
}

Json edge_to_json(const KgEdge& e) {
  return Json{{"from", e.from}, {"to", e.to}, {"kind", edge_kind_name(e.kind)}};
}

KgEdge edge_from_json(const Json& j) {
  KgEdge e;
  e.from = j.at("from").get<std::string>();
  e.to = j.at("to").get<std::string>();
  auto kind = edge_kind_from_name(j.at("kind").get<std::string>());
  if (!kind) throw Error(ErrorCode::SchemaViolation, "unknown edge kind");
  e.kind = *kind;
  return e;
}

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

const std::vector<KindSchema>& schema() {
  static const std::vector<KindSchema> table = {
      {LayerId::Device,
       "device",
       "A managed network device.",
       {"name"},
       {{"name", AttrType::Str, true, "Device hostname."}}},
      {LayerId::Interfaces,
       "interface",
       "A physical or logical interface on a device.",
       {"name"},
       {{"name", AttrType::Str, true, "Interface name, unique per device."},
        {"mtu", AttrType::Int, true, "Configured MTU in bytes."},
        {"enabled", AttrType::Bool, true, "Administrative state."}}},
      {LayerId::IpSettings,
       "ip-address",
       "An address configured on an interface.",
       {"interface", "address"},
       {{"interface", AttrType::Str, true, "Owning interface name."},
        {"address", AttrType::Str, true, "Address with prefix length, as configured."},
        {"family", AttrType::Str, true, "Address family: v4 or v6."}}},
      {LayerId::Routing,
       "rib-entry",
       "A computed forwarding entry; at most one per (device, prefix).",
       {"prefix"},
       {{"prefix", AttrType::Str, true, "Destination prefix."},
        {"protocol", AttrType::Str, true, "CONNECTED, STATIC, IGP or SUMMARY_DISCARD."},
        {"metric", AttrType::Int, true, "Route metric."},
        {"admin_distance", AttrType::Int, true, "Administrative distance."},
        {"metric_type", AttrType::Str, true, "internal or external."},
        {"origin_process", AttrType::Str, false, "Originating IGP process, when preserved."},
        {"learned_via", AttrType::Str, false, "IGP process the route was learned from."},
        {"next_hops", AttrType::Str, true,
         "Comma-joined out_interface>next_device pairs; empty for discard entries."}}},
      {LayerId::Acl,
       "acl-rule",
       "One rule of a named ACL.",
       {"acl", "seq"},
       {{"acl", AttrType::Str, true, "ACL name."},
        {"seq", AttrType::Int, true, "Rule sequence number, unique per ACL."},
        {"action", AttrType::Str, true, "permit or deny."},
        {"protocol", AttrType::Str, true, "any, tcp, udp or icmp."},
        {"src_prefix", AttrType::Str, true, "Source prefix."},
        {"dst_prefix", AttrType::Str, true, "Destination prefix."},
        {"src_port_lo", AttrType::Int, true, "Source port range low bound."},
        {"src_port_hi", AttrType::Int, true, "Source port range high bound."},
        {"dst_port_lo", AttrType::Int, true, "Destination port range low bound."},
        {"dst_port_hi", AttrType::Int, true, "Destination port range high bound."}}},
      {LayerId::Acl,
       "acl-binding",
       "Attachment of an ACL to an interface direction.",
       {"acl", "interface", "direction"},
       {{"acl", AttrType::Str, true, "ACL name."},
        {"interface", AttrType::Str, true, "Interface the ACL is applied on."},
        {"direction", AttrType::Str, true, "in or out."}}},
      {LayerId::RawConfig,
       "config",
       "Canonical serialized device configuration.",
       {},
       {{"text", AttrType::Str, true, "Canonical JSON of the device config."}}},
      {LayerId::Metrics,
       "link",
       "A point-to-point link between two device interfaces.",
       {"name"},
       {{"name", AttrType::Str, true, "Canonical link name a:if~b:if."},
        {"a_device", AttrType::Str, true, "First endpoint device."},
        {"a_interface", AttrType::Str, true, "First endpoint interface."},
        {"b_device", AttrType::Str, true, "Second endpoint device."},
        {"b_interface", AttrType::Str, true, "Second endpoint interface."},
        {"capacity_bps", AttrType::Int, true, "Link capacity in bits per second."},
        {"prop_delay_ms", AttrType::Num, true, "One-way propagation delay in ms."}}},
      {LayerId::Metrics,
       "demand",
       "An offered traffic flow.",
       {"flow"},
       {{"flow", AttrType::Str, true, "Flow identifier."},
        {"src", AttrType::Str, true, "Source device."},
        {"dst_ip", AttrType::Str, true, "Destination address."},
        {"rate_bps", AttrType::Int, true, "Offered rate in bits per second."},
        {"class", AttrType::Str, true, "SLA class name."}}},
      {LayerId::Metrics,
       "sla-class",
       "Service level thresholds for a traffic class.",
       {"class"},
       {{"class", AttrType::Str, true, "Class name."},
        {"max_delay_ms", AttrType::Num, true, "Maximum acceptable mean delay in ms."},
        {"max_loss", AttrType::Num, true, "Maximum acceptable loss fraction."}}},
  };
  return table;
}

const KindSchema* find_kind(LayerId layer, const std::string& kind) {
  for (const auto& k : schema()) {
    if (k.layer == layer && k.kind == kind) return &k;
  }
  return nullptr;
}

std::string make_node_id(const std::string& device, LayerId layer, const std::string& kind,
                         const AttrMap& attrs) {
  const KindSchema* ks = find_kind(layer, kind);
  if (!ks) throw Error(ErrorCode::SchemaViolation, "unknown kind " + kind);
  std::string local;
  if (ks->key_attrs.empty()) {
    local = kind;
  } else {
    for (size_t i = 0; i < ks->key_attrs.size(); ++i) {
      auto it = attrs.find(ks->key_attrs[i]);
      if (it == attrs.end()) {
        throw Error(ErrorCode::SchemaViolation,
                    "missing key attr " + ks->key_attrs[i] + " for kind " + kind);
      }
      if (i) local += "&";
      local += attr_value_str(it->second);
    }
  }
  return device + "|" + layer_name(layer) + "|" + kind + "|" + local;
}

KgNode make_node(const std::string& device, LayerId layer, const std::string& kind,
                 AttrMap attrs) {
  KgNode n;
  n.device = device;
  n.layer = layer;
  n.kind = kind;
  n.attrs = std::move(attrs);
  n.id = make_node_id(device, layer, kind, n.attrs);
  return n;
}

Json schema_describe(std::optional<LayerId> layer, const std::optional<std::string>& kind) {
  Json out = Json::array();
  for (const auto& ks : schema()) {
    if (layer && ks.layer != *layer) continue;
    if (kind && ks.kind != *kind) continue;
    Json attrs = Json::array();
    for (const auto& a : ks.attrs) {
      attrs.push_back(Json{{"name", a.name},
                           {"type", attr_type_name(a.type)},
                           {"required", a.required},
                           {"description", a.description}});
    }
    GraphQuery example;
    example.start.layer = ks.layer;
    example.start.kind = ks.kind;
    for (const auto& key : ks.key_attrs) example.project.push_back(key);
    if (example.project.empty()) example.project.push_back(ks.attrs.front().name);
    example.limit = 5;
    out.push_back(Json{{"layer", layer_name(ks.layer)},
                       {"kind", ks.kind},
                       {"description", ks.description},
                       {"key_attrs", ks.key_attrs},
                       {"attrs", attrs},
                       {"example_query", query_to_json(example)}});
  }
  if (out.empty()) {
    throw Error(ErrorCode::UnknownLayer, "no schema entries match the requested scope");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Slices and digests
// ---------------------------------------------------------------------------

std::vector<DeviceLayer> edge_slices(const SnapshotContent& content, const KgEdge& e) {
  std::vector<DeviceLayer> out;
  auto fi = content.nodes.find(e.from);
  auto ti = content.nodes.find(e.to);
  if (fi == content.nodes.end() || ti == content.nodes.end()) return out;
  if (e.kind == EdgeKind::Own) {
    out.push_back({ti->second.device, ti->second.layer});
  } else {
    out.push_back({fi->second.device, fi->second.layer});
    DeviceLayer other{ti->second.device, ti->second.layer};
    if (out.front() != other) out.push_back(other);
  }
  return out;
}

LayerSlice extract_slice(const SnapshotContent& content, const std::string& device,
                         LayerId layer) {
  LayerSlice slice;
  for (const auto& [id, node] : content.nodes) {
    if (node.device == device && node.layer == layer) slice.nodes.push_back(node);
  }
  DeviceLayer want{device, layer};
  for (const auto& e : content.edges) {
    for (const auto& dl : edge_slices(content, e)) {
      if (dl == want) {
        slice.edges.push_back(e);
        break;
      }
    }
  }
  return slice;  // nodes/edges already sorted: source containers are ordered
}

namespace {

void encode_attr(Encoder& enc, const std::string& key, const AttrValue& v) {
  enc.str(key);
  enc.u8(static_cast<uint8_t>(v.index()));
  switch (v.index()) {
    case 0: enc.str(std::get<std::string>(v)); break;
    case 1: enc.i64(std::get<int64_t>(v)); break;
    case 2: enc.f64(std::get<double>(v)); break;
    default: enc.u8(std::get<bool>(v) ? 1 : 0); break;
  }
}

void encode_slice(Encoder& enc, const LayerSlice& slice) {
  enc.u32(static_cast<uint32_t>(slice.nodes.size()));
  for (const auto& n : slice.nodes) {
    enc.str(n.id);
    enc.str(n.device);
    enc.str(layer_name(n.layer));
    enc.str(n.kind);
    enc.u32(static_cast<uint32_t>(n.attrs.size()));
    for (const auto& [k, v] : n.attrs) encode_attr(enc, k, v);
  }
  enc.u32(static_cast<uint32_t>(slice.edges.size()));
  for (const auto& e : slice.edges) {
    enc.str(e.from);
    enc.str(e.to);
    enc.u8(static_cast<uint8_t>(e.kind));
  }
}

}  // namespace

std::string slice_digest(const LayerSlice& slice) {
  Encoder enc;
  encode_slice(enc, slice);
  return sha256_hex(enc.bytes());
}

std::map<DeviceLayer, std::string> layer_digests(const SnapshotContent& content) {
  std::map<DeviceLayer, LayerSlice> slices;
  for (const auto& [id, node] : content.nodes) {
    slices[{node.device, node.layer}].nodes.push_back(node);
  }
  for (const auto& e : content.edges) {
    for (const auto& dl : edge_slices(content, e)) slices[dl].edges.push_back(e);
  }
  std::map<DeviceLayer, std::string> out;
  for (const auto& [dl, slice] : slices) out[dl] = slice_digest(slice);
  return out;
}

std::string combined_layer_digest(const SnapshotContent& content, LayerId layer) {
  auto digests = layer_digests(content);
  Encoder enc;
  for (const auto& [dl, digest] : digests) {
    if (dl.layer != layer) continue;
    enc.str(dl.device);
    enc.str(digest);
  }
  return sha256_hex(enc.bytes());
}

Json slice_to_json(const LayerSlice& slice) {
  Json nodes = Json::array();
  for (const auto& n : slice.nodes) nodes.push_back(node_to_json(n));
  Json edges = Json::array();
  for (const auto& e : slice.edges) edges.push_back(edge_to_json(e));
  return Json{{"nodes", nodes}, {"edges", edges}};
}

LayerSlice slice_from_json(const Json& j) {
  LayerSlice slice;
  for (const auto& n : j.at("nodes")) slice.nodes.push_back(node_from_json(n));
  for (const auto& e : j.at("edges")) slice.edges.push_back(edge_from_json(e));
  return slice;
}

void merge_slice(SnapshotContent& content, const LayerSlice& slice) {
  for (const auto& n : slice.nodes) content.nodes[n.id] = n;
  for (const auto& e : slice.edges) content.edges.insert(e);
}

// ---------------------------------------------------------------------------
// Upsert + validation
// ---------------------------------------------------------------------------

void validate_node(const KgNode& node) {
  const KindSchema* ks = find_kind(node.layer, node.kind);
  if (!ks) {
    throw Error(ErrorCode::SchemaViolation, "kind " + node.kind + " not defined in layer " +
                                                layer_name(node.layer));
  }
  if (node.device.empty()) {
    throw Error(ErrorCode::SchemaViolation, "node " + node.id + " has empty device");
  }
  for (const auto& [k, v] : node.attrs) {
    const AttrSchema* as = nullptr;
    for (const auto& a : ks->attrs) {
      if (a.name == k) {
        as = &a;
        break;
      }
    }
    if (!as) {
      throw Error(ErrorCode::SchemaViolation,
                  "attr " + k + " not defined for kind " + node.kind);
    }
    AttrType got = attr_value_type(v);
    bool ok = got == as->type || (as->type == AttrType::Num && got == AttrType::Int);
    if (!ok) {
      throw Error(ErrorCode::SchemaViolation, "attr " + k + " of kind " + node.kind +
                                                  " must have type " + attr_type_name(as->type));
    }
  }
  for (const auto& a : ks->attrs) {
    if (a.required && !node.attrs.count(a.name)) {
      throw Error(ErrorCode::SchemaViolation,
                  "required attr " + a.name + " missing on kind " + node.kind);
    }
  }
  if (node.id != make_node_id(node.device, node.layer, node.kind, node.attrs)) {
    throw Error(ErrorCode::SchemaViolation, "node id " + node.id + " does not match key attrs");
  }
}

void validate_edge(const SnapshotContent& content, const KgEdge& edge) {
  auto fi = content.nodes.find(edge.from);
  if (fi == content.nodes.end()) {
    throw Error(ErrorCode::UnknownNodeReference, "edge endpoint " + edge.from + " not found");
  }
  auto ti = content.nodes.find(edge.to);
  if (ti == content.nodes.end()) {
    throw Error(ErrorCode::UnknownNodeReference, "edge endpoint " + edge.to + " not found");
  }
  const KgNode& from = fi->second;
  const KgNode& to = ti->second;
  if (edge.kind == EdgeKind::Own) {
    if (from.layer != LayerId::Device) {
      throw Error(ErrorCode::SchemaViolation, "OWN edge must start at a DEVICE node");
    }
    if (to.layer == LayerId::Device) {
      throw Error(ErrorCode::SchemaViolation, "OWN edge must end at a non-DEVICE node");
    }
    if (from.device != to.device) {
      throw Error(ErrorCode::SchemaViolation, "OWN edge must stay within one device");
    }
  } else {
    if (from.layer != to.layer) {
      throw Error(ErrorCode::SchemaViolation, "CONNECT edge must join nodes of one layer");
    }
    if (from.layer == LayerId::Device) {
      throw Error(ErrorCode::SchemaViolation, "CONNECT edges are not allowed in DEVICE layer");
    }
    if (from.device == to.device) {
      throw Error(ErrorCode::SchemaViolation, "CONNECT edge must join different devices");
    }
  }
}

std::string upsert_layer(SnapshotContent& content, LayerId layer, std::vector<KgNode> nodes,
                         std::vector<KgEdge> edges) {
  std::set<std::string> devices;
  for (const auto& n : nodes) {
    if (n.layer != layer) {
      throw Error(ErrorCode::SchemaViolation,
                  "node " + n.id + " does not belong to layer " + layer_name(layer));
    }
    validate_node(n);
    devices.insert(n.device);
  }

  // Drop the replaced slices (nodes and their attributed edges).
  for (auto it = content.edges.begin(); it != content.edges.end();) {
    bool drop = false;
    for (const auto& dl : edge_slices(content, *it)) {
      if (dl.layer == layer && devices.count(dl.device)) {
        drop = true;
        break;
      }
    }
    it = drop ? content.edges.erase(it) : ++it;
  }
  for (auto it = content.nodes.begin(); it != content.nodes.end();) {
    if (it->second.layer == layer && devices.count(it->second.device)) {
      it = content.nodes.erase(it);
    } else {
      ++it;
    }
  }

  for (auto& n : nodes) {
    auto [it, inserted] = content.nodes.try_emplace(n.id, std::move(n));
    if (!inserted) {
      throw Error(ErrorCode::SchemaViolation, "duplicate node id " + it->first);
    }
  }
  for (const auto& e : edges) {
    validate_edge(content, e);
    content.edges.insert(e);
  }
  return combined_layer_digest(content, layer);
}

// ---------------------------------------------------------------------------
// Query codec
// ---------------------------------------------------------------------------

namespace {

const char* pred_op_name(PredOp op) {
  switch (op) {
    case PredOp::Eq: return "eq";
    case PredOp::Ne: return "ne";
    case PredOp::Lt: return "lt";
    case PredOp::Le: return "le";
    case PredOp::Gt: return "gt";
    case PredOp::Ge: return "ge";
    case PredOp::PrefixMatch: return "prefix";
  }
  return "?";
}

std::optional<PredOp> pred_op_from_name(const std::string& s) {
  for (PredOp op : {PredOp::Eq, PredOp::Ne, PredOp::Lt, PredOp::Le, PredOp::Gt, PredOp::Ge,
                    PredOp::PrefixMatch}) {
    if (s == pred_op_name(op)) return op;
  }
  return std::nullopt;
}

const char* dir_name(ExpandDir d) {
  switch (d) {
    case ExpandDir::Out: return "out";
    case ExpandDir::In: return "in";
    case ExpandDir::Any: return "any";
  }
  return "?";
}

std::optional<ExpandDir> dir_from_name(const std::string& s) {
  if (s == "out") return ExpandDir::Out;
  if (s == "in") return ExpandDir::In;
  if (s == "any") return ExpandDir::Any;
  return std::nullopt;
}

Json preds_to_json(const std::vector<AttrPred>& preds) {
  Json out = Json::array();
  for (const auto& p : preds) {
    out.push_back(Json{{"attr", p.attr}, {"op", pred_op_name(p.op)}, {"value", attr_to_json(p.value)}});
  }
  return out;
}

std::vector<AttrPred> preds_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidQuery, "where must be an array");
  std::vector<AttrPred> out;
  for (const auto& p : j) {
    if (!p.is_object() || !p.contains("attr") || !p.contains("op") || !p.contains("value")) {
      throw Error(ErrorCode::InvalidQuery, "predicate needs attr/op/value");
    }
    auto op = pred_op_from_name(p.at("op").get<std::string>());
    if (!op) throw Error(ErrorCode::InvalidQuery, "unknown predicate op " + p.at("op").dump());
    AttrValue value;
    try {
      value = attr_from_json(p.at("value"));
    } catch (const Error&) {
      throw Error(ErrorCode::InvalidQuery, "predicate value must be a scalar");
    }
    out.push_back({p.at("attr").get<std::string>(), *op, value});
  }
  return out;
}

LayerId layer_from_json_field(const Json& j, const char* context) {
  if (!j.is_string()) throw Error(ErrorCode::InvalidQuery, std::string(context) + ": layer must be a string");
  auto layer = layer_from_name(j.get<std::string>());
  if (!layer) throw Error(ErrorCode::InvalidQuery, std::string(context) + ": unknown layer " + j.get<std::string>());
  return *layer;
}

}  // namespace

Json query_to_json(const GraphQuery& q) {
  Json start{{"layer", layer_name(q.start.layer)}};
  if (q.start.kind) start["kind"] = *q.start.kind;
  if (!q.start.where.empty()) start["where"] = preds_to_json(q.start.where);
  Json out{{"start", start}};
  if (!q.expand.empty()) {
    Json expands = Json::array();
    for (const auto& e : q.expand) {
      Json step{{"edge", edge_kind_name(e.edge)}, {"dir", dir_name(e.dir)}};
      if (e.layer) step["layer"] = layer_name(*e.layer);
      if (e.kind) step["kind"] = *e.kind;
      if (!e.where.empty()) step["where"] = preds_to_json(e.where);
      expands.push_back(step);
    }
    out["expand"] = expands;
  }
  if (!q.project.empty()) out["project"] = q.project;
  if (q.limit) out["limit"] = *q.limit;
  return out;
}

GraphQuery query_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("start")) {
    throw Error(ErrorCode::InvalidQuery, "query must be an object with a start clause");
  }
  GraphQuery q;
  const Json& start = j.at("start");
  if (!start.is_object() || !start.contains("layer")) {
    throw Error(ErrorCode::InvalidQuery, "start clause needs a layer");
  }
  q.start.layer = layer_from_json_field(start.at("layer"), "start");
  if (start.contains("kind")) q.start.kind = start.at("kind").get<std::string>();
  if (start.contains("where")) q.start.where = preds_from_json(start.at("where"));
  if (j.contains("expand")) {
    if (!j.at("expand").is_array()) throw Error(ErrorCode::InvalidQuery, "expand must be an array");
    for (const auto& s : j.at("expand")) {
      QueryExpand e;
      if (!s.is_object() || !s.contains("edge")) {
        throw Error(ErrorCode::InvalidQuery, "expand step needs an edge kind");
      }
      auto kind = edge_kind_from_name(s.at("edge").get<std::string>());
      if (!kind) throw Error(ErrorCode::InvalidQuery, "unknown edge kind " + s.at("edge").dump());
      e.edge = *kind;
      if (s.contains("dir")) {
        auto dir = dir_from_name(s.at("dir").get<std::string>());
        if (!dir) throw Error(ErrorCode::InvalidQuery, "unknown dir " + s.at("dir").dump());
        e.dir = *dir;
      }
      if (s.contains("layer")) e.layer = layer_from_json_field(s.at("layer"), "expand");
      if (s.contains("kind")) e.kind = s.at("kind").get<std::string>();
      if (s.contains("where")) e.where = preds_from_json(s.at("where"));
      q.expand.push_back(e);
    }
  }
  if (j.contains("project")) {
    if (!j.at("project").is_array()) throw Error(ErrorCode::InvalidQuery, "project must be an array");
    for (const auto& p : j.at("project")) q.project.push_back(p.get<std::string>());
  }
  if (j.contains("limit")) {
    if (!j.at("limit").is_number_unsigned() && !j.at("limit").is_number_integer()) {
      throw Error(ErrorCode::InvalidQuery, "limit must be a non-negative integer");
    }
    auto v = j.at("limit").get<int64_t>();
    if (v < 0) throw Error(ErrorCode::InvalidQuery, "limit must be non-negative");
    q.limit = static_cast<uint32_t>(v);
  }
  return q;
}

// ---------------------------------------------------------------------------
// Query validation + execution
// ---------------------------------------------------------------------------

namespace {

bool is_builtin_attr(const std::string& name) {
  return name == "id" || name == "device" || name == "kind" || name == "layer";
}

bool kind_has_attr(const KindSchema& ks, const std::string& attr) {
  for (const auto& a : ks.attrs) {
    if (a.name == attr) return true;
  }
  return false;
}

// Checks an attr reference against the scope of (layer?, kind?).
void check_attr_ref(const std::string& attr, std::optional<LayerId> layer,
                    const std::optional<std::string>& kind) {
  if (is_builtin_attr(attr)) return;
  for (const auto& ks : schema()) {
    if (layer && ks.layer != *layer) continue;
    if (kind && ks.kind != *kind) continue;
    if (kind_has_attr(ks, attr)) return;
  }
  throw Error(ErrorCode::InvalidQuery, "attr " + attr + " does not exist in the schema scope");
}

void check_kind_ref(LayerId layer, const std::string& kind) {
  if (!find_kind(layer, kind)) {
    throw Error(ErrorCode::InvalidQuery,
                "kind " + kind + " does not exist in layer " + layer_name(layer));
  }
}

bool attr_as_double(const AttrValue& v, double& out) {
  if (std::holds_alternative<int64_t>(v)) {
    out = static_cast<double>(std::get<int64_t>(v));
    return true;
  }
  if (std::holds_alternative<double>(v)) {
    out = std::get<double>(v);
    return true;
  }
  return false;
}

bool eval_pred(const KgNode& node, const AttrPred& pred) {
  AttrValue actual;
  if (pred.attr == "id") {
    actual = node.id;
  } else if (pred.attr == "device") {
    actual = node.device;
  } else if (pred.attr == "kind") {
    actual = node.kind;
  } else if (pred.attr == "layer") {
    actual = std::string(layer_name(node.layer));
  } else {
    auto it = node.attrs.find(pred.attr);
    if (it == node.attrs.end()) return false;
    actual = it->second;
  }
  switch (pred.op) {
    case PredOp::Eq:
    case PredOp::Ne: {
      bool eq;
      double a, b;
      if (attr_as_double(actual, a) && attr_as_double(pred.value, b)) {
        eq = a == b;
      } else {
        eq = actual == pred.value;
      }
      return pred.op == PredOp::Eq ? eq : !eq;
    }
    case PredOp::Lt:
    case PredOp::Le:
    case PredOp::Gt:
    case PredOp::Ge: {
      double a, b;
      if (!attr_as_double(actual, a) || !attr_as_double(pred.value, b)) return false;
      switch (pred.op) {
        case PredOp::Lt: return a < b;
        case PredOp::Le: return a <= b;
        case PredOp::Gt: return a > b;
        default: return a >= b;
      }
    }
    case PredOp::PrefixMatch: {
      if (!std::holds_alternative<std::string>(actual) ||
          !std::holds_alternative<std::string>(pred.value)) {
        return false;
      }
      const auto& s = std::get<std::string>(actual);
      const auto& p = std::get<std::string>(pred.value);
      return s.size() >= p.size() && s.compare(0, p.size(), p) == 0;
    }
  }
  return false;
}

}  // namespace

void validate_query(const GraphQuery& q) {
  if (q.start.kind) check_kind_ref(q.start.layer, *q.start.kind);
  for (const auto& p : q.start.where) check_attr_ref(p.attr, q.start.layer, q.start.kind);

  std::optional<LayerId> scope_layer = q.start.layer;
  std::optional<std::string> scope_kind = q.start.kind;
  for (const auto& e : q.expand) {
    if (e.layer && e.kind) check_kind_ref(*e.layer, *e.kind);
    for (const auto& p : e.where) check_attr_ref(p.attr, e.layer, e.kind);
    scope_layer = e.layer;
    scope_kind = e.kind;
  }
  for (const auto& name : q.project) check_attr_ref(name, scope_layer, scope_kind);
}

Json run_query(const SnapshotContent& content, const GraphQuery& q) {
  validate_query(q);

  std::set<std::string> frontier;
  for (const auto& [id, node] : content.nodes) {
    if (node.layer != q.start.layer) continue;
    if (q.start.kind && node.kind != *q.start.kind) continue;
    bool ok = true;
    for (const auto& p : q.start.where) {
      if (!eval_pred(node, p)) {
        ok = false;
        break;
      }
    }
    if (ok) frontier.insert(id);
  }

  std::unordered_multimap<std::string, const KgEdge*> by_from, by_to;
  for (const auto& e : content.edges) {
    by_from.emplace(e.from, &e);
    by_to.emplace(e.to, &e);
  }

  for (const auto& step : q.expand) {
    std::set<std::string> next;
    auto consider = [&](const std::string& other_id) {
      auto it = content.nodes.find(other_id);
      if (it == content.nodes.end()) return;
      const KgNode& node = it->second;
      if (step.layer && node.layer != *step.layer) return;
      if (step.kind && node.kind != *step.kind) return;
      for (const auto& p : step.where) {
        if (!eval_pred(node, p)) return;
      }
      next.insert(other_id);
    };
    for (const auto& id : frontier) {
      if (step.dir == ExpandDir::Out || step.dir == ExpandDir::Any) {
        auto [lo, hi] = by_from.equal_range(id);
        for (auto it = lo; it != hi; ++it) {
          if (it->second->kind == step.edge) consider(it->second->to);
        }
      }
      if (step.dir == ExpandDir::In || step.dir == ExpandDir::Any) {
        auto [lo, hi] = by_to.equal_range(id);
        for (auto it = lo; it != hi; ++it) {
          if (it->second->kind == step.edge) consider(it->second->from);
        }
      }
    }
    frontier = std::move(next);
  }

  Json rows = Json::array();
  for (const auto& id : frontier) {
    if (q.limit && rows.size() >= *q.limit) break;
    const KgNode& node = content.nodes.at(id);
    Json row = Json::object();
    if (q.project.empty()) {
      row["id"] = node.id;
      row["device"] = node.device;
      row["layer"] = layer_name(node.layer);
      row["kind"] = node.kind;
      for (const auto& [k, v] : node.attrs) row[k] = attr_to_json(v);
    } else {
      for (const auto& name : q.project) {
        if (name == "id") {
          row[name] = node.id;
        } else if (name == "device") {
          row[name] = node.device;
        } else if (name == "kind") {
          row[name] = node.kind;
        } else if (name == "layer") {
          row[name] = layer_name(node.layer);
        } else {
          auto it = node.attrs.find(name);
          row[name] = it == node.attrs.end() ? Json(nullptr) : attr_to_json(it->second);
        }
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace nettwin
