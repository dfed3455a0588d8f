#include "nettwin/ingest.hpp"

#include <algorithm>

#include "nettwin/errors.hpp"
#include "nettwin/ip.hpp"

namespace nettwin {

namespace {

std::string device_node_id(const std::string& hostname) {
  return make_node_id(hostname, LayerId::Device, "device", {{"name", hostname}});
}

KgEdge own_edge(const std::string& device, const std::string& to) {
  return {device_node_id(device), to, EdgeKind::Own};
}

std::string link_name(const LinkCfg& l) {
  std::string a = l.a_device + ":" + l.a_interface;
  std::string b = l.b_device + ":" + l.b_interface;
  return a <= b ? a + "~" + b : b + "~" + a;
}

}  // namespace

std::vector<LayerPayload> base_layer_payloads(const NetworkSpec& spec) {
  std::vector<LayerPayload> out;

  LayerPayload device{LayerId::Device, {}, {}};
  for (const auto& d : spec.devices) {
    device.nodes.push_back(make_node(d.hostname, LayerId::Device, "device",
                                     {{"name", d.hostname}}));
  }
  out.push_back(std::move(device));

  LayerPayload interfaces{LayerId::Interfaces, {}, {}};
  for (const auto& d : spec.devices) {
    for (const auto& i : d.interfaces) {
      auto node = make_node(d.hostname, LayerId::Interfaces, "interface",
                            {{"name", i.name}, {"mtu", i.mtu}, {"enabled", i.enabled}});
      interfaces.edges.push_back(own_edge(d.hostname, node.id));
      interfaces.nodes.push_back(std::move(node));
    }
  }
  for (const auto& l : spec.links) {
    std::string a = make_node_id(l.a_device, LayerId::Interfaces, "interface",
                                 {{"name", l.a_interface}});
    std::string b = make_node_id(l.b_device, LayerId::Interfaces, "interface",
                                 {{"name", l.b_interface}});
    interfaces.edges.push_back({a, b, EdgeKind::Connect});
  }
  out.push_back(std::move(interfaces));

  LayerPayload ip{LayerId::IpSettings, {}, {}};
  auto addr_node_id = [](const std::string& device, const std::string& ifc,
                         const std::string& addr) {
    return make_node_id(device, LayerId::IpSettings, "ip-address",
                        {{"interface", ifc}, {"address", addr}});
  };
  for (const auto& d : spec.devices) {
    for (const auto& i : d.interfaces) {
      for (const auto& [addr, family] :
           {std::pair{i.v4_addr, "v4"}, std::pair{i.v6_addr, "v6"}}) {
        if (!addr) continue;
        auto node = make_node(d.hostname, LayerId::IpSettings, "ip-address",
                              {{"interface", i.name},
                               {"address", *addr},
                               {"family", std::string(family)}});
        ip.edges.push_back(own_edge(d.hostname, node.id));
        ip.nodes.push_back(std::move(node));
      }
    }
  }
  for (const auto& l : spec.links) {
    const DeviceConfig* da = spec.find_device(l.a_device);
    const DeviceConfig* db = spec.find_device(l.b_device);
    if (!da || !db) continue;
    auto find_if = [](const DeviceConfig& d, const std::string& name) -> const InterfaceCfg* {
      for (const auto& i : d.interfaces) {
        if (i.name == name) return &i;
      }
      return nullptr;
    };
    const InterfaceCfg* ia = find_if(*da, l.a_interface);
    const InterfaceCfg* ib = find_if(*db, l.b_interface);
    if (!ia || !ib) continue;
    if (ia->v4_addr && ib->v4_addr) {
      ip.edges.push_back({addr_node_id(l.a_device, l.a_interface, *ia->v4_addr),
                          addr_node_id(l.b_device, l.b_interface, *ib->v4_addr),
                          EdgeKind::Connect});
    }
    if (ia->v6_addr && ib->v6_addr) {
      ip.edges.push_back({addr_node_id(l.a_device, l.a_interface, *ia->v6_addr),
                          addr_node_id(l.b_device, l.b_interface, *ib->v6_addr),
                          EdgeKind::Connect});
    }
  }
  out.push_back(std::move(ip));

  LayerPayload acl{LayerId::Acl, {}, {}};
  for (const auto& d : spec.devices) {
    for (const auto& a : d.acls) {
      for (const auto& r : a.rules) {
        auto node = make_node(d.hostname, LayerId::Acl, "acl-rule",
                              {{"acl", a.name},
                               {"seq", r.seq},
                               {"action", r.action},
                               {"protocol", r.protocol},
                               {"src_prefix", r.src_prefix},
                               {"dst_prefix", r.dst_prefix},
                               {"src_port_lo", r.src_ports[0]},
                               {"src_port_hi", r.src_ports[1]},
                               {"dst_port_lo", r.dst_ports[0]},
                               {"dst_port_hi", r.dst_ports[1]}});
        acl.edges.push_back(own_edge(d.hostname, node.id));
        acl.nodes.push_back(std::move(node));
      }
      for (const auto& b : a.applied) {
        auto node = make_node(d.hostname, LayerId::Acl, "acl-binding",
                              {{"acl", a.name},
                               {"interface", b.interface},
                               {"direction", b.direction}});
        acl.edges.push_back(own_edge(d.hostname, node.id));
        acl.nodes.push_back(std::move(node));
      }
    }
  }
  out.push_back(std::move(acl));

  LayerPayload raw{LayerId::RawConfig, {}, {}};
  for (const auto& d : spec.devices) {
    auto node = make_node(d.hostname, LayerId::RawConfig, "config",
                          {{"text", serialize_device(d)}});
    raw.edges.push_back(own_edge(d.hostname, node.id));
    raw.nodes.push_back(std::move(node));
  }
  out.push_back(std::move(raw));

  LayerPayload metrics{LayerId::Metrics, {}, {}};
  for (const auto& l : spec.links) {
    std::string owner = std::min(l.a_device, l.b_device);
    auto node = make_node(owner, LayerId::Metrics, "link",
                          {{"name", link_name(l)},
                           {"a_device", l.a_device},
                           {"a_interface", l.a_interface},
                           {"b_device", l.b_device},
                           {"b_interface", l.b_interface},
                           {"capacity_bps", l.capacity_bps},
                           {"prop_delay_ms", l.prop_delay_ms}});
    metrics.edges.push_back(own_edge(owner, node.id));
    metrics.nodes.push_back(std::move(node));
  }
  for (const auto& d : spec.demands) {
    auto node = make_node(d.src, LayerId::Metrics, "demand",
                          {{"flow", d.flow},
                           {"src", d.src},
                           {"dst_ip", d.dst_ip},
                           {"rate_bps", d.rate_bps},
                           {"class", d.sla_class}});
    metrics.edges.push_back(own_edge(d.src, node.id));
    metrics.nodes.push_back(std::move(node));
  }
  if (!spec.sla_classes.empty()) {
    // Network-wide settings hang off the lexicographically smallest device.
    std::string owner = spec.devices.front().hostname;
    for (const auto& d : spec.devices) owner = std::min(owner, d.hostname);
    for (const auto& cls : spec.sla_classes) {
      auto node = make_node(owner, LayerId::Metrics, "sla-class",
                            {{"class", cls.name},
                             {"max_delay_ms", cls.max_delay_ms},
                             {"max_loss", cls.max_loss}});
      metrics.edges.push_back(own_edge(owner, node.id));
      metrics.nodes.push_back(std::move(node));
    }
  }
  out.push_back(std::move(metrics));

  return out;
}

SnapshotContent build_base_layers(const NetworkSpec& spec) {
  SnapshotContent content;
  for (auto& payload : base_layer_payloads(spec)) {
    upsert_layer(content, payload.layer, std::move(payload.nodes), std::move(payload.edges));
  }
  return content;
}

namespace {

std::string attr_str(const KgNode& n, const std::string& key) {
  auto it = n.attrs.find(key);
  if (it == n.attrs.end() || !std::holds_alternative<std::string>(it->second)) {
    throw Error(ErrorCode::StorageError, "node " + n.id + " lacks string attr " + key);
  }
  return std::get<std::string>(it->second);
}

int64_t attr_int(const KgNode& n, const std::string& key) {
  auto it = n.attrs.find(key);
  if (it == n.attrs.end() || !std::holds_alternative<int64_t>(it->second)) {
    throw Error(ErrorCode::StorageError, "node " + n.id + " lacks int attr " + key);
  }
  return std::get<int64_t>(it->second);
}

double attr_num(const KgNode& n, const std::string& key) {
  auto it = n.attrs.find(key);
  if (it == n.attrs.end()) {
    throw Error(ErrorCode::StorageError, "node " + n.id + " lacks num attr " + key);
  }
  if (std::holds_alternative<int64_t>(it->second)) {
    return static_cast<double>(std::get<int64_t>(it->second));
  }
  if (std::holds_alternative<double>(it->second)) return std::get<double>(it->second);
  throw Error(ErrorCode::StorageError, "node " + n.id + " attr " + key + " is not numeric");
}

}  // namespace

NetworkSpec extract_network_spec(const SnapshotContent& content) {
  NetworkSpec spec;
  std::set<std::string> devices;
  for (const auto& [id, node] : content.nodes) {
    if (node.layer == LayerId::Device) devices.insert(node.device);
  }
  for (const auto& [id, node] : content.nodes) {
    if (node.layer != LayerId::RawConfig) continue;
    Json j = Json::parse(attr_str(node, "text"), nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::StorageError, "RAW_CONFIG of " + node.device + " is not JSON");
    }
    spec.devices.push_back(device_from_json(j));
    devices.erase(node.device);
  }
  if (!devices.empty()) {
    throw Error(ErrorCode::StorageError,
                "device " + *devices.begin() + " has no RAW_CONFIG node");
  }
  std::sort(spec.devices.begin(), spec.devices.end(),
            [](const auto& a, const auto& b) { return a.hostname < b.hostname; });

  for (const auto& [id, node] : content.nodes) {
    if (node.layer != LayerId::Metrics) continue;
    if (node.kind == "link") {
      LinkCfg l;
      l.a_device = attr_str(node, "a_device");
      l.a_interface = attr_str(node, "a_interface");
      l.b_device = attr_str(node, "b_device");
      l.b_interface = attr_str(node, "b_interface");
      l.capacity_bps = attr_int(node, "capacity_bps");
      l.prop_delay_ms = attr_num(node, "prop_delay_ms");
      spec.links.push_back(std::move(l));
    } else if (node.kind == "demand") {
      TrafficDemand d;
      d.flow = attr_str(node, "flow");
      d.src = attr_str(node, "src");
      d.dst_ip = attr_str(node, "dst_ip");
      d.rate_bps = attr_int(node, "rate_bps");
      d.sla_class = attr_str(node, "class");
      spec.demands.push_back(std::move(d));
    } else if (node.kind == "sla-class") {
      SlaClassCfg c;
      c.name = attr_str(node, "class");
      c.max_delay_ms = attr_num(node, "max_delay_ms");
      c.max_loss = attr_num(node, "max_loss");
      spec.sla_classes.push_back(std::move(c));
    }
  }
  auto link_sort_key = [](const LinkCfg& l) { return link_name(l); };
  std::sort(spec.links.begin(), spec.links.end(),
            [&](const auto& a, const auto& b) { return link_sort_key(a) < link_sort_key(b); });
  std::sort(spec.demands.begin(), spec.demands.end(),
            [](const auto& a, const auto& b) { return a.flow < b.flow; });
  std::sort(spec.sla_classes.begin(), spec.sla_classes.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });
  return spec;
}

}  // namespace nettwin
