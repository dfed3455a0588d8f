#include "nettwin/netspec.hpp"

#include <algorithm>
#include <set>

#include "nettwin/errors.hpp"
#include "nettwin/ip.hpp"

namespace nettwin {

const DeviceConfig* NetworkSpec::find_device(const std::string& hostname) const {
  for (const auto& d : devices) {
    if (d.hostname == hostname) return &d;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

Json device_to_json(const DeviceConfig& dev) {
  Json interfaces = Json::array();
  for (const auto& i : dev.interfaces) {
    Json item{{"name", i.name}, {"mtu", i.mtu}, {"enabled", i.enabled}};
    if (i.v4_addr) item["v4_addr"] = *i.v4_addr;
    if (i.v6_addr) item["v6_addr"] = *i.v6_addr;
    interfaces.push_back(item);
  }
  Json statics = Json::array();
  for (const auto& s : dev.static_routes) {
    Json item{{"prefix", s.prefix}, {"metric", s.metric}};
    if (s.next_hop) item["next_hop"] = *s.next_hop;
    if (s.out_interface) item["out_interface"] = *s.out_interface;
    statics.push_back(item);
  }
  Json processes = Json::array();
  for (const auto& p : dev.igp_processes) {
    Json ifaces = Json::array();
    for (const auto& i : p.interfaces) ifaces.push_back(Json{{"name", i.name}, {"metric", i.metric}});
    Json redist = Json::array();
    for (const auto& r : p.redistribute) {
      redist.push_back(Json{{"from_process", r.from_process},
                            {"metric", r.metric},
                            {"metric_type", r.metric_type}});
    }
    Json summaries = Json::array();
    for (const auto& s : p.summaries) summaries.push_back(Json{{"prefix", s.prefix}});
    processes.push_back(Json{{"process_id", p.process_id},
                             {"family", p.family},
                             {"interfaces", ifaces},
                             {"redistribute", redist},
                             {"summaries", summaries}});
  }
  Json acls = Json::array();
  for (const auto& a : dev.acls) {
    Json rules = Json::array();
    for (const auto& r : a.rules) {
      rules.push_back(Json{{"seq", r.seq},
                           {"action", r.action},
                           {"protocol", r.protocol},
                           {"src_prefix", r.src_prefix},
                           {"dst_prefix", r.dst_prefix},
                           {"src_ports", Json::array({r.src_ports[0], r.src_ports[1]})},
                           {"dst_ports", Json::array({r.dst_ports[0], r.dst_ports[1]})}});
    }
    Json applied = Json::array();
    for (const auto& b : a.applied) {
      applied.push_back(Json{{"interface", b.interface}, {"direction", b.direction}});
    }
    acls.push_back(Json{{"name", a.name}, {"rules", rules}, {"applied", applied}});
  }
  return Json{{"hostname", dev.hostname},
              {"interfaces", interfaces},
              {"static_routes", statics},
              {"igp_processes", processes},
              {"acls", acls}};
}

Json network_spec_to_json(const NetworkSpec& spec) {
  Json devices = Json::array();
  for (const auto& d : spec.devices) devices.push_back(device_to_json(d));
  Json links = Json::array();
  for (const auto& l : spec.links) {
    links.push_back(Json{{"a_device", l.a_device},
                         {"a_interface", l.a_interface},
                         {"b_device", l.b_device},
                         {"b_interface", l.b_interface},
                         {"capacity_bps", l.capacity_bps},
                         {"prop_delay_ms", l.prop_delay_ms}});
  }
  Json demands = Json::array();
  for (const auto& d : spec.demands) {
    demands.push_back(Json{{"flow", d.flow},
                           {"src", d.src},
                           {"dst_ip", d.dst_ip},
                           {"rate_bps", d.rate_bps},
                           {"class", d.sla_class}});
  }
  Json classes = Json::array();
  for (const auto& c : spec.sla_classes) {
    classes.push_back(
        Json{{"name", c.name}, {"max_delay_ms", c.max_delay_ms}, {"max_loss", c.max_loss}});
  }
  return Json{{"devices", devices},
              {"topology", Json{{"links", links}}},
              {"demands", demands},
              {"sla", Json{{"classes", classes}}}};
}

std::string serialize_network_spec(const NetworkSpec& spec) {
  return network_spec_to_json(spec).dump(2) + "\n";
}

std::string serialize_device(const DeviceConfig& dev) { return device_to_json(dev).dump(); }

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

class Collector {
 public:
  explicit Collector(std::vector<Diagnostic>& out) : out_(out) {}
  void add(const std::string& path, const std::string& message) {
    out_.push_back({path, message});
  }
  bool empty() const { return out_.empty(); }

 private:
  std::vector<Diagnostic>& out_;
};

std::string idx(const std::string& base, const char* field, size_t i) {
  return base + "." + field + "[" + std::to_string(i) + "]";
}

bool get_string(const Json& j, const char* key, const std::string& path, Collector& c,
                std::string& out, bool required, const std::string& def = "") {
  if (!j.contains(key)) {
    if (required) {
      c.add(path + "." + key, "required string field is missing");
      return false;
    }
    out = def;
    return true;
  }
  if (!j.at(key).is_string()) {
    c.add(path + "." + key, "expected a string");
    return false;
  }
  out = j.at(key).get<std::string>();
  return true;
}

bool get_int(const Json& j, const char* key, const std::string& path, Collector& c, int64_t& out,
             bool required, int64_t def = 0) {
  if (!j.contains(key)) {
    if (required) {
      c.add(path + "." + key, "required integer field is missing");
      return false;
    }
    out = def;
    return true;
  }
  if (!j.at(key).is_number_integer() && !j.at(key).is_number_unsigned()) {
    c.add(path + "." + key, "expected an integer");
    return false;
  }
  out = j.at(key).get<int64_t>();
  return true;
}

bool get_num(const Json& j, const char* key, const std::string& path, Collector& c, double& out,
             bool required, double def = 0.0) {
  if (!j.contains(key)) {
    if (required) {
      c.add(path + "." + key, "required number field is missing");
      return false;
    }
    out = def;
    return true;
  }
  if (!j.at(key).is_number()) {
    c.add(path + "." + key, "expected a number");
    return false;
  }
  out = j.at(key).get<double>();
  return true;
}

bool get_bool(const Json& j, const char* key, const std::string& path, Collector& c, bool& out,
              bool required, bool def = false) {
  if (!j.contains(key)) {
    if (required) {
      c.add(path + "." + key, "required boolean field is missing");
      return false;
    }
    out = def;
    return true;
  }
  if (!j.at(key).is_boolean()) {
    c.add(path + "." + key, "expected a boolean");
    return false;
  }
  out = j.at(key).get<bool>();
  return true;
}

bool get_ports(const Json& j, const char* key, const std::string& path, Collector& c,
               std::array<int64_t, 2>& out) {
  if (!j.contains(key)) {
    out = {0, 65535};
    return true;
  }
  const Json& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
    c.add(path + "." + key, "expected a [low, high] integer pair");
    return false;
  }
  out = {v[0].get<int64_t>(), v[1].get<int64_t>()};
  return true;
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char ch : s) {
    bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
              ch == '-' || ch == '_' || ch == '.' || ch == '/';
    if (!ok) return false;
  }
  return true;
}

InterfaceCfg parse_interface(const Json& j, const std::string& path, Collector& c) {
  InterfaceCfg out;
  get_string(j, "name", path, c, out.name, true);
  get_int(j, "mtu", path, c, out.mtu, false, 1500);
  get_bool(j, "enabled", path, c, out.enabled, false, true);
  if (j.contains("v4_addr") && !j.at("v4_addr").is_null()) {
    std::string v;
    if (get_string(j, "v4_addr", path, c, v, false)) out.v4_addr = v;
  }
  if (j.contains("v6_addr") && !j.at("v6_addr").is_null()) {
    std::string v;
    if (get_string(j, "v6_addr", path, c, v, false)) out.v6_addr = v;
  }
  return out;
}

DeviceConfig parse_device_impl(const Json& j, const std::string& path, Collector& c) {
  DeviceConfig dev;
  get_string(j, "hostname", path, c, dev.hostname, true);
  if (j.contains("interfaces")) {
    if (!j.at("interfaces").is_array()) {
      c.add(path + ".interfaces", "expected an array");
    } else {
      size_t i = 0;
      for (const auto& item : j.at("interfaces")) {
        std::string p = idx(path, "interfaces", i++);
        if (!item.is_object()) {
          c.add(p, "expected an object");
          continue;
        }
        dev.interfaces.push_back(parse_interface(item, p, c));
      }
    }
  }
  if (j.contains("static_routes")) {
    if (!j.at("static_routes").is_array()) {
      c.add(path + ".static_routes", "expected an array");
    } else {
      size_t i = 0;
      for (const auto& item : j.at("static_routes")) {
        std::string p = idx(path, "static_routes", i++);
        if (!item.is_object()) {
          c.add(p, "expected an object");
          continue;
        }
        StaticRouteCfg s;
        get_string(item, "prefix", p, c, s.prefix, true);
        if (item.contains("next_hop")) {
          std::string v;
          if (get_string(item, "next_hop", p, c, v, false)) s.next_hop = v;
        }
        if (item.contains("out_interface")) {
          std::string v;
          if (get_string(item, "out_interface", p, c, v, false)) s.out_interface = v;
        }
        get_int(item, "metric", p, c, s.metric, false, 1);
        dev.static_routes.push_back(std::move(s));
      }
    }
  }
  if (j.contains("igp_processes")) {
    if (!j.at("igp_processes").is_array()) {
      c.add(path + ".igp_processes", "expected an array");
    } else {
      size_t i = 0;
      for (const auto& item : j.at("igp_processes")) {
        std::string p = idx(path, "igp_processes", i++);
        if (!item.is_object()) {
          c.add(p, "expected an object");
          continue;
        }
        IgpProcessCfg proc;
        get_string(item, "process_id", p, c, proc.process_id, true);
        get_string(item, "family", p, c, proc.family, false, "v4");
        if (item.contains("interfaces") && item.at("interfaces").is_array()) {
          size_t k = 0;
          for (const auto& f : item.at("interfaces")) {
            std::string pp = idx(p, "interfaces", k++);
            if (!f.is_object()) {
              c.add(pp, "expected an object");
              continue;
            }
            IgpInterfaceCfg ic;
            get_string(f, "name", pp, c, ic.name, true);
            get_int(f, "metric", pp, c, ic.metric, false, 10);
            proc.interfaces.push_back(ic);
          }
        } else if (item.contains("interfaces")) {
          c.add(p + ".interfaces", "expected an array");
        }
        if (item.contains("redistribute") && item.at("redistribute").is_array()) {
          size_t k = 0;
          for (const auto& f : item.at("redistribute")) {
            std::string pp = idx(p, "redistribute", k++);
            if (!f.is_object()) {
              c.add(pp, "expected an object");
              continue;
            }
            RedistributeCfg rc;
            get_string(f, "from_process", pp, c, rc.from_process, true);
            get_int(f, "metric", pp, c, rc.metric, false, 10);
            get_string(f, "metric_type", pp, c, rc.metric_type, false, "internal");
            proc.redistribute.push_back(rc);
          }
        } else if (item.contains("redistribute")) {
          c.add(p + ".redistribute", "expected an array");
        }
        if (item.contains("summaries") && item.at("summaries").is_array()) {
          size_t k = 0;
          for (const auto& f : item.at("summaries")) {
            std::string pp = idx(p, "summaries", k++);
            if (!f.is_object()) {
              c.add(pp, "expected an object");
              continue;
            }
            SummaryCfg sc;
            get_string(f, "prefix", pp, c, sc.prefix, true);
            proc.summaries.push_back(sc);
          }
        } else if (item.contains("summaries")) {
          c.add(p + ".summaries", "expected an array");
        }
        dev.igp_processes.push_back(std::move(proc));
      }
    }
  }
  if (j.contains("acls")) {
    if (!j.at("acls").is_array()) {
      c.add(path + ".acls", "expected an array");
    } else {
      size_t i = 0;
      for (const auto& item : j.at("acls")) {
        std::string p = idx(path, "acls", i++);
        if (!item.is_object()) {
          c.add(p, "expected an object");
          continue;
        }
        AclCfg acl;
        get_string(item, "name", p, c, acl.name, true);
        if (item.contains("rules") && item.at("rules").is_array()) {
          size_t k = 0;
          for (const auto& f : item.at("rules")) {
            std::string pp = idx(p, "rules", k++);
            if (!f.is_object()) {
              c.add(pp, "expected an object");
              continue;
            }
            AclRuleCfg r;
            get_int(f, "seq", pp, c, r.seq, true);
            get_string(f, "action", pp, c, r.action, true);
            get_string(f, "protocol", pp, c, r.protocol, false, "any");
            get_string(f, "src_prefix", pp, c, r.src_prefix, true);
            get_string(f, "dst_prefix", pp, c, r.dst_prefix, true);
            get_ports(f, "src_ports", pp, c, r.src_ports);
            get_ports(f, "dst_ports", pp, c, r.dst_ports);
            acl.rules.push_back(r);
          }
        } else if (item.contains("rules")) {
          c.add(p + ".rules", "expected an array");
        }
        if (item.contains("applied") && item.at("applied").is_array()) {
          size_t k = 0;
          for (const auto& f : item.at("applied")) {
            std::string pp = idx(p, "applied", k++);
            if (!f.is_object()) {
              c.add(pp, "expected an object");
              continue;
            }
            AclBindingCfg b;
            get_string(f, "interface", pp, c, b.interface, true);
            get_string(f, "direction", pp, c, b.direction, true);
            acl.applied.push_back(b);
          }
        } else if (item.contains("applied")) {
          c.add(p + ".applied", "expected an array");
        }
        dev.acls.push_back(std::move(acl));
      }
    }
  }
  return dev;
}

std::optional<Prefix> check_prefix(const std::string& text, const std::string& path, Collector& c,
                                   std::optional<IpFamily> family = std::nullopt) {
  auto p = Prefix::parse(text);
  if (!p) {
    c.add(path, "invalid prefix '" + text + "'");
    return std::nullopt;
  }
  if (family && p->addr.family != *family) {
    c.add(path, "prefix '" + text + "' has the wrong address family");
    return std::nullopt;
  }
  return p;
}

void validate_device(const DeviceConfig& dev, const std::string& path, Collector& c) {
  if (!valid_name(dev.hostname)) {
    c.add(path + ".hostname", "hostname must be non-empty [A-Za-z0-9._/-]");
  }
  std::set<std::string> if_names;
  for (size_t i = 0; i < dev.interfaces.size(); ++i) {
    const auto& ifc = dev.interfaces[i];
    std::string p = idx(path, "interfaces", i);
    if (!valid_name(ifc.name)) c.add(p + ".name", "invalid interface name");
    if (!if_names.insert(ifc.name).second) {
      c.add(p + ".name", "duplicate interface " + ifc.name + " on device " + dev.hostname);
    }
    if (ifc.mtu < 68 || ifc.mtu > 65535) c.add(p + ".mtu", "mtu out of range [68, 65535]");
    if (ifc.v4_addr) check_prefix(*ifc.v4_addr, p + ".v4_addr", c, IpFamily::V4);
    if (ifc.v6_addr) check_prefix(*ifc.v6_addr, p + ".v6_addr", c, IpFamily::V6);
  }
  for (size_t i = 0; i < dev.static_routes.size(); ++i) {
    const auto& s = dev.static_routes[i];
    std::string p = idx(path, "static_routes", i);
    auto pref = check_prefix(s.prefix, p + ".prefix", c);
    if (s.next_hop.has_value() == s.out_interface.has_value()) {
      c.add(p, "exactly one of next_hop or out_interface must be set");
    }
    if (s.next_hop) {
      auto nh = IpAddr::parse(*s.next_hop);
      if (!nh) {
        c.add(p + ".next_hop", "invalid address '" + *s.next_hop + "'");
      } else if (pref && nh->family != pref->addr.family) {
        c.add(p + ".next_hop", "next hop family does not match prefix family");
      }
    }
    if (s.out_interface && !if_names.count(*s.out_interface)) {
      c.add(p + ".out_interface", "unknown interface " + *s.out_interface);
    }
    if (s.metric < 0) c.add(p + ".metric", "metric must be non-negative");
  }
  std::set<std::string> proc_ids;
  for (size_t i = 0; i < dev.igp_processes.size(); ++i) {
    const auto& proc = dev.igp_processes[i];
    std::string p = idx(path, "igp_processes", i);
    if (proc.process_id.empty()) c.add(p + ".process_id", "process id must be non-empty");
    if (!proc_ids.insert(proc.process_id).second) {
      c.add(p + ".process_id", "duplicate process " + proc.process_id);
    }
    std::optional<IpFamily> family = family_from_name(proc.family);
    if (!family) c.add(p + ".family", "family must be v4 or v6");
    std::set<std::string> members;
    for (size_t k = 0; k < proc.interfaces.size(); ++k) {
      const auto& m = proc.interfaces[k];
      std::string pp = idx(p, "interfaces", k);
      if (!if_names.count(m.name)) c.add(pp + ".name", "unknown interface " + m.name);
      if (!members.insert(m.name).second) c.add(pp + ".name", "interface listed twice");
      if (m.metric < 1) c.add(pp + ".metric", "igp metric must be >= 1");
    }
    for (size_t k = 0; k < proc.redistribute.size(); ++k) {
      const auto& r = proc.redistribute[k];
      std::string pp = idx(p, "redistribute", k);
      if (r.from_process == proc.process_id) {
        c.add(pp + ".from_process", "a process cannot redistribute itself");
      }
      bool found = false;
      for (const auto& other : dev.igp_processes) {
        if (other.process_id == r.from_process) found = true;
      }
      if (!found) c.add(pp + ".from_process", "unknown process " + r.from_process);
      if (r.metric < 0) c.add(pp + ".metric", "metric must be non-negative");
      if (r.metric_type != "internal" && r.metric_type != "external") {
        c.add(pp + ".metric_type", "metric_type must be internal or external");
      }
    }
    for (size_t k = 0; k < proc.summaries.size(); ++k) {
      std::string pp = idx(p, "summaries", k);
      if (auto s = check_prefix(proc.summaries[k].prefix, pp + ".prefix", c, family)) {
        if (s->len >= s->max_len()) {
          c.add(pp + ".prefix", "summary must be shorter than a host route");
        }
      }
    }
  }
  std::set<std::string> acl_names;
  std::set<std::pair<std::string, std::string>> bindings;
  for (size_t i = 0; i < dev.acls.size(); ++i) {
    const auto& acl = dev.acls[i];
    std::string p = idx(path, "acls", i);
    if (!valid_name(acl.name)) c.add(p + ".name", "invalid ACL name");
    if (!acl_names.insert(acl.name).second) c.add(p + ".name", "duplicate ACL " + acl.name);
    std::set<int64_t> seqs;
    for (size_t k = 0; k < acl.rules.size(); ++k) {
      const auto& r = acl.rules[k];
      std::string pp = idx(p, "rules", k);
      if (!seqs.insert(r.seq).second) c.add(pp + ".seq", "duplicate seq in ACL " + acl.name);
      if (r.action != "permit" && r.action != "deny") {
        c.add(pp + ".action", "action must be permit or deny");
      }
      if (r.protocol != "any" && r.protocol != "tcp" && r.protocol != "udp" &&
          r.protocol != "icmp") {
        c.add(pp + ".protocol", "protocol must be any, tcp, udp or icmp");
      }
      auto sp = check_prefix(r.src_prefix, pp + ".src_prefix", c);
      auto dp = check_prefix(r.dst_prefix, pp + ".dst_prefix", c);
      if (sp && dp && sp->addr.family != dp->addr.family) {
        c.add(pp, "src_prefix and dst_prefix must share a family");
      }
      for (const char* key : {"src_ports", "dst_ports"}) {
        const auto& ports = key[0] == 's' ? r.src_ports : r.dst_ports;
        if (ports[0] < 0 || ports[1] > 65535 || ports[0] > ports[1]) {
          c.add(pp + "." + key, "port range must satisfy 0 <= low <= high <= 65535");
        }
      }
    }
    for (size_t k = 0; k < acl.applied.size(); ++k) {
      const auto& b = acl.applied[k];
      std::string pp = idx(p, "applied", k);
      if (!if_names.count(b.interface)) c.add(pp + ".interface", "unknown interface " + b.interface);
      if (b.direction != "in" && b.direction != "out") {
        c.add(pp + ".direction", "direction must be in or out");
      }
      if (!bindings.insert({b.interface, b.direction}).second) {
        c.add(pp, "interface " + b.interface + " already has an ACL applied " + b.direction);
      }
    }
  }
}

void validate_spec(const NetworkSpec& spec, Collector& c) {
  if (spec.devices.empty()) {
    c.add("devices", "at least one device is required");
    return;
  }
  std::set<std::string> hostnames;
  for (size_t i = 0; i < spec.devices.size(); ++i) {
    const auto& dev = spec.devices[i];
    std::string path = "devices[" + std::to_string(i) + "]";
    if (!hostnames.insert(dev.hostname).second) {
      c.add(path + ".hostname", "duplicate hostname " + dev.hostname);
    }
    validate_device(dev, path, c);
  }
  std::set<std::pair<std::string, std::string>> used_ports;
  for (size_t i = 0; i < spec.links.size(); ++i) {
    const auto& l = spec.links[i];
    std::string path = "topology.links[" + std::to_string(i) + "]";
    auto check_end = [&](const std::string& dev, const std::string& ifc, const char* side) {
      const DeviceConfig* d = spec.find_device(dev);
      if (!d) {
        c.add(path, std::string(side) + " device " + dev + " does not exist");
        return;
      }
      bool found = false;
      for (const auto& x : d->interfaces) {
        if (x.name == ifc) found = true;
      }
      if (!found) c.add(path, std::string(side) + " interface " + dev + ":" + ifc + " does not exist");
      if (!used_ports.insert({dev, ifc}).second) {
        c.add(path, "interface " + dev + ":" + ifc + " is attached to more than one link");
      }
    };
    check_end(l.a_device, l.a_interface, "a");
    check_end(l.b_device, l.b_interface, "b");
    if (l.a_device == l.b_device) c.add(path, "link endpoints must be different devices");
    if (l.capacity_bps <= 0) c.add(path + ".capacity_bps", "capacity must be positive");
    if (l.prop_delay_ms < 0) c.add(path + ".prop_delay_ms", "propagation delay must be >= 0");
  }
  std::set<std::string> class_names;
  for (size_t i = 0; i < spec.sla_classes.size(); ++i) {
    const auto& cls = spec.sla_classes[i];
    std::string path = "sla.classes[" + std::to_string(i) + "]";
    if (cls.name.empty()) c.add(path + ".name", "class name must be non-empty");
    if (!class_names.insert(cls.name).second) c.add(path + ".name", "duplicate class " + cls.name);
    if (cls.max_delay_ms < 0) c.add(path + ".max_delay_ms", "threshold must be >= 0");
    if (cls.max_loss < 0 || cls.max_loss > 1) c.add(path + ".max_loss", "loss must be in [0, 1]");
  }
  std::set<std::string> flows;
  for (size_t i = 0; i < spec.demands.size(); ++i) {
    const auto& d = spec.demands[i];
    std::string path = "demands[" + std::to_string(i) + "]";
    if (d.flow.empty()) c.add(path + ".flow", "flow id must be non-empty");
    if (!flows.insert(d.flow).second) c.add(path + ".flow", "duplicate flow " + d.flow);
    if (!spec.find_device(d.src)) c.add(path + ".src", "unknown device " + d.src);
    if (!IpAddr::parse(d.dst_ip)) c.add(path + ".dst_ip", "invalid address '" + d.dst_ip + "'");
    if (d.rate_bps <= 0) c.add(path + ".rate_bps", "rate must be positive");
    if (!class_names.count(d.sla_class)) c.add(path + ".class", "unknown class " + d.sla_class);
  }
}

}  // namespace

ParseResult parse_network_spec(const std::string& text) {
  ParseResult result;
  Collector c(result.diagnostics);

  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    c.add("", "document is not valid JSON");
    return result;
  }
  if (!j.is_object()) {
    c.add("", "document root must be an object");
    return result;
  }

  NetworkSpec spec;
  if (!j.contains("devices") || !j.at("devices").is_array()) {
    c.add("devices", "required array is missing");
  } else {
    size_t i = 0;
    for (const auto& item : j.at("devices")) {
      std::string path = "devices[" + std::to_string(i++) + "]";
      if (!item.is_object()) {
        c.add(path, "expected an object");
        continue;
      }
      spec.devices.push_back(parse_device_impl(item, path, c));
    }
  }
  if (j.contains("topology")) {
    const Json& topo = j.at("topology");
    if (!topo.is_object()) {
      c.add("topology", "expected an object");
    } else if (topo.contains("links")) {
      if (!topo.at("links").is_array()) {
        c.add("topology.links", "expected an array");
      } else {
        size_t i = 0;
        for (const auto& item : topo.at("links")) {
          std::string path = "topology.links[" + std::to_string(i++) + "]";
          if (!item.is_object()) {
            c.add(path, "expected an object");
            continue;
          }
          LinkCfg l;
          get_string(item, "a_device", path, c, l.a_device, true);
          get_string(item, "a_interface", path, c, l.a_interface, true);
          get_string(item, "b_device", path, c, l.b_device, true);
          get_string(item, "b_interface", path, c, l.b_interface, true);
          get_int(item, "capacity_bps", path, c, l.capacity_bps, false, 10'000'000'000);
          get_num(item, "prop_delay_ms", path, c, l.prop_delay_ms, false, 1.0);
          spec.links.push_back(std::move(l));
        }
      }
    }
  }
  if (j.contains("demands")) {
    if (!j.at("demands").is_array()) {
      c.add("demands", "expected an array");
    } else {
      size_t i = 0;
      for (const auto& item : j.at("demands")) {
        std::string path = "demands[" + std::to_string(i++) + "]";
        if (!item.is_object()) {
          c.add(path, "expected an object");
          continue;
        }
        TrafficDemand d;
        get_string(item, "flow", path, c, d.flow, true);
        get_string(item, "src", path, c, d.src, true);
        get_string(item, "dst_ip", path, c, d.dst_ip, true);
        get_int(item, "rate_bps", path, c, d.rate_bps, true);
        get_string(item, "class", path, c, d.sla_class, true);
        spec.demands.push_back(std::move(d));
      }
    }
  }
  if (j.contains("sla")) {
    const Json& sla = j.at("sla");
    if (!sla.is_object()) {
      c.add("sla", "expected an object");
    } else if (sla.contains("classes")) {
      if (!sla.at("classes").is_array()) {
        c.add("sla.classes", "expected an array");
      } else {
        size_t i = 0;
        for (const auto& item : sla.at("classes")) {
          std::string path = "sla.classes[" + std::to_string(i++) + "]";
          if (!item.is_object()) {
            c.add(path, "expected an object");
            continue;
          }
          SlaClassCfg cls;
          get_string(item, "name", path, c, cls.name, true);
          get_num(item, "max_delay_ms", path, c, cls.max_delay_ms, true);
          get_num(item, "max_loss", path, c, cls.max_loss, true);
          spec.sla_classes.push_back(std::move(cls));
        }
      }
    }
  }

  if (c.empty()) validate_spec(spec, c);
  if (c.empty()) result.spec = std::move(spec);
  return result;
}

DeviceConfig device_from_json(const Json& j) {
  std::vector<Diagnostic> diags;
  Collector c(diags);
  DeviceConfig dev = parse_device_impl(j, "device", c);
  if (!diags.empty()) {
    throw Error(ErrorCode::ParseError,
                diags.front().path + ": " + diags.front().message);
  }
  return dev;
}

std::map<std::string, Json> flatten_device_config(const DeviceConfig& dev) {
  std::map<std::string, Json> out;
  out["hostname"] = dev.hostname;
  for (const auto& i : dev.interfaces) {
    std::string base = "interfaces[" + i.name + "]";
    out[base + ".mtu"] = i.mtu;
    out[base + ".enabled"] = i.enabled;
    if (i.v4_addr) out[base + ".v4_addr"] = *i.v4_addr;
    if (i.v6_addr) out[base + ".v6_addr"] = *i.v6_addr;
  }
  for (const auto& s : dev.static_routes) {
    std::string base = "static_routes[" + s.prefix + "]";
    if (s.next_hop) out[base + ".next_hop"] = *s.next_hop;
    if (s.out_interface) out[base + ".out_interface"] = *s.out_interface;
    out[base + ".metric"] = s.metric;
  }
  for (const auto& p : dev.igp_processes) {
    std::string base = "igp_processes[" + p.process_id + "]";
    out[base + ".family"] = p.family;
    for (const auto& i : p.interfaces) out[base + ".interfaces[" + i.name + "].metric"] = i.metric;
    for (const auto& r : p.redistribute) {
      out[base + ".redistribute[" + r.from_process + "].metric"] = r.metric;
      out[base + ".redistribute[" + r.from_process + "].metric_type"] = r.metric_type;
    }
    for (const auto& s : p.summaries) out[base + ".summaries[" + s.prefix + "]"] = true;
  }
  for (const auto& a : dev.acls) {
    std::string base = "acls[" + a.name + "]";
    for (const auto& r : a.rules) {
      std::string rb = base + ".rules[" + std::to_string(r.seq) + "]";
      out[rb + ".action"] = r.action;
      out[rb + ".protocol"] = r.protocol;
      out[rb + ".src_prefix"] = r.src_prefix;
      out[rb + ".dst_prefix"] = r.dst_prefix;
      out[rb + ".src_ports"] = Json::array({r.src_ports[0], r.src_ports[1]}).dump();
      out[rb + ".dst_ports"] = Json::array({r.dst_ports[0], r.dst_ports[1]}).dump();
    }
    for (const auto& b : a.applied) {
      out[base + ".applied[" + b.interface + ":" + b.direction + "]"] = true;
    }
  }
  return out;
}

}  // namespace nettwin
