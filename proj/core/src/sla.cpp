#include "nettwin/sla.hpp"

#include <algorithm>
#include <map>
#include <mutex>

#include "nettwin/errors.hpp"

namespace nettwin {

namespace {

struct Edge {
  std::string from_device;
  std::string out_interface;
  std::string to_device;
};

struct Branch {
  double share = 1.0;
  std::vector<Edge> edges;
  std::vector<std::string> path;
  bool delivered = false;
};

// Splits a flow across all ECMP branches using the FIB only (no ACLs).
void split_flow(const Dataplane& dp, const std::string& device, const IpAddr& dst, double share,
                std::vector<Edge> edges, std::vector<std::string> path,
                std::set<std::string> visited, std::vector<Branch>& out) {
  visited.insert(device);
  path.push_back(device);

  const DeviceConfig* cfg = dp.spec().find_device(device);
  bool owned = false;
  if (cfg) {
    for (const auto& i : cfg->interfaces) {
      if (!i.enabled) continue;
      for (const auto& addr : {i.v4_addr, i.v6_addr}) {
        if (!addr) continue;
        auto p = Prefix::parse(*addr);
        if (p && p->addr == dst) owned = true;
      }
    }
  }
  if (owned) {
    out.push_back({share, std::move(edges), std::move(path), true});
    return;
  }

  const RibEntry* entry = dp.lpm(device, dst);
  if (!entry || entry->protocol == RouteProtocol::SummaryDiscard || entry->next_hops.empty()) {
    out.push_back({share, std::move(edges), std::move(path), false});
    return;
  }
  double sub = share / static_cast<double>(entry->next_hops.size());
  for (const auto& nh : entry->next_hops) {
    std::vector<Edge> branch_edges = edges;
    std::vector<std::string> branch_path = path;
    if (nh.next_device.empty()) {
      // Attached network: traffic exits the modeled topology and counts as
      // delivered without traversing a modeled link.
      out.push_back({sub, std::move(branch_edges), std::move(branch_path), true});
      continue;
    }
    if (visited.count(nh.next_device)) {
      out.push_back({sub, std::move(branch_edges), std::move(branch_path), false});
      continue;
    }
    branch_edges.push_back({device, nh.out_interface, nh.next_device});
    split_flow(dp, nh.next_device, dst, sub, std::move(branch_edges), std::move(branch_path),
               visited, out);
  }
}

}  // namespace

SlaReport simulate_sla(const Dataplane& dp) {
  const NetworkSpec& spec = dp.spec();
  std::map<std::string, const SlaClassCfg*> classes;
  for (const auto& c : spec.sla_classes) classes[c.name] = &c;

  struct DemandBranches {
    const TrafficDemand* demand;
    std::vector<Branch> branches;
  };
  std::vector<DemandBranches> flows;
  for (const auto& d : spec.demands) {
    if (!classes.count(d.sla_class)) {
      throw Error(ErrorCode::InvalidParams, "demand " + d.flow + " uses unknown class " +
                                                d.sla_class);
    }
    auto dst = IpAddr::parse(d.dst_ip);
    if (!dst) {
      throw Error(ErrorCode::InvalidParams, "demand " + d.flow + " has invalid dst_ip");
    }
    if (!spec.find_device(d.src)) {
      throw Error(ErrorCode::InvalidParams, "demand " + d.flow + " sources from unknown device");
    }
    DemandBranches db{&d, {}};
    split_flow(dp, d.src, *dst, 1.0, {}, {}, {}, db.branches);
    flows.push_back(std::move(db));
  }

  // Per-direction offered loads. The egress (device, interface) pair
  // identifies both the link and the direction.
  std::map<std::pair<std::string, std::string>, LinkLoad> loads;
  std::map<std::pair<std::string, std::string>, const LinkCfg*> link_of;
  for (const auto& l : spec.links) {
    link_of[{l.a_device, l.a_interface}] = &l;
    link_of[{l.b_device, l.b_interface}] = &l;
  }
  for (const auto& db : flows) {
    for (const auto& b : db.branches) {
      for (const auto& e : b.edges) {
        auto key = std::make_pair(e.from_device, e.out_interface);
        LinkLoad& ll = loads[key];
        if (ll.from_device.empty()) {
          ll.from_device = e.from_device;
          ll.out_interface = e.out_interface;
          ll.to_device = e.to_device;
          auto li = link_of.find(key);
          ll.capacity_bps = li == link_of.end() ? 0 : li->second->capacity_bps;
        }
        ll.load_bps += b.share * static_cast<double>(db.demand->rate_bps);
      }
    }
  }
  for (auto& [key, ll] : loads) {
    double cap = static_cast<double>(ll.capacity_bps);
    double prop = 0.0;
    auto li = link_of.find(key);
    if (li != link_of.end()) prop = li->second->prop_delay_ms;
    if (cap <= 0.0) {
      ll.utilization = kMaxUtilization;
      ll.loss = 1.0;
    } else {
      ll.utilization = std::min(ll.load_bps / cap, kMaxUtilization);
      ll.loss = ll.load_bps > cap ? (ll.load_bps - cap) / ll.load_bps : 0.0;
    }
    ll.delay_ms = prop + kQueueDelayMs * ll.utilization / (1.0 - ll.utilization);
  }

  SlaReport report;
  for (const auto& db : flows) {
    const TrafficDemand& d = *db.demand;
    const SlaClassCfg& cls = *classes.at(d.sla_class);
    FlowResult fr;
    fr.flow = d.flow;
    fr.sla_class = d.sla_class;
    fr.rate_bps = d.rate_bps;
    double delivered = 0.0;
    double weighted_delay = 0.0;
    for (const auto& b : db.branches) {
      FlowBranch fb;
      fb.share = b.share;
      fb.path = b.path;
      fb.delivered = b.delivered;
      double through = b.delivered ? b.share : 0.0;
      double delay = 0.0;
      for (const auto& e : b.edges) {
        const LinkLoad& ll = loads.at({e.from_device, e.out_interface});
        through *= (1.0 - ll.loss);
        delay += ll.delay_ms;
      }
      fb.delivered_fraction = through;
      fb.delay_ms = delay;
      delivered += through;
      weighted_delay += through * delay;
      fr.branches.push_back(std::move(fb));
    }
    fr.delivered_fraction = delivered;
    fr.loss_fraction = 1.0 - delivered;
    if (delivered > 0.0) fr.mean_delay_ms = weighted_delay / delivered;
    fr.loss_ok = fr.loss_fraction <= cls.max_loss + kSlaEpsilon;
    fr.delay_ok = fr.mean_delay_ms.has_value() &&
                  *fr.mean_delay_ms <= cls.max_delay_ms + kSlaEpsilon;
    fr.pass = fr.loss_ok && fr.delay_ok;
    if (!fr.pass) report.pass = false;
    report.flows.push_back(std::move(fr));
  }
  std::sort(report.flows.begin(), report.flows.end(),
            [](const FlowResult& a, const FlowResult& b) { return a.flow < b.flow; });
  for (const auto& [key, ll] : loads) report.links.push_back(ll);
  return report;
}

namespace {

std::map<std::string, SlaPredictor>& predictor_registry() {
  static std::map<std::string, SlaPredictor> registry{
      {"default", [](const Dataplane& dp) { return simulate_sla(dp); }}};
  return registry;
}

std::mutex& predictor_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void register_sla_predictor(const std::string& name, SlaPredictor predictor) {
  std::lock_guard<std::mutex> lock(predictor_mutex());
  predictor_registry()[name] = std::move(predictor);
}

SlaPredictor get_sla_predictor(const std::string& name) {
  std::lock_guard<std::mutex> lock(predictor_mutex());
  auto it = predictor_registry().find(name);
  if (it == predictor_registry().end()) {
    throw Error(ErrorCode::UnknownTool, "no SLA predictor named " + name);
  }
  return it->second;
}

}  // namespace nettwin
