#include "nettwin/dataplane.hpp"

#include <algorithm>
#include <queue>

#include "nettwin/errors.hpp"

namespace nettwin {

const char* route_protocol_name(RouteProtocol p) {
  switch (p) {
    case RouteProtocol::Connected: return "CONNECTED";
    case RouteProtocol::Static: return "STATIC";
    case RouteProtocol::Igp: return "IGP";
    case RouteProtocol::SummaryDiscard: return "SUMMARY_DISCARD";
  }
  return "?";
}

const char* disposition_name(Disposition d) {
  switch (d) {
    case Disposition::Delivered: return "DELIVERED";
    case Disposition::NoRoute: return "NO_ROUTE";
    case Disposition::AclDenied: return "ACL_DENIED";
    case Disposition::Loop: return "LOOP";
    case Disposition::Discarded: return "DISCARDED";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Route computation
// ---------------------------------------------------------------------------

namespace {

constexpr int64_t kInf = std::numeric_limits<int64_t>::max() / 4;

struct TableEntry {
  int64_t metric = 0;
  std::vector<NextHop> next_hops;
  std::string metric_type = "internal";
  std::optional<std::string> origin_process;

  bool operator==(const TableEntry&) const = default;
};

// device -> prefix -> best candidate learned via one process
using ProcTable = std::map<std::string, std::map<Prefix, TableEntry>>;

struct Adv {
  Prefix prefix;
  std::string origin_device;
  int64_t metric = 0;
  std::string metric_type = "internal";
  std::optional<std::string> origin_process;
};

struct ProcEdge {
  std::string neighbor;
  std::string out_interface;
  std::string in_interface;
  int64_t cost = 1;
};

struct Process {
  std::string id;
  IpFamily family = IpFamily::V4;
  std::map<std::string, std::map<std::string, int64_t>> members;  // device -> iface -> metric
  std::map<std::string, std::vector<Prefix>> summaries;
  std::map<std::string, std::vector<RedistributeCfg>> redistribute;
  std::map<std::string, std::vector<ProcEdge>> adj;
  std::map<std::string, std::map<std::string, int64_t>> dist;  // src -> dst -> cost
  // device -> origin -> equal-cost first hops toward origin
  std::map<std::string, std::map<std::string, std::vector<NextHop>>> first_hops;
};

struct SpecIndex {
  std::vector<std::string> devices;
  std::map<std::string, const DeviceConfig*> device_cfg;
  std::map<std::pair<std::string, std::string>, const InterfaceCfg*> interfaces;
  std::map<std::pair<std::string, std::string>, std::pair<std::string, std::string>> peers;
  std::map<std::string, std::set<std::string>> device_processes;  // device -> process ids

  bool enabled(const std::string& dev, const std::string& ifc) const {
    auto it = interfaces.find({dev, ifc});
    return it != interfaces.end() && it->second->enabled;
  }
};

SpecIndex index_spec(const NetworkSpec& spec) {
  SpecIndex idx;
  for (const auto& d : spec.devices) {
    idx.devices.push_back(d.hostname);
    idx.device_cfg[d.hostname] = &d;
    for (const auto& i : d.interfaces) idx.interfaces[{d.hostname, i.name}] = &i;
    for (const auto& p : d.igp_processes) idx.device_processes[d.hostname].insert(p.process_id);
  }
  std::sort(idx.devices.begin(), idx.devices.end());
  for (const auto& l : spec.links) {
    if (!idx.interfaces.count({l.a_device, l.a_interface}) ||
        !idx.interfaces.count({l.b_device, l.b_interface})) {
      continue;
    }
    idx.peers[{l.a_device, l.a_interface}] = {l.b_device, l.b_interface};
    idx.peers[{l.b_device, l.b_interface}] = {l.a_device, l.a_interface};
  }
  return idx;
}

std::vector<std::pair<std::string, Prefix>> interface_prefixes(const DeviceConfig& dev,
                                                               bool enabled_only = true) {
  std::vector<std::pair<std::string, Prefix>> out;
  for (const auto& i : dev.interfaces) {
    if (enabled_only && !i.enabled) continue;
    for (const auto& addr : {i.v4_addr, i.v6_addr}) {
      if (!addr) continue;
      if (auto p = Prefix::parse(*addr)) out.push_back({i.name, *p});
    }
  }
  return out;
}

std::map<std::string, Process> build_processes(const NetworkSpec& spec, const SpecIndex& idx) {
  std::map<std::string, Process> procs;  // keyed "<id>|<family>"
  for (const auto& d : spec.devices) {
    for (const auto& p : d.igp_processes) {
      auto family = family_from_name(p.family);
      if (!family) continue;
      std::string key = p.process_id + "|" + p.family;
      Process& proc = procs[key];
      proc.id = p.process_id;
      proc.family = *family;
      for (const auto& m : p.interfaces) proc.members[d.hostname][m.name] = m.metric;
      for (const auto& s : p.summaries) {
        if (auto pref = Prefix::parse(s.prefix)) {
          if (pref->addr.family == proc.family) {
            proc.summaries[d.hostname].push_back(pref->network());
          }
        }
      }
      for (const auto& r : p.redistribute) proc.redistribute[d.hostname].push_back(r);
    }
  }
  for (auto& [key, proc] : procs) {
    for (const auto& l : spec.links) {
      struct End {
        const std::string& dev;
        const std::string& ifc;
      };
      End a{l.a_device, l.a_interface}, b{l.b_device, l.b_interface};
      for (const auto& [src, dst] : {std::pair{a, b}, std::pair{b, a}}) {
        auto mi = proc.members.find(src.dev);
        if (mi == proc.members.end()) continue;
        auto cost = mi->second.find(src.ifc);
        if (cost == mi->second.end()) continue;
        auto ni = proc.members.find(dst.dev);
        if (ni == proc.members.end() || !ni->second.count(dst.ifc)) continue;
        if (!idx.enabled(src.dev, src.ifc) || !idx.enabled(dst.dev, dst.ifc)) continue;
        proc.adj[src.dev].push_back({dst.dev, src.ifc, dst.ifc, cost->second});
      }
    }
    for (auto& [dev, edges] : proc.adj) {
      std::sort(edges.begin(), edges.end(), [](const ProcEdge& x, const ProcEdge& y) {
        return std::tie(x.neighbor, x.out_interface) < std::tie(y.neighbor, y.out_interface);
      });
    }
    // All-pairs shortest paths: Dijkstra from every member device, neighbors
    // visited in sorted order for deterministic tie handling.
    for (const auto& [src, unused] : proc.members) {
      auto& dist = proc.dist[src];
      for (const auto& [dev, u2] : proc.members) dist[dev] = kInf;
      dist[src] = 0;
      using Item = std::pair<int64_t, std::string>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
      heap.push({0, src});
      while (!heap.empty()) {
        auto [d, dev] = heap.top();
        heap.pop();
        if (d > dist[dev]) continue;
        auto ai = proc.adj.find(dev);
        if (ai == proc.adj.end()) continue;
        for (const auto& e : ai->second) {
          int64_t nd = d + e.cost;
          if (nd < dist[e.neighbor]) {
            dist[e.neighbor] = nd;
            heap.push({nd, e.neighbor});
          }
        }
      }
    }
    for (const auto& [dev, unused] : proc.members) {
      for (const auto& [origin, u2] : proc.members) {
        if (origin == dev) continue;
        int64_t total = proc.dist[dev].count(origin) ? proc.dist[dev][origin] : kInf;
        if (total >= kInf) continue;
        std::vector<NextHop> hops;
        auto ai = proc.adj.find(dev);
        if (ai != proc.adj.end()) {
          for (const auto& e : ai->second) {
            int64_t via = proc.dist[e.neighbor].count(origin) ? proc.dist[e.neighbor][origin]
                                                              : kInf;
            if (via < kInf && e.cost + via == total) {
              hops.push_back({e.out_interface, e.neighbor});
            }
          }
        }
        std::sort(hops.begin(), hops.end());
        hops.erase(std::unique(hops.begin(), hops.end()), hops.end());
        if (!hops.empty()) proc.first_hops[dev][origin] = std::move(hops);
      }
    }
  }
  return procs;
}

std::optional<RibEntry> resolve_static(const SpecIndex& idx, const DeviceConfig& dev,
                                       const StaticRouteCfg& s) {
  auto prefix = Prefix::parse(s.prefix);
  if (!prefix) return std::nullopt;
  RibEntry entry;
  entry.prefix = prefix->network();
  entry.protocol = RouteProtocol::Static;
  entry.metric = s.metric;
  entry.admin_distance = kAdStatic;
  if (s.out_interface) {
    if (!idx.enabled(dev.hostname, *s.out_interface)) return std::nullopt;
    auto peer = idx.peers.find({dev.hostname, *s.out_interface});
    std::string next = peer == idx.peers.end() ? "" : peer->second.first;
    entry.next_hops.push_back({*s.out_interface, next});
    return entry;
  }
  if (!s.next_hop) return std::nullopt;
  auto nh = IpAddr::parse(*s.next_hop);
  if (!nh) return std::nullopt;
  // The next hop must fall inside a connected prefix of an enabled local
  // interface and belong to the adjacent device on that link; otherwise the
  // route is unresolvable and stays out of the FIB.
  for (const auto& [ifc, pref] : interface_prefixes(dev)) {
    if (!pref.contains(*nh)) continue;
    auto peer = idx.peers.find({dev.hostname, ifc});
    if (peer == idx.peers.end()) continue;
    const auto& [peer_dev, peer_ifc] = peer->second;
    auto pi = idx.interfaces.find({peer_dev, peer_ifc});
    if (pi == idx.interfaces.end() || !pi->second->enabled) continue;
    for (const auto& addr : {pi->second->v4_addr, pi->second->v6_addr}) {
      if (!addr) continue;
      auto ap = Prefix::parse(*addr);
      if (ap && ap->addr == *nh) {
        entry.next_hops.push_back({ifc, peer_dev});
        return entry;
      }
    }
  }
  return std::nullopt;
}

void merge_candidate(DeviceFib& fib, const RibEntry& cand, const std::string& cand_via) {
  auto it = fib.find(cand.prefix);
  if (it == fib.end()) {
    fib[cand.prefix] = cand;
    return;
  }
  RibEntry& cur = it->second;
  auto cur_key = std::tie(cur.admin_distance, cur.metric);
  auto cand_key = std::tie(cand.admin_distance, cand.metric);
  if (cand_key < cur_key) {
    cur = cand;
  } else if (cand_key == cur_key) {
    for (const auto& nh : cand.next_hops) cur.next_hops.push_back(nh);
    std::sort(cur.next_hops.begin(), cur.next_hops.end());
    cur.next_hops.erase(std::unique(cur.next_hops.begin(), cur.next_hops.end()),
                        cur.next_hops.end());
    if (cand.learned_via && (!cur.learned_via || *cand.learned_via < *cur.learned_via)) {
      cur.learned_via = cand.learned_via;
    }
  }
  (void)cand_via;
}

}  // namespace

RouteComputation compute_routes(const NetworkSpec& spec, int max_iterations) {
  SpecIndex idx = index_spec(spec);
  std::map<std::string, Process> procs = build_processes(spec, idx);

  // Fixed local candidates.
  std::map<std::string, std::vector<RibEntry>> local;  // device -> connected + static
  for (const auto& d : spec.devices) {
    auto& entries = local[d.hostname];
    for (const auto& [ifc, pref] : interface_prefixes(d)) {
      RibEntry e;
      e.prefix = pref.network();
      e.protocol = RouteProtocol::Connected;
      e.metric = 0;
      e.admin_distance = kAdConnected;
      auto peer = idx.peers.find({d.hostname, ifc});
      std::string next;
      if (peer != idx.peers.end() && idx.enabled(peer->second.first, peer->second.second)) {
        next = peer->second.first;
      }
      e.next_hops.push_back({ifc, next});
      entries.push_back(e);
    }
    for (const auto& s : d.static_routes) {
      if (auto e = resolve_static(idx, d, s)) entries.push_back(*e);
    }
  }

  std::map<std::string, ProcTable> tables;  // process key -> table
  for (const auto& [key, proc] : procs) tables[key] = {};

  auto build_rib = [&](const std::map<std::string, ProcTable>& T,
                       const std::map<std::string, std::map<std::string, std::map<Prefix, int64_t>>>&
                           active_summaries) {
    std::map<std::string, DeviceFib> fibs;
    for (const auto& dev : idx.devices) {
      DeviceFib& fib = fibs[dev];
      for (const auto& e : local[dev]) merge_candidate(fib, e, "");
      for (const auto& [key, proc] : procs) {
        auto ai = active_summaries.find(key);
        if (ai != active_summaries.end()) {
          auto di = ai->second.find(dev);
          if (di != ai->second.end()) {
            for (const auto& [prefix, metric] : di->second) {
              RibEntry e;
              e.prefix = prefix;
              e.protocol = RouteProtocol::SummaryDiscard;
              e.metric = metric;
              e.admin_distance = kAdSummaryDiscard;
              e.learned_via = proc.id;
              merge_candidate(fib, e, proc.id);
            }
          }
        }
        auto ti = T.at(key).find(dev);
        if (ti == T.at(key).end()) continue;
        for (const auto& [prefix, cand] : ti->second) {
          RibEntry e;
          e.prefix = prefix;
          e.protocol = RouteProtocol::Igp;
          e.metric = cand.metric;
          e.admin_distance = kAdIgp;
          e.metric_type = cand.metric_type;
          e.origin_process = cand.origin_process;
          e.learned_via = proc.id;
          e.next_hops = cand.next_hops;
          merge_candidate(fib, e, proc.id);
        }
      }
    }
    return fibs;
  };

  std::map<std::string, std::map<std::string, std::map<Prefix, int64_t>>> no_summaries;
  std::map<std::string, DeviceFib> rib = build_rib(tables, no_summaries);

  RouteComputation result;
  result.converged = procs.empty();
  result.iterations = 0;

  for (int iter = 1; iter <= max_iterations && !procs.empty(); ++iter) {
    result.iterations = iter;

    // Summaries active in this round, judged against the previous RIB.
    std::map<std::string, std::map<std::string, std::map<Prefix, int64_t>>> active;
    for (const auto& [key, proc] : procs) {
      for (const auto& [dev, summaries] : proc.summaries) {
        for (const Prefix& s : summaries) {
          int64_t best = kInf;
          auto ri = rib.find(dev);
          if (ri != rib.end()) {
            for (const auto& [prefix, entry] : ri->second) {
              if (entry.protocol == RouteProtocol::SummaryDiscard) continue;
              if (prefix == s || !s.contains(prefix)) continue;
              best = std::min(best, entry.metric);
            }
          }
          if (best < kInf) active[key][dev][s] = best;
        }
      }
    }

    // Advertisements per process for this round.
    std::map<std::string, std::vector<Adv>> advs;
    for (const auto& [key, proc] : procs) {
      auto suppressed = [&](const std::string& dev, const Prefix& p) {
        auto ai = active.find(key);
        if (ai == active.end()) return false;
        auto di = ai->second.find(dev);
        if (di == ai->second.end()) return false;
        for (const auto& [s, metric] : di->second) {
          if (s.len < p.len && s.contains(p)) return true;
        }
        return false;
      };
      auto& out = advs[key];
      for (const auto& [dev, members] : proc.members) {
        const DeviceConfig* cfg = idx.device_cfg.at(dev);
        for (const auto& [ifc, pref] : interface_prefixes(*cfg)) {
          auto mi = members.find(ifc);
          if (mi == members.end()) continue;
          if (pref.addr.family != proc.family) continue;
          Prefix network = pref.network();
          if (suppressed(dev, network)) continue;
          out.push_back({network, dev, mi->second, "internal", proc.id});
        }
        auto ri = proc.redistribute.find(dev);
        if (ri != proc.redistribute.end()) {
          for (const auto& stmt : ri->second) {
            // Locate the source process (same device, matching id).
            for (const auto& [src_key, src_proc] : procs) {
              if (src_proc.id != stmt.from_process || !src_proc.members.count(dev)) continue;
              auto ti = tables.at(src_key).find(dev);
              if (ti == tables.at(src_key).end()) continue;
              for (const auto& [prefix, entry] : ti->second) {
                if (prefix.addr.family != proc.family) continue;
                if (entry.origin_process && *entry.origin_process == proc.id) continue;
                if (suppressed(dev, prefix)) continue;
                std::optional<std::string> origin;
                if (stmt.metric_type == "external") origin = entry.origin_process;
                out.push_back({prefix, dev, stmt.metric, stmt.metric_type, origin});
              }
            }
          }
        }
        auto ai = active.find(key);
        if (ai != active.end()) {
          auto di = ai->second.find(dev);
          if (di != ai->second.end()) {
            for (const auto& [s, metric] : di->second) {
              out.push_back({s, dev, metric, "internal", proc.id});
            }
          }
        }
      }
      std::sort(out.begin(), out.end(), [](const Adv& x, const Adv& y) {
        return std::tie(x.prefix, x.origin_device, x.metric) <
               std::tie(y.prefix, y.origin_device, y.metric);
      });
    }

    // Import advertisements through each process's shortest-path graph.
    std::map<std::string, ProcTable> next_tables;
    for (const auto& [key, proc] : procs) {
      ProcTable& table = next_tables[key];
      for (const auto& [dev, unused] : proc.members) {
        auto& dev_table = table[dev];
        for (const Adv& adv : advs[key]) {
          if (adv.origin_device == dev) continue;
          if (adv.origin_process && *adv.origin_process != proc.id) {
            // External routes are never re-imported by members of their
            // origin process.
            auto dp = idx.device_processes.find(dev);
            if (dp != idx.device_processes.end() && dp->second.count(*adv.origin_process)) {
              continue;
            }
          }
          auto fi = proc.first_hops.find(dev);
          if (fi == proc.first_hops.end()) continue;
          auto oi = fi->second.find(adv.origin_device);
          if (oi == fi->second.end()) continue;
          int64_t total = proc.dist.at(dev).at(adv.origin_device) + adv.metric;
          auto ei = dev_table.find(adv.prefix);
          if (ei == dev_table.end() || total < ei->second.metric) {
            dev_table[adv.prefix] = {total, oi->second, adv.metric_type, adv.origin_process};
          } else if (total == ei->second.metric) {
            auto& hops = ei->second.next_hops;
            hops.insert(hops.end(), oi->second.begin(), oi->second.end());
            std::sort(hops.begin(), hops.end());
            hops.erase(std::unique(hops.begin(), hops.end()), hops.end());
          }
        }
        if (dev_table.empty()) table.erase(dev);
      }
    }

    std::map<std::string, DeviceFib> next_rib = build_rib(next_tables, active);
    bool changed = next_tables != tables || next_rib != rib;
    tables = std::move(next_tables);
    rib = std::move(next_rib);
    if (!changed) {
      result.converged = true;
      break;
    }
    result.converged = false;
  }

  result.fibs = std::move(rib);
  return result;
}

LayerPayload routing_payload(const RouteComputation& routes) {
  LayerPayload payload{LayerId::Routing, {}, {}};
  std::map<std::pair<std::string, Prefix>, std::string> ids;
  for (const auto& [dev, fib] : routes.fibs) {
    for (const auto& [prefix, entry] : fib) {
      std::string hops;
      for (const auto& nh : entry.next_hops) {
        if (!hops.empty()) hops += ",";
        hops += nh.out_interface + ">" + nh.next_device;
      }
      AttrMap attrs{{"prefix", prefix.str()},
                    {"protocol", std::string(route_protocol_name(entry.protocol))},
                    {"metric", entry.metric},
                    {"admin_distance", static_cast<int64_t>(entry.admin_distance)},
                    {"metric_type", entry.metric_type},
                    {"next_hops", hops}};
      if (entry.origin_process) attrs["origin_process"] = *entry.origin_process;
      if (entry.learned_via) attrs["learned_via"] = *entry.learned_via;
      auto node = make_node(dev, LayerId::Routing, "rib-entry", std::move(attrs));
      ids[{dev, prefix}] = node.id;
      payload.edges.push_back({make_node_id(dev, LayerId::Device, "device", {{"name", dev}}),
                               node.id, EdgeKind::Own});
      payload.nodes.push_back(std::move(node));
    }
  }
  for (const auto& [dev, fib] : routes.fibs) {
    for (const auto& [prefix, entry] : fib) {
      for (const auto& nh : entry.next_hops) {
        if (nh.next_device.empty()) continue;
        auto ni = ids.find({nh.next_device, prefix});
        if (ni != ids.end()) {
          payload.edges.push_back({ids.at({dev, prefix}), ni->second, EdgeKind::Connect});
        }
      }
    }
  }
  return payload;
}

// ---------------------------------------------------------------------------
// ACL evaluation and comparison
// ---------------------------------------------------------------------------

AclVerdict eval_acl(const AclCfg& acl, const AclPacket& pkt) {
  std::vector<const AclRuleCfg*> rules;
  for (const auto& r : acl.rules) rules.push_back(&r);
  std::sort(rules.begin(), rules.end(),
            [](const AclRuleCfg* a, const AclRuleCfg* b) { return a->seq < b->seq; });
  for (const AclRuleCfg* r : rules) {
    if (r->protocol != "any" && r->protocol != pkt.protocol) continue;
    auto src = Prefix::parse(r->src_prefix);
    auto dst = Prefix::parse(r->dst_prefix);
    if (!src || !dst) continue;
    if (!src->contains(pkt.src_ip) || !dst->contains(pkt.dst_ip)) continue;
    if (pkt.protocol == "tcp" || pkt.protocol == "udp") {
      if (pkt.src_port < r->src_ports[0] || pkt.src_port > r->src_ports[1]) continue;
      if (pkt.dst_port < r->dst_ports[0] || pkt.dst_port > r->dst_ports[1]) continue;
    }
    return {r->action == "permit", r->seq};
  }
  return {false, std::nullopt};  // implicit deny
}

namespace {

uint64_t saturating_mul(uint64_t a, uint64_t b, uint64_t cap) {
  if (a == 0 || b == 0) return 0;
  if (a > cap / b) return cap + 1;
  return a * b;
}

uint64_t prefix_count(const Prefix& p, uint64_t cap) {
  unsigned diff = p.max_len() - p.len;
  if (diff >= 40) return cap + 1;
  return 1ull << diff;
}

void enumerate_prefix(const Prefix& p, std::vector<IpAddr>& out) {
  IpAddr cur = p.network().addr;
  uint64_t count = 1ull << (p.max_len() - p.len);
  size_t width = cur.family == IpFamily::V4 ? 4 : 16;
  for (uint64_t i = 0; i < count; ++i) {
    out.push_back(cur);
    for (size_t b = width; b-- > 0;) {
      if (++cur.bytes[b] != 0) break;
    }
  }
}

}  // namespace

std::vector<AclWitness> acl_compare(const AclCfg& a, const AclCfg& b, const HeaderSpace& space,
                                    uint64_t cap) {
  if (space.src_prefixes.empty() || space.dst_prefixes.empty() || space.protocols.empty() ||
      space.src_ports.empty() || space.dst_ports.empty()) {
    throw Error(ErrorCode::InvalidParams, "header space must cover every dimension");
  }
  uint64_t srcs = 0, dsts = 0, sports = 0, dports = 0;
  for (const auto& p : space.src_prefixes) srcs += prefix_count(p, cap);
  for (const auto& p : space.dst_prefixes) dsts += prefix_count(p, cap);
  for (const auto& r : space.src_ports) {
    if (r[0] < 0 || r[1] > 65535 || r[0] > r[1]) {
      throw Error(ErrorCode::InvalidParams, "invalid port range in header space");
    }
    sports += static_cast<uint64_t>(r[1] - r[0] + 1);
  }
  for (const auto& r : space.dst_ports) {
    if (r[0] < 0 || r[1] > 65535 || r[0] > r[1]) {
      throw Error(ErrorCode::InvalidParams, "invalid port range in header space");
    }
    dports += static_cast<uint64_t>(r[1] - r[0] + 1);
  }
  uint64_t total = saturating_mul(srcs, dsts, cap);
  total = saturating_mul(total, space.protocols.size(), cap);
  total = saturating_mul(total, sports, cap);
  total = saturating_mul(total, dports, cap);
  if (total > cap) {
    throw Error(ErrorCode::HeaderSpaceTooLarge,
                "header space exceeds " + std::to_string(cap) + " packets");
  }

  std::vector<IpAddr> src_addrs, dst_addrs;
  for (const auto& p : space.src_prefixes) enumerate_prefix(p, src_addrs);
  for (const auto& p : space.dst_prefixes) enumerate_prefix(p, dst_addrs);
  std::sort(src_addrs.begin(), src_addrs.end());
  src_addrs.erase(std::unique(src_addrs.begin(), src_addrs.end()), src_addrs.end());
  std::sort(dst_addrs.begin(), dst_addrs.end());
  dst_addrs.erase(std::unique(dst_addrs.begin(), dst_addrs.end()), dst_addrs.end());
  std::vector<std::string> protocols = space.protocols;
  std::sort(protocols.begin(), protocols.end());
  protocols.erase(std::unique(protocols.begin(), protocols.end()), protocols.end());
  std::vector<int64_t> sport_vals, dport_vals;
  for (const auto& r : space.src_ports) {
    for (int64_t v = r[0]; v <= r[1]; ++v) sport_vals.push_back(v);
  }
  for (const auto& r : space.dst_ports) {
    for (int64_t v = r[0]; v <= r[1]; ++v) dport_vals.push_back(v);
  }
  std::sort(sport_vals.begin(), sport_vals.end());
  sport_vals.erase(std::unique(sport_vals.begin(), sport_vals.end()), sport_vals.end());
  std::sort(dport_vals.begin(), dport_vals.end());
  dport_vals.erase(std::unique(dport_vals.begin(), dport_vals.end()), dport_vals.end());

  std::vector<AclWitness> out;
  for (const auto& src : src_addrs) {
    for (const auto& dst : dst_addrs) {
      for (const auto& proto : protocols) {
        for (int64_t sp : sport_vals) {
          for (int64_t dp : dport_vals) {
            AclPacket pkt{src, dst, proto, sp, dp};
            AclVerdict va = eval_acl(a, pkt);
            AclVerdict vb = eval_acl(b, pkt);
            // Equivalence is about filtering behavior: which rule matched may
            // legitimately differ across a refactor.
            if (va.permit == vb.permit) continue;
            out.push_back({pkt, va, vb});
          }
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataplane
// ---------------------------------------------------------------------------

Dataplane::Dataplane(NetworkSpec spec, int max_iterations) : spec_(std::move(spec)) {
  routes_ = compute_routes(spec_, max_iterations);
  for (const auto& l : spec_.links) {
    peers_[{l.a_device, l.a_interface}] = {l.b_device, l.b_interface};
    peers_[{l.b_device, l.b_interface}] = {l.a_device, l.a_interface};
  }
}

Dataplane Dataplane::from_content(const SnapshotContent& content) {
  return Dataplane(extract_network_spec(content));
}

const InterfaceCfg* Dataplane::find_interface(const std::string& device,
                                              const std::string& name) const {
  const DeviceConfig* d = spec_.find_device(device);
  if (!d) return nullptr;
  for (const auto& i : d->interfaces) {
    if (i.name == name) return &i;
  }
  return nullptr;
}

const AclCfg* Dataplane::find_acl(const std::string& device, const std::string& acl) const {
  const DeviceConfig* d = spec_.find_device(device);
  if (!d) return nullptr;
  for (const auto& a : d->acls) {
    if (a.name == acl) return &a;
  }
  return nullptr;
}

const AclCfg* Dataplane::bound_acl(const std::string& device, const std::string& interface,
                                   const std::string& direction) const {
  const DeviceConfig* d = spec_.find_device(device);
  if (!d) return nullptr;
  for (const auto& a : d->acls) {
    for (const auto& b : a.applied) {
      if (b.interface == interface && b.direction == direction) return &a;
    }
  }
  return nullptr;
}

bool Dataplane::owns_address(const std::string& device, const IpAddr& ip) const {
  const DeviceConfig* d = spec_.find_device(device);
  if (!d) return false;
  for (const auto& i : d->interfaces) {
    if (!i.enabled) continue;
    for (const auto& addr : {i.v4_addr, i.v6_addr}) {
      if (!addr) continue;
      auto p = Prefix::parse(*addr);
      if (p && p->addr == ip) return true;
    }
  }
  return false;
}

const RibEntry* Dataplane::lpm(const std::string& device, const IpAddr& dst) const {
  auto fi = routes_.fibs.find(device);
  if (fi == routes_.fibs.end()) return nullptr;
  const RibEntry* best = nullptr;
  for (const auto& [prefix, entry] : fi->second) {
    if (!prefix.contains(dst)) continue;
    if (!best || prefix.len > best->prefix.len) best = &entry;
  }
  return best;
}

void Dataplane::walk(const std::string& device, const std::optional<std::string>& in_interface,
                     const AclPacket& pkt, std::vector<TraceHop> path,
                     std::set<std::string> visited, int hop_budget,
                     std::vector<ForwardingTrace>& out) const {
  visited.insert(device);
  TraceHop hop{device};

  if (in_interface) {
    if (const AclCfg* acl = bound_acl(device, *in_interface, "in")) {
      AclVerdict v = eval_acl(*acl, pkt);
      hop.acl_decisions.push_back({acl->name, "in", v.permit, v.seq});
      if (!v.permit) {
        path.push_back(std::move(hop));
        out.push_back({std::move(path), Disposition::AclDenied});
        return;
      }
    }
  }

  const RibEntry* entry = lpm(device, pkt.dst_ip);
  if (entry) hop.matched_prefix = entry->prefix.str();

  if (owns_address(device, pkt.dst_ip)) {
    path.push_back(std::move(hop));
    out.push_back({std::move(path), Disposition::Delivered});
    return;
  }
  if (!entry) {
    path.push_back(std::move(hop));
    out.push_back({std::move(path), Disposition::NoRoute});
    return;
  }
  if (entry->protocol == RouteProtocol::SummaryDiscard) {
    path.push_back(std::move(hop));
    out.push_back({std::move(path), Disposition::Discarded});
    return;
  }

  for (const NextHop& nh : entry->next_hops) {
    TraceHop branch_hop = hop;
    branch_hop.out_interface = nh.out_interface;
    std::vector<TraceHop> branch_path = path;

    if (const AclCfg* acl = bound_acl(device, nh.out_interface, "out")) {
      AclVerdict v = eval_acl(*acl, pkt);
      branch_hop.acl_decisions.push_back({acl->name, "out", v.permit, v.seq});
      if (!v.permit) {
        branch_path.push_back(std::move(branch_hop));
        out.push_back({std::move(branch_path), Disposition::AclDenied});
        continue;
      }
    }
    if (nh.next_device.empty()) {
      // Directly attached network with no modeled neighbor: the packet leaves
      // the modeled topology here.
      branch_path.push_back(std::move(branch_hop));
      out.push_back({std::move(branch_path), Disposition::Delivered});
      continue;
    }
    branch_hop.next_device = nh.next_device;
    branch_path.push_back(std::move(branch_hop));
    if (visited.count(nh.next_device)) {
      out.push_back({std::move(branch_path), Disposition::Loop});
      continue;
    }
    if (static_cast<int>(branch_path.size()) >= hop_budget) {
      out.push_back({std::move(branch_path), Disposition::Loop});
      continue;
    }
    std::optional<std::string> next_in;
    auto pi = peers_.find({device, nh.out_interface});
    if (pi != peers_.end()) next_in = pi->second.interface;
    walk(nh.next_device, next_in, pkt, std::move(branch_path), visited, hop_budget, out);
  }
}

std::vector<ForwardingTrace> Dataplane::forward(const PacketSpec& packet, int hop_budget) const {
  if (!spec_.find_device(packet.src_device)) {
    throw Error(ErrorCode::UnknownDevice, "source device " + packet.src_device + " not found");
  }
  if (packet.src_ip.family != packet.dst_ip.family) {
    throw Error(ErrorCode::InvalidParams, "src_ip and dst_ip must share a family");
  }
  if (packet.protocol != "tcp" && packet.protocol != "udp" && packet.protocol != "icmp") {
    throw Error(ErrorCode::InvalidParams, "protocol must be tcp, udp or icmp");
  }
  if (packet.src_port < 0 || packet.src_port > 65535 || packet.dst_port < 0 ||
      packet.dst_port > 65535) {
    throw Error(ErrorCode::InvalidParams, "ports must be within [0, 65535]");
  }
  AclPacket pkt{packet.src_ip, packet.dst_ip, packet.protocol, packet.src_port, packet.dst_port};
  std::vector<ForwardingTrace> out;
  walk(packet.src_device, std::nullopt, pkt, {}, {}, hop_budget, out);
  return out;
}

bool Dataplane::reachable(const PacketSpec& packet) const {
  return strict_disposition(packet) == Disposition::Delivered;
}

Disposition Dataplane::strict_disposition(const PacketSpec& packet) const {
  auto traces = forward(packet);
  for (const auto& t : traces) {
    if (t.disposition != Disposition::Delivered) return t.disposition;
  }
  return Disposition::Delivered;
}

std::vector<LoopReport> Dataplane::detect_loops() const {
  std::set<Prefix> prefixes;
  for (const auto& [dev, fib] : routes_.fibs) {
    for (const auto& [prefix, entry] : fib) prefixes.insert(prefix);
  }

  std::vector<LoopReport> reports;
  for (const Prefix& prefix : prefixes) {
    IpAddr rep = prefix.network().addr;
    std::map<std::string, std::set<std::string>> next;
    for (const auto& [dev, fib] : routes_.fibs) {
      const RibEntry* entry = lpm(dev, rep);
      if (!entry) continue;
      if (entry->protocol == RouteProtocol::Connected ||
          entry->protocol == RouteProtocol::SummaryDiscard) {
        continue;
      }
      for (const auto& nh : entry->next_hops) {
        if (!nh.next_device.empty()) next[dev].insert(nh.next_device);
      }
    }

    std::set<std::vector<std::string>> cycles;
    std::vector<std::string> path;
    std::map<std::string, size_t> on_path;
    auto dfs = [&](auto&& self, const std::string& dev) -> void {
      auto oi = on_path.find(dev);
      if (oi != on_path.end()) {
        std::vector<std::string> cycle(path.begin() + static_cast<long>(oi->second), path.end());
        auto smallest = std::min_element(cycle.begin(), cycle.end());
        std::rotate(cycle.begin(), smallest, cycle.end());
        cycles.insert(std::move(cycle));
        return;
      }
      auto ni = next.find(dev);
      if (ni == next.end()) return;
      on_path[dev] = path.size();
      path.push_back(dev);
      for (const auto& n : ni->second) self(self, n);
      path.pop_back();
      on_path.erase(dev);
    };
    for (const auto& [dev, unused] : next) dfs(dfs, dev);
    for (auto& cycle : cycles) reports.push_back({prefix, cycle});
  }
  std::sort(reports.begin(), reports.end());
  return reports;
}

std::vector<ProbeDifference> differential_reachability(const Dataplane& a, const Dataplane& b,
                                                       const std::vector<PacketSpec>& probes) {
  std::vector<ProbeDifference> out;
  for (const auto& probe : probes) {
    Disposition da = a.strict_disposition(probe);
    Disposition db = b.strict_disposition(probe);
    if (da != db) out.push_back({probe, da, db});
  }
  return out;
}

}  // namespace nettwin
