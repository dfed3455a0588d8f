#pragma once

// Shared builders for test topologies and scratch directories.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unistd.h>
#include <utility>
#include <vector>

#include "nettwin/netspec.hpp"

namespace nettwin::testfx {

inline InterfaceCfg ifc(std::string name, std::optional<std::string> v4 = std::nullopt,
                        std::optional<std::string> v6 = std::nullopt, int64_t mtu = 1500,
                        bool enabled = true) {
  InterfaceCfg i;
  i.name = std::move(name);
  i.v4_addr = std::move(v4);
  i.v6_addr = std::move(v6);
  i.mtu = mtu;
  i.enabled = enabled;
  return i;
}

inline LinkCfg link(std::string a, std::string ai, std::string b, std::string bi,
                    int64_t capacity = 10'000'000'000, double delay_ms = 1.0) {
  LinkCfg l;
  l.a_device = std::move(a);
  l.a_interface = std::move(ai);
  l.b_device = std::move(b);
  l.b_interface = std::move(bi);
  l.capacity_bps = capacity;
  l.prop_delay_ms = delay_ms;
  return l;
}

inline StaticRouteCfg via_nh(std::string prefix, std::string next_hop, int64_t metric = 1) {
  StaticRouteCfg s;
  s.prefix = std::move(prefix);
  s.next_hop = std::move(next_hop);
  s.metric = metric;
  return s;
}

inline StaticRouteCfg via_if(std::string prefix, std::string out_interface, int64_t metric = 1) {
  StaticRouteCfg s;
  s.prefix = std::move(prefix);
  s.out_interface = std::move(out_interface);
  s.metric = metric;
  return s;
}

// r1(lo 10.9.1.1/32) --10.0.12.0/30-- r2(lo 10.9.2.1/32), static routes to the
// opposite loopback via the link peer address.
inline NetworkSpec two_node_static() {
  NetworkSpec spec;
  DeviceConfig r1;
  r1.hostname = "r1";
  r1.interfaces = {ifc("lo0", "10.9.1.1/32"), ifc("eth0", "10.0.12.1/30")};
  r1.static_routes = {via_nh("10.9.2.1/32", "10.0.12.2")};
  DeviceConfig r2;
  r2.hostname = "r2";
  r2.interfaces = {ifc("lo0", "10.9.2.1/32"), ifc("eth0", "10.0.12.2/30")};
  r2.static_routes = {via_nh("10.9.1.1/32", "10.0.12.1")};
  spec.devices = {r1, r2};
  spec.links = {link("r1", "eth0", "r2", "eth0")};
  return spec;
}

// Fresh empty scratch directory, unique per call.
inline std::filesystem::path fresh_dir(const std::string& tag) {
  static std::atomic<uint64_t> counter{0};
  auto d = std::filesystem::temp_directory_path() /
           ("nettwin-" + tag + "-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter.fetch_add(1)));
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace nettwin::testfx
