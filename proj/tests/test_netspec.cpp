#include "nettwin/netspec.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "nettwin/errors.hpp"
#include "nettwin/ip.hpp"

namespace nettwin {
namespace {

using testfx::ifc;
using testfx::link;
using testfx::via_if;
using testfx::via_nh;

NetworkSpec rich_spec() {
  NetworkSpec spec = testfx::two_node_static();
  DeviceConfig& r1 = spec.devices[0];
  r1.interfaces.push_back(ifc("eth1", "192.168.5.1/24", "2001:db8:5::1/64", 9000, false));
  r1.static_routes.push_back(via_if("0.0.0.0/0", "eth0", 7));
  IgpProcessCfg p1;
  p1.process_id = "P1";
  p1.family = "v4";
  p1.interfaces = {{"eth0", 10}, {"lo0", 1}};
  IgpProcessCfg p2;
  p2.process_id = "P2";
  p2.family = "v4";
  p2.interfaces = {{"eth1", 20}};
  p2.redistribute = {{"P1", 15, "external"}};
  p2.summaries = {{"192.168.0.0/16"}};
  r1.igp_processes = {p1, p2};
  AclCfg acl;
  acl.name = "edge-in";
  acl.rules = {
      {10, "permit", "tcp", "10.0.0.0/8", "10.9.2.1/32", {1024, 65535}, {443, 443}},
      {20, "deny", "any", "0.0.0.0/0", "0.0.0.0/0", {0, 65535}, {0, 65535}},
  };
  acl.applied = {{"eth0", "in"}};
  r1.acls = {acl};
  spec.sla_classes = {{"gold", 25.0, 0.001}};
  spec.demands = {{"f1", "r1", "10.9.2.1", 1'000'000, "gold"}};
  return spec;
}

TEST(NetSpec, SerializeParseRoundTrip) {
  NetworkSpec spec = rich_spec();
  ParseResult parsed = parse_network_spec(serialize_network_spec(spec));
  ASSERT_TRUE(parsed.ok()) << (parsed.diagnostics.empty()
                                   ? ""
                                   : parsed.diagnostics[0].path + ": " +
                                         parsed.diagnostics[0].message);
  EXPECT_EQ(*parsed.spec, spec);
}

TEST(NetSpec, DefaultsAreApplied) {
  ParseResult parsed = parse_network_spec(R"({
    "devices": [{
      "hostname": "r1",
      "interfaces": [{"name": "eth0", "v4_addr": "10.0.0.1/24"}],
      "acls": [{"name": "a", "rules": [
        {"seq": 5, "action": "permit", "src_prefix": "0.0.0.0/0", "dst_prefix": "0.0.0.0/0"}
      ]}]
    }]
  })");
  ASSERT_TRUE(parsed.ok());
  const DeviceConfig& dev = parsed.spec->devices[0];
  EXPECT_EQ(dev.interfaces[0].mtu, 1500);
  EXPECT_TRUE(dev.interfaces[0].enabled);
  EXPECT_FALSE(dev.interfaces[0].v6_addr.has_value());
  const AclRuleCfg& rule = dev.acls[0].rules[0];
  EXPECT_EQ(rule.protocol, "any");
  EXPECT_EQ(rule.src_ports, (std::array<int64_t, 2>{0, 65535}));
  EXPECT_EQ(rule.dst_ports, (std::array<int64_t, 2>{0, 65535}));
}

TEST(NetSpec, SpecAbsentWhenAnyDiagnostic) {
  ParseResult parsed = parse_network_spec(R"({"devices": [{"hostname": ""}]})");
  EXPECT_FALSE(parsed.ok());
  EXPECT_FALSE(parsed.spec.has_value());
  EXPECT_FALSE(parsed.diagnostics.empty());
}

std::vector<std::string> diag_paths(const std::string& text) {
  ParseResult parsed = parse_network_spec(text);
  std::vector<std::string> paths;
  for (const auto& d : parsed.diagnostics) paths.push_back(d.path);
  return paths;
}

bool has_path(const std::vector<std::string>& paths, const std::string& want) {
  return std::find(paths.begin(), paths.end(), want) != paths.end();
}

TEST(NetSpec, StructuralDiagnostics) {
  EXPECT_TRUE(has_path(diag_paths("not json"), ""));
  EXPECT_TRUE(has_path(diag_paths("[1,2]"), ""));
  EXPECT_TRUE(has_path(diag_paths("{}"), "devices"));
  EXPECT_TRUE(has_path(diag_paths(R"({"devices": []})"), "devices"));
}

TEST(NetSpec, DeviceDiagnostics) {
  auto paths = diag_paths(R"({
    "devices": [
      {"hostname": "r1",
       "interfaces": [
         {"name": "eth0", "mtu": 40},
         {"name": "eth0", "v4_addr": "10.0.0.300/24"}
       ],
       "static_routes": [
         {"prefix": "10.1.0.0/16"},
         {"prefix": "10.2.0.0/16", "next_hop": "2001:db8::1"},
         {"prefix": "10.3.0.0/16", "out_interface": "eth9"}
       ]},
      {"hostname": "r1"}
    ]
  })");
  EXPECT_TRUE(has_path(paths, "devices[0].interfaces[0].mtu"));
  EXPECT_TRUE(has_path(paths, "devices[0].interfaces[1].name"));
  EXPECT_TRUE(has_path(paths, "devices[0].interfaces[1].v4_addr"));
  EXPECT_TRUE(has_path(paths, "devices[0].static_routes[0]"));
  EXPECT_TRUE(has_path(paths, "devices[0].static_routes[1].next_hop"));
  EXPECT_TRUE(has_path(paths, "devices[0].static_routes[2].out_interface"));
  EXPECT_TRUE(has_path(paths, "devices[1].hostname"));
}

TEST(NetSpec, IgpDiagnostics) {
  auto paths = diag_paths(R"({
    "devices": [{
      "hostname": "r1",
      "interfaces": [{"name": "eth0", "v4_addr": "10.0.0.1/24"}],
      "igp_processes": [{
        "process_id": "P1",
        "family": "v5",
        "interfaces": [{"name": "eth7"}],
        "redistribute": [
          {"from_process": "P1"},
          {"from_process": "P9", "metric_type": "sideways"}
        ],
        "summaries": [{"prefix": "10.0.0.1/32"}]
      }]
    }]
  })");
  EXPECT_TRUE(has_path(paths, "devices[0].igp_processes[0].family"));
  EXPECT_TRUE(has_path(paths, "devices[0].igp_processes[0].interfaces[0].name"));
  EXPECT_TRUE(has_path(paths, "devices[0].igp_processes[0].redistribute[0].from_process"));
  EXPECT_TRUE(has_path(paths, "devices[0].igp_processes[0].redistribute[1].from_process"));
  EXPECT_TRUE(has_path(paths, "devices[0].igp_processes[0].redistribute[1].metric_type"));
  EXPECT_TRUE(has_path(paths, "devices[0].igp_processes[0].summaries[0].prefix"));
}

TEST(NetSpec, AclDiagnostics) {
  auto paths = diag_paths(R"({
    "devices": [{
      "hostname": "r1",
      "interfaces": [{"name": "eth0", "v4_addr": "10.0.0.1/24"}],
      "acls": [{
        "name": "a",
        "rules": [
          {"seq": 10, "action": "accept", "protocol": "gre",
           "src_prefix": "10.0.0.0/8", "dst_prefix": "2001:db8::/64",
           "src_ports": [500, 100], "dst_ports": [-1, 70000]},
          {"seq": 10, "action": "permit", "src_prefix": "0.0.0.0/0", "dst_prefix": "0.0.0.0/0"}
        ],
        "applied": [
          {"interface": "eth0", "direction": "in"},
          {"interface": "eth0", "direction": "in"},
          {"interface": "eth3", "direction": "up"}
        ]
      }]
    }]
  })");
  EXPECT_TRUE(has_path(paths, "devices[0].acls[0].rules[0].action"));
  EXPECT_TRUE(has_path(paths, "devices[0].acls[0].rules[0].protocol"));
  EXPECT_TRUE(has_path(paths, "devices[0].acls[0].rules[0]"));
  EXPECT_TRUE(has_path(paths, "devices[0].acls[0].rules[0].src_ports"));
  EXPECT_TRUE(has_path(paths, "devices[0].acls[0].rules[0].dst_ports"));
  EXPECT_TRUE(has_path(paths, "devices[0].acls[0].rules[1].seq"));
  EXPECT_TRUE(has_path(paths, "devices[0].acls[0].applied[1]"));
  EXPECT_TRUE(has_path(paths, "devices[0].acls[0].applied[2].interface"));
  EXPECT_TRUE(has_path(paths, "devices[0].acls[0].applied[2].direction"));
}

TEST(NetSpec, TopologyAndSlaDiagnostics) {
  auto paths = diag_paths(R"({
    "devices": [
      {"hostname": "r1", "interfaces": [{"name": "eth0", "v4_addr": "10.0.0.1/30"}]},
      {"hostname": "r2", "interfaces": [{"name": "eth0", "v4_addr": "10.0.0.2/30"}]}
    ],
    "topology": {"links": [
      {"a_device": "r1", "a_interface": "eth0", "b_device": "r2", "b_interface": "eth0"},
      {"a_device": "r1", "a_interface": "eth0", "b_device": "r9", "b_interface": "eth0",
       "capacity_bps": -5, "prop_delay_ms": -1},
      {"a_device": "r2", "a_interface": "eth1", "b_device": "r2", "b_interface": "eth0"}
    ]},
    "sla": {"classes": [
      {"name": "gold", "max_delay_ms": 10, "max_loss": 0.5},
      {"name": "gold", "max_delay_ms": -1, "max_loss": 7}
    ]},
    "demands": [
      {"flow": "f1", "src": "r9", "dst_ip": "ten.dot", "rate_bps": 0, "class": "silver"},
      {"flow": "f1", "src": "r1", "dst_ip": "10.0.0.2", "rate_bps": 5, "class": "gold"}
    ]
  })");
  EXPECT_TRUE(has_path(paths, "topology.links[1]"));
  EXPECT_TRUE(has_path(paths, "topology.links[1].capacity_bps"));
  EXPECT_TRUE(has_path(paths, "topology.links[1].prop_delay_ms"));
  EXPECT_TRUE(has_path(paths, "topology.links[2]"));
  EXPECT_TRUE(has_path(paths, "sla.classes[1].name"));
  EXPECT_TRUE(has_path(paths, "sla.classes[1].max_delay_ms"));
  EXPECT_TRUE(has_path(paths, "sla.classes[1].max_loss"));
  EXPECT_TRUE(has_path(paths, "demands[0].src"));
  EXPECT_TRUE(has_path(paths, "demands[0].dst_ip"));
  EXPECT_TRUE(has_path(paths, "demands[0].rate_bps"));
  EXPECT_TRUE(has_path(paths, "demands[0].class"));
  EXPECT_TRUE(has_path(paths, "demands[1].flow"));
}

TEST(NetSpec, DeviceJsonRoundTrip) {
  DeviceConfig dev = rich_spec().devices[0];
  EXPECT_EQ(device_from_json(device_to_json(dev)), dev);
  std::string compact = serialize_device(dev);
  EXPECT_EQ(compact.find('\n'), std::string::npos);
  EXPECT_EQ(device_from_json(Json::parse(compact)), dev);
}

TEST(NetSpec, FindDevice) {
  NetworkSpec spec = testfx::two_node_static();
  ASSERT_NE(spec.find_device("r1"), nullptr);
  EXPECT_EQ(spec.find_device("r1")->hostname, "r1");
  EXPECT_EQ(spec.find_device("zz"), nullptr);
}

TEST(NetSpec, FlattenKeysByName) {
  DeviceConfig dev = rich_spec().devices[0];
  auto flat = flatten_device_config(dev);
  EXPECT_EQ(flat.at("hostname"), Json("r1"));
  EXPECT_EQ(flat.at("interfaces[eth1].mtu"), Json(9000));
  EXPECT_EQ(flat.at("interfaces[eth1].enabled"), Json(false));
  EXPECT_EQ(flat.at("interfaces[lo0].v4_addr"), Json("10.9.1.1/32"));
  EXPECT_EQ(flat.at("static_routes[0.0.0.0/0].out_interface"), Json("eth0"));
  EXPECT_EQ(flat.at("static_routes[0.0.0.0/0].metric"), Json(7));
  EXPECT_EQ(flat.at("igp_processes[P2].redistribute[P1].metric_type"), Json("external"));
  EXPECT_EQ(flat.at("igp_processes[P2].summaries[192.168.0.0/16]"), Json(true));
  EXPECT_EQ(flat.at("acls[edge-in].rules[10].dst_ports"), Json("[443,443]"));
  EXPECT_EQ(flat.at("acls[edge-in].applied[eth0:in]"), Json(true));
  EXPECT_FALSE(flat.count("interfaces[eth0].v6_addr"));
}

TEST(IpTypes, ParseAndFormat) {
  auto v4 = IpAddr::parse("192.168.1.7");
  ASSERT_TRUE(v4.has_value());
  EXPECT_EQ(v4->family, IpFamily::V4);
  EXPECT_EQ(v4->str(), "192.168.1.7");
  auto v6 = IpAddr::parse("2001:db8::1");
  ASSERT_TRUE(v6.has_value());
  EXPECT_EQ(v6->family, IpFamily::V6);
  EXPECT_FALSE(IpAddr::parse("10.0.0.256").has_value());
  EXPECT_FALSE(IpAddr::parse("banana").has_value());

  auto p = Prefix::parse("10.1.2.3/8");
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->len, 8);
  EXPECT_EQ(p->network().str(), "10.0.0.0/8");
  EXPECT_FALSE(Prefix::parse("10.0.0.0/33").has_value());
  EXPECT_FALSE(Prefix::parse("10.0.0.0").has_value());
  EXPECT_FALSE(Prefix::parse("2001:db8::/129").has_value());
}

TEST(IpTypes, Containment) {
  Prefix net = *Prefix::parse("10.1.0.0/16");
  EXPECT_TRUE(net.contains(*IpAddr::parse("10.1.255.255")));
  EXPECT_FALSE(net.contains(*IpAddr::parse("10.2.0.0")));
  EXPECT_FALSE(net.contains(*IpAddr::parse("2001:db8::1")));  // family mismatch
  EXPECT_TRUE(net.contains(*Prefix::parse("10.1.4.0/24")));
  EXPECT_FALSE(net.contains(*Prefix::parse("10.0.0.0/8")));  // shorter than net
  Prefix v6 = *Prefix::parse("2001:db8::/32");
  EXPECT_TRUE(v6.contains(*IpAddr::parse("2001:db8:ffff::9")));
  EXPECT_FALSE(v6.contains(*IpAddr::parse("2001:db9::1")));
}

}  // namespace
}  // namespace nettwin
