#include "nettwin/kg.hpp"

#include <functional>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "nettwin/errors.hpp"
#include "nettwin/ingest.hpp"

namespace nettwin {
namespace {

void expect_error(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    FAIL() << "expected " << error_code_name(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

TEST(Layers, NamesRoundTrip) {
  const char* names[] = {"DEVICE", "INTERFACES", "IP_SETTINGS", "ROUTING",
                         "ACL",    "RAW_CONFIG", "METRICS"};
  size_t i = 0;
  for (LayerId l : kAllLayers) {
    EXPECT_STREQ(layer_name(l), names[i]);
    EXPECT_EQ(layer_from_name(names[i]), l);
    ++i;
  }
  EXPECT_EQ(i, 7u);
  EXPECT_FALSE(layer_from_name("BGP").has_value());
}

TEST(Layers, DependencyClosureIsReflexiveAndTransitive) {
  using enum LayerId;
  EXPECT_EQ(dependency_closure({}), (std::set<LayerId>{}));
  EXPECT_EQ(dependency_closure({Device}), (std::set<LayerId>{Device}));
  EXPECT_EQ(dependency_closure({Metrics}), (std::set<LayerId>{Metrics}));
  EXPECT_EQ(dependency_closure({Routing}), (std::set<LayerId>{Routing}));
  EXPECT_EQ(dependency_closure({Interfaces}), (std::set<LayerId>{Interfaces, Routing}));
  EXPECT_EQ(dependency_closure({IpSettings}), (std::set<LayerId>{IpSettings, Routing}));
  EXPECT_EQ(dependency_closure({Acl}), (std::set<LayerId>{Acl, Routing}));
  EXPECT_EQ(dependency_closure({RawConfig}),
            (std::set<LayerId>{RawConfig, Interfaces, IpSettings, Acl, Routing}));
  EXPECT_EQ(dependency_closure({Device, RawConfig}),
            (std::set<LayerId>{Device, RawConfig, Interfaces, IpSettings, Acl, Routing}));
}

TEST(Nodes, IdFormat) {
  KgNode dev = make_node("r1", LayerId::Device, "device", {{"name", std::string("r1")}});
  EXPECT_EQ(dev.id, "r1|DEVICE|device|\"r1\"");
  KgNode rule = make_node("r1", LayerId::Acl, "acl-rule",
                          {{"acl", std::string("edge")},
                           {"seq", int64_t{10}},
                           {"action", std::string("permit")},
                           {"protocol", std::string("any")},
                           {"src_prefix", std::string("0.0.0.0/0")},
                           {"dst_prefix", std::string("0.0.0.0/0")},
                           {"src_port_lo", int64_t{0}},
                           {"src_port_hi", int64_t{65535}},
                           {"dst_port_lo", int64_t{0}},
                           {"dst_port_hi", int64_t{65535}}});
  EXPECT_EQ(rule.id, "r1|ACL|acl-rule|\"edge\"&10");
  // RAW_CONFIG has no key attrs; the kind itself is the local key.
  KgNode cfg = make_node("r1", LayerId::RawConfig, "config", {{"text", std::string("{}")}});
  EXPECT_EQ(cfg.id, "r1|RAW_CONFIG|config|config");
}

TEST(Nodes, IdErrors) {
  expect_error(ErrorCode::SchemaViolation,
               [] { make_node_id("r1", LayerId::Device, "nonsense", {}); });
  expect_error(ErrorCode::SchemaViolation, [] {
    make_node_id("r1", LayerId::Acl, "acl-rule", {{"acl", std::string("edge")}});
  });
}

TEST(Nodes, JsonRoundTrip) {
  KgNode n = make_node("r1", LayerId::Interfaces, "interface",
                       {{"name", std::string("eth0")}, {"mtu", int64_t{1500}},
                        {"enabled", true}});
  EXPECT_EQ(node_from_json(node_to_json(n)), n);
  KgEdge e{"a", "b", EdgeKind::Connect};
  EXPECT_EQ(edge_from_json(edge_to_json(e)), e);
  EXPECT_EQ(attr_from_json(Json(2.5)), AttrValue(2.5));
  EXPECT_EQ(attr_from_json(Json(7)), AttrValue(int64_t{7}));
  expect_error(ErrorCode::SchemaViolation, [] { attr_from_json(Json::object()); });
}

TEST(Nodes, ValidateNodeEnforcesSchema) {
  KgNode good = make_node("r1", LayerId::Interfaces, "interface",
                          {{"name", std::string("eth0")}, {"mtu", int64_t{1500}},
                           {"enabled", true}});
  EXPECT_NO_THROW(validate_node(good));

  KgNode extra = good;
  extra.attrs["speed"] = int64_t{10};
  expect_error(ErrorCode::SchemaViolation, [&] { validate_node(extra); });

  KgNode wrong_type = good;
  wrong_type.attrs["mtu"] = std::string("big");
  expect_error(ErrorCode::SchemaViolation, [&] { validate_node(wrong_type); });

  KgNode missing = good;
  missing.attrs.erase("enabled");
  expect_error(ErrorCode::SchemaViolation, [&] { validate_node(missing); });

  KgNode tampered = good;
  tampered.id = "r1|INTERFACES|interface|\"eth9\"";
  expect_error(ErrorCode::SchemaViolation, [&] { validate_node(tampered); });

  KgNode no_device = good;
  no_device.device.clear();
  expect_error(ErrorCode::SchemaViolation, [&] { validate_node(no_device); });

  // Int is acceptable where the schema expects num.
  KgNode link = make_node("r1", LayerId::Metrics, "link",
                          {{"name", std::string("r1:e0~r2:e0")},
                           {"a_device", std::string("r1")},
                           {"a_interface", std::string("e0")},
                           {"b_device", std::string("r2")},
                           {"b_interface", std::string("e0")},
                           {"capacity_bps", int64_t{1000}},
                           {"prop_delay_ms", int64_t{2}}});
  EXPECT_NO_THROW(validate_node(link));
}

SnapshotContent two_device_content() { return build_base_layers(testfx::two_node_static()); }

TEST(Edges, ValidateEdgePlacement) {
  SnapshotContent content = two_device_content();
  std::string dev_r1 = "r1|DEVICE|device|\"r1\"";
  std::string dev_r2 = "r2|DEVICE|device|\"r2\"";
  std::string if_r1 = "r1|INTERFACES|interface|\"eth0\"";
  std::string if_r1_lo = "r1|INTERFACES|interface|\"lo0\"";
  std::string if_r2 = "r2|INTERFACES|interface|\"eth0\"";
  ASSERT_TRUE(content.nodes.count(dev_r1));
  ASSERT_TRUE(content.nodes.count(if_r1));

  EXPECT_NO_THROW(validate_edge(content, {dev_r1, if_r1, EdgeKind::Own}));
  EXPECT_NO_THROW(validate_edge(content, {if_r1, if_r2, EdgeKind::Connect}));

  expect_error(ErrorCode::UnknownNodeReference,
               [&] { validate_edge(content, {dev_r1, "ghost", EdgeKind::Own}); });
  expect_error(ErrorCode::UnknownNodeReference,
               [&] { validate_edge(content, {"ghost", if_r1, EdgeKind::Own}); });
  // OWN must start at a DEVICE node, end off-layer, and stay on one device.
  expect_error(ErrorCode::SchemaViolation,
               [&] { validate_edge(content, {if_r1, if_r1_lo, EdgeKind::Own}); });
  expect_error(ErrorCode::SchemaViolation,
               [&] { validate_edge(content, {dev_r1, dev_r2, EdgeKind::Own}); });
  expect_error(ErrorCode::SchemaViolation,
               [&] { validate_edge(content, {dev_r1, if_r2, EdgeKind::Own}); });
  // CONNECT must join one layer, never DEVICE, across devices.
  expect_error(ErrorCode::SchemaViolation,
               [&] { validate_edge(content, {dev_r1, if_r2, EdgeKind::Connect}); });
  expect_error(ErrorCode::SchemaViolation,
               [&] { validate_edge(content, {dev_r1, dev_r2, EdgeKind::Connect}); });
  expect_error(ErrorCode::SchemaViolation,
               [&] { validate_edge(content, {if_r1, if_r1_lo, EdgeKind::Connect}); });
}

TEST(Edges, SliceAttribution) {
  SnapshotContent content = two_device_content();
  KgEdge own{"r1|DEVICE|device|\"r1\"", "r1|INTERFACES|interface|\"eth0\"", EdgeKind::Own};
  auto own_slices = edge_slices(content, own);
  ASSERT_EQ(own_slices.size(), 1u);
  EXPECT_EQ(own_slices[0], (DeviceLayer{"r1", LayerId::Interfaces}));

  KgEdge conn{"r1|INTERFACES|interface|\"eth0\"", "r2|INTERFACES|interface|\"eth0\"",
              EdgeKind::Connect};
  auto conn_slices = edge_slices(content, conn);
  ASSERT_EQ(conn_slices.size(), 2u);
  EXPECT_EQ(conn_slices[0], (DeviceLayer{"r1", LayerId::Interfaces}));
  EXPECT_EQ(conn_slices[1], (DeviceLayer{"r2", LayerId::Interfaces}));
}

TEST(Slices, DigestTracksContent) {
  SnapshotContent content = two_device_content();
  LayerSlice slice = extract_slice(content, "r1", LayerId::Interfaces);
  ASSERT_FALSE(slice.nodes.empty());
  std::string digest = slice_digest(slice);
  EXPECT_EQ(digest.size(), 64u);
  EXPECT_EQ(slice_digest(slice), digest);  // deterministic

  LayerSlice edited = slice;
  edited.nodes[0].attrs["mtu"] = int64_t{9000};
  EXPECT_NE(slice_digest(edited), digest);

  LayerSlice fewer_edges = slice;
  ASSERT_FALSE(fewer_edges.edges.empty());
  fewer_edges.edges.pop_back();
  EXPECT_NE(slice_digest(fewer_edges), digest);

  EXPECT_EQ(slice_from_json(slice_to_json(slice)), slice);
}

TEST(Slices, MergeRebuildsContent) {
  SnapshotContent content = two_device_content();
  SnapshotContent rebuilt;
  for (const auto& [dl, digest] : layer_digests(content)) {
    merge_slice(rebuilt, extract_slice(content, dl.device, dl.layer));
  }
  EXPECT_EQ(rebuilt, content);
}

TEST(Slices, UpsertReplacesOnlyNamedDevices) {
  SnapshotContent content = two_device_content();
  auto digests_before = layer_digests(content);

  // Replace r1's INTERFACES slice with a single interface.
  auto node = make_node("r1", LayerId::Interfaces, "interface",
                        {{"name", std::string("eth5")}, {"mtu", int64_t{1280}},
                         {"enabled", true}});
  KgEdge own{"r1|DEVICE|device|\"r1\"", node.id, EdgeKind::Own};
  std::string combined = upsert_layer(content, LayerId::Interfaces, {node}, {own});
  EXPECT_EQ(combined, combined_layer_digest(content, LayerId::Interfaces));

  EXPECT_TRUE(content.nodes.count(node.id));
  EXPECT_FALSE(content.nodes.count("r1|INTERFACES|interface|\"eth0\""));
  EXPECT_FALSE(content.nodes.count("r1|INTERFACES|interface|\"lo0\""));
  // r2's nodes survive, as does every other layer of r1.
  EXPECT_TRUE(content.nodes.count("r2|INTERFACES|interface|\"eth0\""));
  auto digests_after = layer_digests(content);
  EXPECT_EQ(digests_after.at({"r1", LayerId::IpSettings}),
            digests_before.at({"r1", LayerId::IpSettings}));
  EXPECT_NE(digests_after.at({"r1", LayerId::Interfaces}),
            digests_before.at({"r1", LayerId::Interfaces}));
  // The CONNECT edge between r1:eth0 and r2:eth0 was attributed to both
  // slices, so replacing r1's slice removed it -- and that removal shows up
  // in r2's digest as well.
  KgEdge conn{"r1|INTERFACES|interface|\"eth0\"", "r2|INTERFACES|interface|\"eth0\"",
              EdgeKind::Connect};
  EXPECT_FALSE(content.edges.count(conn));
  EXPECT_NE(digests_after.at({"r2", LayerId::Interfaces}),
            digests_before.at({"r2", LayerId::Interfaces}));

  // Re-upserting r1's slice with the shared edge restored brings r2's digest
  // back to its original value.
  auto eth0 = make_node("r1", LayerId::Interfaces, "interface",
                        {{"name", std::string("eth0")}, {"mtu", int64_t{1500}},
                         {"enabled", true}});
  auto lo0 = make_node("r1", LayerId::Interfaces, "interface",
                       {{"name", std::string("lo0")}, {"mtu", int64_t{1500}},
                        {"enabled", true}});
  KgEdge own_eth0{"r1|DEVICE|device|\"r1\"", eth0.id, EdgeKind::Own};
  KgEdge own_lo0{"r1|DEVICE|device|\"r1\"", lo0.id, EdgeKind::Own};
  upsert_layer(content, LayerId::Interfaces, {eth0, lo0}, {own_eth0, own_lo0, conn});
  EXPECT_EQ(layer_digests(content).at({"r2", LayerId::Interfaces}),
            digests_before.at({"r2", LayerId::Interfaces}));
}

TEST(Slices, UpsertRejectsBadPayloads) {
  SnapshotContent content = two_device_content();
  KgNode wrong_layer = make_node("r1", LayerId::Interfaces, "interface",
                                 {{"name", std::string("x")}, {"mtu", int64_t{1500}},
                                  {"enabled", true}});
  expect_error(ErrorCode::SchemaViolation,
               [&] { upsert_layer(content, LayerId::Acl, {wrong_layer}, {}); });

  KgNode dup = make_node("r1", LayerId::Interfaces, "interface",
                         {{"name", std::string("x")}, {"mtu", int64_t{1500}},
                          {"enabled", true}});
  expect_error(ErrorCode::SchemaViolation,
               [&] { upsert_layer(content, LayerId::Interfaces, {dup, dup}, {}); });

  KgNode ok = dup;
  expect_error(ErrorCode::UnknownNodeReference, [&] {
    upsert_layer(content, LayerId::Interfaces, {ok}, {{"ghost", ok.id, EdgeKind::Own}});
  });
}

TEST(Schema, DescribeCatalogue) {
  Json all = schema_describe();
  EXPECT_EQ(all.size(), schema().size());
  for (const auto& entry : all) {
    EXPECT_TRUE(entry.contains("layer"));
    EXPECT_TRUE(entry.contains("kind"));
    EXPECT_TRUE(entry.contains("attrs"));
    // Every example query must itself be valid.
    GraphQuery q = query_from_json(entry.at("example_query"));
    EXPECT_NO_THROW(validate_query(q));
  }
  Json acl_only = schema_describe(LayerId::Acl);
  EXPECT_EQ(acl_only.size(), 2u);
  Json one = schema_describe(LayerId::Metrics, std::string("demand"));
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].at("kind"), "demand");
  expect_error(ErrorCode::UnknownLayer,
               [] { schema_describe(LayerId::Device, std::string("demand")); });
}

TEST(Query, JsonRoundTrip) {
  GraphQuery q;
  q.start.layer = LayerId::Interfaces;
  q.start.kind = "interface";
  q.start.where = {{"mtu", PredOp::Ge, int64_t{1500}}, {"name", PredOp::PrefixMatch,
                                                        std::string("eth")}};
  QueryExpand step;
  step.edge = EdgeKind::Own;
  step.dir = ExpandDir::In;
  step.layer = LayerId::Device;
  step.kind = "device";
  q.expand = {step};
  q.project = {"id", "name"};
  q.limit = 10;
  GraphQuery round = query_from_json(query_to_json(q));
  EXPECT_EQ(round, q);
}

TEST(Query, FromJsonErrors) {
  expect_error(ErrorCode::InvalidQuery, [] { query_from_json(Json::array()); });
  expect_error(ErrorCode::InvalidQuery, [] { query_from_json(Json::object()); });
  expect_error(ErrorCode::InvalidQuery,
               [] { query_from_json(Json{{"start", Json{{"layer", "NOPE"}}}}); });
  expect_error(ErrorCode::InvalidQuery, [] {
    query_from_json(Json{{"start", Json{{"layer", "DEVICE"}}}, {"limit", -3}});
  });
  expect_error(ErrorCode::InvalidQuery, [] {
    query_from_json(Json{{"start", Json{{"layer", "DEVICE"},
                                        {"where", Json::array({Json{{"attr", "name"},
                                                                    {"op", "matches"},
                                                                    {"value", "x"}}})}}}});
  });
  expect_error(ErrorCode::InvalidQuery, [] {
    query_from_json(Json{{"start", Json{{"layer", "DEVICE"},
                                        {"where", Json::array({Json{{"attr", "name"},
                                                                    {"op", "eq"},
                                                                    {"value", Json::array()}}})}}}});
  });
}

TEST(Query, ValidateAgainstSchema) {
  GraphQuery bad_kind;
  bad_kind.start.layer = LayerId::Device;
  bad_kind.start.kind = "interface";
  expect_error(ErrorCode::InvalidQuery, [&] { validate_query(bad_kind); });

  GraphQuery bad_attr;
  bad_attr.start.layer = LayerId::Device;
  bad_attr.start.kind = "device";
  bad_attr.start.where = {{"mtu", PredOp::Eq, int64_t{1500}}};
  expect_error(ErrorCode::InvalidQuery, [&] { validate_query(bad_attr); });

  GraphQuery bad_project;
  bad_project.start.layer = LayerId::Device;
  bad_project.project = {"nonexistent"};
  expect_error(ErrorCode::InvalidQuery, [&] { validate_query(bad_project); });

  // Builtins are always in scope.
  GraphQuery builtins;
  builtins.start.layer = LayerId::Device;
  builtins.project = {"id", "device", "layer", "kind"};
  EXPECT_NO_THROW(validate_query(builtins));
}

TEST(Query, RunSelectsFiltersAndProjects) {
  SnapshotContent content = two_device_content();

  GraphQuery q;
  q.start.layer = LayerId::Interfaces;
  q.start.kind = "interface";
  Json rows = run_query(content, q);
  EXPECT_EQ(rows.size(), 4u);  // eth0 + lo0 on both devices
  // Rows come back in node-id order with full attrs when project is empty.
  EXPECT_EQ(rows[0].at("id"), "r1|INTERFACES|interface|\"eth0\"");
  EXPECT_EQ(rows[0].at("mtu"), 1500);

  q.start.where = {{"name", PredOp::Eq, std::string("eth0")}};
  q.project = {"device", "name"};
  rows = run_query(content, q);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (Json{{"device", "r1"}, {"name", "eth0"}}));
  EXPECT_EQ(rows[1], (Json{{"device", "r2"}, {"name", "eth0"}}));

  q.limit = 1;
  EXPECT_EQ(run_query(content, q).size(), 1u);
}

TEST(Query, RunComparisonAndPrefixOps) {
  SnapshotContent content = two_device_content();
  GraphQuery q;
  q.start.layer = LayerId::IpSettings;
  q.start.kind = "ip-address";
  q.start.where = {{"address", PredOp::PrefixMatch, std::string("10.0.12.")}};
  q.project = {"device", "address"};
  Json rows = run_query(content, q);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].at("address"), "10.0.12.1/30");

  GraphQuery num;
  num.start.layer = LayerId::Interfaces;
  num.start.kind = "interface";
  num.start.where = {{"mtu", PredOp::Lt, int64_t{9000}}};
  EXPECT_EQ(run_query(content, num).size(), 4u);
  num.start.where = {{"mtu", PredOp::Gt, int64_t{1500}}};
  EXPECT_EQ(run_query(content, num).size(), 0u);
  // Missing attrs never satisfy a predicate; mismatched types never compare.
  num.start.where = {{"name", PredOp::Lt, int64_t{5}}};
  EXPECT_EQ(run_query(content, num).size(), 0u);
}

TEST(Query, RunExpandTraversesEdges) {
  SnapshotContent content = two_device_content();

  // device --OWN--> its interfaces
  GraphQuery q;
  q.start.layer = LayerId::Device;
  q.start.kind = "device";
  q.start.where = {{"name", PredOp::Eq, std::string("r1")}};
  QueryExpand own;
  own.edge = EdgeKind::Own;
  own.dir = ExpandDir::Out;
  own.layer = LayerId::Interfaces;
  own.kind = "interface";
  q.expand = {own};
  q.project = {"name"};
  Json rows = run_query(content, q);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].at("name"), "eth0");
  EXPECT_EQ(rows[1].at("name"), "lo0");

  // interface --CONNECT(any)--> peer interface, then --OWN(in)--> owning device
  GraphQuery hop;
  hop.start.layer = LayerId::Interfaces;
  hop.start.kind = "interface";
  hop.start.where = {{"device", PredOp::Eq, std::string("r1")},
                     {"name", PredOp::Eq, std::string("eth0")}};
  QueryExpand conn;
  conn.edge = EdgeKind::Connect;
  conn.dir = ExpandDir::Any;
  QueryExpand owner;
  owner.edge = EdgeKind::Own;
  owner.dir = ExpandDir::In;
  owner.layer = LayerId::Device;
  hop.expand = {conn, owner};
  hop.project = {"name"};
  rows = run_query(content, hop);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].at("name"), "r2");

  // Direction matters: OWN edges point device -> interface, so OUT from an
  // interface never reaches the device.
  QueryExpand wrong = owner;
  wrong.dir = ExpandDir::Out;
  hop.expand = {conn, wrong};
  EXPECT_EQ(run_query(content, hop).size(), 0u);
}

TEST(Query, MissingProjectedAttrIsNull) {
  SnapshotContent content = two_device_content();
  GraphQuery q;
  q.start.layer = LayerId::Routing;  // no ROUTING nodes in base layers
  EXPECT_EQ(run_query(content, q).size(), 0u);

  GraphQuery opt;
  opt.start.layer = LayerId::IpSettings;
  opt.start.kind = "ip-address";
  opt.start.where = {{"device", PredOp::Eq, std::string("r1")},
                     {"interface", PredOp::Eq, std::string("lo0")}};
  opt.project = {"address", "family"};
  Json rows = run_query(content, opt);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].at("address"), "10.9.1.1/32");
  EXPECT_EQ(rows[0].at("family"), "v4");
}

TEST(Ingest, BaseLayersRoundTripThroughExtract) {
  NetworkSpec spec = testfx::two_node_static();
  spec.sla_classes = {{"gold", 30.0, 0.01}};
  spec.demands = {{"f1", "r1", "10.9.2.1", 1000, "gold"}};
  SnapshotContent content = build_base_layers(spec);
  EXPECT_EQ(extract_network_spec(content), spec);
}

TEST(Ingest, PayloadOrderStartsWithDevice) {
  auto payloads = base_layer_payloads(testfx::two_node_static());
  ASSERT_FALSE(payloads.empty());
  EXPECT_EQ(payloads.front().layer, LayerId::Device);
  // Applying in order never references a node that does not exist yet.
  SnapshotContent content;
  for (auto& p : payloads) {
    EXPECT_NO_THROW(upsert_layer(content, p.layer, p.nodes, p.edges));
  }
}

TEST(Ingest, ExtractRequiresRawConfig) {
  SnapshotContent content = build_base_layers(testfx::two_node_static());
  // Wipe r1's RAW_CONFIG slice by replacing it with nothing for that device.
  for (auto it = content.nodes.begin(); it != content.nodes.end();) {
    if (it->second.layer == LayerId::RawConfig && it->second.device == "r1") {
      it = content.nodes.erase(it);
    } else {
      ++it;
    }
  }
  expect_error(ErrorCode::StorageError, [&] { extract_network_spec(content); });
}

}  // namespace
}  // namespace nettwin
