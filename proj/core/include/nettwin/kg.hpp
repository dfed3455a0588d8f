#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "nettwin/errors.hpp"

namespace nettwin {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Layers
// ---------------------------------------------------------------------------

enum class LayerId : uint8_t {
  Device = 0,
  Interfaces,
  IpSettings,
  Routing,
  Acl,
  RawConfig,
  Metrics,
};

inline constexpr LayerId kAllLayers[] = {
    LayerId::Device,     LayerId::Interfaces, LayerId::IpSettings, LayerId::Routing,
    LayerId::Acl,        LayerId::RawConfig,  LayerId::Metrics,
};

const char* layer_name(LayerId layer);
std::optional<LayerId> layer_from_name(const std::string& name);

// Derivation dependencies between layers: an edit to layer L invalidates every
// layer in dependency_closure({L}) (reflexive + transitive).
std::vector<LayerId> dependents_of(LayerId layer);
std::set<LayerId> dependency_closure(const std::set<LayerId>& layers);

// ---------------------------------------------------------------------------
// Nodes and edges
// ---------------------------------------------------------------------------

using AttrValue = std::variant<std::string, int64_t, double, bool>;
using AttrMap = std::map<std::string, AttrValue>;

Json attr_to_json(const AttrValue& v);
AttrValue attr_from_json(const Json& j);

struct KgNode {
  std::string id;  // "<device>|<LAYER>|<kind>|<local key>"
  std::string device;
  LayerId layer = LayerId::Device;
  std::string kind;
  AttrMap attrs;

  bool operator==(const KgNode&) const = default;
};

enum class EdgeKind : uint8_t { Own = 0, Connect = 1 };

const char* edge_kind_name(EdgeKind k);
std::optional<EdgeKind> edge_kind_from_name(const std::string& name);

struct KgEdge {
  std::string from;
  std::string to;
  EdgeKind kind = EdgeKind::Own;

  auto operator<=>(const KgEdge&) const = default;
};

Json node_to_json(const KgNode& n);
KgNode node_from_json(const Json& j);
Json edge_to_json(const KgEdge& e);
KgEdge edge_from_json(const Json& j);

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

enum class AttrType : uint8_t { Str, Int, Num, Bool };

const char* attr_type_name(AttrType t);

struct AttrSchema {
  std::string name;
  AttrType type;
  bool required;
  std::string description;
};

struct KindSchema {
  LayerId layer;
  std::string kind;
  std::string description;
  std::vector<std::string> key_attrs;  // attrs forming the node's local key
  std::vector<AttrSchema> attrs;
};

const std::vector<KindSchema>& schema();
const KindSchema* find_kind(LayerId layer, const std::string& kind);

// Builds the canonical node id from the schema key attrs.
std::string make_node_id(const std::string& device, LayerId layer, const std::string& kind,
                         const AttrMap& attrs);
KgNode make_node(const std::string& device, LayerId layer, const std::string& kind,
                 AttrMap attrs);

// Self-describing schema catalogue. Each entry carries a runnable example query.
Json schema_describe(std::optional<LayerId> layer = std::nullopt,
                     const std::optional<std::string>& kind = std::nullopt);

// ---------------------------------------------------------------------------
// Snapshot content
// ---------------------------------------------------------------------------

struct SnapshotContent {
  std::map<std::string, KgNode> nodes;  // by id
  std::set<KgEdge> edges;

  bool operator==(const SnapshotContent&) const = default;
};

struct DeviceLayer {
  std::string device;
  LayerId layer;

  auto operator<=>(const DeviceLayer&) const = default;
};

struct LayerSlice {
  std::vector<KgNode> nodes;  // sorted by id
  std::vector<KgEdge> edges;  // sorted

  bool operator==(const LayerSlice&) const = default;
};

// An edge is attributed to (device, layer) slices as follows: OWN edges to the
// owned node's slice; CONNECT edges to both endpoints' slices.
std::vector<DeviceLayer> edge_slices(const SnapshotContent& content, const KgEdge& e);

LayerSlice extract_slice(const SnapshotContent& content, const std::string& device, LayerId layer);
std::string slice_digest(const LayerSlice& slice);
// Digest of every (device, layer) slice present in the content.
std::map<DeviceLayer, std::string> layer_digests(const SnapshotContent& content);
// Combined digest of one layer across all devices.
std::string combined_layer_digest(const SnapshotContent& content, LayerId layer);

Json slice_to_json(const LayerSlice& slice);
LayerSlice slice_from_json(const Json& j);
void merge_slice(SnapshotContent& content, const LayerSlice& slice);

// Replaces, for every device appearing in `nodes`, that device's nodes in
// `layer` plus all edges attributed to the replaced slices, then inserts the
// given nodes and edges. Validates schema conformance and edge placement.
// Returns the combined digest of `layer` after the update.
std::string upsert_layer(SnapshotContent& content, LayerId layer, std::vector<KgNode> nodes,
                         std::vector<KgEdge> edges);

// Validation used by upsert_layer, exposed for tests: throws SchemaViolation /
// UnknownNodeReference on bad node payloads or edge placements.
void validate_node(const KgNode& node);
void validate_edge(const SnapshotContent& content, const KgEdge& edge);

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

enum class PredOp : uint8_t { Eq, Ne, Lt, Le, Gt, Ge, PrefixMatch };

struct AttrPred {
  std::string attr;
  PredOp op;
  AttrValue value;

  bool operator==(const AttrPred&) const = default;
};

enum class ExpandDir : uint8_t { Out, In, Any };

struct QueryStart {
  LayerId layer = LayerId::Device;
  std::optional<std::string> kind;
  std::vector<AttrPred> where;

  bool operator==(const QueryStart&) const = default;
};

struct QueryExpand {
  EdgeKind edge = EdgeKind::Own;
  ExpandDir dir = ExpandDir::Any;
  std::optional<LayerId> layer;
  std::optional<std::string> kind;
  std::vector<AttrPred> where;

  bool operator==(const QueryExpand&) const = default;
};

struct GraphQuery {
  QueryStart start;
  std::vector<QueryExpand> expand;
  std::vector<std::string> project;  // attr names or builtins id/device/layer/kind
  std::optional<uint32_t> limit;

  bool operator==(const GraphQuery&) const = default;
};

Json query_to_json(const GraphQuery& q);
GraphQuery query_from_json(const Json& j);  // throws InvalidQuery on malformed input

// Throws InvalidQuery when a referenced layer/kind/attr is absent from the schema.
void validate_query(const GraphQuery& q);

// Executes a validated query. Rows are emitted in node-id order as JSON
// objects; attrs missing on a node project as null.
Json run_query(const SnapshotContent& content, const GraphQuery& q);

}  // namespace nettwin
