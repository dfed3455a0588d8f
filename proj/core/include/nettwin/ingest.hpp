#pragma once

#include <vector>

#include "nettwin/kg.hpp"
#include "nettwin/netspec.hpp"

namespace nettwin {

struct LayerPayload {
  LayerId layer;
  std::vector<KgNode> nodes;
  std::vector<KgEdge> edges;
};

// Translates a validated spec into per-layer node/edge payloads, in upsert
// order (DEVICE first). ROUTING is not populated here; compute_routes derives
// it on demand.
std::vector<LayerPayload> base_layer_payloads(const NetworkSpec& spec);

// Convenience: applies all base payloads to an empty content.
SnapshotContent build_base_layers(const NetworkSpec& spec);

// Inverse of build_base_layers: reconstructs the spec from RAW_CONFIG and
// METRICS. Throws StorageError when a device lacks a RAW_CONFIG node.
NetworkSpec extract_network_spec(const SnapshotContent& content);

}  // namespace nettwin
