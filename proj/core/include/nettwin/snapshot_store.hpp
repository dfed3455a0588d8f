#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nettwin/kg.hpp"

namespace nettwin {

struct SnapshotMeta {
  std::string id;
  std::vector<std::string> parents;
  std::string branch;      // branch the snapshot was committed on
  std::string created_at;  // UTC, ISO 8601
  std::string message;
  std::map<DeviceLayer, std::string> digests;  // content address per slice

  bool operator==(const SnapshotMeta&) const = default;
};

class Repository;

// A mutable working copy. Starts from a committed snapshot's content (shared
// via content-addressed blobs on disk) and tracks edits until commit seals it.
class OpenSnapshot {
 public:
  const std::optional<std::string>& base() const { return base_id_; }
  const std::string& branch() const { return branch_; }
  bool sealed() const { return sealed_; }
  const SnapshotContent& content() const { return content_; }

  // kg-level edit: throws ClosedSnapshot after commit.
  std::string upsert(LayerId layer, std::vector<KgNode> nodes, std::vector<KgEdge> edges);
  Json query(const GraphQuery& q) const;

 private:
  friend class Repository;
  std::optional<std::string> base_id_;      // parent snapshot
  std::optional<std::string> expected_head_;  // branch head the commit CAS checks
  std::string branch_;
  SnapshotContent content_;
  bool sealed_ = false;
};

struct NodeChange {
  std::string id;
  std::vector<std::string> changed_attrs;

  bool operator==(const NodeChange&) const = default;
};

struct SliceDiff {
  DeviceLayer key;
  std::string digest_a;  // empty when the slice is absent on that side
  std::string digest_b;
  std::vector<std::string> nodes_added;
  std::vector<std::string> nodes_removed;
  std::vector<NodeChange> nodes_modified;
  std::vector<KgEdge> edges_added;
  std::vector<KgEdge> edges_removed;

  bool operator==(const SliceDiff&) const = default;
};

struct SnapshotDiff {
  std::string a;
  std::string b;
  std::vector<SliceDiff> slices;  // ordered by (device, layer)

  bool operator==(const SnapshotDiff&) const = default;
};

Json snapshot_diff_to_json(const SnapshotDiff& diff);

struct RebaseResult {
  OpenSnapshot snapshot;          // replayed feature content on the new base
  std::set<LayerId> revalidation;  // dependency closure of layers touched
};

// Content-addressed, branch-aware store on the local filesystem.
//
//   <dir>/blobs/<digest>   one JSON blob per (device, layer) slice
//   <dir>/snapshots.idx    append-only JSONL of snapshot metadata
//   <dir>/branches.json    branch -> head snapshot id
//   <dir>/lock             advisory flock serializing writers
//
// `open` initializes an empty repository (with an internal root snapshot on
// "main") when the directory is not yet a repository.
class Repository {
 public:
  static Repository open(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const { return dir_; }

  std::vector<SnapshotMeta> list() const;
  SnapshotMeta meta(const std::string& id) const;          // UnknownSnapshot
  SnapshotContent content(const std::string& id) const;    // cached by digest
  std::map<std::string, std::string> branches() const;
  std::string head(const std::string& branch) const;       // UnknownBranch

  // Registers `new_branch` at the head of `from_branch` and returns a working
  // copy of that content. No payload is copied: blobs are shared.
  OpenSnapshot fork(const std::string& from_branch, const std::string& new_branch);
  // Working copy on an existing branch head.
  OpenSnapshot checkout(const std::string& branch);

  // Writes new blobs, appends the snapshot and advances the branch head.
  // Fails with StaleHead when the branch moved since the working copy was
  // taken, and EmptySnapshot when the content has no slices at all.
  SnapshotMeta commit(OpenSnapshot& snapshot, const std::string& message);

  SnapshotDiff diff(const std::string& id_a, const std::string& id_b) const;

  // Nearest common ancestor in the commit DAG (BFS; deterministic tie-break).
  std::optional<std::string> merge_base(const std::string& id_a, const std::string& id_b) const;

  // Three-way merge by slice digest. Slices changed on only one side win;
  // digest-equal edits agree; diverging edits raise MergeConflict (the
  // conflicting device/layer pairs are listed in the error detail).
  SnapshotMeta merge(const std::string& feature_branch, const std::string& into_branch,
                     const std::string& message);

  // Replays feature edits on top of `onto_branch` head; commit() seals it as
  // the new feature head. Also reports which layers need revalidation.
  RebaseResult rebase(const std::string& feature_branch, const std::string& onto_branch);

 private:
  explicit Repository(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void init_if_needed();
  std::map<std::string, SnapshotMeta> load_index() const;
  std::map<std::string, std::string> load_branches() const;
  void store_branches(const std::map<std::string, std::string>& branches) const;
  void append_snapshot(const SnapshotMeta& meta) const;
  LayerSlice load_blob(const std::string& digest) const;
  void store_blob(const std::string& digest, const LayerSlice& slice) const;
  SnapshotMeta commit_content(const SnapshotContent& content, const std::string& branch,
                              const std::vector<std::string>& parents,
                              const std::optional<std::string>& expected_head,
                              const std::string& message, bool allow_empty);

  std::filesystem::path dir_;
  mutable std::map<std::string, LayerSlice> blob_cache_;
};

}  // namespace nettwin
