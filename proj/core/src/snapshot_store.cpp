#include "nettwin/snapshot_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <queue>
#include <random>
#include <tuple>

#include "nettwin/errors.hpp"

namespace nettwin {

namespace {

class FileLock {
 public:
  FileLock(const std::filesystem::path& path, bool exclusive) {
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) throw Error(ErrorCode::StorageError, "cannot open lock file " + path.string());
    if (::flock(fd_, exclusive ? LOCK_EX : LOCK_SH) != 0) {
      ::close(fd_);
      throw Error(ErrorCode::StorageError, "cannot lock " + path.string());
    }
  }
  ~FileLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

std::string new_snapshot_id() {
  static thread_local std::mt19937_64 rng = [] {
    std::random_device rd;
    std::seed_seq seq{rd(), rd(), rd(), rd(),
                      static_cast<unsigned>(std::chrono::steady_clock::now()
                                                .time_since_epoch()
                                                .count())};
    return std::mt19937_64(seq);
  }();
  uint64_t hi = rng(), lo = rng();
  // RFC 4122 version 4 layout.
  hi = (hi & 0xFFFFFFFFFFFF0FFFull) | 0x0000000000004000ull;
  lo = (lo & 0x3FFFFFFFFFFFFFFFull) | 0x8000000000000000ull;
  char buf[37];
  std::snprintf(buf, sizeof(buf), "%08x-%04x-%04x-%04x-%012llx",
                static_cast<uint32_t>(hi >> 32), static_cast<uint16_t>(hi >> 16),
                static_cast<uint16_t>(hi), static_cast<uint16_t>(lo >> 48),
                static_cast<unsigned long long>(lo & 0xFFFFFFFFFFFFull));
  return buf;
}

std::string utc_now_iso8601() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json meta_to_json(const SnapshotMeta& meta) {
  Json layers = Json::array();
  for (const auto& [dl, digest] : meta.digests) {
    layers.push_back(Json{{"device", dl.device}, {"layer", layer_name(dl.layer)}, {"digest", digest}});
  }
  return Json{{"id", meta.id},       {"parents", meta.parents}, {"branch", meta.branch},
              {"created_at", meta.created_at}, {"message", meta.message}, {"layers", layers}};
}

SnapshotMeta meta_from_json(const Json& j) {
  SnapshotMeta meta;
  meta.id = j.at("id").get<std::string>();
  for (const auto& p : j.at("parents")) meta.parents.push_back(p.get<std::string>());
  meta.branch = j.at("branch").get<std::string>();
  meta.created_at = j.at("created_at").get<std::string>();
  meta.message = j.value("message", "");
  for (const auto& l : j.at("layers")) {
    auto layer = layer_from_name(l.at("layer").get<std::string>());
    if (!layer) throw Error(ErrorCode::StorageError, "snapshot index names unknown layer");
    meta.digests[{l.at("device").get<std::string>(), *layer}] = l.at("digest").get<std::string>();
  }
  return meta;
}

std::map<DeviceLayer, LayerSlice> split_slices(const SnapshotContent& content) {
  std::map<DeviceLayer, LayerSlice> out;
  for (const auto& [id, node] : content.nodes) out[{node.device, node.layer}].nodes.push_back(node);
  for (const auto& e : content.edges) {
    for (const auto& dl : edge_slices(content, e)) out[dl].edges.push_back(e);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// OpenSnapshot
// ---------------------------------------------------------------------------

std::string OpenSnapshot::upsert(LayerId layer, std::vector<KgNode> nodes,
                                 std::vector<KgEdge> edges) {
  if (sealed_) {
    throw Error(ErrorCode::ClosedSnapshot, "snapshot was committed; fork again to edit");
  }
  return upsert_layer(content_, layer, std::move(nodes), std::move(edges));
}

Json OpenSnapshot::query(const GraphQuery& q) const { return run_query(content_, q); }

// ---------------------------------------------------------------------------
// Repository
// ---------------------------------------------------------------------------

Repository Repository::open(const std::filesystem::path& dir) {
  Repository repo(dir);
  repo.init_if_needed();
  return repo;
}

void Repository::init_if_needed() {
  namespace fs = std::filesystem;
  fs::create_directories(dir_ / "blobs");
  FileLock lock(dir_ / "lock", true);
  if (fs::exists(dir_ / "branches.json")) return;
  SnapshotMeta root;
  root.id = new_snapshot_id();
  root.branch = "main";
  root.created_at = utc_now_iso8601();
  root.message = "repository initialized";
  append_snapshot(root);
  store_branches({{"main", root.id}});
}

std::map<std::string, SnapshotMeta> Repository::load_index() const {
  std::ifstream in(dir_ / "snapshots.idx");
  if (!in) throw Error(ErrorCode::StorageError, "missing snapshot index in " + dir_.string());
  std::map<std::string, SnapshotMeta> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::StorageError, "corrupt snapshot index line");
    }
    SnapshotMeta meta = meta_from_json(j);
    out[meta.id] = std::move(meta);
  }
  return out;
}

std::map<std::string, std::string> Repository::load_branches() const {
  std::ifstream in(dir_ / "branches.json");
  if (!in) throw Error(ErrorCode::StorageError, "missing branches.json in " + dir_.string());
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::StorageError, "corrupt branches.json");
  }
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : j.items()) out[k] = v.get<std::string>();
  return out;
}

void Repository::store_branches(const std::map<std::string, std::string>& branches) const {
  Json j = Json::object();
  for (const auto& [k, v] : branches) j[k] = v;
  auto tmp = dir_ / "branches.json.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << j.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, dir_ / "branches.json");
}

void Repository::append_snapshot(const SnapshotMeta& meta) const {
  std::ofstream out(dir_ / "snapshots.idx", std::ios::app);
  if (!out) throw Error(ErrorCode::StorageError, "cannot append to snapshot index");
  out << meta_to_json(meta).dump() << "\n";
}

LayerSlice Repository::load_blob(const std::string& digest) const {
  auto it = blob_cache_.find(digest);
  if (it != blob_cache_.end()) return it->second;
  std::ifstream in(dir_ / "blobs" / digest);
  if (!in) throw Error(ErrorCode::StorageError, "missing blob " + digest);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::StorageError, "corrupt blob " + digest);
  LayerSlice slice = slice_from_json(j);
  blob_cache_[digest] = slice;
  return slice;
}

void Repository::store_blob(const std::string& digest, const LayerSlice& slice) const {
  auto path = dir_ / "blobs" / digest;
  if (std::filesystem::exists(path)) return;  // content-addressed: already present
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << slice_to_json(slice).dump() << "\n";
  }
  std::filesystem::rename(tmp, path);
  blob_cache_[digest] = slice;
}

std::vector<SnapshotMeta> Repository::list() const {
  FileLock lock(dir_ / "lock", false);
  auto index = load_index();
  std::vector<SnapshotMeta> out;
  for (auto& [id, meta] : index) out.push_back(std::move(meta));
  std::sort(out.begin(), out.end(), [](const SnapshotMeta& a, const SnapshotMeta& b) {
    return std::tie(a.created_at, a.id) < std::tie(b.created_at, b.id);
  });
  return out;
}

SnapshotMeta Repository::meta(const std::string& id) const {
  FileLock lock(dir_ / "lock", false);
  auto index = load_index();
  auto it = index.find(id);
  if (it == index.end()) throw Error(ErrorCode::UnknownSnapshot, "no snapshot " + id);
  return it->second;
}

SnapshotContent Repository::content(const std::string& id) const {
  SnapshotMeta m = meta(id);
  SnapshotContent content;
  for (const auto& [dl, digest] : m.digests) merge_slice(content, load_blob(digest));
  return content;
}

std::map<std::string, std::string> Repository::branches() const {
  FileLock lock(dir_ / "lock", false);
  return load_branches();
}

std::string Repository::head(const std::string& branch) const {
  auto b = branches();
  auto it = b.find(branch);
  if (it == b.end()) throw Error(ErrorCode::UnknownBranch, "no branch " + branch);
  return it->second;
}

OpenSnapshot Repository::fork(const std::string& from_branch, const std::string& new_branch) {
  FileLock lock(dir_ / "lock", true);
  auto branches = load_branches();
  auto from = branches.find(from_branch);
  if (from == branches.end()) throw Error(ErrorCode::UnknownBranch, "no branch " + from_branch);
  if (new_branch.empty() || branches.count(new_branch)) {
    throw Error(ErrorCode::ValidationError, "branch " + new_branch + " already exists");
  }
  branches[new_branch] = from->second;
  store_branches(branches);

  auto index = load_index();
  OpenSnapshot snap;
  snap.base_id_ = from->second;
  snap.expected_head_ = from->second;
  snap.branch_ = new_branch;
  for (const auto& [dl, digest] : index.at(from->second).digests) {
    merge_slice(snap.content_, load_blob(digest));
  }
  return snap;
}

OpenSnapshot Repository::checkout(const std::string& branch) {
  std::string h = head(branch);
  OpenSnapshot snap;
  snap.base_id_ = h;
  snap.expected_head_ = h;
  snap.branch_ = branch;
  snap.content_ = content(h);
  return snap;
}

SnapshotMeta Repository::commit_content(const SnapshotContent& content, const std::string& branch,
                                        const std::vector<std::string>& parents,
                                        const std::optional<std::string>& expected_head,
                                        const std::string& message, bool allow_empty) {
  auto slices = split_slices(content);
  if (slices.empty() && !allow_empty) {
    throw Error(ErrorCode::EmptySnapshot, "refusing to commit a snapshot with no content");
  }
  FileLock lock(dir_ / "lock", true);
  auto branches = load_branches();
  auto bi = branches.find(branch);
  if (bi == branches.end()) throw Error(ErrorCode::UnknownBranch, "no branch " + branch);
  if (expected_head && bi->second != *expected_head) {
    throw Error(ErrorCode::StaleHead, "branch " + branch + " moved to " + bi->second +
                                          " since this working copy was taken");
  }
  SnapshotMeta meta;
  meta.id = new_snapshot_id();
  meta.parents = parents;
  meta.branch = branch;
  meta.created_at = utc_now_iso8601();
  meta.message = message;
  for (const auto& [dl, slice] : slices) {
    std::string digest = slice_digest(slice);
    store_blob(digest, slice);
    meta.digests[dl] = digest;
  }
  append_snapshot(meta);
  branches[branch] = meta.id;
  store_branches(branches);
  return meta;
}

SnapshotMeta Repository::commit(OpenSnapshot& snapshot, const std::string& message) {
  if (snapshot.sealed_) {
    throw Error(ErrorCode::ClosedSnapshot, "snapshot already committed");
  }
  std::vector<std::string> parents;
  if (snapshot.base_id_) parents.push_back(*snapshot.base_id_);
  SnapshotMeta meta = commit_content(snapshot.content_, snapshot.branch_, parents,
                                     snapshot.expected_head_, message, false);
  snapshot.sealed_ = true;
  snapshot.base_id_ = meta.id;
  return meta;
}

SnapshotDiff Repository::diff(const std::string& id_a, const std::string& id_b) const {
  SnapshotMeta ma = meta(id_a);
  SnapshotMeta mb = meta(id_b);
  SnapshotDiff out{id_a, id_b, {}};
  std::set<DeviceLayer> keys;
  for (const auto& [dl, d] : ma.digests) keys.insert(dl);
  for (const auto& [dl, d] : mb.digests) keys.insert(dl);
  for (const auto& dl : keys) {
    auto ai = ma.digests.find(dl);
    auto bi = mb.digests.find(dl);
    std::string da = ai == ma.digests.end() ? "" : ai->second;
    std::string db = bi == mb.digests.end() ? "" : bi->second;
    if (da == db) continue;
    SliceDiff sd;
    sd.key = dl;
    sd.digest_a = da;
    sd.digest_b = db;
    LayerSlice sa = da.empty() ? LayerSlice{} : load_blob(da);
    LayerSlice sb = db.empty() ? LayerSlice{} : load_blob(db);
    std::map<std::string, const KgNode*> na, nb;
    for (const auto& n : sa.nodes) na[n.id] = &n;
    for (const auto& n : sb.nodes) nb[n.id] = &n;
    for (const auto& [id, node] : nb) {
      auto prev = na.find(id);
      if (prev == na.end()) {
        sd.nodes_added.push_back(id);
      } else if (prev->second->attrs != node->attrs) {
        NodeChange change{id, {}};
        std::set<std::string> attr_keys;
        for (const auto& [k, v] : prev->second->attrs) attr_keys.insert(k);
        for (const auto& [k, v] : node->attrs) attr_keys.insert(k);
        for (const auto& k : attr_keys) {
          auto x = prev->second->attrs.find(k);
          auto y = node->attrs.find(k);
          bool same = x != prev->second->attrs.end() && y != node->attrs.end() &&
                      x->second == y->second;
          if (!same) change.changed_attrs.push_back(k);
        }
        sd.nodes_modified.push_back(std::move(change));
      }
    }
    for (const auto& [id, node] : na) {
      if (!nb.count(id)) sd.nodes_removed.push_back(id);
    }
    std::set<KgEdge> ea(sa.edges.begin(), sa.edges.end());
    std::set<KgEdge> eb(sb.edges.begin(), sb.edges.end());
    for (const auto& e : eb) {
      if (!ea.count(e)) sd.edges_added.push_back(e);
    }
    for (const auto& e : ea) {
      if (!eb.count(e)) sd.edges_removed.push_back(e);
    }
    out.slices.push_back(std::move(sd));
  }
  return out;
}

Json snapshot_diff_to_json(const SnapshotDiff& diff) {
  Json slices = Json::array();
  for (const auto& sd : diff.slices) {
    Json modified = Json::array();
    for (const auto& m : sd.nodes_modified) {
      modified.push_back(Json{{"id", m.id}, {"changed_attrs", m.changed_attrs}});
    }
    Json edges_added = Json::array(), edges_removed = Json::array();
    for (const auto& e : sd.edges_added) edges_added.push_back(edge_to_json(e));
    for (const auto& e : sd.edges_removed) edges_removed.push_back(edge_to_json(e));
    slices.push_back(Json{{"device", sd.key.device},
                          {"layer", layer_name(sd.key.layer)},
                          {"digest_a", sd.digest_a},
                          {"digest_b", sd.digest_b},
                          {"nodes_added", sd.nodes_added},
                          {"nodes_removed", sd.nodes_removed},
                          {"nodes_modified", modified},
                          {"edges_added", edges_added},
                          {"edges_removed", edges_removed}});
  }
  return Json{{"a", diff.a}, {"b", diff.b}, {"slices", slices}};
}

std::optional<std::string> Repository::merge_base(const std::string& id_a,
                                                  const std::string& id_b) const {
  FileLock lock(dir_ / "lock", false);
  auto index = load_index();
  if (!index.count(id_a) || !index.count(id_b)) {
    throw Error(ErrorCode::UnknownSnapshot, "merge base of unknown snapshots");
  }
  auto bfs_depths = [&](const std::string& start) {
    std::map<std::string, int> depth;
    std::queue<std::string> queue;
    depth[start] = 0;
    queue.push(start);
    while (!queue.empty()) {
      std::string cur = queue.front();
      queue.pop();
      for (const auto& p : index.at(cur).parents) {
        if (!depth.count(p)) {
          depth[p] = depth[cur] + 1;
          queue.push(p);
        }
      }
    }
    return depth;
  };
  auto da = bfs_depths(id_a);
  auto db = bfs_depths(id_b);
  std::optional<std::string> best;
  std::tuple<int, int, std::string> best_key;
  for (const auto& [id, d_b] : db) {
    auto ai = da.find(id);
    if (ai == da.end()) continue;
    std::tuple<int, int, std::string> key{d_b, ai->second, id};
    if (!best || key < best_key) {
      best = id;
      best_key = key;
    }
  }
  return best;
}

namespace {

// Chooses the merged digest for one slice, or reports a conflict.
std::optional<std::optional<std::string>> three_way(const std::optional<std::string>& base,
                                                    const std::optional<std::string>& ours,
                                                    const std::optional<std::string>& theirs) {
  if (ours == theirs) return ours;
  if (ours == base) return theirs;
  if (theirs == base) return ours;
  return std::nullopt;  // both sides changed, differently
}

std::optional<std::string> digest_of(const std::map<DeviceLayer, std::string>& digests,
                                     const DeviceLayer& key) {
  auto it = digests.find(key);
  if (it == digests.end()) return std::nullopt;
  return it->second;
}

}  // namespace

SnapshotMeta Repository::merge(const std::string& feature_branch, const std::string& into_branch,
                               const std::string& message) {
  std::string feature_head = head(feature_branch);
  std::string into_head = head(into_branch);
  auto base = merge_base(feature_head, into_head);
  if (!base) throw Error(ErrorCode::ValidationError, "branches share no history");
  SnapshotMeta mbase = meta(*base);
  SnapshotMeta mf = meta(feature_head);
  SnapshotMeta mi = meta(into_head);

  std::set<DeviceLayer> keys;
  for (const auto& m : {mbase, mf, mi}) {
    for (const auto& [dl, d] : m.digests) keys.insert(dl);
  }
  std::map<DeviceLayer, std::string> merged;
  std::vector<std::string> conflicts;
  for (const auto& dl : keys) {
    auto choice = three_way(digest_of(mbase.digests, dl), digest_of(mi.digests, dl),
                            digest_of(mf.digests, dl));
    if (!choice) {
      conflicts.push_back(dl.device + ":" + layer_name(dl.layer));
      continue;
    }
    if (*choice) merged[dl] = **choice;
  }
  if (!conflicts.empty()) {
    std::string joined;
    for (const auto& c : conflicts) {
      if (!joined.empty()) joined += ", ";
      joined += c;
    }
    throw Error(ErrorCode::MergeConflict, "diverging edits on " + joined);
  }
  SnapshotContent content;
  for (const auto& [dl, digest] : merged) merge_slice(content, load_blob(digest));
  return commit_content(content, into_branch, {into_head, feature_head}, into_head, message,
                        false);
}

RebaseResult Repository::rebase(const std::string& feature_branch,
                                const std::string& onto_branch) {
  std::string feature_head = head(feature_branch);
  std::string onto_head = head(onto_branch);
  auto base = merge_base(feature_head, onto_head);
  if (!base) throw Error(ErrorCode::ValidationError, "branches share no history");
  SnapshotMeta mbase = meta(*base);
  SnapshotMeta mf = meta(feature_head);
  SnapshotMeta mo = meta(onto_head);

  std::set<DeviceLayer> keys;
  for (const auto& m : {mbase, mf, mo}) {
    for (const auto& [dl, d] : m.digests) keys.insert(dl);
  }
  std::map<DeviceLayer, std::string> replayed;
  std::vector<std::string> conflicts;
  std::set<LayerId> touched;
  for (const auto& dl : keys) {
    auto b = digest_of(mbase.digests, dl);
    auto f = digest_of(mf.digests, dl);
    auto o = digest_of(mo.digests, dl);
    if (f != b) touched.insert(dl.layer);
    if (o != b) touched.insert(dl.layer);
    auto choice = three_way(b, o, f);
    if (!choice) {
      conflicts.push_back(dl.device + ":" + layer_name(dl.layer));
      continue;
    }
    if (*choice) replayed[dl] = **choice;
  }
  if (!conflicts.empty()) {
    std::string joined;
    for (const auto& c : conflicts) {
      if (!joined.empty()) joined += ", ";
      joined += c;
    }
    throw Error(ErrorCode::MergeConflict, "diverging edits on " + joined);
  }

  RebaseResult result;
  result.revalidation = dependency_closure(touched);
  result.snapshot.base_id_ = onto_head;
  result.snapshot.expected_head_ = feature_head;
  result.snapshot.branch_ = feature_branch;
  for (const auto& [dl, digest] : replayed) {
    merge_slice(result.snapshot.content_, load_blob(digest));
  }
  return result;
}

}  // namespace nettwin
