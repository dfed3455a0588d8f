#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "nettwin/agents.hpp"

namespace httplib {
class Server;
}

namespace nettwin {

// JSON-RPC 2.0 protocol errors. Library errors surface as application codes
// 1000 + static_cast<int>(ErrorCode), message = the error name, data.detail =
// the human-readable detail.
inline constexpr int kRpcParseError = -32700;
inline constexpr int kRpcInvalidRequest = -32600;
inline constexpr int kRpcMethodNotFound = -32601;
inline constexpr int kRpcInvalidParams = -32602;

struct RpcServerConfig {
  std::filesystem::path repo_dir;
  std::filesystem::path ticket_dir;
  std::filesystem::path memory_dir;
  std::string policy_name = "scripted";  // "scripted" | "remote"
  RemotePolicyConfig remote;             // used when policy_name == "remote"
  int react_budget = kDefaultReactBudget;
  uint64_t acl_compare_cap = kDefaultHeaderSpaceCap;
};

// JSON-RPC 2.0 endpoint over HTTP POST /rpc.
//
// Methods (params object, snapshot args accept a snapshot id or branch name):
//   tools/list              {}                                -> {tools}
//   tools/call              {name, arguments, snapshot_a?, snapshot_b?}
//   query                   {snapshot, query}                 -> {rows}
//   snapshots/list          {}                                -> {snapshots}
//   snapshots/fork          {from_branch, new_branch}         -> {branch, head}
//   snapshots/diff          {snapshot_a, snapshot_b}          -> diff
//   snapshots/merge         {feature_branch, into_branch, message?} -> {snapshot}
//   snapshots/rebase        {feature_branch, onto_branch, message?}
//                                             -> {snapshot, revalidation}
//   agents/validate_change  {ticket_id, snapshot_a, snapshot_b, react_budget?}
//                                             -> validation report
class RpcServer {
 public:
  explicit RpcServer(RpcServerConfig config);
  ~RpcServer();

  RpcServer(const RpcServer&) = delete;
  RpcServer& operator=(const RpcServer&) = delete;

  // Handles one request body (single or batch). Returns the response body;
  // empty for notification-only requests.
  std::string handle(const std::string& body);

  // Blocks serving HTTP on host:port until stop() is called. Returns false
  // when the socket could not be bound.
  bool listen(const std::string& host, int port);
  // Binds to an OS-assigned port, then serves in the calling thread via
  // listen_after_bind(). Returns the port, or -1 on failure.
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  bool is_running() const;

 private:
  Json dispatch(const std::string& method, const Json& params);
  Json handle_single(const Json& request);
  std::string resolve_snapshot_arg(Repository& repo, const Json& params, const char* key,
                                   const std::string& fallback_branch) const;

  RpcServerConfig config_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace nettwin
