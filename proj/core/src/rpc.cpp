#include "nettwin/rpc.hpp"

#include <mutex>
#include <set>

#include <httplib.h>

#include "nettwin/errors.hpp"
#include "nettwin/kg.hpp"
#include "nettwin/snapshot_store.hpp"
#include "nettwin/toolreg.hpp"

namespace nettwin {

namespace {

std::mutex g_dispatch_mutex;

Json meta_json(const SnapshotMeta& meta) {
  Json layers = Json::array();
  for (const auto& [key, digest] : meta.digests) {
    layers.push_back(Json{{"device", key.device},
                          {"layer", layer_name(key.layer)},
                          {"digest", digest}});
  }
  return Json{{"id", meta.id},
              {"parents", meta.parents},
              {"branch", meta.branch},
              {"created_at", meta.created_at},
              {"message", meta.message},
              {"layers", layers}};
}

std::string require_string_param(const Json& params, const char* key) {
  if (!params.contains(key) || !params.at(key).is_string()) {
    throw Error(ErrorCode::InvalidParams,
                std::string("missing or non-string param \"") + key + "\"");
  }
  return params.at(key).get<std::string>();
}

Json error_response(const Json& id, int code, const std::string& message,
                    Json data = Json()) {
  Json err{{"code", code}, {"message", message}};
  if (!data.is_null()) err["data"] = std::move(data);
  return Json{{"jsonrpc", "2.0"}, {"id", id}, {"error", std::move(err)}};
}

Json result_response(const Json& id, Json result) {
  return Json{{"jsonrpc", "2.0"}, {"id", id}, {"result", std::move(result)}};
}

}  // namespace

RpcServer::RpcServer(RpcServerConfig config)
    : config_(std::move(config)), http_(std::make_unique<httplib::Server>()) {
  http_->Post("/rpc", [this](const httplib::Request& req, httplib::Response& res) {
    std::string body = handle(req.body);
    if (body.empty()) {
      res.status = 204;
    } else {
      res.set_content(body, "application/json");
    }
  });
  http_->Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"ok\":true}", "application/json");
  });
}

RpcServer::~RpcServer() = default;

std::string RpcServer::resolve_snapshot_arg(Repository& repo, const Json& params,
                                            const char* key,
                                            const std::string& fallback_branch) const {
  if (params.contains(key)) {
    if (!params.at(key).is_string()) {
      throw Error(ErrorCode::InvalidParams, std::string("param \"") + key +
                                                "\" must be a snapshot id or branch name");
    }
    std::string value = params.at(key).get<std::string>();
    auto branches = repo.branches();
    if (branches.count(value)) return repo.head(value);
    return value;
  }
  if (!fallback_branch.empty()) {
    auto branches = repo.branches();
    if (branches.count(fallback_branch)) return repo.head(fallback_branch);
  }
  throw Error(ErrorCode::InvalidParams,
              std::string("missing param \"") + key + "\" and no default branch to fall back on");
}

Json RpcServer::dispatch(const std::string& method, const Json& params) {
  Repository repo = Repository::open(config_.repo_dir);

  if (method == "tools/list") {
    std::string head = repo.head("main");
    TwinContext ctx(repo, head, head);
    ToolRegistry registry(ctx, config_.acl_compare_cap);
    Json tools = Json::array();
    for (const auto& spec : registry.list_tools()) {
      tools.push_back(Json{{"name", spec.name},
                           {"description", spec.description},
                           {"params", spec.params},
                           {"example", spec.example}});
    }
    return Json{{"tools", tools}};
  }
  if (method == "tools/call") {
    std::string name = require_string_param(params, "name");
    Json arguments = params.value("arguments", Json::object());
    if (!arguments.is_object()) {
      throw Error(ErrorCode::InvalidParams, "\"arguments\" must be an object");
    }
    std::string a = resolve_snapshot_arg(repo, params, "snapshot_a", "main");
    std::string b = resolve_snapshot_arg(repo, params, "snapshot_b", "main");
    TwinContext ctx(repo, a, b);
    ToolRegistry registry(ctx, config_.acl_compare_cap);
    return registry.call_tool(name, arguments);
  }
  if (method == "query") {
    std::string id = resolve_snapshot_arg(repo, params, "snapshot", "main");
    if (!params.contains("query")) {
      throw Error(ErrorCode::InvalidParams, "missing param \"query\"");
    }
    GraphQuery q = query_from_json(params.at("query"));
    return Json{{"rows", run_query(repo.content(id), q)}};
  }
  if (method == "snapshots/list") {
    Json snapshots = Json::array();
    for (const auto& meta : repo.list()) snapshots.push_back(meta_json(meta));
    return Json{{"snapshots", snapshots}};
  }
  if (method == "snapshots/fork") {
    std::string from = require_string_param(params, "from_branch");
    std::string name = require_string_param(params, "new_branch");
    repo.fork(from, name);
    return Json{{"branch", name}, {"head", repo.head(name)}};
  }
  if (method == "snapshots/diff") {
    std::string a = resolve_snapshot_arg(repo, params, "snapshot_a", "");
    std::string b = resolve_snapshot_arg(repo, params, "snapshot_b", "");
    return snapshot_diff_to_json(repo.diff(a, b));
  }
  if (method == "snapshots/merge") {
    std::string feature = require_string_param(params, "feature_branch");
    std::string into = require_string_param(params, "into_branch");
    std::string message =
        params.value("message", "merge " + feature + " into " + into);
    return Json{{"snapshot", meta_json(repo.merge(feature, into, message))}};
  }
  if (method == "snapshots/rebase") {
    std::string feature = require_string_param(params, "feature_branch");
    std::string onto = require_string_param(params, "onto_branch");
    std::string message = params.value("message", "rebase " + feature + " onto " + onto);
    RebaseResult result = repo.rebase(feature, onto);
    SnapshotMeta meta = repo.commit(result.snapshot, message);
    Json revalidation = Json::array();
    for (LayerId layer : result.revalidation) revalidation.push_back(layer_name(layer));
    return Json{{"snapshot", meta_json(meta)}, {"revalidation", revalidation}};
  }
  if (method == "agents/validate_change") {
    std::string ticket_id = require_string_param(params, "ticket_id");
    ValidationRequest request;
    request.ticket_id = ticket_id;
    request.snapshot_a = resolve_snapshot_arg(repo, params, "snapshot_a", "main");
    request.snapshot_b = resolve_snapshot_arg(repo, params, "snapshot_b", "");
    request.policy_name = config_.policy_name;
    request.react_budget = params.value("react_budget", config_.react_budget);
    PolicyFn policy = config_.policy_name == "remote" ? remote_policy(config_.remote)
                                                      : scripted_policy();
    TicketStore tickets(config_.ticket_dir);
    Validator validator(repo, tickets, config_.memory_dir, policy, config_.acl_compare_cap);
    return validator.validate_change(request).to_json();
  }
  throw Error(ErrorCode::UnknownTool, "no such method: " + method);
}

Json RpcServer::handle_single(const Json& request) {
  if (!request.is_object()) {
    return error_response(Json(), kRpcInvalidRequest, "request must be an object");
  }
  const bool notification = !request.contains("id");
  Json id = request.value("id", Json());
  if (request.value("jsonrpc", "") != "2.0") {
    return error_response(id, kRpcInvalidRequest, "jsonrpc must be \"2.0\"");
  }
  if (!request.contains("method") || !request.at("method").is_string()) {
    return error_response(id, kRpcInvalidRequest, "method must be a string");
  }
  const std::string method = request.at("method").get<std::string>();
  Json params = request.value("params", Json::object());
  if (!params.is_object()) {
    return error_response(id, kRpcInvalidParams, "params must be an object");
  }
  static const std::set<std::string> kMethods = {
      "tools/list",      "tools/call",     "query",
      "snapshots/list",  "snapshots/fork", "snapshots/diff",
      "snapshots/merge", "snapshots/rebase", "agents/validate_change"};
  if (!kMethods.count(method)) {
    return notification ? Json()
                        : error_response(id, kRpcMethodNotFound, "no such method: " + method);
  }

  Json response;
  try {
    response = result_response(id, dispatch(method, params));
  } catch (const Error& e) {
    int code = e.code() == ErrorCode::InvalidParams
                   ? kRpcInvalidParams
                   : 1000 + static_cast<int>(e.code());
    response = error_response(id, code, error_code_name(e.code()),
                              Json{{"detail", e.detail()}});
  } catch (const std::exception& e) {
    response = error_response(id, 1000 + static_cast<int>(ErrorCode::InternalError),
                              "InternalError", Json{{"detail", e.what()}});
  }
  return notification ? Json() : response;
}

std::string RpcServer::handle(const std::string& body) {
  std::lock_guard<std::mutex> guard(g_dispatch_mutex);
  Json request = Json::parse(body, nullptr, false);
  if (request.is_discarded()) {
    return error_response(Json(), kRpcParseError, "body is not valid JSON").dump();
  }
  if (request.is_array()) {
    if (request.empty()) {
      return error_response(Json(), kRpcInvalidRequest, "empty batch").dump();
    }
    Json responses = Json::array();
    for (const auto& entry : request) {
      Json response = handle_single(entry);
      if (!response.is_null()) responses.push_back(std::move(response));
    }
    return responses.empty() ? std::string() : responses.dump();
  }
  Json response = handle_single(request);
  return response.is_null() ? std::string() : response.dump();
}

bool RpcServer::listen(const std::string& host, int port) {
  return http_->listen(host, port);
}

int RpcServer::bind_any_port(const std::string& host) {
  return http_->bind_to_any_port(host);
}

bool RpcServer::listen_after_bind() { return http_->listen_after_bind(); }

void RpcServer::stop() { http_->stop(); }

bool RpcServer::is_running() const { return http_->is_running(); }

}  // namespace nettwin
