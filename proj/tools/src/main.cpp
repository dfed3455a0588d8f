#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nettwin/agents.hpp"
#include "nettwin/config.hpp"
#include "nettwin/errors.hpp"
#include "nettwin/evalharness.hpp"
#include "nettwin/ingest.hpp"
#include "nettwin/kg.hpp"
#include "nettwin/metrics.hpp"
#include "nettwin/rpc.hpp"
#include "nettwin/scenarios.hpp"
#include "nettwin/snapshot_store.hpp"
#include "nettwin/toolreg.hpp"

namespace {

using nettwin::Json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitBlocked = 2;  // also: verification FAIL

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw nettwin::Error(nettwin::ErrorCode::StorageError,
                         "cannot read file " + path.string());
  }
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

Json parse_json_text(const std::string& text, const std::string& what) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw nettwin::Error(nettwin::ErrorCode::ParseError, what + " is not valid JSON");
  }
  return j;
}

struct GlobalOptions {
  std::string config_file;
  std::string repo_override;

  nettwin::EngineConfig config() const {
    nettwin::EngineConfig cfg;
    if (!config_file.empty()) {
      cfg = nettwin::load_config(config_file);
    } else if (std::filesystem::exists("nettwin.conf")) {
      cfg = nettwin::load_config("nettwin.conf");
    }
    if (!repo_override.empty()) cfg.repo_path = repo_override;
    return cfg;
  }

  nettwin::Repository repo() const { return nettwin::Repository::open(config().repo_path); }
};

// Accepts either a snapshot id or a branch name.
std::string resolve_snapshot(nettwin::Repository& repo, const std::string& ref) {
  if (repo.branches().count(ref)) return repo.head(ref);
  return ref;
}

nettwin::PolicyFn make_policy(const nettwin::EngineConfig& cfg, const std::string& policy,
                              const std::string& remote_url) {
  if (policy == "scripted") return nettwin::scripted_policy();
  if (policy == "remote") {
    nettwin::RemotePolicyConfig remote;
    remote.url = remote_url.empty() ? cfg.remote_url : remote_url;
    remote.timeout_ms = cfg.remote_timeout_ms;
    remote.retries = cfg.remote_retries;
    if (remote.url.empty()) {
      throw nettwin::Error(nettwin::ErrorCode::InvalidParams,
                           "remote policy needs --remote-url or remote_url in the config");
    }
    return nettwin::remote_policy(remote);
  }
  throw nettwin::Error(nettwin::ErrorCode::InvalidParams,
                       "unknown policy \"" + policy + "\" (use scripted or remote)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nettwin: snapshot-based network digital twin and change validation"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config_file, "config file (key = value)");
  app.add_option("--repo", global.repo_override, "repository directory override");

  int exit_code = kExitOk;

  // -------------------------------------------------------------- ingest
  auto* ingest = app.add_subcommand("ingest", "parse a network spec and commit a snapshot");
  std::string ingest_file, ingest_branch = "main", ingest_message = "ingest network spec";
  ingest->add_option("file", ingest_file, "network spec JSON file")->required();
  ingest->add_option("--branch", ingest_branch, "target branch");
  ingest->add_option("--message", ingest_message, "commit message");
  ingest->callback([&] {
    auto parsed = nettwin::parse_network_spec(read_file(ingest_file));
    if (!parsed.ok()) {
      for (const auto& d : parsed.diagnostics) {
        std::cerr << ingest_file << ": " << d.path << ": " << d.message << "\n";
      }
      exit_code = kExitError;
      return;
    }
    auto repo = global.repo();
    if (!repo.branches().count(ingest_branch)) repo.fork("main", ingest_branch);
    bool converged = false;
    auto meta = nettwin::commit_network(repo, ingest_branch, *parsed.spec, ingest_message,
                                        &converged);
    std::cout << "committed " << meta.id << " (branch " << ingest_branch << ", routing "
              << (converged ? "converged" : "NOT converged") << ")\n";
  });

  // ------------------------------------------------------------ snapshot
  auto* snapshot = app.add_subcommand("snapshot", "inspect and manage snapshots");
  snapshot->require_subcommand(1);

  auto* snap_list = snapshot->add_subcommand("list", "list snapshots");
  bool snap_list_json = false;
  snap_list->add_flag("--json", snap_list_json, "print JSON");
  snap_list->callback([&] {
    auto repo = global.repo();
    auto metas = repo.list();
    if (snap_list_json) {
      Json out = Json::array();
      for (const auto& m : metas) {
        out.push_back(Json{{"id", m.id},
                           {"parents", m.parents},
                           {"branch", m.branch},
                           {"created_at", m.created_at},
                           {"message", m.message},
                           {"slices", m.digests.size()}});
      }
      std::cout << out.dump(2) << "\n";
      return;
    }
    for (const auto& m : metas) {
      std::cout << m.id << "  " << m.created_at << "  [" << m.branch << "]  " << m.message
                << "\n";
    }
    std::cout << "branches:\n";
    for (const auto& [name, head] : repo.branches()) {
      std::cout << "  " << name << " -> " << head << "\n";
    }
  });

  auto* snap_fork = snapshot->add_subcommand("fork", "start a branch from another branch");
  std::string fork_from, fork_new;
  snap_fork->add_option("from", fork_from, "source branch")->required();
  snap_fork->add_option("new", fork_new, "new branch name")->required();
  snap_fork->callback([&] {
    auto repo = global.repo();
    repo.fork(fork_from, fork_new);
    std::cout << fork_new << " -> " << repo.head(fork_new) << "\n";
  });

  auto* snap_diff = snapshot->add_subcommand("diff", "diff two snapshots (id or branch)");
  std::string diff_a, diff_b;
  snap_diff->add_option("a", diff_a, "snapshot id or branch")->required();
  snap_diff->add_option("b", diff_b, "snapshot id or branch")->required();
  snap_diff->callback([&] {
    auto repo = global.repo();
    auto diff = repo.diff(resolve_snapshot(repo, diff_a), resolve_snapshot(repo, diff_b));
    std::cout << nettwin::snapshot_diff_to_json(diff).dump(2) << "\n";
  });

  auto* snap_merge = snapshot->add_subcommand("merge", "merge a feature branch");
  std::string merge_feature, merge_into = "main", merge_message;
  snap_merge->add_option("feature", merge_feature, "feature branch")->required();
  snap_merge->add_option("--into", merge_into, "target branch");
  snap_merge->add_option("--message", merge_message, "commit message");
  snap_merge->callback([&] {
    auto repo = global.repo();
    std::string message = merge_message.empty()
                              ? "merge " + merge_feature + " into " + merge_into
                              : merge_message;
    auto meta = repo.merge(merge_feature, merge_into, message);
    std::cout << "merged " << merge_feature << " into " << merge_into << " at " << meta.id
              << "\n";
  });

  auto* snap_rebase = snapshot->add_subcommand("rebase", "rebase a feature branch");
  std::string rebase_feature, rebase_onto = "main", rebase_message;
  snap_rebase->add_option("feature", rebase_feature, "feature branch")->required();
  snap_rebase->add_option("--onto", rebase_onto, "new base branch");
  snap_rebase->add_option("--message", rebase_message, "commit message");
  snap_rebase->callback([&] {
    auto repo = global.repo();
    auto result = repo.rebase(rebase_feature, rebase_onto);
    std::string message = rebase_message.empty()
                              ? "rebase " + rebase_feature + " onto " + rebase_onto
                              : rebase_message;
    auto meta = repo.commit(result.snapshot, message);
    std::cout << "rebased " << rebase_feature << " onto " << rebase_onto << " at " << meta.id
              << "\nrevalidate:";
    for (auto layer : result.revalidation) std::cout << " " << nettwin::layer_name(layer);
    std::cout << "\n";
  });

  // --------------------------------------------------------------- query
  auto* query = app.add_subcommand("query", "run a graph query against a snapshot");
  std::string query_snapshot = "main", query_file, query_inline;
  query->add_option("--snapshot", query_snapshot, "snapshot id or branch");
  query->add_option("--file", query_file, "query JSON file");
  query->add_option("--inline", query_inline, "query JSON text");
  query->callback([&] {
    if (query_file.empty() == query_inline.empty()) {
      throw nettwin::Error(nettwin::ErrorCode::InvalidParams,
                           "pass exactly one of --file or --inline");
    }
    std::string text = query_file.empty() ? query_inline : read_file(query_file);
    auto q = nettwin::query_from_json(parse_json_text(text, "query"));
    auto repo = global.repo();
    auto content = repo.content(resolve_snapshot(repo, query_snapshot));
    std::cout << nettwin::run_query(content, q).dump(2) << "\n";
  });

  // -------------------------------------------------------------- verify
  auto* verify = app.add_subcommand("verify", "run one verification tool");
  std::string verify_tool, verify_a = "main", verify_b, verify_params, verify_params_file;
  verify->add_option("tool", verify_tool,
                     "tool name (ndt.verify.reachability) or capability (REACHABILITY)")
      ->required();
  verify->add_option("--snapshot-a", verify_a, "reference snapshot id or branch");
  verify->add_option("--snapshot-b", verify_b, "candidate snapshot id or branch");
  verify->add_option("--params", verify_params, "params JSON text");
  verify->add_option("--params-file", verify_params_file, "params JSON file");
  verify->callback([&] {
    Json params = Json::object();
    if (!verify_params.empty() && !verify_params_file.empty()) {
      throw nettwin::Error(nettwin::ErrorCode::InvalidParams,
                           "pass at most one of --params or --params-file");
    }
    if (!verify_params.empty()) params = parse_json_text(verify_params, "params");
    if (!verify_params_file.empty()) {
      params = parse_json_text(read_file(verify_params_file), "params");
    }
    auto repo = global.repo();
    std::string a = resolve_snapshot(repo, verify_a);
    std::string b = verify_b.empty() ? a : resolve_snapshot(repo, verify_b);
    nettwin::TwinContext ctx(repo, a, b);
    nettwin::ToolRegistry registry(ctx, global.config().acl_compare_cap);
    std::string tool = verify_tool;
    if (tool.find('.') == std::string::npos) {
      auto cap = nettwin::capability_from_name(tool);
      if (!cap) {
        throw nettwin::Error(nettwin::ErrorCode::UnknownTool,
                             "unknown capability " + tool);
      }
      auto result = registry.verify(*cap, params);
      std::cout << result.to_json().dump(2) << "\n";
      exit_code = result.status == nettwin::VerifyStatus::Pass ? kExitOk
                  : result.status == nettwin::VerifyStatus::Fail ? kExitBlocked
                                                                 : kExitError;
      return;
    }
    Json result = registry.call_tool(tool, params);
    std::cout << result.dump(2) << "\n";
    if (result.is_object() && result.contains("status")) {
      std::string status = result.value("status", "ERROR");
      exit_code = status == "PASS" ? kExitOk : status == "FAIL" ? kExitBlocked : kExitError;
    }
  });

  // -------------------------------------------------------------- ticket
  auto* ticket = app.add_subcommand("ticket", "manage change tickets");
  ticket->require_subcommand(1);

  auto* ticket_create = ticket->add_subcommand("create", "create a ticket");
  std::string tc_id, tc_title, tc_description, tc_change_file, tc_branch;
  ticket_create->add_option("--id", tc_id, "ticket id")->required();
  ticket_create->add_option("--title", tc_title, "one-line title");
  ticket_create->add_option("--description", tc_description, "free-form description");
  ticket_create->add_option("--change-file", tc_change_file,
                            "structured change request JSON file");
  ticket_create->add_option("--branch", tc_branch, "candidate branch (shortcut)");
  ticket_create->callback([&] {
    auto cfg = global.config();
    nettwin::TicketStore store(cfg.ticket_dir);
    nettwin::Ticket t;
    t.id = tc_id;
    t.title = tc_title;
    t.description = tc_description;
    if (!tc_change_file.empty()) {
      t.change = parse_json_text(read_file(tc_change_file), "change request");
    }
    if (!tc_branch.empty()) t.change["branch"] = tc_branch;
    store.create(t);
    std::cout << "created ticket " << t.id << "\n";
  });

  auto* ticket_show = ticket->add_subcommand("show", "print one ticket");
  std::string ts_id;
  ticket_show->add_option("id", ts_id, "ticket id")->required();
  ticket_show->callback([&] {
    nettwin::TicketStore store(global.config().ticket_dir);
    std::cout << store.get(ts_id).to_json().dump(2) << "\n";
  });

  auto* ticket_list = ticket->add_subcommand("list", "list tickets");
  ticket_list->callback([&] {
    nettwin::TicketStore store(global.config().ticket_dir);
    for (const auto& id : store.list()) {
      auto t = store.get(id);
      std::cout << t.id << "  [" << t.status << "]  " << t.title << "\n";
    }
  });

  // ------------------------------------------------------------ validate
  auto* validate = app.add_subcommand("validate", "run the validation workflow on a ticket");
  std::string val_ticket, val_a = "main", val_b, val_policy = "scripted", val_remote_url;
  validate->add_option("--ticket", val_ticket, "ticket id")->required();
  validate->add_option("--snapshot-a", val_a, "reference snapshot id or branch");
  validate->add_option("--snapshot-b", val_b,
                       "candidate snapshot id or branch (default: ticket change.branch)");
  validate->add_option("--policy", val_policy, "scripted | remote");
  validate->add_option("--remote-url", val_remote_url, "remote policy endpoint");
  validate->callback([&] {
    auto cfg = global.config();
    auto repo = global.repo();
    nettwin::TicketStore store(cfg.ticket_dir);
    auto t = store.get(val_ticket);
    std::string b_ref = val_b;
    if (b_ref.empty()) b_ref = t.change.value("branch", "");
    if (b_ref.empty()) {
      throw nettwin::Error(nettwin::ErrorCode::InvalidParams,
                           "pass --snapshot-b or set change.branch on the ticket");
    }
    nettwin::Validator validator(repo, store, cfg.memory_dir,
                                 make_policy(cfg, val_policy, val_remote_url),
                                 cfg.acl_compare_cap);
    nettwin::ValidationRequest request;
    request.ticket_id = val_ticket;
    request.snapshot_a = resolve_snapshot(repo, val_a);
    request.snapshot_b = resolve_snapshot(repo, b_ref);
    request.policy_name = val_policy;
    request.react_budget = cfg.react_budget;
    auto report = validator.validate_change(request);
    std::cout << report.to_json().dump(2) << "\n";
    exit_code = report.verdict == "APPROVED" ? kExitOk : kExitBlocked;
  });

  // ------------------------------------------------------------- approve
  auto* approve = app.add_subcommand("approve", "merge an approved ticket's branch");
  std::string ap_ticket, ap_into = "main";
  approve->add_option("--ticket", ap_ticket, "ticket id")->required();
  approve->add_option("--into", ap_into, "target branch");
  approve->callback([&] {
    auto cfg = global.config();
    nettwin::TicketStore store(cfg.ticket_dir);
    auto t = store.get(ap_ticket);
    if (t.status != "APPROVED") {
      std::cerr << "ticket " << ap_ticket << " is " << t.status
                << "; only APPROVED tickets can be merged\n";
      exit_code = kExitBlocked;
      return;
    }
    std::string branch = t.change.value("branch", "");
    if (branch.empty()) {
      throw nettwin::Error(nettwin::ErrorCode::InvalidParams,
                           "ticket has no change.branch to merge");
    }
    auto repo = global.repo();
    auto meta = repo.merge(branch, ap_into, "approve " + ap_ticket);
    store.append_note(ap_ticket, "system", "merged " + branch + " into " + ap_into +
                                               " at " + meta.id);
    std::cout << "merged " << branch << " into " << ap_into << " at " << meta.id << "\n";
  });

  // ---------------------------------------------------------------- eval
  auto* eval = app.add_subcommand("eval", "scenario evaluation harness");
  eval->require_subcommand(1);

  auto* eval_run = eval->add_subcommand("run", "validate every scenario variant and score it");
  int eval_runs = 1;
  std::string eval_work_dir = "eval-out", eval_policy = "scripted", eval_remote_url;
  std::vector<std::string> eval_scenarios;
  eval_run->add_option("--runs", eval_runs, "repeat count (variation indexes)");
  eval_run->add_option("--work-dir", eval_work_dir, "output directory");
  eval_run->add_option("--policy", eval_policy, "scripted | remote");
  eval_run->add_option("--remote-url", eval_remote_url, "remote policy endpoint");
  eval_run->add_option("--scenario", eval_scenarios, "restrict to scenario ids");
  eval_run->callback([&] {
    auto cfg = global.config();
    nettwin::EvalOptions options;
    options.work_dir = eval_work_dir;
    options.runs = eval_runs;
    options.policy = make_policy(cfg, eval_policy, eval_remote_url);
    options.policy_name = eval_policy;
    options.scenario_ids = eval_scenarios;
    options.react_budget = cfg.react_budget;
    options.acl_compare_cap = cfg.acl_compare_cap;
    auto outcome = nettwin::run_eval(options);
    std::cout << outcome.metrics.to_json().dump(2) << "\n";
  });

  auto* eval_scenarios_cmd = eval->add_subcommand("scenarios", "list built-in scenarios");
  std::string eval_export;
  eval_scenarios_cmd->add_option("--export", eval_export, "write scenario bundles here");
  eval_scenarios_cmd->callback([&] {
    for (const auto& s : nettwin::builtin_scenarios()) {
      std::cout << s.id << "  [" << s.category << "]  " << s.title << "\n";
      if (!eval_export.empty()) {
        nettwin::write_scenario_bundle(s, std::filesystem::path(eval_export) / s.id);
      }
    }
    if (!eval_export.empty()) std::cout << "bundles written to " << eval_export << "\n";
  });

  auto* eval_headline = eval->add_subcommand("headline",
                                             "score the frozen reference record set");
  eval_headline->callback([&] {
    auto metrics = nettwin::compute_metrics(nettwin::headline_records());
    std::cout << metrics.to_json().dump(2) << "\n";
  });

  // --------------------------------------------------------------- serve
  auto* serve = app.add_subcommand("serve", "serve the JSON-RPC tool endpoint");
  std::string serve_host = "127.0.0.1";
  int serve_port = 8787;
  serve->add_option("--host", serve_host, "bind address");
  serve->add_option("--port", serve_port, "bind port");
  serve->callback([&] {
    auto cfg = global.config();
    nettwin::RpcServerConfig rpc_config;
    rpc_config.repo_dir = cfg.repo_path;
    rpc_config.ticket_dir = cfg.ticket_dir;
    rpc_config.memory_dir = cfg.memory_dir;
    rpc_config.policy_name = cfg.remote_url.empty() ? "scripted" : "remote";
    rpc_config.remote = nettwin::RemotePolicyConfig{cfg.remote_url, cfg.remote_timeout_ms,
                                                    cfg.remote_retries};
    rpc_config.react_budget = cfg.react_budget;
    rpc_config.acl_compare_cap = cfg.acl_compare_cap;
    nettwin::Repository::open(cfg.repo_path);  // initialize before accepting requests
    nettwin::RpcServer server(std::move(rpc_config));
    std::cout << "listening on http://" << serve_host << ":" << serve_port << "/rpc\n"
              << std::flush;
    if (!server.listen(serve_host, serve_port)) {
      throw nettwin::Error(nettwin::ErrorCode::StorageError,
                           "cannot bind " + serve_host + ":" + std::to_string(serve_port));
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const nettwin::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return exit_code;
}
