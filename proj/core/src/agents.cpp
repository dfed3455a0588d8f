#include "nettwin/agents.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>

#include <httplib.h>

#include "nettwin/errors.hpp"

namespace nettwin {

namespace {

std::string utc_now_iso8601() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

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

constexpr const char* kRoleNames[kAgentRoleCount] = {
    "ASSISTANT", "NDM_QUERY", "IMPACT", "TEST_PLANNER", "TEST_EXECUTOR",
};

VerifyStatus status_from_name(const std::string& name) {
  if (name == "PASS") return VerifyStatus::Pass;
  if (name == "FAIL") return VerifyStatus::Fail;
  return VerifyStatus::Error;
}

}  // namespace

// ---------------------------------------------------------------------------
// Tickets
// ---------------------------------------------------------------------------

Json Ticket::to_json() const {
  Json notes_json = Json::array();
  for (const auto& n : notes) {
    notes_json.push_back(
        Json{{"author", n.author}, {"text", n.text}, {"created_at", n.created_at}});
  }
  return Json{{"id", id},           {"title", title},   {"description", description},
              {"change", change},   {"status", status}, {"notes", notes_json},
              {"created_at", created_at}};
}

Ticket Ticket::from_json(const Json& j) {
  Ticket t;
  t.id = j.at("id").get<std::string>();
  t.title = j.value("title", "");
  t.description = j.value("description", "");
  t.change = j.value("change", Json::object());
  t.status = j.value("status", "OPEN");
  t.created_at = j.value("created_at", "");
  for (const auto& n : j.value("notes", Json::array())) {
    t.notes.push_back(TicketNote{n.value("author", ""), n.value("text", ""),
                                 n.value("created_at", "")});
  }
  return t;
}

TicketStore::TicketStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

Ticket TicketStore::load(const std::string& id) const {
  std::ifstream in(dir_ / (id + ".json"));
  if (!in) throw Error(ErrorCode::UnknownTicket, "no ticket " + id);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::StorageError, "corrupt ticket file for " + id);
  return Ticket::from_json(j);
}

void TicketStore::save(const Ticket& ticket) const {
  auto path = dir_ / (ticket.id + ".json");
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << ticket.to_json().dump(2) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

Ticket TicketStore::create(Ticket ticket) {
  FileLock lock(dir_ / "lock", true);
  if (ticket.id.empty()) throw Error(ErrorCode::ValidationError, "ticket id must not be empty");
  if (std::filesystem::exists(dir_ / (ticket.id + ".json"))) {
    throw Error(ErrorCode::ValidationError, "ticket " + ticket.id + " already exists");
  }
  if (ticket.created_at.empty()) ticket.created_at = utc_now_iso8601();
  save(ticket);
  return ticket;
}

Ticket TicketStore::get(const std::string& id) const {
  FileLock lock(dir_ / "lock", false);
  return load(id);
}

Ticket TicketStore::append_note(const std::string& id, const std::string& author,
                                const std::string& text) {
  FileLock lock(dir_ / "lock", true);
  Ticket t = load(id);
  t.notes.push_back(TicketNote{author, text, utc_now_iso8601()});
  save(t);
  return t;
}

Ticket TicketStore::set_status(const std::string& id, const std::string& status) {
  FileLock lock(dir_ / "lock", true);
  Ticket t = load(id);
  t.status = status;
  save(t);
  return t;
}

std::vector<std::string> TicketStore::list() const {
  FileLock lock(dir_ / "lock", false);
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (!entry.is_regular_file()) continue;
    auto path = entry.path();
    if (path.extension() != ".json") continue;
    ids.push_back(path.stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

// ---------------------------------------------------------------------------
// Roles and policies
// ---------------------------------------------------------------------------

const char* agent_role_name(AgentRole r) { return kRoleNames[static_cast<size_t>(r)]; }

std::optional<AgentRole> agent_role_from_name(const std::string& name) {
  for (size_t i = 0; i < kAgentRoleCount; ++i) {
    if (name == kRoleNames[i]) return static_cast<AgentRole>(i);
  }
  return std::nullopt;
}

std::vector<std::string> role_tools(AgentRole role) {
  switch (role) {
    case AgentRole::Assistant:
      return {"ticket.get",   "ticket.append",  "agent.ndm_query",
              "agent.impact", "agent.planner",  "agent.executor"};
    case AgentRole::NdmQuery:
      return {"ndm.schema", "ndm.query"};
    case AgentRole::Impact:
      return {"ndm.schema", "ndm.query", "ndt.impact_diff"};
    case AgentRole::TestPlanner:
      return {"ndm.schema", "ndm.query"};
    case AgentRole::TestExecutor: {
      std::vector<std::string> tools = {"ndm.schema", "ndm.query"};
      for (size_t i = 0; i < kCapabilityCount; ++i) {
        tools.push_back(std::string("ndt.verify.") +
                        capability_name(static_cast<Capability>(i)));
      }
      return tools;
    }
  }
  return {};
}

namespace {

std::string tool_action(const std::string& tool, Json params) {
  return Json{{"action", "tool"}, {"tool", tool}, {"params", std::move(params)}}.dump();
}

std::string final_action(Json output) {
  return Json{{"action", "final"}, {"output", std::move(output)}}.dump();
}

int assistant_turns(const std::vector<Message>& messages) {
  int n = 0;
  for (const auto& m : messages) {
    if (m.role == "assistant") ++n;
  }
  return n;
}

Json nth_observation(const std::vector<Message>& messages, int n) {
  int i = 0;
  for (const auto& m : messages) {
    if (m.role != "tool") continue;
    if (i == n) {
      Json j = Json::parse(m.content, nullptr, false);
      return j.is_discarded() ? Json::object() : j;
    }
    ++i;
  }
  return Json::object();
}

Json user_payload(const std::vector<Message>& messages) {
  for (const auto& m : messages) {
    if (m.role == "user") {
      Json j = Json::parse(m.content, nullptr, false);
      return j.is_discarded() ? Json::object() : j;
    }
  }
  return Json::object();
}

std::string scripted_assistant(const std::vector<Message>& messages) {
  const Json payload = user_payload(messages);
  const int step = assistant_turns(messages);
  switch (step) {
    case 0:
      return tool_action("ticket.get", Json{{"ticket", payload.value("ticket", "")}});
    case 1:
      return tool_action("agent.ndm_query", Json{{"objective", "inventory"}});
    case 2:
      return tool_action("agent.impact", Json::object());
    case 3: {
      Json ticket = nth_observation(messages, 0);
      Json impact = nth_observation(messages, 2);
      Json requirements =
          ticket.value("change", Json::object()).value("requirements", Json::array());
      return tool_action("agent.planner",
                         Json{{"requirements", requirements}, {"impact", impact}});
    }
    case 4: {
      Json plan = nth_observation(messages, 3);
      return tool_action("agent.executor",
                         Json{{"tests", plan.value("tests", Json::array())}});
    }
    case 5: {
      Json results = nth_observation(messages, 4);
      int total = results.value("total", 0);
      int failed = results.value("failed", 0);
      int errored = results.value("errored", 0);
      std::string verdict = failed + errored == 0 ? "APPROVED" : "BLOCKED";
      std::string reason =
          failed + errored == 0
              ? "all " + std::to_string(total) + " tests passed"
              : std::to_string(failed + errored) + " of " + std::to_string(total) +
                    " tests failed or errored";
      return tool_action("ticket.append",
                         Json{{"ticket", payload.value("ticket", "")},
                              {"text", "validation " + verdict + ": " + reason}});
    }
    default: {
      Json results = nth_observation(messages, 4);
      int total = results.value("total", 0);
      int failed = results.value("failed", 0);
      int errored = results.value("errored", 0);
      std::string verdict = failed + errored == 0 ? "APPROVED" : "BLOCKED";
      std::string reason =
          failed + errored == 0
              ? "all " + std::to_string(total) + " tests passed"
              : std::to_string(failed + errored) + " of " + std::to_string(total) +
                    " tests failed or errored";
      return final_action(Json{{"verdict", verdict},
                               {"reason", reason},
                               {"tests_total", total},
                               {"tests_failed", failed},
                               {"tests_errored", errored}});
    }
  }
}

std::string scripted_ndm_query(const std::vector<Message>& messages) {
  const int step = assistant_turns(messages);
  if (step == 0) {
    return tool_action(
        "ndm.query",
        Json{{"snapshot", "b"},
             {"query", Json{{"start", Json{{"layer", "DEVICE"}, {"kind", "device"}}},
                            {"project", Json::array({"device"})}}}});
  }
  Json obs = nth_observation(messages, 0);
  std::set<std::string> devices;
  for (const auto& row : obs.value("rows", Json::array())) {
    if (row.contains("device")) devices.insert(row.at("device").get<std::string>());
  }
  return final_action(Json{{"devices", devices}, {"device_count", devices.size()}});
}

std::string scripted_impact(const std::vector<Message>& messages) {
  const int step = assistant_turns(messages);
  if (step == 0) return tool_action("ndt.impact_diff", Json::object());
  Json diff = nth_observation(messages, 0);
  std::set<std::string> devices;
  std::set<std::string> layer_names;
  std::set<LayerId> layers;
  Json slices = Json::array();
  for (const auto& slice : diff.value("slices", Json::array())) {
    std::string device = slice.value("device", "");
    std::string layer = slice.value("layer", "");
    devices.insert(device);
    layer_names.insert(layer);
    if (auto id = layer_from_name(layer)) layers.insert(*id);
    slices.push_back(Json{{"device", device}, {"layer", layer}});
  }
  std::vector<std::string> revalidate;
  for (LayerId l : dependency_closure(layers)) revalidate.push_back(layer_name(l));
  return final_action(Json{{"changed_slices", slices},
                           {"devices", devices},
                           {"layers", layer_names},
                           {"revalidate", revalidate}});
}

std::string scripted_planner(const std::vector<Message>& messages) {
  const Json payload = user_payload(messages);
  const Json requirements = payload.value("requirements", Json::array());
  const int step = assistant_turns(messages);

  if (!requirements.empty()) {
    Json tests = Json::array();
    int i = 1;
    for (const auto& req : requirements) {
      tests.push_back(Json{{"id", "t" + std::to_string(i)},
                           {"requirement", req.value("id", "")},
                           {"tool", req.value("tool", "")},
                           {"params", req.value("params", Json::object())}});
      ++i;
    }
    return final_action(Json{{"tests", tests}});
  }

  // No declared requirements: fall back to a baseline plan sized by whether
  // the network carries traffic demands.
  if (step == 0) {
    return tool_action(
        "ndm.query",
        Json{{"snapshot", "b"},
             {"query", Json{{"start", Json{{"layer", "METRICS"}, {"kind", "demand"}}},
                            {"project", Json::array({"flow"})}}}});
  }
  Json obs = nth_observation(messages, 0);
  bool has_demands = obs.value("count", size_t{0}) > 0;
  Json tests = Json::array();
  tests.push_back(Json{{"id", "t1"},
                       {"requirement", ""},
                       {"tool", "LOOP_DETECTION"},
                       {"params", Json{{"snapshot", "b"}}}});
  tests.push_back(Json{{"id", "t2"},
                       {"requirement", ""},
                       {"tool", "MTU_CONSISTENCY"},
                       {"params", Json{{"snapshot", "b"}}}});
  tests.push_back(
      Json{{"id", "t3"}, {"requirement", ""}, {"tool", "CONFIG_ANOMALY"}, {"params", Json::object()}});
  if (has_demands) {
    tests.push_back(Json{{"id", "t4"},
                         {"requirement", ""},
                         {"tool", "SLA_VERIFY_SIM"},
                         {"params", Json{{"snapshot", "b"}}}});
  }
  return final_action(Json{{"tests", tests}});
}

std::string scripted_executor(const std::vector<Message>& messages) {
  const Json payload = user_payload(messages);
  const Json tests = payload.value("tests", Json::array());
  const int step = assistant_turns(messages);
  if (step < static_cast<int>(tests.size())) {
    const Json& test = tests.at(step);
    return tool_action("ndt.verify." + test.value("tool", ""),
                       test.value("params", Json::object()));
  }
  Json results = Json::array();
  int failed = 0, errored = 0;
  for (size_t i = 0; i < tests.size(); ++i) {
    Json obs = nth_observation(messages, static_cast<int>(i));
    std::string status = obs.contains("error") ? "ERROR" : obs.value("status", "ERROR");
    if (status == "FAIL") ++failed;
    if (status == "ERROR") ++errored;
    results.push_back(Json{{"id", tests.at(i).value("id", "")},
                           {"requirement", tests.at(i).value("requirement", "")},
                           {"tool", tests.at(i).value("tool", "")},
                           {"status", status},
                           {"findings", obs.value("findings", Json::array()).size()}});
  }
  return final_action(Json{{"results", results},
                           {"total", tests.size()},
                           {"failed", failed},
                           {"errored", errored}});
}

}  // namespace

PolicyFn scripted_policy() {
  return [](AgentRole role, const std::vector<Message>& messages) -> std::string {
    switch (role) {
      case AgentRole::Assistant: return scripted_assistant(messages);
      case AgentRole::NdmQuery: return scripted_ndm_query(messages);
      case AgentRole::Impact: return scripted_impact(messages);
      case AgentRole::TestPlanner: return scripted_planner(messages);
      case AgentRole::TestExecutor: return scripted_executor(messages);
    }
    return final_action(Json::object());
  };
}

PolicyFn remote_policy(const RemotePolicyConfig& config) {
  return [config](AgentRole role, const std::vector<Message>& messages) -> std::string {
    auto scheme_pos = config.url.find("://");
    if (scheme_pos == std::string::npos) {
      throw Error(ErrorCode::RemoteUnavailable, "malformed remote url " + config.url);
    }
    std::string rest = config.url.substr(scheme_pos + 3);
    auto slash = rest.find('/');
    std::string host_port = slash == std::string::npos ? rest : rest.substr(0, slash);
    std::string path = slash == std::string::npos ? "/" : rest.substr(slash);
    std::string host = host_port;
    int port = 80;
    if (auto colon = host_port.rfind(':'); colon != std::string::npos) {
      host = host_port.substr(0, colon);
      port = std::stoi(host_port.substr(colon + 1));
    }

    Json msgs = Json::array();
    for (const auto& m : messages) {
      msgs.push_back(Json{{"role", m.role}, {"content", m.content}});
    }
    const std::string body =
        Json{{"role", agent_role_name(role)}, {"messages", msgs}}.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= config.retries; ++attempt) {
      httplib::Client client(host, port);
      client.set_connection_timeout(config.timeout_ms / 1000,
                                    (config.timeout_ms % 1000) * 1000);
      client.set_read_timeout(config.timeout_ms / 1000, (config.timeout_ms % 1000) * 1000);
      auto res = client.Post(path, body, "application/json");
      if (!res) {
        last_error = "transport error " + httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      Json j = Json::parse(res->body, nullptr, false);
      if (j.is_discarded() || !j.is_object() || !j.contains("completion") ||
          !j.at("completion").is_string()) {
        throw Error(ErrorCode::RemoteUnavailable,
                    "remote endpoint returned a malformed completion payload");
      }
      return j.at("completion").get<std::string>();
    }
    throw Error(ErrorCode::RemoteUnavailable,
                "no completion from " + config.url + " after " +
                    std::to_string(config.retries + 1) + " attempts (" + last_error + ")");
  };
}

// ---------------------------------------------------------------------------
// Validation session
// ---------------------------------------------------------------------------

namespace {

class ValidationSession {
 public:
  ValidationSession(Repository& repo, TicketStore& tickets,
                    std::filesystem::path memory_dir, PolicyFn policy, int budget,
                    uint64_t acl_cap, std::string ticket_id, std::string snap_a,
                    std::string snap_b)
      : ctx_(repo, std::move(snap_a), std::move(snap_b)),
        registry_(ctx_, acl_cap),
        tickets_(&tickets),
        memory_dir_(std::move(memory_dir)),
        policy_(std::move(policy)),
        budget_(budget),
        ticket_id_(std::move(ticket_id)) {
    std::filesystem::create_directories(memory_dir_ / ticket_id_);
  }

  AgentRun& run_agent(AgentRole role, const Json& payload) {
    runs_.push_back(std::make_unique<AgentRun>());
    transcripts_.push_back("");
    const size_t index = runs_.size() - 1;
    AgentRun& run = *runs_[index];
    run.role = role;
    run.messages.push_back({"system", system_prompt(role)});
    run.messages.push_back({"user", payload.dump()});

    auto start = std::chrono::steady_clock::now();
    auto finish = [&] {
      run.duration_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      transcripts_[index] = write_transcript(index, run);
    };

    for (int i = 0; i < budget_; ++i) {
      run.iterations = i + 1;
      std::string completion;
      try {
        completion = policy_(role, run.messages);
      } catch (...) {
        finish();
        throw;
      }
      run.messages.push_back({"assistant", completion});

      Json action = Json::parse(completion, nullptr, false);
      if (action.is_discarded() || !action.is_object() || !action.contains("action")) {
        run.messages.push_back(
            {"tool",
             Json{{"error", "completion must be a JSON object with an \"action\" field"}}
                 .dump()});
        continue;
      }
      const std::string kind = action.value("action", "");
      if (kind == "final") {
        run.output = action.value("output", Json::object());
        run.completed = true;
        break;
      }
      if (kind != "tool") {
        run.messages.push_back(
            {"tool", Json{{"error", "unknown action \"" + kind + "\""}}.dump()});
        continue;
      }
      const std::string tool = action.value("tool", "");
      const Json params = action.value("params", Json::object());
      ++run.tool_calls;
      Json observation;
      try {
        observation = invoke_tool(role, tool, params);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::BudgetExhausted ||
            e.code() == ErrorCode::RemoteUnavailable) {
          finish();
          throw;  // a sub-agent already failed hard; propagate
        }
        observation = Json{{"error", Json{{"code", error_code_name(e.code())},
                                          {"message", e.detail()}}}};
      }
      run.messages.push_back({"tool", observation.dump()});
    }
    finish();
    if (!run.completed) {
      throw Error(ErrorCode::BudgetExhausted,
                  std::string("agent ") + agent_role_name(role) + " used all " +
                      std::to_string(budget_) + " iterations without finishing");
    }
    return run;
  }

  const std::vector<std::unique_ptr<AgentRun>>& runs() const { return runs_; }
  const std::vector<std::string>& transcripts() const { return transcripts_; }

 private:
  Json invoke_tool(AgentRole role, const std::string& tool, const Json& params) {
    auto allowed = role_tools(role);
    if (std::find(allowed.begin(), allowed.end(), tool) == allowed.end()) {
      throw Error(ErrorCode::UnknownTool, "tool \"" + tool + "\" is not available to " +
                                              agent_role_name(role));
    }
    if (tool == "ticket.get") {
      return tickets_->get(params.value("ticket", "")).to_json();
    }
    if (tool == "ticket.append") {
      return tickets_
          ->append_note(params.value("ticket", ""), agent_role_name(role),
                        params.value("text", ""))
          .to_json();
    }
    if (tool == "agent.ndm_query") return run_agent(AgentRole::NdmQuery, params).output;
    if (tool == "agent.impact") return run_agent(AgentRole::Impact, params).output;
    if (tool == "agent.planner") return run_agent(AgentRole::TestPlanner, params).output;
    if (tool == "agent.executor") return run_agent(AgentRole::TestExecutor, params).output;
    return registry_.call_tool(tool, params);
  }

  std::string system_prompt(AgentRole role) const {
    static const std::map<std::string, std::string> kExtraTools = {
        {"ticket.get", "Fetch a change ticket by id. Params: {\"ticket\": id}."},
        {"ticket.append",
         "Append a note to a ticket. Params: {\"ticket\": id, \"text\": note}."},
        {"agent.ndm_query", "Delegate to the NDM_QUERY agent. Params become its task."},
        {"agent.impact", "Delegate to the IMPACT agent. Params become its task."},
        {"agent.planner", "Delegate to the TEST_PLANNER agent. Params become its task."},
        {"agent.executor", "Delegate to the TEST_EXECUTOR agent. Params become its task."},
    };
    static const std::map<AgentRole, std::string> kMissions = {
        {AgentRole::Assistant,
         "You own ticket-driven change validation: gather context, delegate to the "
         "specialist agents and decide whether the change is APPROVED or BLOCKED."},
        {AgentRole::NdmQuery,
         "You answer questions about the network knowledge graph using schema and "
         "query tools."},
        {AgentRole::Impact,
         "You summarize what a change touches by diffing the reference and candidate "
         "snapshots."},
        {AgentRole::TestPlanner,
         "You turn the change request and impact summary into a concrete verification "
         "test plan."},
        {AgentRole::TestExecutor,
         "You run the planned verification tools against the digital twin and report "
         "per-test outcomes."},
    };
    std::string prompt = std::string("You are the ") + agent_role_name(role) +
                         " agent in a network change validation workflow. " +
                         kMissions.at(role) +
                         "\nRespond with exactly one JSON object per turn:\n"
                         "  {\"action\":\"tool\",\"tool\":\"<name>\",\"params\":{...}}\n"
                         "  {\"action\":\"final\",\"output\":{...}}\n"
                         "Available tools:\n";
    for (const auto& name : role_tools(role)) {
      auto extra = kExtraTools.find(name);
      if (extra != kExtraTools.end()) {
        prompt += "  - " + name + ": " + extra->second + "\n";
      } else {
        prompt += "  - " + name + ": " + registry_.tool_spec(name).description + "\n";
      }
    }
    return prompt;
  }

  std::string write_transcript(size_t index, const AgentRun& run) const {
    char name[64];
    std::snprintf(name, sizeof(name), "%02zu-%s.jsonl", index + 1,
                  agent_role_name(run.role));
    const std::string relative = ticket_id_ + "/" + name;
    std::ofstream out(memory_dir_ / relative, std::ios::trunc);
    for (const auto& m : run.messages) {
      out << Json{{"role", m.role}, {"content", m.content}}.dump() << "\n";
    }
    return relative;
  }

  TwinContext ctx_;
  ToolRegistry registry_;
  TicketStore* tickets_;
  std::filesystem::path memory_dir_;
  PolicyFn policy_;
  int budget_;
  std::string ticket_id_;
  std::vector<std::unique_ptr<AgentRun>> runs_;
  std::vector<std::string> transcripts_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Validator
// ---------------------------------------------------------------------------

Json ValidationReport::to_json() const {
  Json stages_json = Json::array();
  for (const auto& s : stages) {
    stages_json.push_back(Json{{"role", s.role},
                               {"iterations", s.iterations},
                               {"tool_calls", s.tool_calls},
                               {"duration_seconds", s.duration_seconds},
                               {"transcript", s.transcript}});
  }
  Json tests_json = Json::array();
  for (const auto& t : tests) {
    tests_json.push_back(Json{{"id", t.id},
                              {"requirement", t.requirement},
                              {"tool", t.tool},
                              {"status", verify_status_name(t.status)},
                              {"findings", t.findings}});
  }
  return Json{{"ticket", ticket},
              {"snapshot_a", snapshot_a},
              {"snapshot_b", snapshot_b},
              {"verdict", verdict},
              {"reason", reason},
              {"policy", policy},
              {"stages", stages_json},
              {"tests", tests_json},
              {"created_at", created_at},
              {"duration_seconds", duration_seconds}};
}

Json report_fingerprint(const ValidationReport& report) {
  Json j = report.to_json();
  j.erase("created_at");
  j.erase("duration_seconds");
  j.erase("snapshot_a");  // fresh ids every run of the same scenario
  j.erase("snapshot_b");
  for (auto& stage : j.at("stages")) {
    stage.erase("duration_seconds");
    stage.erase("transcript");
  }
  return j;
}

Validator::Validator(Repository& repo, TicketStore& tickets, std::filesystem::path memory_dir,
                     PolicyFn policy, uint64_t acl_compare_cap)
    : repo_(&repo),
      tickets_(&tickets),
      memory_dir_(std::move(memory_dir)),
      policy_(std::move(policy)),
      acl_compare_cap_(acl_compare_cap) {}

ValidationReport Validator::validate_change(const ValidationRequest& request) {
  auto start = std::chrono::steady_clock::now();
  tickets_->get(request.ticket_id);  // fail fast on unknown tickets

  ValidationSession session(*repo_, *tickets_, memory_dir_, policy_, request.react_budget,
                            acl_compare_cap_, request.ticket_id, request.snapshot_a,
                            request.snapshot_b);
  Json payload{{"ticket", request.ticket_id},
               {"snapshot_a", request.snapshot_a},
               {"snapshot_b", request.snapshot_b}};
  AgentRun& assistant = session.run_agent(AgentRole::Assistant, payload);

  ValidationReport report;
  report.ticket = request.ticket_id;
  report.snapshot_a = request.snapshot_a;
  report.snapshot_b = request.snapshot_b;
  report.policy = request.policy_name;
  report.created_at = utc_now_iso8601();

  const Json* executor_output = nullptr;
  for (size_t i = 0; i < session.runs().size(); ++i) {
    const AgentRun& run = *session.runs()[i];
    report.stages.push_back(StageSummary{agent_role_name(run.role), run.iterations,
                                         run.tool_calls, run.duration_seconds,
                                         session.transcripts()[i]});
    if (run.role == AgentRole::TestExecutor) executor_output = &run.output;
  }

  int not_passed = 0;
  if (executor_output) {
    for (const auto& result : executor_output->value("results", Json::array())) {
      TestOutcome t;
      t.id = result.value("id", "");
      t.requirement = result.value("requirement", "");
      t.tool = result.value("tool", "");
      t.status = status_from_name(result.value("status", "ERROR"));
      t.findings = result.value("findings", 0);
      if (t.status != VerifyStatus::Pass) ++not_passed;
      report.tests.push_back(std::move(t));
    }
  }

  report.verdict = not_passed == 0 ? "APPROVED" : "BLOCKED";
  report.reason = assistant.output.value("reason", "");
  const std::string claimed = assistant.output.value("verdict", "");
  if (claimed != report.verdict) {
    report.reason = "verdict derived from test outcomes (policy reported \"" + claimed +
                    "\"); " + report.reason;
  }
  if (report.tests.empty()) {
    report.reason = report.reason.empty() ? "no tests were executed" : report.reason;
  }
  report.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  tickets_->set_status(request.ticket_id, report.verdict);
  {
    std::ofstream out(memory_dir_ / request.ticket_id / "report.json", std::ios::trunc);
    out << report.to_json().dump(2) << "\n";
  }
  return report;
}

}  // namespace nettwin
