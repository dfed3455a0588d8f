#include "nettwin/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "nettwin/errors.hpp"

namespace nettwin {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownSnapshot: return "UnknownSnapshot";
    case ErrorCode::UnknownBranch: return "UnknownBranch";
    case ErrorCode::UnknownDevice: return "UnknownDevice";
    case ErrorCode::UnknownNodeReference: return "UnknownNodeReference";
    case ErrorCode::UnknownLayer: return "UnknownLayer";
    case ErrorCode::UnknownTool: return "UnknownTool";
    case ErrorCode::UnknownTicket: return "UnknownTicket";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::InvalidQuery: return "InvalidQuery";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::ClosedSnapshot: return "ClosedSnapshot";
    case ErrorCode::EmptySnapshot: return "EmptySnapshot";
    case ErrorCode::StaleHead: return "StaleHead";
    case ErrorCode::MergeConflict: return "MergeConflict";
    case ErrorCode::HeaderSpaceTooLarge: return "HeaderSpaceTooLarge";
    case ErrorCode::EmptyRecordSet: return "EmptyRecordSet";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    case ErrorCode::RemoteUnavailable: return "RemoteUnavailable";
    case ErrorCode::StorageError: return "StorageError";
    case ErrorCode::InternalError: return "InternalError";
  }
  return "InternalError";
}

namespace {

std::string trim(const std::string& s) {
  size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw Error(ErrorCode::ParseError, key + " must be a number, got \"" + value + "\"");
  }
  return out;
}

}  // namespace

EngineConfig parse_config(const std::string& text) {
  EngineConfig config;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "repo_path") {
      config.repo_path = value;
    } else if (key == "ticket_dir") {
      config.ticket_dir = value;
    } else if (key == "memory_dir") {
      config.memory_dir = value;
    } else if (key == "react_budget") {
      config.react_budget = parse_number<int>(key, value);
    } else if (key == "remote_url") {
      config.remote_url = value;
    } else if (key == "remote_timeout_ms") {
      config.remote_timeout_ms = parse_number<int>(key, value);
    } else if (key == "remote_retries") {
      config.remote_retries = parse_number<int>(key, value);
    } else if (key == "acl_compare_cap") {
      config.acl_compare_cap = parse_number<uint64_t>(key, value);
    } else {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(lineno) + ": unknown key \"" + key + "\"");
    }
  }
  if (config.react_budget < 1) {
    throw Error(ErrorCode::ParseError, "react_budget must be at least 1");
  }
  if (config.remote_timeout_ms < 1) {
    throw Error(ErrorCode::ParseError, "remote_timeout_ms must be at least 1");
  }
  if (config.remote_retries < 0) {
    throw Error(ErrorCode::ParseError, "remote_retries must be non-negative");
  }
  if (config.acl_compare_cap < 1) {
    throw Error(ErrorCode::ParseError, "acl_compare_cap must be at least 1");
  }
  return config;
}

EngineConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw Error(ErrorCode::StorageError, "cannot read config file " + file.string());
  }
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::string serialize_config(const EngineConfig& config) {
  std::ostringstream out;
  out << "repo_path = " << config.repo_path.string() << "\n";
  out << "ticket_dir = " << config.ticket_dir.string() << "\n";
  out << "memory_dir = " << config.memory_dir.string() << "\n";
  out << "react_budget = " << config.react_budget << "\n";
  out << "remote_url = " << config.remote_url << "\n";
  out << "remote_timeout_ms = " << config.remote_timeout_ms << "\n";
  out << "remote_retries = " << config.remote_retries << "\n";
  out << "acl_compare_cap = " << config.acl_compare_cap << "\n";
  return out.str();
}

}  // namespace nettwin
