#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace nettwin {

// Engine settings shared by the CLI and the RPC server. Loaded from a
// key=value file ('#' starts a comment):
//
//   repo_path         = .nettwin/repo
//   ticket_dir        = .nettwin/tickets
//   memory_dir        = .nettwin/memory
//   react_budget      = 16
//   remote_url        = http://127.0.0.1:8810/complete
//   remote_timeout_ms = 30000
//   remote_retries    = 2
//   acl_compare_cap   = 1048576
//
// remote_url empty means the scripted policy drives the agents.
struct EngineConfig {
  std::filesystem::path repo_path = ".nettwin/repo";
  std::filesystem::path ticket_dir = ".nettwin/tickets";
  std::filesystem::path memory_dir = ".nettwin/memory";
  int react_budget = 16;
  std::string remote_url;
  int remote_timeout_ms = 30000;
  int remote_retries = 2;
  uint64_t acl_compare_cap = 1ull << 20;

  bool operator==(const EngineConfig&) const = default;
};

EngineConfig parse_config(const std::string& text);           // ParseError
EngineConfig load_config(const std::filesystem::path& file);  // StorageError, ParseError
std::string serialize_config(const EngineConfig& config);

}  // namespace nettwin
