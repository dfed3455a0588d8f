#pragma once

#include <stdexcept>
#include <string>

namespace nettwin {

// Stable error identities shared by the library, the CLI and the RPC server.
// RPC maps these to application error codes 1000 + static_cast<int>(code).
enum class ErrorCode {
  UnknownSnapshot = 0,
  UnknownBranch,
  UnknownDevice,
  UnknownNodeReference,
  UnknownLayer,
  UnknownTool,
  UnknownTicket,
  SchemaViolation,
  InvalidQuery,
  InvalidParams,
  ParseError,
  ValidationError,
  ClosedSnapshot,
  EmptySnapshot,
  StaleHead,
  MergeConflict,
  HeaderSpaceTooLarge,
  EmptyRecordSet,
  BudgetExhausted,
  RemoteUnavailable,
  StorageError,
  InternalError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace nettwin
