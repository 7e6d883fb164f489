#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace crashrepro {

enum class ErrorKind {
  // rag_store
  EmptyText,
  ProviderUnavailable,
  EmptyCorpus,
  DimensionMismatch,
  ProviderMismatch,
  EmptyIndex,
  CorpusInvalid,
  IndexInvalid,
  // s2r grammar
  InvariantViolation,
  NoEntitiesFound,
  // llm gateway
  Timeout,
  TransportError,
  BudgetExceeded,
  ExhaustedScript,
  MalformedCommand,
  NoActionableOutput,
  // device / simulator
  DeviceUnavailable,
  NoMatch,
  SpecInvalid,
  AlreadyCrashed,
  // utg
  ElementAbsent,
  // plumbing
  ConfigError,
  IoError,
  FormatError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it onto an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace crashrepro
