#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seqfuzz {

enum class ErrorCode {
  MalformedDocument,
  UnresolvableRef,
  MissingPaths,
  UnknownOperation,
  UnknownMethod,
  MalformedCorpusFile,
  AgentUnreachable,
  ProtocolError,
  TotalBitsChanged,
  UnknownSchedule,
  EmptyCorpus,
  ConfigError,
  SpecError,
  IoError,
  PortInUse,
};

std::string_view to_string(ErrorCode code);

/// Every failure surfaced by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace seqfuzz
