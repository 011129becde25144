#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "seqfuzz/openapi.hpp"
#include "seqfuzz/sequence.hpp"

namespace seqfuzz {

struct ConcreteRequest {
  Method method = Method::Get;
  std::string url;  ///< base URL + percent-encoded path and query
  std::string target; ///< path and query relative to the base URL
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  bool has_body = false;
};

enum class Transport { Ok, Timeout, ConnectionClosed };
std::string_view to_string(Transport t);

struct ResponseRecord {
  std::size_t request_index = 0;
  std::optional<int> status; ///< present iff transport == Ok
  std::string body;
  double latency_ms = 0;
  Transport transport = Transport::Ok;
};

enum class Verdict { ExpectedStatus, UnexpectedStatus, ServerError, TransportFailure };
std::string_view to_string(Verdict v);

enum class CheckerMode { Strict, ServerErrorOnly };
CheckerMode parse_checker_mode(std::string_view text);

/// Flattened response fields, keyed by dotted path, for each executed request.
using Environment = std::vector<std::map<std::string, std::string>>;

/// Dotted-path view of a JSON body. Strings are unquoted, other scalars
/// serialized. Containers appear only through their leaves.
std::map<std::string, std::string> flatten_response(std::string_view body);

struct ClientConfig {
  std::string base_url;
  int timeout_ms = 2000;
  std::optional<std::pair<std::string, std::string>> auth_header;
};

struct RenderResult {
  ConcreteRequest request;
  std::vector<std::string> warnings;
};

/// References that cannot be resolved fall back to the schema default and
/// produce a warning.
RenderResult render_request(const ApiSpec& spec, const TemplatedRequest& req, const Environment& env,
                            const ClientConfig& config);

struct ExecutionResult {
  std::vector<ResponseRecord> records;
  std::vector<ConcreteRequest> sent;
  std::vector<std::string> warnings;
};

class HttpClient {
public:
  explicit HttpClient(ClientConfig config);
  ~HttpClient();
  HttpClient(const HttpClient&) = delete;
  HttpClient& operator=(const HttpClient&) = delete;

  const ClientConfig& config() const { return config_; }

  ResponseRecord send(const ConcreteRequest& request);

  /// Sends in order; stops after the first transport failure.
  ExecutionResult execute_sequence(const ApiSpec& spec, const RequestSequence& seq);

private:
  struct Impl;
  ClientConfig config_;
  std::unique_ptr<Impl> impl_;
};

Verdict check_response(const ApiSpec& spec, const TemplatedRequest& request, const ResponseRecord& record,
                       CheckerMode mode);

/// Removes CR, LF and NUL so a value cannot split the header block.
std::string sanitize_header_value(std::string_view value);

} // namespace seqfuzz
