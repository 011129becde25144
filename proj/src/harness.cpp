#include "seqfuzz/harness.hpp"

#include <chrono>

#include "httplib.h"
#include "seqfuzz/encoding.hpp"
#include "seqfuzz/error.hpp"

namespace seqfuzz {

std::string_view to_string(Transport t) {
  switch (t) {
  case Transport::Ok: return "ok";
  case Transport::Timeout: return "timeout";
  case Transport::ConnectionClosed: return "connection_closed";
  }
  return "?";
}

std::string_view to_string(Verdict v) {
  switch (v) {
  case Verdict::ExpectedStatus: return "ExpectedStatus";
  case Verdict::UnexpectedStatus: return "UnexpectedStatus";
  case Verdict::ServerError: return "ServerError";
  case Verdict::TransportFailure: return "TransportFailure";
  }
  return "?";
}

CheckerMode parse_checker_mode(std::string_view text) {
  if (text == "strict") return CheckerMode::Strict;
  if (text == "server-error" || text == "server-error-only") return CheckerMode::ServerErrorOnly;
  throw Error(ErrorCode::ConfigError, "unknown checker mode: " + std::string(text));
}

std::string sanitize_header_value(std::string_view value) {
  std::string out;
  out.reserve(value.size());
  for (char c : value)
    if (c != '\r' && c != '\n' && c != '\0') out.push_back(c);
  return out;
}

namespace {

void flatten_into(const Json& node, const std::string& prefix, std::map<std::string, std::string>& out) {
  if (node.is_object()) {
    for (auto it = node.begin(); it != node.end(); ++it)
      flatten_into(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i)
      flatten_into(node[i], prefix.empty() ? std::to_string(i) : prefix + "." + std::to_string(i), out);
  } else if (!prefix.empty()) {
    out[prefix] = node.is_string() ? node.get<std::string>() : node.dump();
  }
}

// Raw JSON text for typed leaves whose literal already has that type,
// a quoted string otherwise.
std::string json_leaf(const SchemaNode* schema, const std::string& bytes) {
  if (schema != nullptr && schema->kind != SchemaKind::String) {
    Json parsed = Json::parse(bytes, nullptr, false);
    if (!parsed.is_discarded()) {
      bool fits = false;
      switch (schema->kind) {
      case SchemaKind::Integer: fits = parsed.is_number_integer(); break;
      case SchemaKind::Number: fits = parsed.is_number(); break;
      case SchemaKind::Boolean: fits = parsed.is_boolean(); break;
      case SchemaKind::Array: fits = parsed.is_array(); break;
      case SchemaKind::Object: fits = parsed.is_object(); break;
      default: break;
      }
      if (fits) return bytes;
    }
  }
  return json_quote_bytes(bytes);
}

class Renderer {
public:
  Renderer(const OperationDescriptor* op, const Environment& env, std::vector<std::string>& warnings)
      : op_(op), env_(env), warnings_(warnings) {}

  std::string resolve(const ParameterValue& value, const SchemaNode* schema, const std::string& slot) {
    if (const auto* lit = std::get_if<Literal>(&value)) return lit->bytes;
    const auto& ref = std::get<Reference>(value);
    if (ref.request < env_.size()) {
      auto it = env_[ref.request].find(ref.field);
      if (it != env_[ref.request].end()) return it->second;
    }
    warnings_.push_back("unresolved reference: request " + std::to_string(ref.request) + " field " +
                        ref.field + " for " + slot + "; using default");
    return schema != nullptr ? default_value(*schema) : "a";
  }

  std::string body_json(const BodyValue& node, const std::string& path) {
    switch (node.kind) {
    case BodyValue::Kind::Object: {
      std::string out = "{";
      bool first = true;
      for (const auto& f : node.fields) {
        if (!first) out += ",";
        first = false;
        out += json_quote_bytes(f.name) + ":" + body_json(f.value, path.empty() ? f.name : path + "." + f.name);
      }
      return out + "}";
    }
    case BodyValue::Kind::Array: {
      std::string out = "[";
      for (std::size_t i = 0; i < node.items.size(); ++i) {
        if (i) out += ",";
        out += body_json(node.items[i], path.empty() ? std::to_string(i) : path + "." + std::to_string(i));
      }
      return out + "]";
    }
    case BodyValue::Kind::Leaf:
      break;
    }
    const SchemaNode* schema = body_schema(path);
    return json_leaf(schema, resolve(node.leaf, schema, "body " + (path.empty() ? std::string("<root>") : path)));
  }

  const SchemaNode* body_schema(const std::string& path) const {
    if (op_ == nullptr || !op_->request_body) return nullptr;
    return path.empty() ? &*op_->request_body : schema_at(*op_->request_body, path);
  }

  const SchemaNode* param_schema(const std::string& name) const {
    if (op_ == nullptr) return nullptr;
    for (const auto& p : op_->parameters)
      if (p.name == name && p.location != ParamLocation::BodyField) return &p.schema;
    return nullptr;
  }

private:
  const OperationDescriptor* op_;
  const Environment& env_;
  std::vector<std::string>& warnings_;
};

ParamLocation location_of(const OperationDescriptor* op, const std::string& name, const std::string& path) {
  if (op != nullptr)
    for (const auto& p : op->parameters)
      if (p.name == name && p.location != ParamLocation::BodyField) return p.location;
  if (path.find("{" + name + "}") != std::string::npos) return ParamLocation::Path;
  return ParamLocation::Query;
}

} // namespace

std::map<std::string, std::string> flatten_response(std::string_view body) {
  std::map<std::string, std::string> out;
  Json parsed = Json::parse(body, nullptr, false);
  if (!parsed.is_discarded()) flatten_into(parsed, "", out);
  return out;
}

RenderResult render_request(const ApiSpec& spec, const TemplatedRequest& req, const Environment& env,
                            const ClientConfig& config) {
  RenderResult result;
  const OperationDescriptor* op = spec.find(req.path, req.method);
  Renderer renderer(op, env, result.warnings);
  ConcreteRequest& out = result.request;
  out.method = req.method;

  std::string path = req.path;
  std::string query;
  auto substitute = [&](const std::string& name, const std::string& value) {
    std::string token = "{" + name + "}";
    for (auto pos = path.find(token); pos != std::string::npos; pos = path.find(token, pos + value.size())) {
      path.replace(pos, token.size(), value);
    }
  };

  // Declared order first, then any extra parameters the sequence carries.
  std::vector<std::string> order;
  if (op != nullptr)
    for (const auto& p : op->parameters)
      if (p.location != ParamLocation::BodyField && req.params.count(p.name)) order.push_back(p.name);
  for (const auto& [name, value] : req.params)
    if (std::find(order.begin(), order.end(), name) == order.end()) order.push_back(name);

  for (const auto& name : order) {
    const SchemaNode* schema = renderer.param_schema(name);
    std::string value = renderer.resolve(req.params.at(name), schema, name);
    switch (location_of(op, name, req.path)) {
    case ParamLocation::Path: substitute(name, percent_encode(value)); break;
    case ParamLocation::Query:
      query += (query.empty() ? "?" : "&") + percent_encode(name) + "=" + percent_encode(value);
      break;
    case ParamLocation::Header: out.headers.emplace_back(name, sanitize_header_value(value)); break;
    case ParamLocation::BodyField: break;
    }
  }
  // Path parameters the sequence lacks still get a value.
  for (auto open = path.find('{'); open != std::string::npos; open = path.find('{')) {
    auto close = path.find('}', open);
    if (close == std::string::npos) break;
    std::string name = path.substr(open + 1, close - open - 1);
    const SchemaNode* schema = renderer.param_schema(name);
    substitute(name, percent_encode(schema != nullptr ? default_value(*schema) : "a"));
  }

  if (req.body) {
    out.has_body = true;
    if (op == nullptr || op->is_json_body() || req.body->kind != BodyValue::Kind::Leaf) {
      out.body = renderer.body_json(*req.body, "");
    } else {
      out.body = renderer.resolve(req.body->leaf, nullptr, "body");
    }
    std::string media = op != nullptr && !op->body_media_type.empty() ? op->body_media_type : "application/json";
    out.headers.emplace_back("Content-Type", media);
  }
  if (config.auth_header)
    out.headers.emplace_back(sanitize_header_value(config.auth_header->first),
                             sanitize_header_value(config.auth_header->second));

  out.target = path + query;
  std::string base = config.base_url.empty() ? spec.base_url : config.base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  out.url = base + out.target;
  return result;
}

namespace {

// Splits "http://host:port/prefix" into the origin and a path prefix.
std::pair<std::string, std::string> split_base(const std::string& base) {
  auto scheme = base.find("://");
  auto path_start = base.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) return {base, ""};
  std::string prefix = base.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base.substr(0, path_start), prefix};
}

} // namespace

struct HttpClient::Impl {
  std::unique_ptr<httplib::Client> client;
  std::string prefix;
};

HttpClient::HttpClient(ClientConfig config) : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
  auto [origin, prefix] = split_base(config_.base_url);
  impl_->prefix = prefix;
  impl_->client = std::make_unique<httplib::Client>(origin);
  auto timeout = std::chrono::milliseconds(config_.timeout_ms);
  impl_->client->set_connection_timeout(timeout);
  impl_->client->set_read_timeout(timeout);
  impl_->client->set_write_timeout(timeout);
  impl_->client->set_keep_alive(true);
  impl_->client->set_url_encode(false);
  impl_->client->set_tcp_nodelay(true);
}

HttpClient::~HttpClient() = default;

ResponseRecord HttpClient::send(const ConcreteRequest& request) {
  httplib::Request req;
  req.method = std::string(to_string(request.method));
  req.path = impl_->prefix + request.target;
  for (const auto& [name, value] : request.headers) req.headers.emplace(name, value);
  if (request.has_body) req.body = request.body;

  ResponseRecord record;
  auto start = std::chrono::steady_clock::now();
  httplib::Result result = impl_->client->send(req);
  auto elapsed = std::chrono::steady_clock::now() - start;
  record.latency_ms = std::chrono::duration<double, std::milli>(elapsed).count();
  if (result) {
    record.transport = Transport::Ok;
    record.status = result->status;
    record.body = result->body;
    return record;
  }
  httplib::Error err = result.error();
  bool timed_out = err == httplib::Error::ConnectionTimeout ||
                   ((err == httplib::Error::Read || err == httplib::Error::Write) &&
                    record.latency_ms >= config_.timeout_ms);
  record.transport = timed_out ? Transport::Timeout : Transport::ConnectionClosed;
  // A broken keep-alive connection must not poison later requests.
  impl_->client->stop();
  return record;
}

ExecutionResult HttpClient::execute_sequence(const ApiSpec& spec, const RequestSequence& seq) {
  ExecutionResult result;
  Environment env;
  for (std::size_t i = 0; i < seq.requests.size(); ++i) {
    RenderResult rendered = render_request(spec, seq.requests[i], env, config_);
    for (auto& w : rendered.warnings) result.warnings.push_back(std::move(w));
    ResponseRecord record = send(rendered.request);
    record.request_index = i;
    env.push_back(record.transport == Transport::Ok ? flatten_response(record.body)
                                                    : std::map<std::string, std::string>{});
    result.sent.push_back(std::move(rendered.request));
    bool failed = record.transport != Transport::Ok;
    result.records.push_back(std::move(record));
    if (failed) break;
  }
  return result;
}

Verdict check_response(const ApiSpec& spec, const TemplatedRequest& request, const ResponseRecord& record,
                       CheckerMode mode) {
  // Throws UnknownOperation before anything else.
  ExpectedStatuses expected = expected_statuses(spec, request.path, request.method);
  if (record.transport != Transport::Ok || !record.status) return Verdict::TransportFailure;
  int status = *record.status;
  if (status >= 500 && status <= 599) return Verdict::ServerError;
  if (mode == CheckerMode::ServerErrorOnly) return Verdict::ExpectedStatus;
  return expected.accepts(status) ? Verdict::ExpectedStatus : Verdict::UnexpectedStatus;
}

} // namespace seqfuzz
