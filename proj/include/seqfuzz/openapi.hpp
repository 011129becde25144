#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "seqfuzz/rng.hpp"

namespace seqfuzz {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

enum class Method { Post, Get, Put, Patch, Delete };

std::string_view to_string(Method method);
/// Throws Error(UnknownMethod) for anything outside the five modeled verbs.
Method parse_method(std::string_view text);

enum class SchemaKind { String, Integer, Number, Boolean, Array, Object };

std::string_view to_string(SchemaKind kind);

struct SchemaChild;

struct SchemaNode {
  SchemaKind kind = SchemaKind::String;
  std::optional<Json> example;
  /// Only ever set when kind == String.
  std::optional<std::string> pattern;
  /// Object properties in document order; for arrays a single unnamed element.
  std::vector<SchemaChild> children;

  const SchemaNode* child(std::string_view name) const;
  const SchemaNode* element() const;
};

struct SchemaChild {
  std::string name;
  SchemaNode schema;
};

enum class ParamLocation { Path, Query, Header, BodyField };

std::string_view to_string(ParamLocation location);

struct ParameterDescriptor {
  /// For body fields this is the dotted path into the request body.
  std::string name;
  ParamLocation location = ParamLocation::Query;
  SchemaNode schema;
  bool required = false;
};

/// Status code, or the `default` wildcard when status is empty.
struct ResponseDescriptor {
  std::optional<int> status;
  std::optional<SchemaNode> schema;

  bool is_wildcard() const { return !status.has_value(); }
};

struct OperationDescriptor {
  std::string path;
  Method method = Method::Get;
  std::vector<ParameterDescriptor> parameters;
  std::optional<SchemaNode> request_body;
  /// application/json bodies are modeled field by field; anything else is opaque bytes.
  std::string body_media_type;
  std::vector<ResponseDescriptor> responses;

  const ParameterDescriptor* parameter(std::string_view name, ParamLocation location) const;
  /// Path parameter names in template order.
  std::vector<std::string> path_parameter_names() const;
  /// Dotted leaf field paths of every response schema, deduplicated, in order.
  std::vector<std::string> response_fields() const;
  bool is_json_body() const { return request_body.has_value() && body_media_type == "application/json"; }
};

struct ApiSpec {
  std::string base_url;
  std::vector<OperationDescriptor> operations;
  /// Non-fatal findings from ingestion (ignored methods, odd status keys...).
  std::vector<std::string> warnings;

  const OperationDescriptor* find(std::string_view path, Method method) const;
  const OperationDescriptor& at(std::string_view path, Method method) const;
  std::optional<std::size_t> index_of(std::string_view path, Method method) const;
};

/// Parses an OpenAPI 3.x document given as JSON or YAML text.
ApiSpec parse_spec(std::string_view document);
ApiSpec load_spec_file(const std::string& filename);

struct ExpectedStatuses {
  std::set<int> codes;
  bool wildcard = false;

  bool accepts(int status) const { return wildcard || codes.count(status) != 0; }
};

ExpectedStatuses expected_statuses(const ApiSpec& spec, std::string_view path, Method method);

struct ExampleValue {
  std::string bytes;
  /// Set when a pattern could not be satisfied and the type default was used.
  std::optional<std::string> warning;
};

/// example > pattern-generated match > type default.
ExampleValue example_value(const SchemaNode& schema, Rng& rng);

/// Type default ignoring patterns; used wherever no generator is at hand.
std::string default_value(const SchemaNode& schema);

/// Flattens object/array leaves into dotted paths ("a.b", "tags.0").
void collect_leaf_paths(const SchemaNode& schema, const std::string& prefix,
                        std::vector<std::string>& out);

/// Looks up a schema node by dotted path; numeric segments address array elements.
const SchemaNode* schema_at(const SchemaNode& root, std::string_view dotted);

} // namespace seqfuzz
