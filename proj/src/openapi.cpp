#include "seqfuzz/openapi.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "seqfuzz/error.hpp"
#include "seqfuzz/pattern.hpp"

namespace seqfuzz {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::MalformedDocument: return "MalformedDocument";
  case ErrorCode::UnresolvableRef: return "UnresolvableRef";
  case ErrorCode::MissingPaths: return "MissingPaths";
  case ErrorCode::UnknownOperation: return "UnknownOperation";
  case ErrorCode::UnknownMethod: return "UnknownMethod";
  case ErrorCode::MalformedCorpusFile: return "MalformedCorpusFile";
  case ErrorCode::AgentUnreachable: return "AgentUnreachable";
  case ErrorCode::ProtocolError: return "ProtocolError";
  case ErrorCode::TotalBitsChanged: return "TotalBitsChanged";
  case ErrorCode::UnknownSchedule: return "UnknownSchedule";
  case ErrorCode::EmptyCorpus: return "EmptyCorpus";
  case ErrorCode::ConfigError: return "ConfigError";
  case ErrorCode::SpecError: return "SpecError";
  case ErrorCode::IoError: return "IoError";
  case ErrorCode::PortInUse: return "PortInUse";
  }
  return "Error";
}

std::string_view to_string(Method method) {
  switch (method) {
  case Method::Post: return "POST";
  case Method::Get: return "GET";
  case Method::Put: return "PUT";
  case Method::Patch: return "PATCH";
  case Method::Delete: return "DELETE";
  }
  return "GET";
}

Method parse_method(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "POST") return Method::Post;
  if (upper == "GET") return Method::Get;
  if (upper == "PUT") return Method::Put;
  if (upper == "PATCH") return Method::Patch;
  if (upper == "DELETE") return Method::Delete;
  throw Error(ErrorCode::UnknownMethod, std::string(text));
}

std::string_view to_string(SchemaKind kind) {
  switch (kind) {
  case SchemaKind::String: return "string";
  case SchemaKind::Integer: return "integer";
  case SchemaKind::Number: return "number";
  case SchemaKind::Boolean: return "boolean";
  case SchemaKind::Array: return "array";
  case SchemaKind::Object: return "object";
  }
  return "string";
}

std::string_view to_string(ParamLocation location) {
  switch (location) {
  case ParamLocation::Path: return "path";
  case ParamLocation::Query: return "query";
  case ParamLocation::Header: return "header";
  case ParamLocation::BodyField: return "body";
  }
  return "query";
}

const SchemaNode* SchemaNode::child(std::string_view name) const {
  for (const auto& c : children)
    if (c.name == name) return &c.schema;
  return nullptr;
}

const SchemaNode* SchemaNode::element() const {
  if (kind != SchemaKind::Array || children.empty()) return nullptr;
  return &children.front().schema;
}

const ParameterDescriptor* OperationDescriptor::parameter(std::string_view name,
                                                          ParamLocation location) const {
  for (const auto& p : parameters)
    if (p.location == location && p.name == name) return &p;
  return nullptr;
}

std::vector<std::string> OperationDescriptor::path_parameter_names() const {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = path.find('{', pos)) != std::string::npos) {
    std::size_t end = path.find('}', pos);
    if (end == std::string::npos) break;
    names.push_back(path.substr(pos + 1, end - pos - 1));
    pos = end + 1;
  }
  return names;
}

std::vector<std::string> OperationDescriptor::response_fields() const {
  std::vector<std::string> fields;
  for (const auto& r : responses) {
    if (!r.schema) continue;
    std::vector<std::string> leaves;
    collect_leaf_paths(*r.schema, "", leaves);
    for (auto& leaf : leaves)
      if (!leaf.empty() && std::find(fields.begin(), fields.end(), leaf) == fields.end())
        fields.push_back(std::move(leaf));
  }
  return fields;
}

const OperationDescriptor* ApiSpec::find(std::string_view path, Method method) const {
  for (const auto& op : operations)
    if (op.method == method && op.path == path) return &op;
  return nullptr;
}

const OperationDescriptor& ApiSpec::at(std::string_view path, Method method) const {
  if (const auto* op = find(path, method)) return *op;
  throw Error(ErrorCode::UnknownOperation,
              std::string(to_string(method)) + " " + std::string(path));
}

std::optional<std::size_t> ApiSpec::index_of(std::string_view path, Method method) const {
  for (std::size_t i = 0; i < operations.size(); ++i)
    if (operations[i].method == method && operations[i].path == path) return i;
  return std::nullopt;
}

void collect_leaf_paths(const SchemaNode& schema, const std::string& prefix,
                        std::vector<std::string>& out) {
  if (schema.kind == SchemaKind::Object && !schema.children.empty()) {
    for (const auto& c : schema.children)
      collect_leaf_paths(c.schema, prefix.empty() ? c.name : prefix + "." + c.name, out);
  } else if (schema.kind == SchemaKind::Array && schema.element() != nullptr &&
             schema.element()->kind == SchemaKind::Object) {
    collect_leaf_paths(*schema.element(), prefix.empty() ? "0" : prefix + ".0", out);
  } else {
    out.push_back(prefix);
  }
}

const SchemaNode* schema_at(const SchemaNode& root, std::string_view dotted) {
  const SchemaNode* node = &root;
  std::size_t pos = 0;
  while (node != nullptr && pos <= dotted.size() && !dotted.empty()) {
    std::size_t dot = dotted.find('.', pos);
    std::string_view seg = dotted.substr(pos, dot == std::string_view::npos ? dotted.npos : dot - pos);
    bool numeric = !seg.empty() && std::all_of(seg.begin(), seg.end(),
                                               [](char c) { return c >= '0' && c <= '9'; });
    node = numeric && node->kind == SchemaKind::Array ? node->element() : node->child(seg);
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
  }
  return node;
}

namespace {

// Document tree with key order preserved.
using Doc = nlohmann::ordered_json;

// YAML is a superset of JSON, so both document forms go through yaml-cpp.
// Plain scalars are typed the way a YAML 1.2 core-schema loader would.
Doc scalar_to_json(const YAML::Node& node) {
  const std::string& text = node.Scalar();
  if (node.Tag() == "!") return text;
  if (text == "null" || text == "~" || text.empty()) return nullptr;
  if (text == "true" || text == "True" || text == "TRUE") return true;
  if (text == "false" || text == "False" || text == "FALSE") return false;
  {
    std::size_t i = (text[0] == '-' || text[0] == '+') ? 1 : 0;
    if (i < text.size() && std::all_of(text.begin() + static_cast<long>(i), text.end(),
                                       [](char c) { return c >= '0' && c <= '9'; })) {
      try {
        return std::stoll(text);
      } catch (const std::out_of_range&) {
        return text;
      }
    }
  }
  {
    std::istringstream in(text);
    double value = 0;
    in >> value;
    bool looks_numeric = text.find_first_of("0123456789") != std::string::npos &&
                         text.find_first_not_of("0123456789+-.eE") == std::string::npos;
    if (looks_numeric && in && in.eof()) return value;
  }
  return text;
}

Doc yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
  case YAML::NodeType::Null:
  case YAML::NodeType::Undefined:
    return nullptr;
  case YAML::NodeType::Scalar:
    return scalar_to_json(node);
  case YAML::NodeType::Sequence: {
    Doc arr = Doc::array();
    for (const auto& item : node) arr.push_back(yaml_to_json(item));
    return arr;
  }
  case YAML::NodeType::Map: {
    Doc obj = Doc::object();
    for (const auto& kv : node) {
      std::string key = kv.first.Scalar();
      if (obj.contains(key)) {
        auto mark = kv.first.Mark();
        throw Error(ErrorCode::MalformedDocument,
                    "duplicate key '" + key + "' at line " + std::to_string(mark.line + 1));
      }
      obj[key] = yaml_to_json(kv.second);
    }
    return obj;
  }
  }
  return nullptr;
}

void check_refs(const Doc& node, const Doc& root) {
  if (node.is_object()) {
    auto it = node.find("$ref");
    if (it != node.end()) {
      if (!it->is_string()) throw Error(ErrorCode::UnresolvableRef, "non-string $ref");
      const std::string ref = it->get<std::string>();
      if (ref.rfind("#/", 0) != 0 && ref != "#")
        throw Error(ErrorCode::UnresolvableRef, "external reference not supported: " + ref);
      try {
        Doc::json_pointer ptr(ref.substr(1));
        if (!root.contains(ptr)) throw Error(ErrorCode::UnresolvableRef, "dangling $ref " + ref);
      } catch (const Doc::exception&) {
        throw Error(ErrorCode::UnresolvableRef, "bad $ref " + ref);
      }
    }
    for (const auto& [k, v] : node.items()) check_refs(v, root);
  } else if (node.is_array()) {
    for (const auto& v : node) check_refs(v, root);
  }
}

class SpecBuilder {
public:
  explicit SpecBuilder(const Doc& root) : root_(root) {}

  ApiSpec build() {
    ApiSpec spec;
    auto paths_it = root_.find("paths");
    if (paths_it == root_.end() || !paths_it->is_object())
      throw Error(ErrorCode::MissingPaths, "document has no 'paths' object");

    if (auto servers = root_.find("servers"); servers != root_.end() && servers->is_array() &&
                                              !servers->empty() && (*servers)[0].contains("url")) {
      const Doc& url = (*servers)[0]["url"];
      if (url.is_string()) spec.base_url = url.get<std::string>();
    }

    for (const auto& [path, raw_item] : paths_it->items()) {
      const Doc& item = resolve(raw_item);
      if (!item.is_object()) continue;
      std::vector<ParameterDescriptor> shared = parameters(item.value("parameters", Doc::array()));
      for (const auto& [key, raw_op] : item.items()) {
        if (key == "parameters" || key == "summary" || key == "description" || key == "servers" ||
            key.rfind("x-", 0) == 0 || key == "$ref")
          continue;
        Method method;
        try {
          method = parse_method(key);
        } catch (const Error&) {
          spec.warnings.push_back("ignoring unsupported method " + key + " " + path);
          continue;
        }
        spec.operations.push_back(operation(path, method, resolve(raw_op), shared, spec));
      }
    }
    return spec;
  }

private:
  const Doc& resolve(const Doc& node, int depth = 0) const {
    if (node.is_object() && node.contains("$ref") && depth < 32) {
      const std::string ref = node["$ref"].get<std::string>();
      return resolve(root_.at(Doc::json_pointer(ref.substr(1))), depth + 1);
    }
    return node;
  }

  SchemaNode schema(const Doc& raw, int depth = 0) const {
    SchemaNode out;
    const Doc& node = resolve(raw);
    if (!node.is_object() || depth > 16) {
      out.kind = depth > 16 ? SchemaKind::Object : SchemaKind::String;
      return out;
    }
    for (const char* combinator : {"allOf", "oneOf", "anyOf"}) {
      auto it = node.find(combinator);
      if (it != node.end() && it->is_array() && !it->empty() && !node.contains("type"))
        return schema((*it)[0], depth + 1);
    }
    std::string type;
    if (auto t = node.find("type"); t != node.end()) {
      if (t->is_string()) type = t->get<std::string>();
      else if (t->is_array() && !t->empty() && (*t)[0].is_string()) type = (*t)[0].get<std::string>();
    }
    if (type.empty()) {
      if (node.contains("properties")) type = "object";
      else if (node.contains("items")) type = "array";
      else type = "string";
    }
    if (type == "integer") out.kind = SchemaKind::Integer;
    else if (type == "number") out.kind = SchemaKind::Number;
    else if (type == "boolean") out.kind = SchemaKind::Boolean;
    else if (type == "array") out.kind = SchemaKind::Array;
    else if (type == "object") out.kind = SchemaKind::Object;
    else out.kind = SchemaKind::String;

    if (auto ex = node.find("example"); ex != node.end() && !ex->is_null()) out.example = Json::parse(ex->dump());
    if (out.kind == SchemaKind::String) {
      if (auto pat = node.find("pattern"); pat != node.end() && pat->is_string())
        out.pattern = pat->get<std::string>();
    }
    if (out.kind == SchemaKind::Object) {
      const Doc props = node.value("properties", Doc::object());
      for (const auto& [name, prop] : props.items())
        out.children.push_back(SchemaChild{name, schema(prop, depth + 1)});
    } else if (out.kind == SchemaKind::Array) {
      out.children.push_back(SchemaChild{"", schema(node.value("items", Doc::object()), depth + 1)});
    }
    return out;
  }

  std::vector<ParameterDescriptor> parameters(const Doc& list) const {
    std::vector<ParameterDescriptor> out;
    if (!list.is_array()) return out;
    for (const auto& raw : list) {
      const Doc& p = resolve(raw);
      if (!p.is_object() || !p.contains("name") || !p["name"].is_string()) continue;
      ParameterDescriptor desc;
      desc.name = p["name"].get<std::string>();
      if (desc.name.empty()) throw Error(ErrorCode::MalformedDocument, "parameter with empty name");
      std::string in = p.value("in", "query");
      if (in == "path") desc.location = ParamLocation::Path;
      else if (in == "query") desc.location = ParamLocation::Query;
      else if (in == "header") desc.location = ParamLocation::Header;
      else continue;
      desc.required = p.value("required", desc.location == ParamLocation::Path);
      desc.schema = schema(p.value("schema", Doc::object()));
      if (p.contains("example") && !desc.schema.example) desc.schema.example = Json::parse(p["example"].dump());
      out.push_back(std::move(desc));
    }
    return out;
  }

  OperationDescriptor operation(const std::string& path, Method method, const Doc& node,
                                const std::vector<ParameterDescriptor>& shared, ApiSpec& spec) const {
    OperationDescriptor op;
    op.path = path;
    op.method = method;
    op.parameters = parameters(node.value("parameters", Doc::array()));
    for (const auto& p : shared)
      if (op.parameter(p.name, p.location) == nullptr) op.parameters.push_back(p);

    // Path order first so every template segment has a descriptor.
    std::vector<ParameterDescriptor> ordered;
    for (const std::string& name : op.path_parameter_names()) {
      if (const auto* p = op.parameter(name, ParamLocation::Path)) {
        ordered.push_back(*p);
      } else {
        spec.warnings.push_back("path parameter {" + name + "} of " + path + " not declared");
        ParameterDescriptor synth;
        synth.name = name;
        synth.location = ParamLocation::Path;
        synth.required = true;
        ordered.push_back(std::move(synth));
      }
    }
    for (const auto& p : op.parameters)
      if (p.location != ParamLocation::Path) ordered.push_back(p);
    op.parameters = std::move(ordered);

    if (auto body_it = node.find("requestBody"); body_it != node.end()) {
      const Doc& body = resolve(*body_it);
      const Doc& content = body.value("content", Doc::object());
      if (content.contains("application/json")) {
        op.body_media_type = "application/json";
        op.request_body = schema(content["application/json"].value("schema", Doc::object()));
        bool body_required = body.value("required", false);
        std::vector<std::string> leaves;
        collect_leaf_paths(*op.request_body, "", leaves);
        const Doc schema_node = content["application/json"].value("schema", Doc::object());
        const Doc& raw_schema = resolve(schema_node);
        const Doc& required = raw_schema.value("required", Doc::array());
        for (const auto& leaf : leaves) {
          if (leaf.empty()) continue;
          ParameterDescriptor field;
          field.name = leaf;
          field.location = ParamLocation::BodyField;
          field.schema = *schema_at(*op.request_body, leaf);
          field.required = body_required && required.is_array() &&
                           std::find(required.begin(), required.end(), leaf) != required.end();
          op.parameters.push_back(std::move(field));
        }
      } else if (!content.empty()) {
        op.body_media_type = content.begin().key();
        op.request_body = SchemaNode{};
      }
    }

    std::set<std::string> seen_status;
    if (auto responses = node.find("responses"); responses != node.end() && responses->is_object()) {
      for (const auto& [key, raw_resp] : responses->items()) {
        ResponseDescriptor rd;
        if (key != "default") {
          bool numeric = key.size() == 3 && std::all_of(key.begin(), key.end(),
                                                        [](char c) { return c >= '0' && c <= '9'; });
          int code = numeric ? std::stoi(key) : 0;
          if (!numeric || code < 100 || code > 599) {
            spec.warnings.push_back("ignoring response key " + key + " of " +
                                    std::string(to_string(method)) + " " + path);
            continue;
          }
          rd.status = code;
        }
        if (!seen_status.insert(key).second)
          throw Error(ErrorCode::MalformedDocument, "duplicate response status " + key + " for " +
                                                        std::string(to_string(method)) + " " + path);
        const Doc& resp = resolve(raw_resp);
        if (resp.is_object()) {
          const Doc& content = resp.value("content", Doc::object());
          if (content.contains("application/json") && content["application/json"].contains("schema"))
            rd.schema = schema(content["application/json"]["schema"]);
        }
        op.responses.push_back(std::move(rd));
      }
    }
    return op;
  }

  const Doc& root_;
};

std::string json_scalar_text(const Json& value) {
  if (value.is_string()) return value.get<std::string>();
  return value.dump();
}

} // namespace

ApiSpec parse_spec(std::string_view document) {
  YAML::Node yaml;
  try {
    yaml = YAML::Load(std::string(document));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::MalformedDocument, e.what());
  }
  if (!yaml.IsMap()) {
    if (yaml.IsNull() || yaml.IsScalar() || yaml.IsSequence())
      throw Error(ErrorCode::MalformedDocument, "top level is not a mapping");
  }
  Doc root = yaml_to_json(yaml);
  check_refs(root, root);
  return SpecBuilder(root).build();
}

ApiSpec load_spec_file(const std::string& filename) {
  std::ifstream in(filename, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + filename);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_spec(buffer.str());
}

ExpectedStatuses expected_statuses(const ApiSpec& spec, std::string_view path, Method method) {
  const OperationDescriptor& op = spec.at(path, method);
  ExpectedStatuses out;
  for (const auto& r : op.responses) {
    if (r.is_wildcard()) out.wildcard = true;
    else out.codes.insert(*r.status);
  }
  return out;
}

std::string default_value(const SchemaNode& schema) {
  if (schema.example) return json_scalar_text(*schema.example);
  switch (schema.kind) {
  case SchemaKind::String: return "a";
  case SchemaKind::Integer: return "1";
  case SchemaKind::Number: return "1.0";
  case SchemaKind::Boolean: return "true";
  case SchemaKind::Array: {
    const SchemaNode* elem = schema.element();
    if (elem == nullptr) return "[\"a\"]";
    std::string inner = default_value(*elem);
    if (elem->kind == SchemaKind::String && !(elem->example && !elem->example->is_string()))
      inner = Json(inner).dump();
    return "[" + inner + "]";
  }
  case SchemaKind::Object: {
    Json obj = Json::object();
    std::string out = "{";
    bool first = true;
    for (const auto& c : schema.children) {
      std::string v = default_value(c.schema);
      if (c.schema.kind == SchemaKind::String && !(c.schema.example && !c.schema.example->is_string()))
        v = Json(v).dump();
      out += (first ? "" : ",") + Json(c.name).dump() + ":" + v;
      first = false;
    }
    return out + "}";
  }
  }
  return "a";
}

ExampleValue example_value(const SchemaNode& schema, Rng& rng) {
  ExampleValue out;
  if (schema.example) {
    out.bytes = json_scalar_text(*schema.example);
    return out;
  }
  if (schema.kind == SchemaKind::String && schema.pattern) {
    if (auto generated = generate_from_pattern(*schema.pattern, rng)) {
      out.bytes = std::move(*generated);
      return out;
    }
    out.warning = "UnsatisfiablePattern: " + *schema.pattern;
  }
  out.bytes = default_value(schema);
  return out;
}

} // namespace seqfuzz
