#include "seqfuzz/sequence.hpp"

#include <algorithm>

#include "seqfuzz/encoding.hpp"
#include "seqfuzz/error.hpp"

namespace seqfuzz {

BodyValue BodyValue::make_leaf(ParameterValue value) {
  BodyValue v;
  v.kind = Kind::Leaf;
  v.leaf = std::move(value);
  return v;
}

BodyValue BodyValue::make_object() {
  BodyValue v;
  v.kind = Kind::Object;
  return v;
}

BodyValue BodyValue::make_array() {
  BodyValue v;
  v.kind = Kind::Array;
  return v;
}

bool BodyValue::operator==(const BodyValue& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
  case Kind::Leaf: return leaf == other.leaf;
  case Kind::Object: return fields == other.fields;
  case Kind::Array: return items == other.items;
  }
  return false;
}

namespace {

template <typename Body, typename Fn>
void walk_body(Body& body, const std::string& prefix, Fn&& fn) {
  switch (body.kind) {
  case BodyValue::Kind::Leaf:
    fn(prefix, body.leaf);
    break;
  case BodyValue::Kind::Object:
    for (auto& f : body.fields) walk_body(f.value, prefix.empty() ? f.name : prefix + "." + f.name, fn);
    break;
  case BodyValue::Kind::Array:
    for (std::size_t i = 0; i < body.items.size(); ++i)
      walk_body(body.items[i], prefix.empty() ? std::to_string(i) : prefix + "." + std::to_string(i), fn);
    break;
  }
}

template <typename Seq>
auto* find_slot(Seq& seq, const SlotRef& slot) {
  using Value = std::conditional_t<std::is_const_v<Seq>, const ParameterValue, ParameterValue>;
  Value* found = nullptr;
  if (slot.request >= seq.requests.size()) return found;
  auto& request = seq.requests[slot.request];
  if (!slot.in_body) {
    auto it = request.params.find(slot.name);
    if (it != request.params.end()) found = &it->second;
    return found;
  }
  if (!request.body) return found;
  walk_body(*request.body, "", [&](const std::string& path, Value& value) {
    if (found == nullptr && path == slot.name) found = &value;
  });
  return found;
}

OrderedJson value_to_json(const ParameterValue& value) {
  OrderedJson out = OrderedJson::object();
  if (const auto* lit = std::get_if<Literal>(&value)) {
    if (is_valid_utf8(lit->bytes)) out["lit"] = lit->bytes;
    else out["b64"] = base64_encode(lit->bytes);
  } else {
    const auto& ref = std::get<Reference>(value);
    OrderedJson r = OrderedJson::object();
    r["req"] = ref.request;
    r["field"] = ref.field;
    out["ref"] = std::move(r);
  }
  return out;
}

OrderedJson body_to_json(const BodyValue& body) {
  switch (body.kind) {
  case BodyValue::Kind::Leaf: return value_to_json(body.leaf);
  case BodyValue::Kind::Object: {
    OrderedJson fields = OrderedJson::object();
    for (const auto& f : body.fields) fields[f.name] = body_to_json(f.value);
    OrderedJson out = OrderedJson::object();
    out["obj"] = std::move(fields);
    return out;
  }
  case BodyValue::Kind::Array: {
    OrderedJson items = OrderedJson::array();
    for (const auto& item : body.items) items.push_back(body_to_json(item));
    OrderedJson out = OrderedJson::object();
    out["arr"] = std::move(items);
    return out;
  }
  }
  return OrderedJson::object();
}

[[noreturn]] void malformed(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::MalformedCorpusFile, where + ": " + what);
}

ParameterValue value_from_json(const OrderedJson& node, const std::string& where) {
  if (!node.is_object() || node.size() != 1) malformed(where, "expected {\"lit\"|\"b64\"|\"ref\": ...}");
  if (auto it = node.find("lit"); it != node.end()) {
    if (!it->is_string()) malformed(where, "lit must be a string");
    return Literal{it->get<std::string>()};
  }
  if (auto it = node.find("b64"); it != node.end()) {
    auto decoded = it->is_string() ? base64_decode(it->get<std::string>()) : std::nullopt;
    if (!decoded) malformed(where, "b64 is not valid base64");
    return Literal{std::move(*decoded)};
  }
  if (auto it = node.find("ref"); it != node.end()) {
    const auto& r = *it;
    if (!r.is_object() || !r.contains("req") || !r.contains("field") ||
        !r["req"].is_number_unsigned() || !r["field"].is_string())
      malformed(where, "ref needs unsigned 'req' and string 'field'");
    return Reference{r["req"].get<std::size_t>(), r["field"].get<std::string>()};
  }
  malformed(where, "unknown value encoding");
}

BodyValue body_from_json(const OrderedJson& node, const std::string& where) {
  if (node.is_object() && node.size() == 1 && node.contains("obj")) {
    const auto& fields = node["obj"];
    if (!fields.is_object()) malformed(where, "obj must be an object");
    BodyValue out = BodyValue::make_object();
    for (const auto& [k, v] : fields.items())
      out.fields.push_back(BodyField{k, body_from_json(v, where + "." + k)});
    return out;
  }
  if (node.is_object() && node.size() == 1 && node.contains("arr")) {
    const auto& items = node["arr"];
    if (!items.is_array()) malformed(where, "arr must be an array");
    BodyValue out = BodyValue::make_array();
    for (std::size_t i = 0; i < items.size(); ++i)
      out.items.push_back(body_from_json(items[i], where + "[" + std::to_string(i) + "]"));
    return out;
  }
  return BodyValue::make_leaf(value_from_json(node, where));
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

} // namespace

std::vector<SlotRef> all_slots(const RequestSequence& seq) {
  std::vector<SlotRef> out;
  for (std::size_t i = 0; i < seq.requests.size(); ++i) {
    const auto& request = seq.requests[i];
    for (const auto& [name, value] : request.params) out.push_back(SlotRef{i, false, name});
    if (request.body)
      walk_body(*request.body, "", [&](const std::string& path, const ParameterValue&) {
        out.push_back(SlotRef{i, true, path});
      });
  }
  return out;
}

ParameterValue* slot_value(RequestSequence& seq, const SlotRef& slot) { return find_slot(seq, slot); }

const ParameterValue* slot_value(const RequestSequence& seq, const SlotRef& slot) {
  return find_slot(seq, slot);
}

const SchemaNode* slot_schema(const ApiSpec& spec, const TemplatedRequest& request, const SlotRef& slot) {
  const OperationDescriptor* op = spec.find(request.path, request.method);
  if (op == nullptr) return nullptr;
  if (slot.in_body) {
    if (!op->request_body) return nullptr;
    if (slot.name.empty()) return &*op->request_body;
    // Array positions beyond the first share the element schema.
    return schema_at(*op->request_body, slot.name);
  }
  for (auto location : {ParamLocation::Path, ParamLocation::Query, ParamLocation::Header})
    if (const auto* p = op->parameter(slot.name, location)) return &p->schema;
  return nullptr;
}

std::size_t reference_count(const RequestSequence& seq) {
  std::size_t n = 0;
  for (const auto& slot : all_slots(seq))
    if (std::holds_alternative<Reference>(*slot_value(seq, slot))) ++n;
  return n;
}

std::optional<std::string> validate(const RequestSequence& seq) {
  if (seq.requests.empty()) return "sequence has no requests";
  for (const auto& slot : all_slots(seq)) {
    const auto* value = slot_value(seq, slot);
    if (const auto* ref = std::get_if<Reference>(value); ref != nullptr && ref->request >= slot.request)
      return "requests[" + std::to_string(slot.request) + "] " + (slot.in_body ? "body." : "params.") +
             slot.name + " references request " + std::to_string(ref->request) +
             ", which does not precede it";
  }
  return std::nullopt;
}

OrderedJson sequence_to_json(const RequestSequence& seq) {
  OrderedJson doc = OrderedJson::object();
  doc["version"] = 1;
  OrderedJson requests = OrderedJson::array();
  for (const auto& r : seq.requests) {
    OrderedJson req = OrderedJson::object();
    req["method"] = std::string(to_string(r.method));
    req["path"] = r.path;
    OrderedJson params = OrderedJson::object();
    for (const auto& [name, value] : r.params) params[name] = value_to_json(value);
    req["params"] = std::move(params);
    if (r.body) req["body"] = body_to_json(*r.body);
    requests.push_back(std::move(req));
  }
  doc["requests"] = std::move(requests);
  return doc;
}

std::string serialize_sequence(const RequestSequence& seq) { return sequence_to_json(seq).dump(2) + "\n"; }

std::string serialize_sequence_compact(const RequestSequence& seq) { return sequence_to_json(seq).dump(); }

RequestSequence sequence_from_json(const OrderedJson& doc) {
  if (!doc.is_object()) malformed("$", "top level must be an object");
  if (!doc.contains("version") || doc["version"] != 1) malformed("$.version", "expected 1");
  if (!doc.contains("requests") || !doc["requests"].is_array()) malformed("$.requests", "expected an array");
  RequestSequence seq;
  const auto& requests = doc["requests"];
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const std::string where = "$.requests[" + std::to_string(i) + "]";
    const auto& r = requests[i];
    if (!r.is_object()) malformed(where, "expected an object");
    if (!r.contains("method") || !r["method"].is_string()) malformed(where + ".method", "expected a string");
    if (!r.contains("path") || !r["path"].is_string()) malformed(where + ".path", "expected a string");
    TemplatedRequest req;
    try {
      req.method = parse_method(r["method"].get<std::string>());
    } catch (const Error&) {
      malformed(where + ".method", "unsupported method " + r["method"].get<std::string>());
    }
    req.path = r["path"].get<std::string>();
    if (r.contains("params")) {
      if (!r["params"].is_object()) malformed(where + ".params", "expected an object");
      for (const auto& [name, value] : r["params"].items())
        req.params.emplace(name, value_from_json(value, where + ".params." + name));
    }
    if (r.contains("body") && !r["body"].is_null()) req.body = body_from_json(r["body"], where + ".body");
    seq.requests.push_back(std::move(req));
  }
  if (auto problem = validate(seq)) malformed("$.requests", *problem);
  return seq;
}

RequestSequence parse_sequence(std::string_view bytes) {
  OrderedJson doc;
  try {
    doc = OrderedJson::parse(bytes.begin(), bytes.end());
  } catch (const OrderedJson::parse_error& e) {
    auto [line, column] = line_column(bytes, e.byte == 0 ? 0 : e.byte - 1);
    throw Error(ErrorCode::MalformedCorpusFile,
                "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + e.what());
  }
  return sequence_from_json(doc);
}

bool is_valid_utf8(std::string_view bytes) {
  std::size_t i = 0;
  while (i < bytes.size()) {
    auto c = static_cast<unsigned char>(bytes[i]);
    std::size_t extra;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= bytes.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      auto cc = static_cast<unsigned char>(bytes[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    static constexpr std::uint32_t min_for[] = {0, 0x80, 0x800, 0x10000};
    if (cp < min_for[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += extra + 1;
  }
  return true;
}

} // namespace seqfuzz
