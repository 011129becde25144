#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "seqfuzz/openapi.hpp"

namespace seqfuzz {

struct Literal {
  std::string bytes;
  bool operator==(const Literal&) const = default;
};

/// Value taken at execution time from a field of an earlier response.
struct Reference {
  std::size_t request = 0;
  std::string field;
  bool operator==(const Reference&) const = default;
};

using ParameterValue = std::variant<Literal, Reference>;

struct BodyField;

/// Request body tree whose leaves are parameter values.
struct BodyValue {
  enum class Kind { Leaf, Object, Array };

  Kind kind = Kind::Leaf;
  ParameterValue leaf;
  std::vector<BodyField> fields; ///< Object
  std::vector<BodyValue> items;  ///< Array

  static BodyValue make_leaf(ParameterValue value);
  static BodyValue make_object();
  static BodyValue make_array();

  bool operator==(const BodyValue& other) const;
};

struct BodyField {
  std::string name;
  BodyValue value;
  bool operator==(const BodyField&) const = default;
};

struct TemplatedRequest {
  Method method = Method::Get;
  std::string path;
  /// Path, query and header parameters by name.
  std::map<std::string, ParameterValue> params;
  std::optional<BodyValue> body;

  bool operator==(const TemplatedRequest&) const = default;
};

struct RequestSequence {
  std::vector<TemplatedRequest> requests;

  bool operator==(const RequestSequence&) const = default;
};

/// Addresses one parameter slot inside a sequence: a named parameter or a
/// body leaf identified by its dotted path ("owner.name", "tags.0").
struct SlotRef {
  std::size_t request = 0;
  bool in_body = false;
  std::string name;

  bool operator==(const SlotRef&) const = default;
};

std::vector<SlotRef> all_slots(const RequestSequence& seq);
ParameterValue* slot_value(RequestSequence& seq, const SlotRef& slot);
const ParameterValue* slot_value(const RequestSequence& seq, const SlotRef& slot);

/// Schema of the slot per the spec, or nullptr when the spec has no such parameter.
const SchemaNode* slot_schema(const ApiSpec& spec, const TemplatedRequest& request,
                              const SlotRef& slot);

std::size_t reference_count(const RequestSequence& seq);

/// Empty when valid; otherwise a description of the first violated invariant.
std::optional<std::string> validate(const RequestSequence& seq);

/// Corpus file encoding (one JSON document per sequence), LF-terminated.
std::string serialize_sequence(const RequestSequence& seq);
/// Single-line form used in the event log and for deduplication.
std::string serialize_sequence_compact(const RequestSequence& seq);
OrderedJson sequence_to_json(const RequestSequence& seq);

/// Throws Error(MalformedCorpusFile) with line/column for syntax errors and
/// the offending element path for invariant violations.
RequestSequence parse_sequence(std::string_view bytes);
RequestSequence sequence_from_json(const OrderedJson& doc);

bool is_valid_utf8(std::string_view bytes);

} // namespace seqfuzz
