#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "seqfuzz/openapi.hpp"
#include "seqfuzz/rng.hpp"
#include "seqfuzz/sequence.hpp"
#include "seqfuzz/spec_graph.hpp"

namespace seqfuzz {

struct GeneratedCorpus {
  std::vector<RequestSequence> sequences;
  std::vector<std::string> warnings;
};

/// One sequence per operation, in document order: the operation preceded by
/// its producer chain (CRUD-ordered, deduplicated) with references wired
/// along graph edges. Unlinked parameters receive example values.
GeneratedCorpus generate_corpus(const ApiSpec& spec, const DependencyGraph& graph, Rng& rng);

/// A request for `op` whose parameters all hold example/default literals.
TemplatedRequest default_request(const OperationDescriptor& op, Rng& rng,
                                 std::vector<std::string>* warnings = nullptr);

/// Body tree for a schema with every leaf produced by `leaf`.
template <typename LeafFn>
BodyValue build_body(const SchemaNode& schema, const std::string& prefix, LeafFn&& leaf) {
  if (schema.kind == SchemaKind::Object && !schema.children.empty()) {
    BodyValue obj = BodyValue::make_object();
    for (const auto& c : schema.children)
      obj.fields.push_back(BodyField{c.name, build_body(c.schema, prefix.empty() ? c.name : prefix + "." + c.name, leaf)});
    return obj;
  }
  if (schema.kind == SchemaKind::Array && schema.element() != nullptr &&
      schema.element()->kind == SchemaKind::Object) {
    BodyValue arr = BodyValue::make_array();
    arr.items.push_back(build_body(*schema.element(), prefix.empty() ? "0" : prefix + ".0", leaf));
    return arr;
  }
  return BodyValue::make_leaf(leaf(prefix, schema));
}

/// Writes `<dir>/<k>.json` (zero-padded index) for each sequence.
void write_corpus_dir(const std::filesystem::path& dir, const std::vector<RequestSequence>& corpus);
/// Loads every *.json file in name order; empty when the directory has none.
std::vector<RequestSequence> read_corpus_dir(const std::filesystem::path& dir);

} // namespace seqfuzz
