#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "seqfuzz/openapi.hpp"

namespace seqfuzz {

/// Lowercase stem tokens of an identifier, in original order.
struct NormalizedName {
  std::vector<std::string> tokens;

  bool operator==(const NormalizedName&) const = default;
  std::string joined() const;
};

/// Splits on '_', '-', '.', and camelCase boundaries, lowercases, and strips
/// plural suffixes (s, es, ies -> y).
NormalizedName normalize_name(std::string_view raw);

/// Last non-parameter segment of a path template ("/store/{id}" -> "store").
std::string path_context(std::string_view path);

/// Whether a response field of the producer can feed the consumer parameter,
/// either by equal names or by the producer's path context prefixed/suffixed
/// to the field name ("id" from /store feeds "store_id").
bool names_related(std::string_view producer_field, std::string_view producer_context,
                   std::string_view consumer_param);

/// Create < Read < Update < Delete.
int crud_rank(Method method);

struct OperationRef {
  std::string path;
  Method method = Method::Get;

  bool operator==(const OperationRef&) const = default;
  std::string label() const;
};

struct DependencyEdge {
  std::size_t producer = 0; ///< index into nodes
  std::size_t consumer = 0;
  std::string field;        ///< dotted path into the producer's response
  std::string param;        ///< consumer parameter name (dotted for body fields)
  ParamLocation location = ParamLocation::Query;
};

struct DependencyGraph {
  std::vector<OperationRef> nodes; ///< same order as ApiSpec::operations
  std::vector<DependencyEdge> edges;

  std::vector<const DependencyEdge*> edges_into(std::size_t consumer) const;
  /// Connected components (undirected), each sorted by node index.
  std::vector<std::vector<std::size_t>> components() const;
};

DependencyGraph build_dependency_graph(const ApiSpec& spec);

} // namespace seqfuzz
