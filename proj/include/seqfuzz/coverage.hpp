#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "seqfuzz/harness.hpp"
#include "seqfuzz/openapi.hpp"

namespace seqfuzz {

struct EndpointTriple {
  std::string path;
  Method method = Method::Get;
  int status = 0;
  bool operator==(const EndpointTriple&) const = default;
  auto operator<=>(const EndpointTriple&) const = default;
};

class EndpointCoverageMap {
public:
  EndpointCoverageMap() = default;
  /// Seeds the registry with every listed (path, method, status) in document order.
  explicit EndpointCoverageMap(const ApiSpec& spec);

  /// Existing index for the triple or a freshly appended one.
  std::size_t endpoint_bit(const std::string& path, Method method, int status);
  std::optional<std::size_t> find(const std::string& path, Method method, int status) const;

  const std::vector<EndpointTriple>& registry() const { return registry_; }
  std::size_t listed_count() const { return listed_; }
  bool is_set(std::size_t index) const { return bits_.at(index); }
  void set(std::size_t index) { bits_.at(index) = true; }
  std::size_t popcount() const;
  std::size_t size() const { return registry_.size(); }
  /// Appends triples `other` registered after this map was copied from it.
  void sync_registry(const EndpointCoverageMap& other);

private:
  std::vector<EndpointTriple> registry_;
  std::vector<bool> bits_;
  std::size_t listed_ = 0;
};

class LineCoverageMap {
public:
  LineCoverageMap() = default;
  explicit LineCoverageMap(std::size_t total_bits) : bits_(total_bits, false) {}

  std::size_t total_bits() const { return bits_.size(); }
  bool is_set(std::size_t i) const { return bits_.at(i); }
  void set(std::size_t i) { bits_.at(i) = true; }
  std::size_t popcount() const;
  std::vector<std::size_t> set_indices() const;

  /// Decodes an LSB-first bitmap of exactly ceil(total_bits/8) bytes.
  static std::optional<LineCoverageMap> from_bitmap(std::size_t total_bits, std::string_view bitmap);
  std::string to_bitmap() const;

private:
  std::vector<bool> bits_;
};

struct CoverageSnapshot {
  std::vector<std::size_t> endpoint; ///< sorted, unique
  std::optional<LineCoverageMap> line;
};

/// Sets the bit for every ok record; touched indices go into the snapshot.
CoverageSnapshot record_responses(EndpointCoverageMap& map, const RequestSequence& seq,
                                  const std::vector<ResponseRecord>& records);

struct Novelty {
  std::vector<std::size_t> endpoint;
  std::vector<std::size_t> line;
  bool empty() const { return endpoint.empty() && line.empty(); }
  std::size_t size() const { return endpoint.size() + line.size(); }
};

/// Bits in the snapshot absent from the global maps; the globals absorb them.
/// Endpoint indices must already be registered in `global_endpoint`.
Novelty novelty(EndpointCoverageMap& global_endpoint, LineCoverageMap* global_line, const CoverageSnapshot& snapshot);

struct ResponseCoverage {
  std::size_t covered = 0;
  std::size_t denominator = 0;
  bool operator==(const ResponseCoverage&) const = default;
};
ResponseCoverage response_coverage(const EndpointCoverageMap& map);

/// FNV-1a over the snapshot's endpoint and line bit indices.
std::uint64_t coverage_signature(const CoverageSnapshot& snapshot);

/// Client for the `wuppie-cov-1` coverage agent protocol.
class AgentClient {
public:
  explicit AgentClient(std::string agent_url, int timeout_ms = 2000);
  ~AgentClient();
  AgentClient(const AgentClient&) = delete;
  AgentClient& operator=(const AgentClient&) = delete;

  /// Throws AgentUnreachable, ProtocolError or TotalBitsChanged.
  LineCoverageMap fetch(bool reset);
  std::optional<std::size_t> total_bits() const { return total_bits_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::optional<std::size_t> total_bits_;
};

/// Parses a `wuppie-cov-1` payload; throws ProtocolError.
LineCoverageMap parse_coverage_payload(std::string_view body);
std::string make_coverage_payload(const LineCoverageMap& map);

} // namespace seqfuzz
