#include "seqfuzz/coverage.hpp"

#include <algorithm>
#include <chrono>

#include "httplib.h"
#include "seqfuzz/encoding.hpp"
#include "seqfuzz/error.hpp"

namespace seqfuzz {

EndpointCoverageMap::EndpointCoverageMap(const ApiSpec& spec) {
  for (const auto& op : spec.operations)
    for (const auto& r : op.responses)
      if (r.status) endpoint_bit(op.path, op.method, *r.status);
  listed_ = registry_.size();
}

std::optional<std::size_t> EndpointCoverageMap::find(const std::string& path, Method method, int status) const {
  EndpointTriple key{path, method, status};
  auto it = std::find(registry_.begin(), registry_.end(), key);
  if (it == registry_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - registry_.begin());
}

std::size_t EndpointCoverageMap::endpoint_bit(const std::string& path, Method method, int status) {
  if (auto idx = find(path, method, status)) return *idx;
  registry_.push_back(EndpointTriple{path, method, status});
  bits_.push_back(false);
  return registry_.size() - 1;
}

void EndpointCoverageMap::sync_registry(const EndpointCoverageMap& other) {
  for (std::size_t i = registry_.size(); i < other.registry_.size(); ++i) {
    registry_.push_back(other.registry_[i]);
    bits_.push_back(false);
  }
}

std::size_t EndpointCoverageMap::popcount() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
}

std::size_t LineCoverageMap::popcount() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
}

std::vector<std::size_t> LineCoverageMap::set_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) out.push_back(i);
  return out;
}

std::optional<LineCoverageMap> LineCoverageMap::from_bitmap(std::size_t total_bits, std::string_view bitmap) {
  if (bitmap.size() != (total_bits + 7) / 8) return std::nullopt;
  LineCoverageMap map(total_bits);
  for (std::size_t i = 0; i < total_bits; ++i)
    if ((static_cast<unsigned char>(bitmap[i / 8]) >> (i % 8)) & 1u) map.bits_[i] = true;
  return map;
}

std::string LineCoverageMap::to_bitmap() const {
  std::string out((bits_.size() + 7) / 8, '\0');
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) out[i / 8] = static_cast<char>(static_cast<unsigned char>(out[i / 8]) | (1u << (i % 8)));
  return out;
}

CoverageSnapshot record_responses(EndpointCoverageMap& map, const RequestSequence& seq,
                                  const std::vector<ResponseRecord>& records) {
  CoverageSnapshot snap;
  for (const auto& r : records) {
    if (r.transport != Transport::Ok || !r.status || r.request_index >= seq.requests.size()) continue;
    const auto& req = seq.requests[r.request_index];
    std::size_t idx = map.endpoint_bit(req.path, req.method, *r.status);
    map.set(idx);
    snap.endpoint.push_back(idx);
  }
  std::sort(snap.endpoint.begin(), snap.endpoint.end());
  snap.endpoint.erase(std::unique(snap.endpoint.begin(), snap.endpoint.end()), snap.endpoint.end());
  return snap;
}

Novelty novelty(EndpointCoverageMap& global_endpoint, LineCoverageMap* global_line, const CoverageSnapshot& snapshot) {
  Novelty out;
  for (std::size_t idx : snapshot.endpoint) {
    if (idx >= global_endpoint.size()) continue;
    if (!global_endpoint.is_set(idx)) {
      global_endpoint.set(idx);
      out.endpoint.push_back(idx);
    }
  }
  if (snapshot.line && global_line != nullptr) {
    for (std::size_t i : snapshot.line->set_indices()) {
      if (i < global_line->total_bits() && !global_line->is_set(i)) {
        global_line->set(i);
        out.line.push_back(i);
      }
    }
  }
  return out;
}

ResponseCoverage response_coverage(const EndpointCoverageMap& map) {
  return ResponseCoverage{map.popcount(), map.listed_count()};
}

std::uint64_t coverage_signature(const CoverageSnapshot& snapshot) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 1099511628211ULL;
    }
  };
  for (std::size_t idx : snapshot.endpoint) mix(idx);
  mix(~0ULL); // separator between the two index spaces
  if (snapshot.line)
    for (std::size_t idx : snapshot.line->set_indices()) mix(idx);
  return h;
}

LineCoverageMap parse_coverage_payload(std::string_view body) {
  Json doc = Json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorCode::ProtocolError, "coverage payload is not a JSON object");
  auto format = doc.find("format");
  if (format == doc.end() || *format != "wuppie-cov-1")
    throw Error(ErrorCode::ProtocolError, "coverage payload format is not wuppie-cov-1");
  auto total = doc.find("total_bits");
  if (total == doc.end() || !total->is_number_unsigned())
    throw Error(ErrorCode::ProtocolError, "coverage payload lacks a non-negative integer total_bits");
  auto bitmap = doc.find("bitmap");
  if (bitmap == doc.end() || !bitmap->is_string()) throw Error(ErrorCode::ProtocolError, "coverage payload lacks bitmap");
  auto raw = base64_decode(bitmap->get<std::string>());
  if (!raw) throw Error(ErrorCode::ProtocolError, "coverage bitmap is not valid base64");
  auto n = total->get<std::size_t>();
  auto map = LineCoverageMap::from_bitmap(n, *raw);
  if (!map)
    throw Error(ErrorCode::ProtocolError, "coverage bitmap has " + std::to_string(raw->size()) + " bytes, expected " +
                                              std::to_string((n + 7) / 8));
  return *map;
}

std::string make_coverage_payload(const LineCoverageMap& map) {
  Json doc = {{"format", "wuppie-cov-1"}, {"total_bits", map.total_bits()}, {"bitmap", base64_encode(map.to_bitmap())}};
  return doc.dump();
}

struct AgentClient::Impl {
  std::unique_ptr<httplib::Client> client;
  std::string prefix;
  std::string url;
};

AgentClient::AgentClient(std::string agent_url, int timeout_ms) : impl_(std::make_unique<Impl>()) {
  while (!agent_url.empty() && agent_url.back() == '/') agent_url.pop_back();
  impl_->url = agent_url;
  auto scheme = agent_url.find("://");
  auto slash = agent_url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  std::string origin = slash == std::string::npos ? agent_url : agent_url.substr(0, slash);
  impl_->prefix = slash == std::string::npos ? "" : agent_url.substr(slash);
  impl_->client = std::make_unique<httplib::Client>(origin);
  auto t = std::chrono::milliseconds(timeout_ms);
  impl_->client->set_connection_timeout(t);
  impl_->client->set_read_timeout(t);
  impl_->client->set_keep_alive(true);
  impl_->client->set_tcp_nodelay(true);
}

AgentClient::~AgentClient() = default;

LineCoverageMap AgentClient::fetch(bool reset) {
  auto res = impl_->client->Get(impl_->prefix + "/coverage?reset=" + (reset ? "true" : "false"));
  if (!res) {
    impl_->client->stop();
    throw Error(ErrorCode::AgentUnreachable,
                "coverage agent " + impl_->url + " unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status != 200)
    throw Error(ErrorCode::ProtocolError, "coverage agent returned status " + std::to_string(res->status));
  LineCoverageMap map = parse_coverage_payload(res->body);
  if (total_bits_ && *total_bits_ != map.total_bits())
    throw Error(ErrorCode::TotalBitsChanged, "coverage total_bits changed from " + std::to_string(*total_bits_) +
                                                 " to " + std::to_string(map.total_bits()));
  total_bits_ = map.total_bits();
  return map;
}

} // namespace seqfuzz
