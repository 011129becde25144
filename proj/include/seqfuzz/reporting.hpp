#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seqfuzz/coverage.hpp"
#include "seqfuzz/harness.hpp"
#include "seqfuzz/sequence.hpp"
#include "seqfuzz/spec_graph.hpp"

namespace seqfuzz {

enum class EventKind { SeedExec, ChildExec, Warning, Finding };
std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view text);

struct RecordSummary {
  std::optional<int> status;
  Transport transport = Transport::Ok;
  double latency_ms = 0;
  Verdict verdict = Verdict::ExpectedStatus;
};

struct EventRecord {
  std::uint64_t tick = 0;
  std::string ts;
  EventKind kind = EventKind::ChildExec;
  std::optional<RequestSequence> seq;
  std::vector<RecordSummary> records;
  std::size_t novelty_endpoint = 0;
  std::size_t novelty_line = 0;
  std::optional<std::string> message;      ///< warnings
  std::optional<std::size_t> request;      ///< findings: failing request index
  std::optional<std::string> endpoint;     ///< findings: "METHOD path"
};

std::string event_to_line(const EventRecord& event);
/// Unknown fields are ignored. Throws Error(MalformedCorpusFile) on bad lines.
EventRecord event_from_line(std::string_view line);
/// The line with `ts` and every `latency_ms` removed.
std::string strip_timing(std::string_view line);

std::string iso8601_now();

class EventLog {
public:
  /// Truncates the file. Throws Error(IoError).
  explicit EventLog(const std::filesystem::path& path);
  void append(const EventRecord& event);

private:
  std::filesystem::path path_;
  std::ofstream out_;
};

std::vector<EventRecord> read_event_log(const std::filesystem::path& path);

/// Mermaid id: runs of non-alphanumerics become one `_`, trailing ones dropped.
std::string mermaid_id(std::string_view text);

std::string render_dependency_graph_markdown(const DependencyGraph& graph);
std::string render_corpus_report(const std::vector<RequestSequence>& corpus);

struct ExampleRequest {
  std::string sequence; ///< compact serialized sequence
  std::size_t request = 0;
};

std::string render_endpoint_coverage_report(const EndpointCoverageMap& map,
                                            const std::map<std::size_t, ExampleRequest>& examples);

/// Endpoint coverage rebuilt from events; the first event to set a bit
/// supplies its example.
class ReportState {
public:
  explicit ReportState(const ApiSpec& spec) : map_(spec) {}

  void observe(const EventRecord& event);
  const EndpointCoverageMap& map() const { return map_; }
  const std::map<std::size_t, ExampleRequest>& examples() const { return examples_; }
  std::string render() const { return render_endpoint_coverage_report(map_, examples_); }

private:
  EndpointCoverageMap map_;
  std::map<std::size_t, ExampleRequest> examples_;
};

/// Writes dependency_graph.md, corpus.md and endpoint_coverage.md.
void write_reports(const std::filesystem::path& dir, const DependencyGraph& graph,
                   const std::vector<RequestSequence>& corpus, const ReportState& state);

} // namespace seqfuzz
