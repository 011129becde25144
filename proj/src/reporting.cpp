#include "seqfuzz/reporting.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <set>
#include <sstream>

#include "seqfuzz/error.hpp"

namespace seqfuzz {

std::string_view to_string(EventKind kind) {
  switch (kind) {
  case EventKind::SeedExec: return "seed_exec";
  case EventKind::ChildExec: return "child_exec";
  case EventKind::Warning: return "warning";
  case EventKind::Finding: return "finding";
  }
  return "?";
}

EventKind parse_event_kind(std::string_view text) {
  for (auto k : {EventKind::SeedExec, EventKind::ChildExec, EventKind::Warning, EventKind::Finding})
    if (to_string(k) == text) return k;
  throw Error(ErrorCode::MalformedCorpusFile, "unknown event kind: " + std::string(text));
}

namespace {

Transport parse_transport(std::string_view text) {
  for (auto t : {Transport::Ok, Transport::Timeout, Transport::ConnectionClosed})
    if (to_string(t) == text) return t;
  throw Error(ErrorCode::MalformedCorpusFile, "unknown transport: " + std::string(text));
}

Verdict parse_verdict(std::string_view text) {
  for (auto v : {Verdict::ExpectedStatus, Verdict::UnexpectedStatus, Verdict::ServerError, Verdict::TransportFailure})
    if (to_string(v) == text) return v;
  throw Error(ErrorCode::MalformedCorpusFile, "unknown verdict: " + std::string(text));
}

} // namespace

std::string event_to_line(const EventRecord& e) {
  OrderedJson j;
  j["v"] = 1;
  j["tick"] = e.tick;
  j["ts"] = e.ts;
  j["kind"] = std::string(to_string(e.kind));
  if (e.seq) j["seq"] = sequence_to_json(*e.seq);
  if (e.kind != EventKind::Warning) {
    OrderedJson records = OrderedJson::array();
    for (const auto& r : e.records) {
      OrderedJson rec;
      if (r.status) rec["status"] = *r.status;
      else rec["status"] = nullptr;
      rec["transport"] = std::string(to_string(r.transport));
      rec["latency_ms"] = std::round(r.latency_ms * 1000.0) / 1000.0;
      rec["verdict"] = std::string(to_string(r.verdict));
      records.push_back(std::move(rec));
    }
    j["records"] = std::move(records);
    j["novelty"] = {{"endpoint", e.novelty_endpoint}, {"line", e.novelty_line}};
  }
  if (e.message) j["message"] = *e.message;
  if (e.request) j["request"] = *e.request;
  if (e.endpoint) j["endpoint"] = *e.endpoint;
  // Raw bytes in literals are already b64-wrapped, so strict UTF-8 holds.
  return j.dump(-1, ' ', false, OrderedJson::error_handler_t::replace);
}

EventRecord event_from_line(std::string_view line) {
  OrderedJson j = OrderedJson::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::MalformedCorpusFile, "event line is not a JSON object");
  try {
    EventRecord e;
    e.tick = j.at("tick").get<std::uint64_t>();
    e.ts = j.value("ts", "");
    e.kind = parse_event_kind(j.at("kind").get<std::string>());
    if (j.contains("seq")) e.seq = sequence_from_json(j["seq"]);
    if (j.contains("records")) {
      for (const auto& rec : j["records"]) {
        RecordSummary r;
        if (!rec.at("status").is_null()) r.status = rec["status"].get<int>();
        r.transport = parse_transport(rec.at("transport").get<std::string>());
        r.latency_ms = rec.value("latency_ms", 0.0);
        r.verdict = parse_verdict(rec.at("verdict").get<std::string>());
        e.records.push_back(r);
      }
    }
    if (j.contains("novelty")) {
      e.novelty_endpoint = j["novelty"].value("endpoint", std::size_t{0});
      e.novelty_line = j["novelty"].value("line", std::size_t{0});
    }
    if (j.contains("message")) e.message = j["message"].get<std::string>();
    if (j.contains("request")) e.request = j["request"].get<std::size_t>();
    if (j.contains("endpoint")) e.endpoint = j["endpoint"].get<std::string>();
    return e;
  } catch (const OrderedJson::exception& ex) {
    throw Error(ErrorCode::MalformedCorpusFile, std::string("bad event line: ") + ex.what());
  }
}

std::string strip_timing(std::string_view line) {
  OrderedJson j = OrderedJson::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::string(line);
  j.erase("ts");
  if (j.contains("records"))
    for (auto& rec : j["records"]) rec.erase("latency_ms");
  return j.dump(-1, ' ', false, OrderedJson::error_handler_t::replace);
}

std::string iso8601_now() {
  auto now = std::chrono::system_clock::now();
  auto secs = std::chrono::system_clock::to_time_t(now);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms << 'Z';
  return out.str();
}

EventLog::EventLog(const std::filesystem::path& path) : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error(ErrorCode::IoError, "cannot open event log " + path.string());
}

void EventLog::append(const EventRecord& event) {
  out_ << event_to_line(event) << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::IoError, "cannot write event log " + path_.string());
}

std::vector<EventRecord> read_event_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read event log " + path.string());
  std::vector<EventRecord> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(event_from_line(line));
  return out;
}

std::string mermaid_id(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(c);
    else if (!out.empty() && out.back() != '_') out.push_back('_');
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "n" : out;
}

namespace {

std::string mermaid_label(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '"') out += "#quot;";
    else if (c == '|') out += "/";
    else if (c == '\n' || c == '\r') out += ' ';
    else out.push_back(c);
  }
  return out;
}

std::string node_label(Method m, const std::string& path) { return std::string(to_string(m)) + " " + path; }

} // namespace

std::string render_dependency_graph_markdown(const DependencyGraph& graph) {
  std::ostringstream out;
  out << "# Dependency graph\n\n";
  out << graph.nodes.size() << " operations, " << graph.edges.size() << " edges.\n\n";
  out << "```mermaid\ngraph TD\n";
  std::vector<std::string> ids;
  std::set<std::string> used;
  for (const auto& node : graph.nodes) {
    std::string base = mermaid_id(node.label());
    std::string id = base;
    for (int n = 2; used.count(id); ++n) id = base + "_" + std::to_string(n);
    used.insert(id);
    ids.push_back(id);
    out << "  " << id << "[\"" << mermaid_label(node.label()) << "\"]\n";
  }
  for (const auto& e : graph.edges)
    out << "  " << ids[e.producer] << " -->|" << mermaid_label(e.field) << " → " << mermaid_label(e.param) << "| "
        << ids[e.consumer] << "\n";
  out << "```\n";
  return out.str();
}

std::string render_corpus_report(const std::vector<RequestSequence>& corpus) {
  std::ostringstream out;
  out << "# Initial corpus\n\n" << corpus.size() << " sequences.\n";
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto& seq = corpus[s];
    out << "\n## Sequence " << s << "\n\n```mermaid\ngraph LR\n";
    for (std::size_t i = 0; i < seq.requests.size(); ++i)
      out << "  r" << i << "[\"" << i << ": " << mermaid_label(node_label(seq.requests[i].method, seq.requests[i].path))
          << "\"]\n";
    for (std::size_t i = 1; i < seq.requests.size(); ++i) out << "  r" << i - 1 << " --> r" << i << "\n";
    for (const auto& slot : all_slots(seq)) {
      if (const auto* ref = std::get_if<Reference>(slot_value(seq, slot)))
        out << "  r" << ref->request << " -.->|" << mermaid_label(ref->field) << " → " << mermaid_label(slot.name)
            << "| r" << slot.request << "\n";
    }
    out << "```\n";
  }
  return out.str();
}

std::string render_endpoint_coverage_report(const EndpointCoverageMap& map,
                                            const std::map<std::size_t, ExampleRequest>& examples) {
  std::ostringstream out;
  ResponseCoverage rc = response_coverage(map);
  out << "# Endpoint coverage\n\n";
  out << "Response coverage: " << rc.covered << "/" << rc.denominator << "\n\n";
  out << "✓ listed status triggered, ✗ listed status not triggered, ⚠ unlisted status triggered.\n\n";
  out << "| Method | Path | Status | Result | Example |\n|---|---|---|---|---|\n";

  // Group by operation in order of first registry appearance; listed rows first.
  std::vector<std::pair<std::string, Method>> groups;
  for (const auto& t : map.registry())
    if (std::find(groups.begin(), groups.end(), std::make_pair(t.path, t.method)) == groups.end())
      groups.emplace_back(t.path, t.method);
  for (const auto& [path, method] : groups) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < map.size(); ++i) {
        const auto& t = map.registry()[i];
        bool listed = i < map.listed_count();
        if (t.path != path || t.method != method || listed != (pass == 0)) continue;
        if (!listed && !map.is_set(i)) continue;
        const char* mark = !listed ? "⚠" : map.is_set(i) ? "✓" : "✗";
        out << "| " << to_string(method) << " | `" << path << "` | " << t.status << " | " << mark << " | ";
        if (map.is_set(i) && examples.count(i)) out << "[ex-" << i << "](#ex-" << i << ")";
        out << " |\n";
      }
    }
  }

  if (!examples.empty()) out << "\n## Examples\n";
  for (const auto& [idx, ex] : examples) {
    if (idx >= map.size() || !map.is_set(idx)) continue;
    const auto& t = map.registry()[idx];
    OrderedJson seq = OrderedJson::parse(ex.sequence);
    out << "\n<a id=\"ex-" << idx << "\"></a>\n\n### ex-" << idx << ": " << to_string(t.method) << " " << t.path
        << " → " << t.status << "\n\nRequest " << ex.request << " of:\n\n```json\n"
        << seq.dump(2, ' ', false, OrderedJson::error_handler_t::replace) << "\n```\n";
  }
  return out.str();
}

void ReportState::observe(const EventRecord& event) {
  if (!event.seq || (event.kind != EventKind::SeedExec && event.kind != EventKind::ChildExec)) return;
  const auto& seq = *event.seq;
  std::optional<std::string> compact;
  for (std::size_t i = 0; i < event.records.size() && i < seq.requests.size(); ++i) {
    const auto& r = event.records[i];
    if (r.transport != Transport::Ok || !r.status) continue;
    std::size_t idx = map_.endpoint_bit(seq.requests[i].path, seq.requests[i].method, *r.status);
    map_.set(idx);
    if (!examples_.count(idx)) {
      if (!compact) compact = serialize_sequence_compact(seq);
      examples_[idx] = ExampleRequest{*compact, i};
    }
  }
}

void write_reports(const std::filesystem::path& dir, const DependencyGraph& graph,
                   const std::vector<RequestSequence>& corpus, const ReportState& state) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + (dir / name).string());
  };
  write("dependency_graph.md", render_dependency_graph_markdown(graph));
  write("corpus.md", render_corpus_report(corpus));
  write("endpoint_coverage.md", state.render());
}

} // namespace seqfuzz
