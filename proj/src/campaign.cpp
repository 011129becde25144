#include "seqfuzz/campaign.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "seqfuzz/corpus_gen.hpp"
#include "seqfuzz/error.hpp"
#include "seqfuzz/mutation.hpp"

namespace seqfuzz {
namespace {

std::string unquote(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\'')))
    return v.substr(1, v.size() - 2);
  return v;
}

template <typename T>
T number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (in.fail() || !in.eof()) throw Error(ErrorCode::ConfigError, key + ": not a number: " + value);
  return out;
}

} // namespace

CampaignConfig parse_config(std::string_view text) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("config: ") + e.what());
  }
  CampaignConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw Error(ErrorCode::ConfigError, "config: key outside a section: " + section);
    for (const auto& [name, node] : body) {
      const std::string key = section + "." + name;
      const std::string v = unquote(node.data());
      if (key == "target.base_url") c.client.base_url = v;
      else if (key == "target.timeout_ms") c.client.timeout_ms = number<int>(key, v);
      else if (key == "target.auth_header_name") {
        if (!c.client.auth_header) c.client.auth_header.emplace();
        c.client.auth_header->first = v;
      } else if (key == "target.auth_header_value") {
        if (!c.client.auth_header) c.client.auth_header.emplace();
        c.client.auth_header->second = v;
      } else if (key == "checker.mode") c.checker = parse_checker_mode(v);
      else if (key == "coverage.agent_url") {
        if (!v.empty()) c.agent_url = v;
      } else if (key == "coverage.fetch_timeout_ms") c.fetch_timeout_ms = number<int>(key, v);
      else if (key == "scheduler.kind") {
        try {
          c.schedule = parse_schedule(v);
        } catch (const Error& e) {
          throw Error(ErrorCode::ConfigError, e.what());
        }
      } else if (key == "scheduler.energy_cap") c.energy_cap = number<std::uint32_t>(key, v);
      else if (key == "scheduler.exec_time") {
        if (v == "virtual") c.exec_time = ExecTimeMode::Virtual;
        else if (v == "measured") c.exec_time = ExecTimeMode::Measured;
        else throw Error(ErrorCode::ConfigError, key + ": expected virtual or measured");
      } else if (key == "campaign.budget") c.time_budget = number<double>(key, v);
      else if (key == "campaign.seed") c.rng_seed = number<std::uint64_t>(key, v);
      else if (key == "campaign.corpus_dir") c.corpus_dir = v;
      else if (key == "campaign.report_dir") c.report_dir = v;
      else if (key == "campaign.max_sequences") c.max_sequences = number<std::uint64_t>(key, v);
      else throw Error(ErrorCode::ConfigError, "config: unknown key " + key);
    }
  }
  if (c.client.auth_header && (c.client.auth_header->first.empty() || c.client.auth_header->second.empty()))
    throw Error(ErrorCode::ConfigError, "config: auth header needs both name and value");
  return c;
}

CampaignConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void validate_config(const CampaignConfig& c) {
  if (!(c.time_budget > 0) || !std::isfinite(c.time_budget))
    throw Error(ErrorCode::ConfigError, "time budget must be positive");
  if (c.client.timeout_ms <= 0) throw Error(ErrorCode::ConfigError, "target.timeout_ms must be positive");
  if (c.fetch_timeout_ms <= 0) throw Error(ErrorCode::ConfigError, "coverage.fetch_timeout_ms must be positive");
  if (c.energy_cap < 1 || c.energy_cap > kMaxEnergy)
    throw Error(ErrorCode::ConfigError, "scheduler.energy_cap must be within 1..64");
}

CampaignStats tick_stats(CampaignStats stats, const EventRecord& event) {
  switch (event.kind) {
  case EventKind::SeedExec:
  case EventKind::ChildExec:
    ++stats.sequences_executed;
    stats.requests_sent += event.records.size();
    for (const auto& r : event.records) ++stats.verdicts[r.verdict];
    break;
  case EventKind::Finding: ++stats.findings; break;
  case EventKind::Warning: ++stats.warnings; break;
  }
  return stats;
}

namespace {

class Campaign {
public:
  explicit Campaign(const CampaignConfig& config) : config_(config) {}

  CampaignStats run() {
    validate_config(config_);
    start_ = std::chrono::steady_clock::now();
    stats_.started_at = iso8601_now();

    try {
      spec_ = load_spec_file(config_.spec_path.string());
    } catch (const Error& e) {
      throw Error(ErrorCode::SpecError, e.what());
    }
    graph_ = build_dependency_graph(spec_);
    ClientConfig client_config = config_.client;
    if (client_config.base_url.empty()) client_config.base_url = spec_.base_url;
    if (client_config.base_url.empty()) throw Error(ErrorCode::ConfigError, "no target.base_url and no server in spec");
    client_ = std::make_unique<HttpClient>(client_config);

    std::uint64_t seed = config_.rng_seed;
    if (seed == 0) seed = static_cast<std::uint64_t>(std::chrono::system_clock::now().time_since_epoch().count()) | 1;
    stats_.rng_seed = seed;
    rng_ = Rng(seed);

    log_ = std::make_unique<EventLog>(config_.report_dir / "events.jsonl");
    report_ = std::make_unique<ReportState>(spec_);
    global_endpoint_ = EndpointCoverageMap(spec_);
    corpus_.emplace();
    scheduler_.emplace(config_.schedule, config_.energy_cap);

    if (config_.rng_seed == 0) warn("rng_seed derived from clock: " + std::to_string(seed));
    for (const auto& w : spec_.warnings) warn(w);

    std::vector<RequestSequence> seeds = initial_corpus();

    if (config_.agent_url) {
      agent_ = std::make_unique<AgentClient>(*config_.agent_url, config_.fetch_timeout_ms);
      global_line_ = agent_->fetch(true); // fails fast when unreachable
      global_line_ = LineCoverageMap(global_line_->total_bits());
    }

    for (const auto& seq : seeds) {
      if (out_of_budget()) break;
      execute(seq, EventKind::SeedExec);
    }
    while (!out_of_budget() && !corpus_->empty()) {
      Selection sel = scheduler_->select_next(*corpus_);
      ++corpus_->at(sel.index).fuzz_count;
      const RequestSequence parent = corpus_->at(sel.index).sequence;
      for (std::uint32_t k = 0; k < sel.energy && !out_of_budget(); ++k)
        execute(mutate(parent, spec_, graph_, rng_), EventKind::ChildExec);
    }

    write_reports(config_.report_dir, graph_, seeds, *report_);
    stats_.response_coverage = response_coverage(global_endpoint_);
    if (global_line_) {
      stats_.line_bits_set = global_line_->popcount();
      stats_.line_bits_total = global_line_->total_bits();
    }
    stats_.corpus_size = corpus_->size();
    stats_.finished_at = iso8601_now();
    return stats_;
  }

private:
  bool out_of_budget() const {
    if (config_.max_sequences && executed_ >= *config_.max_sequences) return true;
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return elapsed >= config_.time_budget;
  }

  std::vector<RequestSequence> initial_corpus() {
    std::vector<RequestSequence> seeds;
    if (config_.corpus_dir) seeds = read_corpus_dir(*config_.corpus_dir);
    if (seeds.empty()) {
      GeneratedCorpus generated = generate_corpus(spec_, graph_, rng_);
      for (const auto& w : generated.warnings) warn(w);
      seeds = std::move(generated.sequences);
      if (config_.corpus_dir) write_corpus_dir(*config_.corpus_dir, seeds);
    }
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      for (const auto& req : seeds[i].requests)
        if (spec_.find(req.path, req.method) == nullptr)
          throw Error(ErrorCode::MalformedCorpusFile, "seed " + std::to_string(i) + ": " +
                                                          std::string(to_string(req.method)) + " " + req.path +
                                                          " is not in the spec");
    }
    return seeds;
  }

  void emit(EventRecord event) {
    event.tick = tick_++;
    event.ts = iso8601_now();
    log_->append(event);
    report_->observe(event);
    stats_ = tick_stats(std::move(stats_), event);
  }

  void warn(const std::string& message) {
    if (!warned_.insert(message).second) return;
    EventRecord e;
    e.kind = EventKind::Warning;
    e.message = message;
    emit(std::move(e));
  }

  std::optional<LineCoverageMap> fetch_line_delta() {
    if (!agent_) return std::nullopt;
    try {
      return agent_->fetch(true);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::TotalBitsChanged) throw;
      warn(std::string("coverage agent lost, continuing black-box: ") + e.what());
      agent_.reset();
      return std::nullopt;
    }
  }

  void execute(const RequestSequence& seq, EventKind kind) {
    ExecutionResult result = client_->execute_sequence(spec_, seq);
    ++executed_;
    for (const auto& w : result.warnings) warn(w);

    EndpointCoverageMap scratch = global_endpoint_;
    CoverageSnapshot snap = record_responses(scratch, seq, result.records);
    global_endpoint_.sync_registry(scratch);
    snap.line = fetch_line_delta();
    Novelty nov = novelty(global_endpoint_, global_line_ ? &*global_line_ : nullptr, snap);

    double exec_time = 0;
    for (const auto& r : result.records)
      exec_time += config_.exec_time == ExecTimeMode::Virtual ? 1.0 : r.latency_ms;
    corpus_->add_if_interesting(seq, snap, nov, exec_time, tick_, kind == EventKind::SeedExec);

    EventRecord event;
    event.kind = kind;
    event.seq = seq;
    event.novelty_endpoint = nov.endpoint.size();
    event.novelty_line = nov.line.size();
    std::vector<std::size_t> failures;
    for (const auto& r : result.records) {
      RecordSummary s;
      s.status = r.status;
      s.transport = r.transport;
      s.latency_ms = r.latency_ms;
      s.verdict = check_response(spec_, seq.requests[r.request_index], r, config_.checker);
      if (s.verdict == Verdict::ServerError) failures.push_back(r.request_index);
      event.records.push_back(s);
    }
    emit(std::move(event));

    for (std::size_t idx : failures) {
      EventRecord finding;
      finding.kind = EventKind::Finding;
      finding.seq = seq;
      finding.request = idx;
      finding.endpoint = std::string(to_string(seq.requests[idx].method)) + " " + seq.requests[idx].path;
      finding.message = "ServerError " + std::to_string(*result.records[idx].status);
      emit(std::move(finding));
    }
  }

  const CampaignConfig& config_;
  std::chrono::steady_clock::time_point start_;
  ApiSpec spec_;
  DependencyGraph graph_;
  std::unique_ptr<HttpClient> client_;
  std::unique_ptr<AgentClient> agent_;
  Rng rng_;
  std::unique_ptr<EventLog> log_;
  std::unique_ptr<ReportState> report_;
  EndpointCoverageMap global_endpoint_;
  std::optional<LineCoverageMap> global_line_;
  std::optional<Corpus> corpus_;
  std::optional<Scheduler> scheduler_;
  std::set<std::string> warned_;
  CampaignStats stats_;
  std::uint64_t tick_ = 0;
  std::uint64_t executed_ = 0;
};

} // namespace

CampaignStats run_campaign(const CampaignConfig& config) { return Campaign(config).run(); }

void regenerate_reports(const std::filesystem::path& spec_path, const std::filesystem::path& events,
                        const std::filesystem::path& report_dir) {
  ApiSpec spec;
  try {
    spec = load_spec_file(spec_path.string());
  } catch (const Error& e) {
    throw Error(ErrorCode::SpecError, e.what());
  }
  DependencyGraph graph = build_dependency_graph(spec);
  ReportState state(spec);
  std::vector<RequestSequence> seeds;
  for (const auto& e : read_event_log(events)) {
    if (e.kind == EventKind::SeedExec && e.seq) seeds.push_back(*e.seq);
    state.observe(e);
  }
  write_reports(report_dir, graph, seeds, state);
}

std::string format_stats(const CampaignStats& s) {
  std::ostringstream out;
  out << "rng_seed            " << s.rng_seed << "\n";
  out << "sequences executed  " << s.sequences_executed << "\n";
  out << "requests sent       " << s.requests_sent << "\n";
  for (const auto& [v, n] : s.verdicts) out << "  " << to_string(v) << ": " << n << "\n";
  out << "findings            " << s.findings << "\n";
  out << "response coverage   " << s.response_coverage.covered << "/" << s.response_coverage.denominator << "\n";
  if (s.line_bits_total) out << "line coverage       " << s.line_bits_set << "/" << s.line_bits_total << "\n";
  out << "corpus size         " << s.corpus_size << "\n";
  return out.str();
}

} // namespace seqfuzz
