// Acceptance checks A1-A8. Prints one PASS/FAIL line per criterion; exit
// status is non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "seqfuzz/campaign.hpp"
#include "seqfuzz/corpus_gen.hpp"
#include "seqfuzz/error.hpp"
#include "seqfuzz/mock_sut.hpp"
#include "seqfuzz/mutation.hpp"
#include "seqfuzz/reporting.hpp"
#include "seqfuzz/scheduler.hpp"

namespace fs = std::filesystem;
using namespace seqfuzz;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

fs::path spec_path() { return fs::path(SEQFUZZ_FIXTURES_DIR) / "minipet.yaml"; }

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("seqfuzz-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

struct CampaignRun {
  CampaignStats stats;
  std::vector<EventRecord> events;
  fs::path report_dir;
  double seconds = 0;
};

CampaignRun run_against_fresh_mock(const std::string& name, std::uint64_t seed, double budget, bool white_box,
                                   std::optional<std::uint64_t> max_sequences = std::nullopt) {
  MockSut sut;
  sut.start();
  CampaignConfig c;
  c.spec_path = spec_path();
  c.client.base_url = sut.base_url();
  c.checker = CheckerMode::Strict;
  c.schedule = ScheduleKind::Fast;
  c.rng_seed = seed;
  c.time_budget = budget;
  c.max_sequences = max_sequences;
  c.report_dir = work_dir() / name;
  if (white_box) c.agent_url = sut.agent_url();
  CampaignRun run;
  run.report_dir = c.report_dir;
  auto start = Clock::now();
  run.stats = run_campaign(c);
  run.seconds = seconds_since(start);
  run.events = read_event_log(c.report_dir / "events.jsonl");
  return run;
}

bool has_finding(const std::vector<EventRecord>& events, const std::string& endpoint, std::size_t min_requests = 1) {
  for (const auto& e : events)
    if (e.kind == EventKind::Finding && e.endpoint == endpoint && e.seq && e.seq->requests.size() >= min_requests)
      return true;
  return false;
}

std::size_t listed_covered(const EndpointCoverageMap& map) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < map.listed_count(); ++i) n += map.is_set(i);
  return n;
}

// A1
Outcome corpus_coverage() {
  auto start = Clock::now();
  ApiSpec spec = load_spec_file(spec_path().string());
  DependencyGraph graph = build_dependency_graph(spec);
  Rng rng(1);
  GeneratedCorpus corpus = generate_corpus(spec, graph, rng);
  write_corpus_dir(work_dir() / "a1-corpus", corpus.sequences);
  double elapsed = seconds_since(start);

  std::set<std::pair<std::string, Method>> ops, seen;
  for (const auto& op : spec.operations) ops.insert({op.path, op.method});
  bool chain = false;
  for (const auto& seq : read_corpus_dir(work_dir() / "a1-corpus")) {
    for (const auto& r : seq.requests) seen.insert({r.path, r.method});
    const auto& rs = seq.requests;
    for (std::size_t i = 0; i + 2 < rs.size(); ++i) {
      if (rs[i].path != "/store" || rs[i].method != Method::Post) continue;
      if (rs[i + 1].path != "/pet" || rs[i + 1].method != Method::Post) continue;
      if (rs[i + 2].path != "/pet/{id}" || rs[i + 2].method != Method::Get) continue;
      const auto* store_id = slot_value(seq, SlotRef{i + 1, true, "store_id"});
      const auto* pet_id = slot_value(seq, SlotRef{i + 2, false, "id"});
      chain = chain || (store_id && pet_id && *store_id == ParameterValue{Reference{i, "id"}} &&
                        *pet_id == ParameterValue{Reference{i + 1, "id"}});
    }
  }
  std::ostringstream d;
  d << seen.size() << "/" << ops.size() << " operations, chain " << (chain ? "present" : "missing") << ", "
    << elapsed << " s";
  return {seen == ops && ops.size() == 8 && chain && elapsed < 1.0, d.str()};
}

// A2
Outcome black_box_campaign() {
  CampaignRun run = run_against_fresh_mock("a2", 1, 60, false);
  ReportState state(load_spec_file(spec_path().string()));
  for (const auto& e : run.events) state.observe(e);
  std::size_t covered = listed_covered(state.map());
  bool b1 = has_finding(run.events, "PUT /pet/{id}");
  bool b2 = has_finding(run.events, "GET /pet/{id}", 3);
  std::ostringstream d;
  d << "listed coverage " << covered << "/" << state.map().listed_count() << " (all bits "
    << run.stats.response_coverage.covered << "/" << run.stats.response_coverage.denominator << "), B1 "
    << (b1 ? "found" : "missing") << ", B2 " << (b2 ? "found" : "missing") << ", " << run.stats.sequences_executed
    << " sequences in " << run.seconds << " s";
  return {covered >= 12 && b1 && b2 && run.seconds <= 65, d.str()};
}

// A3
Outcome white_box_guidance() {
  auto start = Clock::now();
  int white = 0, black = 0;
  std::ostringstream per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    CampaignRun wb = run_against_fresh_mock("a3-wb-" + std::to_string(seed), seed, 120, true);
    CampaignRun bb = run_against_fresh_mock("a3-bb-" + std::to_string(seed), seed, 120, false);
    bool w = has_finding(wb.events, "GET /store/{id}");
    bool b = has_finding(bb.events, "GET /store/{id}");
    white += w;
    black += b;
    per_seed << " s" << seed << "=" << (w ? "W" : "-") << (b ? "B" : "-") << "(line " << wb.stats.line_bits_set << ")";
    std::cerr << "A3 seed " << seed << ": white-box " << (w ? "found" : "missed") << ", black-box "
              << (b ? "found" : "missed") << ", white-box line bits " << wb.stats.line_bits_set << "\n";
  }
  double elapsed = seconds_since(start);
  std::ostringstream d;
  d << "B3 white-box " << white << "/5 (need >=4), black-box " << black << "/5 (need <=1);" << per_seed.str() << "; "
    << elapsed / 60 << " min";
  return {white >= 4 && black <= 1 && elapsed <= 25 * 60, d.str()};
}

// A4
Outcome schedule_formulas() {
  constexpr ScheduleKind kinds[] = {ScheduleKind::Fast, ScheduleKind::Explore, ScheduleKind::Lin,
                                    ScheduleKind::Exploit, ScheduleKind::Quad, ScheduleKind::Coe};
  ApiSpec spec = load_spec_file(spec_path().string());
  Rng gen(1);
  auto seeds = generate_corpus(spec, build_dependency_graph(spec), gen).sequences;
  Corpus corpus;
  CoverageSnapshot snap;
  snap.endpoint = {0};
  Novelty nov;
  nov.endpoint = {0};
  corpus.add_if_interesting(seeds.at(0), snap, nov, 1, 0);
  bool exploit = assign_energy(corpus, corpus.at(0), ScheduleKind::Exploit) == 32;
  bool fast = compute_energy(ScheduleKind::Fast, 32, 0, 1, 1) == 8;
  bool coe = compute_energy(ScheduleKind::Coe, 32, 5, 10, 2.5) == 1;

  Rng rng(2024);
  std::size_t violations = 0;
  for (int i = 0; i < 10000; ++i) {
    double alpha = 1.0 + static_cast<double>(rng.below(31001)) / 1000.0;
    std::uint64_t s = rng.below(40), f = rng.below(5000);
    double mu = static_cast<double>(rng.below(5000000)) / 1000.0;
    for (ScheduleKind k : kinds) {
      std::uint32_t e = compute_energy(k, alpha, s, f, mu);
      violations += e < 1 || e > kMaxEnergy;
    }
    violations += compute_energy(ScheduleKind::Fast, alpha, s + 1, f, mu) < compute_energy(ScheduleKind::Fast, alpha, s, f, mu);
    violations += compute_energy(ScheduleKind::Fast, alpha, s, f + 1, mu) > compute_energy(ScheduleKind::Fast, alpha, s, f, mu);
    violations += static_cast<double>(f) > mu && compute_energy(ScheduleKind::Coe, alpha, s, f, mu) != 1;
  }
  std::ostringstream d;
  d << "Exploit@medians=" << (exploit ? "32" : "wrong") << ", Fast(s=0,f=1)=" << (fast ? "8" : "wrong")
    << ", Coe cutoff=" << (coe ? "1" : "wrong") << ", property violations " << violations << " over 10^4 draws";
  return {exploit && fast && coe && violations == 0, d.str()};
}

// A5
Outcome mutator_properties() {
  ApiSpec spec = load_spec_file(spec_path().string());
  DependencyGraph graph = build_dependency_graph(spec);
  Rng gen(1);
  auto seeds = generate_corpus(spec, graph, gen).sequences;
  auto refs = [](const RequestSequence& seq) {
    std::vector<std::pair<SlotRef, Reference>> out;
    for (const auto& slot : all_slots(seq))
      if (const auto* r = std::get_if<Reference>(slot_value(seq, slot))) out.emplace_back(slot, *r);
    return out;
  };
  auto ops = [](const RequestSequence& seq) {
    std::vector<std::pair<std::string, Method>> out;
    for (const auto& r : seq.requests) out.emplace_back(r.path, r.method);
    std::sort(out.begin(), out.end());
    return out;
  };
  Rng rng(1);
  std::size_t invalid = 0, swap = 0, remove = 0, touched = 0, singletons = 0;
  for (int i = 0; i < 10000; ++i) {
    const RequestSequence& seq = seeds[rng.below(seeds.size())];
    MutatorKind k = all_mutators()[rng.below(kMutatorCount)];
    RequestSequence out = is_byte_level(k) ? mutate_literal(k, seq, rng) : apply_sequence_mutator(k, seq, spec, graph, rng);
    invalid += validate(out).has_value() || parse_sequence(serialize_sequence(out)) != out;
    swap += k == MutatorKind::SwapRequests && ops(out) != ops(seq);
    if (k == MutatorKind::RemoveRequest && seq.requests.size() == 1) {
      ++singletons;
      remove += out != seq;
    }
    touched += is_byte_level(k) && refs(out) != refs(seq);
  }
  std::ostringstream d;
  d << "10^4 draws: invalid " << invalid << ", SwapRequests multiset changes " << swap
    << ", RemoveRequest singleton changes " << remove << "/" << singletons << ", references touched by byte mutators "
    << touched;
  return {invalid == 0 && swap == 0 && remove == 0 && touched == 0 && singletons > 0, d.str()};
}

// A6
Outcome coverage_laws() {
  ApiSpec spec = load_spec_file(spec_path().string());
  EndpointCoverageMap a(spec), b(spec);
  bool order = a.registry() == b.registry() && a.size() == 16 &&
               a.registry().front() == EndpointTriple{"/store", Method::Post, 201};
  std::size_t i1 = a.endpoint_bit("/store/{id}", Method::Get, 418);
  std::size_t i2 = a.endpoint_bit("/store/{id}", Method::Get, 418);
  bool append = i1 == 16 && i2 == 16 && a.size() == 17;
  ResponseCoverage fresh = response_coverage(EndpointCoverageMap(spec));
  bool zero_of_16 = fresh.covered == 0 && fresh.denominator == 16;

  MockSut sut;
  sut.start();
  HttpClient client(ClientConfig{sut.base_url()});
  AgentClient agent(sut.agent_url());
  Rng gen(1);
  auto seeds = generate_corpus(spec, build_dependency_graph(spec), gen).sequences;
  client.execute_sequence(spec, seeds.at(5));
  bool reset = agent.fetch(true).popcount() > 0 && agent.fetch(false).popcount() == 0;

  std::ostringstream d;
  d << "seed order " << (order ? "ok" : "broken") << ", append idempotence " << (append ? "ok" : "broken")
    << ", fetch/reset zeroing " << (reset ? "ok" : "broken") << ", fresh " << fresh.covered << "/" << fresh.denominator;
  return {order && append && zero_of_16 && reset, d.str()};
}

// A7
Outcome report_content() {
  ApiSpec spec = load_spec_file(spec_path().string());
  DependencyGraph graph = build_dependency_graph(spec);
  bool edge = render_dependency_graph_markdown(graph).find("POST_store -->|id → store_id| POST_pet") != std::string::npos;

  // Scripted run: POST /store then GET /store/{id} hitting 200, then an unlisted 400 (invalid UTF-8 body).
  MockSut sut;
  sut.start();
  HttpClient client(ClientConfig{sut.base_url()});
  RequestSequence scripted;
  TemplatedRequest post;
  post.method = Method::Post;
  post.path = "/store";
  post.body = BodyValue::make_object();
  post.body->fields.push_back(BodyField{"title", BodyValue::make_leaf(Literal{"t"})});
  TemplatedRequest get;
  get.method = Method::Get;
  get.path = "/store/{id}";
  get.params["id"] = Reference{0, "id"};
  TemplatedRequest broken = post;
  broken.body->fields[0].value = BodyValue::make_leaf(Literal{"\xff"});
  scripted.requests = {post, get};
  RequestSequence malformed;
  malformed.requests = {broken};

  ReportState state(spec);
  std::uint64_t tick = 0;
  for (const auto* seq : {&scripted, &malformed}) {
    ExecutionResult res = client.execute_sequence(spec, *seq);
    EventRecord e;
    e.tick = tick++;
    e.kind = EventKind::ChildExec;
    e.seq = *seq;
    for (std::size_t i = 0; i < res.records.size(); ++i) {
      RecordSummary r;
      r.status = res.records[i].status;
      r.transport = res.records[i].transport;
      r.verdict = check_response(spec, seq->requests[i], res.records[i], CheckerMode::Strict);
      e.records.push_back(r);
    }
    state.observe(e);
  }
  std::string md = state.render();
  auto has = [&](const std::string& method, const std::string& path, int status, const std::string& mark) {
    return md.find("| " + method + " | `" + path + "` | " + std::to_string(status) + " | " + mark + " |") !=
           std::string::npos;
  };
  bool marks = has("POST", "/store", 201, "✓") && has("GET", "/store/{id}", 200, "✓") &&
               has("GET", "/store/{id}", 404, "✗") && has("POST", "/store", 400, "⚠") && has("POST", "/pet", 201, "✗");

  CampaignRun run = run_against_fresh_mock("a7", 3, 60, false, 2000);
  fs::path replay = work_dir() / "a7-replay";
  regenerate_reports(spec_path(), run.report_dir / "events.jsonl", replay);
  bool identical = true;
  for (const char* f : {"endpoint_coverage.md", "dependency_graph.md", "corpus.md"})
    identical = identical && read_file(replay / f) == read_file(run.report_dir / f) && !read_file(replay / f).empty();

  std::ostringstream d;
  d << "id → store_id edge " << (edge ? "present" : "missing") << ", ✓/✗/⚠ marks " << (marks ? "ok" : "wrong")
    << ", replay " << (identical ? "byte-identical" : "differs");
  return {edge && marks && identical, d.str()};
}

// A8
Outcome replay_determinism() {
  auto compare = [](const CampaignRun& x, const CampaignRun& y, std::size_t& common, std::size_t& first_diff) {
    auto lx = read_lines(x.report_dir / "events.jsonl");
    auto ly = read_lines(y.report_dir / "events.jsonl");
    common = std::min(lx.size(), ly.size());
    first_diff = common;
    for (std::size_t i = 0; i < common; ++i)
      if (strip_timing(lx[i]) != strip_timing(ly[i])) {
        first_diff = i;
        break;
      }
    return std::make_pair(lx.size(), ly.size());
  };

  CampaignRun a = run_against_fresh_mock("a8-a", 1, 30, true);
  CampaignRun b = run_against_fresh_mock("a8-b", 1, 30, true);
  std::size_t common = 0, diff = 0;
  auto [na, nb] = compare(a, b, common, diff);
  bool timed = diff == common && common > 0;

  // Same config with a sequence cap instead of a clock: logs must match line for line.
  CampaignRun c = run_against_fresh_mock("a8-c", 1, 600, true, 3000);
  CampaignRun e = run_against_fresh_mock("a8-d", 1, 600, true, 3000);
  std::size_t ccommon = 0, cdiff = 0;
  auto [nc, ne] = compare(c, e, ccommon, cdiff);
  bool capped = nc == ne && cdiff == ccommon && ccommon > 0;

  std::ostringstream d;
  d << "30 s runs: " << na << " and " << nb << " lines, common prefix " << common
    << (timed ? " identical" : " differs at line " + std::to_string(diff)) << " modulo ts/latency; capped runs: " << nc
    << " and " << ne << " lines " << (capped ? "identical" : "differ at line " + std::to_string(cdiff));
  return {timed && capped, d.str()};
}

} // namespace

int main(int argc, char** argv) {
  std::set<std::string> only;
  for (int i = 1; i < argc; ++i) only.insert(argv[i]);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"A1", corpus_coverage},   {"A2", black_box_campaign}, {"A3", white_box_guidance}, {"A4", schedule_formulas},
      {"A5", mutator_properties}, {"A6", coverage_laws},      {"A7", report_content},     {"A8", replay_determinism},
  };
  int failures = 0;
  for (const auto& [id, check] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << id << " " << (o.pass ? "PASS" : "FAIL") << " " << o.detail << std::endl;
  }
  std::error_code ec;
  fs::remove_all(work_dir(), ec);
  return failures == 0 ? 0 : 1;
}
