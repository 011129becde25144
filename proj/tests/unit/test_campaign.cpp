#include "doctest.h"
#include "seqfuzz/campaign.hpp"
#include "seqfuzz/error.hpp"
#include "support.hpp"

using namespace seqfuzz;

namespace {

ErrorCode config_error(std::string_view text) {
  try {
    validate_config(parse_config(text));
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("accepted config");
  return ErrorCode::IoError;
}

CampaignConfig mock_config(const MockSut& sut, const test::TempDir& dir, std::uint64_t max_sequences) {
  CampaignConfig c;
  c.spec_path = test::fixtures() / "minipet.yaml";
  c.client.base_url = sut.base_url();
  c.rng_seed = 1;
  c.time_budget = 30;
  c.max_sequences = max_sequences;
  c.report_dir = dir.path / "report";
  return c;
}

} // namespace

TEST_SUITE("campaign") {

TEST_CASE("config parsing") {
  CampaignConfig c = parse_config(R"(
# comment
[target]
base_url = "http://127.0.0.1:9000"
timeout_ms = 500
auth_header_name = "X-Key"
auth_header_value = 'abc'

[checker]
mode = server-error

[coverage]
agent_url = http://127.0.0.1:9001

[scheduler]
kind = coe
energy_cap = 16

[campaign]
budget = 12.5
seed = 7
max_sequences = 100
)");
  CHECK(c.client.base_url == "http://127.0.0.1:9000");
  CHECK(c.client.timeout_ms == 500);
  REQUIRE(c.client.auth_header);
  CHECK(c.client.auth_header->first == "X-Key");
  CHECK(c.client.auth_header->second == "abc");
  CHECK(c.checker == CheckerMode::ServerErrorOnly);
  CHECK(c.agent_url == std::optional<std::string>("http://127.0.0.1:9001"));
  CHECK(c.schedule == ScheduleKind::Coe);
  CHECK(c.energy_cap == 16);
  CHECK(c.time_budget == 12.5);
  CHECK(c.rng_seed == 7);
  CHECK(c.max_sequences == std::optional<std::uint64_t>(100));
  CHECK_NOTHROW(validate_config(c));

  CampaignConfig d = parse_config("");
  CHECK(d.schedule == ScheduleKind::Fast);
  CHECK(d.checker == CheckerMode::Strict);
  CHECK_FALSE(d.agent_url);
}

TEST_CASE("config errors") {
  CHECK(config_error("[campaign]\nbudget = 0\n") == ErrorCode::ConfigError);
  CHECK(config_error("[campaign]\nbudget = -3\n") == ErrorCode::ConfigError);
  CHECK(config_error("[campaign]\nbudget = soon\n") == ErrorCode::ConfigError);
  CHECK(config_error("[scheduler]\nkind = rare\n") == ErrorCode::ConfigError);
  CHECK(config_error("[target]\ncolour = blue\n") == ErrorCode::ConfigError);
  CHECK(config_error("[scheduler]\nenergy_cap = 65\n") == ErrorCode::ConfigError);
  CHECK(config_error("[checker]\nmode = lenient\n") == ErrorCode::ConfigError);
  CHECK_THROWS_AS(load_config_file("/nonexistent.toml"), Error);
}

TEST_CASE("tick_stats folds events") {
  CHECK(tick_stats(CampaignStats{}, EventRecord{}).sequences_executed == 1);
  CampaignStats zero;
  CHECK(zero.requests_sent == 0);
  CHECK(zero.verdicts.empty());

  EventRecord exec;
  exec.kind = EventKind::ChildExec;
  RecordSummary bad;
  bad.status = 500;
  bad.verdict = Verdict::ServerError;
  RecordSummary good;
  good.status = 200;
  exec.records = {good, bad};
  EventRecord finding;
  finding.kind = EventKind::Finding;
  EventRecord warning;
  warning.kind = EventKind::Warning;

  CampaignStats a = tick_stats(tick_stats(tick_stats(CampaignStats{}, exec), finding), warning);
  CampaignStats b = tick_stats(tick_stats(tick_stats(CampaignStats{}, warning), finding), exec);
  CHECK(a == b);
  CHECK(a.verdicts.at(Verdict::ServerError) == 1);
  CHECK(a.requests_sent == 2);
  CHECK(a.findings == 1);
  CHECK(a.warnings == 1);
}

TEST_CASE("black-box run against the mock") {
  MockSut sut;
  sut.start();
  test::TempDir dir;
  CampaignStats stats = run_campaign(mock_config(sut, dir, 300));
  CHECK(stats.sequences_executed == 300);
  CHECK(stats.requests_sent > 300);
  CHECK(stats.response_coverage.denominator == 16);
  CHECK(stats.response_coverage.covered >= 10);
  CHECK(stats.line_bits_total == 0);
  for (const char* f : {"events.jsonl", "dependency_graph.md", "corpus.md", "endpoint_coverage.md"})
    CHECK(std::filesystem::exists(dir.path / "report" / f));

  auto events = read_event_log(dir.path / "report" / "events.jsonl");
  CampaignStats folded;
  std::uint64_t last_tick = 0;
  bool first = true;
  for (const auto& e : events) {
    folded = tick_stats(folded, e);
    if (e.kind == EventKind::SeedExec || e.kind == EventKind::ChildExec) {
      if (!first) CHECK(e.tick > last_tick);
      last_tick = e.tick;
      first = false;
    }
  }
  CHECK(folded.requests_sent == stats.requests_sent);
  CHECK(folded.findings == stats.findings);

  test::TempDir replay;
  regenerate_reports(test::fixtures() / "minipet.yaml", dir.path / "report" / "events.jsonl", replay.path);
  CHECK(test::read_file(replay.path / "endpoint_coverage.md") ==
        test::read_file(dir.path / "report" / "endpoint_coverage.md"));
  CHECK(test::read_file(replay.path / "corpus.md") == test::read_file(dir.path / "report" / "corpus.md"));
}

TEST_CASE("white-box run observes line coverage") {
  MockSut sut;
  sut.start();
  test::TempDir dir;
  CampaignConfig c = mock_config(sut, dir, 200);
  c.agent_url = sut.agent_url();
  CampaignStats stats = run_campaign(c);
  CHECK(stats.line_bits_total == minipet_bits::kTotal);
  CHECK(stats.line_bits_set > 10);
}

TEST_CASE("a preloaded corpus directory replaces generation") {
  MockSut sut;
  sut.start();
  test::TempDir dir;
  std::filesystem::create_directories(dir.path / "corpus");
  write_corpus_dir(dir.path / "corpus", {test::minipet_seeds().at(0)});
  CampaignConfig c = mock_config(sut, dir, 20);
  c.corpus_dir = dir.path / "corpus";
  run_campaign(c);
  std::size_t seeds = 0;
  for (const auto& e : read_event_log(dir.path / "report" / "events.jsonl"))
    if (e.kind == EventKind::SeedExec) ++seeds;
  CHECK(seeds == 1);
  CHECK(read_corpus_dir(dir.path / "corpus").size() == 1);
}

TEST_CASE("an empty corpus directory is filled with generated seeds") {
  MockSut sut;
  sut.start();
  test::TempDir dir;
  CampaignConfig c = mock_config(sut, dir, 10);
  c.corpus_dir = dir.path / "fresh";
  run_campaign(c);
  CHECK(read_corpus_dir(dir.path / "fresh").size() == 8);
}

TEST_CASE("campaign errors") {
  test::TempDir dir;
  CampaignConfig c;
  c.spec_path = dir.path / "missing.yaml";
  c.report_dir = dir.path / "r";
  try {
    run_campaign(c);
    FAIL("expected SpecError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SpecError);
  }

  c.spec_path = test::fixtures() / "minipet.yaml";
  c.client.base_url = "http://127.0.0.1:1";
  c.agent_url = "http://127.0.0.1:1";
  c.rng_seed = 1;
  try {
    run_campaign(c);
    FAIL("expected AgentUnreachable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AgentUnreachable);
  }
}

}
