#include <csignal>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "seqfuzz/campaign.hpp"
#include "seqfuzz/corpus_gen.hpp"
#include "seqfuzz/error.hpp"
#include "seqfuzz/mock_sut.hpp"
#include "seqfuzz/reporting.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

volatile std::sig_atomic_t g_stop = 0;

int exit_code_for(seqfuzz::ErrorCode code) {
  using seqfuzz::ErrorCode;
  switch (code) {
  case ErrorCode::ConfigError:
  case ErrorCode::SpecError:
  case ErrorCode::MalformedDocument:
  case ErrorCode::UnresolvableRef:
  case ErrorCode::MissingPaths:
  case ErrorCode::UnknownMethod:
  case ErrorCode::UnknownSchedule:
  case ErrorCode::MalformedCorpusFile:
  case ErrorCode::EmptyCorpus:
    return kExitConfig;
  default:
    return kExitRuntime;
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coverage-guided stateful REST API fuzzer"};
  app.require_subcommand(1);

  // fuzz
  auto* fuzz = app.add_subcommand("fuzz", "Run a fuzzing campaign");
  std::string spec_path, config_path, target, agent, checker, schedule, corpus_dir, report_dir;
  std::optional<std::uint64_t> seed, max_sequences;
  std::optional<double> budget;
  fuzz->add_option("--spec", spec_path, "OpenAPI document (JSON or YAML)")->required();
  fuzz->add_option("--config", config_path, "Campaign configuration file")->required();
  fuzz->add_option("--seed", seed, "RNG seed (0 derives one from the clock)");
  fuzz->add_option("--budget", budget, "Time budget in seconds");
  fuzz->add_option("--corpus", corpus_dir, "Seed corpus directory");
  fuzz->add_option("--report", report_dir, "Report output directory");
  fuzz->add_option("--schedule", schedule, "fast|explore|lin|exploit|quad|coe");
  fuzz->add_option("--agent", agent, "Coverage agent base URL");
  fuzz->add_option("--checker", checker, "strict|server-error");
  fuzz->add_option("--target", target, "Base URL of the API under test");
  fuzz->add_option("--max-sequences", max_sequences, "Stop after this many executed sequences");

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "Write the initial corpus and stop");
  std::string gen_spec, gen_out, gen_report;
  std::uint64_t gen_seed = 1;
  gen->add_option("--spec", gen_spec, "OpenAPI document")->required();
  gen->add_option("--corpus,--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", gen_seed, "RNG seed for example generation");
  gen->add_option("--report", gen_report, "Also write dependency_graph.md and corpus.md here");

  // report
  auto* rep = app.add_subcommand("report", "Regenerate reports from an event log");
  std::string rep_spec, rep_events, rep_out;
  rep->add_option("--spec", rep_spec, "OpenAPI document")->required();
  rep->add_option("--events", rep_events, "events.jsonl of a campaign")->required();
  rep->add_option("--report", rep_out, "Output directory")->required();

  // mock
  auto* mock = app.add_subcommand("mock", "Serve the minipet mock target and its coverage agent");
  int mock_port = 8080, mock_agent_port = 8081;
  mock->add_option("--port", mock_port, "API port");
  mock->add_option("--agent-port", mock_agent_port, "Coverage agent port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*fuzz) {
      seqfuzz::CampaignConfig config = seqfuzz::load_config_file(config_path);
      config.spec_path = spec_path;
      if (seed) config.rng_seed = *seed;
      if (budget) config.time_budget = *budget;
      if (!corpus_dir.empty()) config.corpus_dir = corpus_dir;
      if (!report_dir.empty()) config.report_dir = report_dir;
      if (!schedule.empty()) {
        try {
          config.schedule = seqfuzz::parse_schedule(schedule);
        } catch (const seqfuzz::Error& e) {
          throw seqfuzz::Error(seqfuzz::ErrorCode::ConfigError, e.what());
        }
      }
      if (!agent.empty()) config.agent_url = agent;
      if (!checker.empty()) config.checker = seqfuzz::parse_checker_mode(checker);
      if (!target.empty()) config.client.base_url = target;
      if (max_sequences) config.max_sequences = *max_sequences;
      seqfuzz::CampaignStats stats = seqfuzz::run_campaign(config);
      std::cout << seqfuzz::format_stats(stats);
      return kExitOk;
    }
    if (*gen) {
      seqfuzz::ApiSpec spec;
      try {
        spec = seqfuzz::load_spec_file(gen_spec);
      } catch (const seqfuzz::Error& e) {
        throw seqfuzz::Error(seqfuzz::ErrorCode::SpecError, e.what());
      }
      auto graph = seqfuzz::build_dependency_graph(spec);
      seqfuzz::Rng rng(gen_seed);
      auto corpus = seqfuzz::generate_corpus(spec, graph, rng);
      for (const auto& w : spec.warnings) std::cerr << "warning: " << w << "\n";
      for (const auto& w : corpus.warnings) std::cerr << "warning: " << w << "\n";
      seqfuzz::write_corpus_dir(gen_out, corpus.sequences);
      if (!gen_report.empty()) {
        std::filesystem::create_directories(gen_report);
        std::ofstream(std::filesystem::path(gen_report) / "dependency_graph.md", std::ios::binary)
            << seqfuzz::render_dependency_graph_markdown(graph);
        std::ofstream(std::filesystem::path(gen_report) / "corpus.md", std::ios::binary)
            << seqfuzz::render_corpus_report(corpus.sequences);
      }
      std::cout << corpus.sequences.size() << " sequences written to " << gen_out << "\n";
      return kExitOk;
    }
    if (*rep) {
      seqfuzz::regenerate_reports(rep_spec, rep_events, rep_out);
      return kExitOk;
    }
    if (*mock) {
      seqfuzz::MockSut sut;
      sut.start(mock_port, mock_agent_port);
      std::cout << "minipet on " << sut.base_url() << ", coverage agent on " << sut.agent_url() << std::endl;
      std::signal(SIGINT, [](int) { g_stop = 1; });
      std::signal(SIGTERM, [](int) { g_stop = 1; });
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      sut.stop();
      return kExitOk;
    }
  } catch (const seqfuzz::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
