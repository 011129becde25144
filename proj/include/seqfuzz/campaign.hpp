#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "seqfuzz/harness.hpp"
#include "seqfuzz/reporting.hpp"
#include "seqfuzz/scheduler.hpp"

namespace seqfuzz {

enum class ExecTimeMode {
  Virtual,  ///< requests attempted; keeps scheduling independent of wall clock
  Measured, ///< summed latency in ms
};

struct CampaignConfig {
  std::filesystem::path spec_path;
  ClientConfig client;
  CheckerMode checker = CheckerMode::Strict;
  std::optional<std::string> agent_url;
  int fetch_timeout_ms = 2000;
  ScheduleKind schedule = ScheduleKind::Fast;
  std::uint32_t energy_cap = kMaxEnergy;
  ExecTimeMode exec_time = ExecTimeMode::Virtual;
  double time_budget = 60; ///< seconds
  std::uint64_t rng_seed = 0; ///< 0 derives one from the clock
  std::optional<std::filesystem::path> corpus_dir;
  std::filesystem::path report_dir = "report";
  /// Stops after this many executed sequences; absent means budget only.
  std::optional<std::uint64_t> max_sequences;
};

/// Reads a TOML-style file with [target], [checker], [coverage], [scheduler]
/// and [campaign] sections. Throws Error(ConfigError).
CampaignConfig load_config_file(const std::filesystem::path& path);
CampaignConfig parse_config(std::string_view text);
/// Throws Error(ConfigError) for out-of-range values.
void validate_config(const CampaignConfig& config);

struct CampaignStats {
  std::uint64_t sequences_executed = 0;
  std::uint64_t requests_sent = 0;
  std::map<Verdict, std::uint64_t> verdicts;
  std::uint64_t findings = 0;
  std::uint64_t warnings = 0;
  ResponseCoverage response_coverage;
  std::size_t line_bits_set = 0;
  std::size_t line_bits_total = 0;
  std::size_t corpus_size = 0;
  std::uint64_t rng_seed = 0;
  std::string started_at;
  std::string finished_at;

  bool operator==(const CampaignStats&) const = default;
};

/// Pure fold of one event into the counters.
CampaignStats tick_stats(CampaignStats stats, const EventRecord& event);

/// Parse spec, build graph, load or generate the corpus, run seeds, then
/// mutate until the budget is spent; finally write reports.
CampaignStats run_campaign(const CampaignConfig& config);

/// Rebuilds the three Markdown reports from an event log.
void regenerate_reports(const std::filesystem::path& spec_path, const std::filesystem::path& events,
                        const std::filesystem::path& report_dir);

std::string format_stats(const CampaignStats& stats);

} // namespace seqfuzz
