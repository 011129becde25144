#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "seqfuzz/coverage.hpp"
#include "seqfuzz/sequence.hpp"

namespace seqfuzz {

enum class ScheduleKind { Fast, Explore, Lin, Exploit, Quad, Coe };

std::string_view to_string(ScheduleKind kind);
/// Throws Error(UnknownSchedule).
ScheduleKind parse_schedule(std::string_view text);

inline constexpr double kBeta = 4.0;
inline constexpr std::uint32_t kMaxEnergy = 64;
inline constexpr std::size_t kMedianRefresh = 64;

/// The schedule formula on already-derived inputs; result in [1, cap].
std::uint32_t compute_energy(ScheduleKind kind, double alpha, std::uint64_t s, std::uint64_t f, double mu,
                             std::uint32_t cap = kMaxEnergy);

/// Base energy: faster and shorter than the corpus medians means more.
double base_energy(double exec_time, std::size_t length, double median_exec_time, double median_length);

struct CorpusEntry {
  RequestSequence sequence;
  std::string serialized;
  double exec_time = 0;
  std::uint64_t signature = 0;
  std::uint64_t fuzz_count = 0;      ///< f in the literature sense: batches generated
  std::uint64_t selection_count = 0; ///< s
  std::uint64_t discovered_at = 0;
};

class Corpus {
public:
  /// Appends when novelty is non-empty (or `force`) and the bytes are new.
  /// The signature's frequency is counted either way.
  bool add_if_interesting(const RequestSequence& seq, const CoverageSnapshot& snapshot, const Novelty& novelty,
                          double exec_time, std::uint64_t tick, bool force = false);

  const std::vector<CorpusEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  CorpusEntry& at(std::size_t i) { return entries_.at(i); }

  std::uint64_t frequency(std::uint64_t signature) const;
  /// Mean over all observed signatures; 0 when none.
  double mean_frequency() const;
  const std::map<std::uint64_t, std::uint64_t>& signature_freq() const { return signature_freq_; }

  double median_exec_time();
  double median_length();

private:
  void refresh_medians();

  std::vector<CorpusEntry> entries_;
  std::set<std::string> seen_;
  std::map<std::uint64_t, std::uint64_t> signature_freq_;
  std::optional<std::size_t> medians_at_;
  double median_exec_time_ = 0;
  double median_length_ = 0;
};

std::uint32_t assign_energy(Corpus& corpus, const CorpusEntry& entry, ScheduleKind kind,
                            std::uint32_t cap = kMaxEnergy);

struct Selection {
  std::size_t index = 0;
  std::uint32_t energy = 1;
};

/// Round-robin over insertion order.
class Scheduler {
public:
  explicit Scheduler(ScheduleKind kind, std::uint32_t cap = kMaxEnergy) : kind_(kind), cap_(cap) {}

  /// Bumps the entry's selection count before computing its energy.
  /// Throws Error(EmptyCorpus).
  Selection select_next(Corpus& corpus);
  ScheduleKind kind() const { return kind_; }

private:
  ScheduleKind kind_;
  std::uint32_t cap_;
  std::size_t cursor_ = 0;
};

} // namespace seqfuzz
