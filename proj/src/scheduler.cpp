#include "seqfuzz/scheduler.hpp"

#include <algorithm>
#include <cmath>

#include "seqfuzz/error.hpp"

namespace seqfuzz {

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
  case ScheduleKind::Fast: return "fast";
  case ScheduleKind::Explore: return "explore";
  case ScheduleKind::Lin: return "lin";
  case ScheduleKind::Exploit: return "exploit";
  case ScheduleKind::Quad: return "quad";
  case ScheduleKind::Coe: return "coe";
  }
  return "?";
}

ScheduleKind parse_schedule(std::string_view text) {
  for (auto k : {ScheduleKind::Fast, ScheduleKind::Explore, ScheduleKind::Lin, ScheduleKind::Exploit,
                 ScheduleKind::Quad, ScheduleKind::Coe})
    if (to_string(k) == text) return k;
  throw Error(ErrorCode::UnknownSchedule, "unknown schedule: " + std::string(text));
}

double base_energy(double exec_time, std::size_t length, double median_exec_time, double median_length) {
  double alpha = 32.0 * median_exec_time / std::max(exec_time, 1.0) * median_length /
                 std::max(static_cast<double>(length), 1.0);
  return std::clamp(alpha, 1.0, 32.0);
}

std::uint32_t compute_energy(ScheduleKind kind, double alpha, std::uint64_t s, std::uint64_t f, double mu,
                             std::uint32_t cap) {
  const double scaled = alpha / kBeta;
  const double fd = static_cast<double>(std::max<std::uint64_t>(f, 1));
  const double boost = std::ldexp(1.0, static_cast<int>(std::min<std::uint64_t>(s, 10)));
  double e = 0;
  switch (kind) {
  case ScheduleKind::Exploit: e = alpha; break;
  case ScheduleKind::Explore: e = scaled; break;
  case ScheduleKind::Fast: e = scaled * boost / fd; break;
  case ScheduleKind::Coe: e = static_cast<double>(f) > mu ? 1.0 : scaled * boost; break;
  case ScheduleKind::Lin: e = scaled * static_cast<double>(std::max<std::uint64_t>(s, 1)) / fd; break;
  case ScheduleKind::Quad: {
    double sq = static_cast<double>(s) * static_cast<double>(s);
    e = scaled * std::max(sq, 1.0) / fd;
    break;
  }
  }
  double upper = static_cast<double>(std::clamp<std::uint32_t>(cap, 1, kMaxEnergy));
  return static_cast<std::uint32_t>(std::clamp(std::floor(e), 1.0, upper));
}

bool Corpus::add_if_interesting(const RequestSequence& seq, const CoverageSnapshot& snapshot, const Novelty& novelty,
                                double exec_time, std::uint64_t tick, bool force) {
  std::uint64_t sig = coverage_signature(snapshot);
  ++signature_freq_[sig];
  if (novelty.empty() && !force) return false;
  std::string bytes = serialize_sequence_compact(seq);
  if (!seen_.insert(bytes).second) return false;
  CorpusEntry entry;
  entry.sequence = seq;
  entry.serialized = std::move(bytes);
  entry.exec_time = exec_time;
  entry.signature = sig;
  entry.discovered_at = tick;
  entries_.push_back(std::move(entry));
  return true;
}

std::uint64_t Corpus::frequency(std::uint64_t signature) const {
  auto it = signature_freq_.find(signature);
  return it == signature_freq_.end() ? 0 : it->second;
}

double Corpus::mean_frequency() const {
  if (signature_freq_.empty()) return 0;
  double total = 0;
  for (const auto& [sig, n] : signature_freq_) total += static_cast<double>(n);
  return total / static_cast<double>(signature_freq_.size());
}

void Corpus::refresh_medians() {
  if (medians_at_ && entries_.size() < *medians_at_ + kMedianRefresh) return;
  medians_at_ = entries_.size();
  if (entries_.empty()) return;
  std::vector<double> times;
  std::vector<double> lengths;
  for (const auto& e : entries_) {
    times.push_back(e.exec_time);
    lengths.push_back(static_cast<double>(e.sequence.requests.size()));
  }
  auto mid = times.size() / 2;
  std::nth_element(times.begin(), times.begin() + static_cast<long>(mid), times.end());
  std::nth_element(lengths.begin(), lengths.begin() + static_cast<long>(mid), lengths.end());
  median_exec_time_ = times[mid];
  median_length_ = lengths[mid];
}

double Corpus::median_exec_time() {
  refresh_medians();
  return median_exec_time_;
}

double Corpus::median_length() {
  refresh_medians();
  return median_length_;
}

std::uint32_t assign_energy(Corpus& corpus, const CorpusEntry& entry, ScheduleKind kind, std::uint32_t cap) {
  double alpha = base_energy(entry.exec_time, entry.sequence.requests.size(), corpus.median_exec_time(),
                             corpus.median_length());
  return compute_energy(kind, alpha, entry.selection_count, corpus.frequency(entry.signature),
                        corpus.mean_frequency(), cap);
}

Selection Scheduler::select_next(Corpus& corpus) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus is empty");
  if (cursor_ >= corpus.size()) cursor_ = 0;
  Selection sel;
  sel.index = cursor_++;
  CorpusEntry& entry = corpus.at(sel.index);
  ++entry.selection_count;
  sel.energy = assign_energy(corpus, entry, kind_, cap_);
  return sel;
}

} // namespace seqfuzz
