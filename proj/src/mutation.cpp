#include "seqfuzz/mutation.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>

#include "seqfuzz/corpus_gen.hpp"

namespace seqfuzz {
namespace {

constexpr std::uint64_t kArithMax = 35;
constexpr std::size_t kMaxInsert = 16;

const std::vector<std::int64_t> kInteresting8 = {-128, -1, 0, 1, 16, 32, 64, 100, 127};
const std::vector<std::int64_t> kInteresting16 = {-128, -1,  0,    1,    16,   32,   64,    100,  127,
                                                  -32768, -129, 128, 255, 256, 512, 1000, 1024, 4096, 32767};
const std::vector<std::int64_t> kInteresting32 = {
    -128,   -1,    0,    1,    16,    32,    64,          100,        127,       -32768,    -129,
    128,    255,   256,  512,  1000,  1024,  4096,        32767,      -2147483648LL, -100663046, -32769,
    32768,  65535, 65536, 100663045, 2147483647};

void clamp(std::string& value) {
  if (value.size() > kMaxValueBytes) value.resize(kMaxValueBytes);
}

template <std::size_t Width>
void add_at(std::string& v, Rng& rng) {
  if (v.size() < Width) return;
  std::size_t off = rng.below(v.size() - Width + 1);
  std::uint64_t num = 0;
  for (std::size_t i = 0; i < Width; ++i) num |= std::uint64_t(static_cast<std::uint8_t>(v[off + i])) << (8 * i);
  std::uint64_t delta = 1 + rng.below(kArithMax);
  num = rng.coin() ? num + delta : num - delta;
  for (std::size_t i = 0; i < Width; ++i) v[off + i] = static_cast<char>((num >> (8 * i)) & 0xFF);
}

template <std::size_t Width>
void interesting_at(std::string& v, Rng& rng, const std::vector<std::int64_t>& table) {
  if (v.size() < Width) return;
  std::size_t off = rng.below(v.size() - Width + 1);
  auto num = static_cast<std::uint64_t>(table[rng.below(table.size())]);
  for (std::size_t i = 0; i < Width; ++i) v[off + i] = static_cast<char>((num >> (8 * i)) & 0xFF);
}

// Uniform start, then a uniform length that fits.
std::pair<std::size_t, std::size_t> pick_range(std::size_t size, Rng& rng, std::size_t max_len = SIZE_MAX) {
  std::size_t start = rng.below(size);
  std::size_t len = 1 + rng.below(std::min(size - start, max_len));
  return {start, len};
}

std::size_t insert_amount(std::size_t current, Rng& rng) {
  if (current >= kMaxValueBytes) return 0;
  return 1 + rng.below(std::min(kMaxInsert, kMaxValueBytes - current));
}

std::string random_bytes(Rng& rng) {
  std::string out(1 + rng.below(8), '\0');
  for (auto& c : out) c = static_cast<char>(rng.byte());
  return out;
}

} // namespace

std::string_view to_string(MutatorKind kind) {
  switch (kind) {
  case MutatorKind::BitFlip: return "BitFlipMutator";
  case MutatorKind::ByteAdd: return "ByteAddMutator";
  case MutatorKind::ByteDec: return "ByteDecMutator";
  case MutatorKind::ByteFlip: return "ByteFlipMutator";
  case MutatorKind::ByteInc: return "ByteIncMutator";
  case MutatorKind::ByteInteresting: return "ByteInterestingMutator";
  case MutatorKind::ByteNeg: return "ByteNegMutator";
  case MutatorKind::ByteRand: return "ByteRandMutator";
  case MutatorKind::BytesCopy: return "BytesCopyMutator";
  case MutatorKind::BytesDelete: return "BytesDeleteMutator";
  case MutatorKind::BytesExpand: return "BytesExpandMutator";
  case MutatorKind::BytesInsertCopy: return "BytesInsertCopyMutator";
  case MutatorKind::BytesInsert: return "BytesInsertMutator";
  case MutatorKind::BytesRandInsert: return "BytesRandInsertMutator";
  case MutatorKind::BytesRandSet: return "BytesRandSetMutator";
  case MutatorKind::BytesSet: return "BytesSetMutator";
  case MutatorKind::BytesSwap: return "BytesSwapMutator";
  case MutatorKind::DwordAdd: return "DwordAddMutator";
  case MutatorKind::DwordInteresting: return "DwordInterestingMutator";
  case MutatorKind::QwordAdd: return "QwordAddMutator";
  case MutatorKind::WordAdd: return "WordAddMutator";
  case MutatorKind::WordInteresting: return "WordInterestingMutator";
  case MutatorKind::AddRequest: return "AddRequestMutator";
  case MutatorKind::BreakLink: return "BreakLinkMutator";
  case MutatorKind::DifferentMethod: return "DifferentMethodMutator";
  case MutatorKind::DifferentPath: return "DifferentPathMutator";
  case MutatorKind::DuplicateRequest: return "DuplicateRequestMutator";
  case MutatorKind::EstablishLink: return "EstablishLinkMutator";
  case MutatorKind::RemoveRequest: return "RemoveRequestMutator";
  case MutatorKind::StringInteresting: return "StringInterestingMutator";
  case MutatorKind::SwapRequests: return "SwapRequestsMutator";
  }
  return "?";
}

const std::array<MutatorKind, kMutatorCount>& all_mutators() {
  static const std::array<MutatorKind, kMutatorCount> kinds = [] {
    std::array<MutatorKind, kMutatorCount> out{};
    for (std::size_t i = 0; i < kMutatorCount; ++i) out[i] = static_cast<MutatorKind>(i);
    return out;
  }();
  return kinds;
}

bool is_byte_level(MutatorKind kind) { return static_cast<std::size_t>(kind) < kByteMutatorCount; }

const std::vector<std::string>& interesting_strings() {
  static const std::vector<std::string> values = {
      "",
      "'",
      "\"",
      "%s%s%s",
      "../../etc/passwd",
      "<script>alert(1)</script>",
      "0",
      "-1",
      "999999999999999999",
      std::string(1, '\0'),
      "\xE2\x98\x83",
      std::string(1024, 'A'),
  };
  return values;
}

std::string apply_byte_mutator(MutatorKind kind, std::string_view input, Rng& rng) {
  std::string v(input);
  const std::size_t n = v.size();
  switch (kind) {
  case MutatorKind::BitFlip:
    if (n) {
      std::size_t bit = rng.below(n * 8);
      v[bit / 8] = static_cast<char>(v[bit / 8] ^ (1u << (bit % 8)));
    }
    break;
  case MutatorKind::ByteAdd: add_at<1>(v, rng); break;
  case MutatorKind::WordAdd: add_at<2>(v, rng); break;
  case MutatorKind::DwordAdd: add_at<4>(v, rng); break;
  case MutatorKind::QwordAdd: add_at<8>(v, rng); break;
  case MutatorKind::ByteDec:
    if (n) --v[rng.below(n)];
    break;
  case MutatorKind::ByteInc:
    if (n) ++v[rng.below(n)];
    break;
  case MutatorKind::ByteFlip:
    if (n) {
      std::size_t i = rng.below(n);
      v[i] = static_cast<char>(~static_cast<unsigned char>(v[i]));
    }
    break;
  case MutatorKind::ByteNeg:
    if (n) {
      std::size_t i = rng.below(n);
      v[i] = static_cast<char>(-static_cast<unsigned char>(v[i]));
    }
    break;
  case MutatorKind::ByteRand:
    if (n) {
      std::size_t i = rng.below(n);
      v[i] = static_cast<char>(static_cast<unsigned char>(v[i]) ^ (1 + rng.below(255)));
    }
    break;
  case MutatorKind::ByteInteresting: interesting_at<1>(v, rng, kInteresting8); break;
  case MutatorKind::WordInteresting: interesting_at<2>(v, rng, kInteresting16); break;
  case MutatorKind::DwordInteresting: interesting_at<4>(v, rng, kInteresting32); break;
  case MutatorKind::BytesDelete:
    if (n) {
      auto [start, len] = pick_range(n, rng);
      v.erase(start, len);
    }
    break;
  case MutatorKind::BytesExpand:
    // Duplicates a range in place.
    if (n) {
      auto [start, len] = pick_range(n, rng, kMaxInsert);
      v.insert(start, v.substr(start, len));
    }
    break;
  case MutatorKind::BytesInsertCopy:
    if (n) {
      auto [start, len] = pick_range(n, rng, kMaxInsert);
      std::size_t at = rng.below(n + 1);
      v.insert(at, v.substr(start, len));
    }
    break;
  case MutatorKind::BytesInsert: {
    std::size_t amount = insert_amount(n, rng);
    if (amount == 0) break;
    std::size_t at = rng.below(n + 1);
    char fill = n ? v[rng.below(n)] : static_cast<char>(rng.byte());
    v.insert(at, amount, fill);
    break;
  }
  case MutatorKind::BytesRandInsert: {
    std::size_t amount = insert_amount(n, rng);
    if (amount == 0) break;
    std::size_t at = rng.below(n + 1);
    v.insert(at, amount, static_cast<char>(rng.byte()));
    break;
  }
  case MutatorKind::BytesSet:
    if (n) {
      auto [start, len] = pick_range(n, rng);
      char fill = v[rng.below(n)];
      std::fill_n(v.begin() + static_cast<long>(start), len, fill);
    }
    break;
  case MutatorKind::BytesRandSet:
    if (n) {
      auto [start, len] = pick_range(n, rng);
      std::fill_n(v.begin() + static_cast<long>(start), len, static_cast<char>(rng.byte()));
    }
    break;
  case MutatorKind::BytesCopy:
    if (n > 1) {
      auto [src, len] = pick_range(n, rng);
      std::size_t dst = rng.below(n - len + 1);
      std::string chunk = v.substr(src, len);
      std::copy(chunk.begin(), chunk.end(), v.begin() + static_cast<long>(dst));
    }
    break;
  case MutatorKind::BytesSwap:
    // Two equal-length, non-overlapping ranges.
    if (n > 1) {
      std::size_t len = 1 + rng.below(n / 2);
      std::size_t first = rng.below(n - 2 * len + 1);
      std::size_t second = first + len + rng.below(n - first - 2 * len + 1);
      std::swap_ranges(v.begin() + static_cast<long>(first), v.begin() + static_cast<long>(first + len),
                       v.begin() + static_cast<long>(second));
    }
    break;
  default:
    break;
  }
  clamp(v);
  return v;
}

MutatorKind choose_mutator(Rng& rng) { return static_cast<MutatorKind>(rng.below(kMutatorCount)); }

RequestSequence mutate_literal(MutatorKind kind, const RequestSequence& seq, Rng& rng) {
  RequestSequence out = seq;
  std::vector<SlotRef> literals;
  for (auto& slot : all_slots(out))
    if (std::holds_alternative<Literal>(*slot_value(out, slot))) literals.push_back(std::move(slot));
  if (literals.empty()) return out;
  auto& lit = std::get<Literal>(*slot_value(out, literals[rng.below(literals.size())]));
  lit.bytes = apply_byte_mutator(kind, lit.bytes, rng);
  return out;
}

namespace {

Literal default_literal(const ApiSpec& spec, const TemplatedRequest& request, const SlotRef& slot) {
  const SchemaNode* schema = slot_schema(spec, request, slot);
  return Literal{schema != nullptr ? default_value(*schema) : "a"};
}

// Replaces references into `removed_or_bad` positions with schema defaults.
template <typename Pred>
void drop_references(RequestSequence& seq, const ApiSpec& spec, Pred&& bad) {
  for (const auto& slot : all_slots(seq)) {
    ParameterValue* value = slot_value(seq, slot);
    if (const auto* ref = std::get_if<Reference>(value); ref != nullptr && bad(slot.request, *ref))
      *value = default_literal(spec, seq.requests[slot.request], slot);
  }
}

template <typename Fn>
void remap_references(RequestSequence& seq, Fn&& fn) {
  for (const auto& slot : all_slots(seq)) {
    if (auto* ref = std::get_if<Reference>(slot_value(seq, slot))) ref->request = fn(ref->request);
  }
}

TemplatedRequest random_request(const OperationDescriptor& op, Rng& rng) {
  TemplatedRequest req;
  req.method = op.method;
  req.path = op.path;
  for (const auto& p : op.parameters)
    if (p.location != ParamLocation::BodyField) req.params[p.name] = Literal{random_bytes(rng)};
  if (op.request_body) {
    if (op.is_json_body())
      req.body = build_body(*op.request_body, "", [&](const std::string&, const SchemaNode&) -> ParameterValue {
        return Literal{random_bytes(rng)};
      });
    else
      req.body = BodyValue::make_leaf(Literal{random_bytes(rng)});
  }
  return req;
}

// Keeps values for parameters the new operation shares, fills the rest.
TemplatedRequest retarget(const TemplatedRequest& old, const OperationDescriptor& op, Rng& rng) {
  TemplatedRequest req = default_request(op, rng);
  for (auto& [name, value] : req.params) {
    auto it = old.params.find(name);
    if (it != old.params.end()) value = it->second;
  }
  if (req.body && old.body && op.is_json_body()) req.body = old.body;
  return req;
}

RequestSequence add_request(const RequestSequence& seq, const ApiSpec& spec, Rng& rng) {
  RequestSequence out = seq;
  if (spec.operations.empty()) return out;
  out.requests.push_back(random_request(spec.operations[rng.below(spec.operations.size())], rng));
  return out;
}

RequestSequence break_link(const RequestSequence& seq, Rng& rng) {
  RequestSequence out = seq;
  std::vector<SlotRef> refs;
  for (auto& slot : all_slots(out))
    if (std::holds_alternative<Reference>(*slot_value(out, slot))) refs.push_back(std::move(slot));
  if (refs.empty()) return out;
  *slot_value(out, refs[rng.below(refs.size())]) = Literal{random_bytes(rng)};
  return out;
}

RequestSequence different_method(const RequestSequence& seq, const ApiSpec& spec, Rng& rng) {
  RequestSequence out = seq;
  std::size_t i = rng.below(out.requests.size());
  const auto& req = out.requests[i];
  std::vector<const OperationDescriptor*> options;
  for (const auto& op : spec.operations)
    if (op.path == req.path && op.method != req.method) options.push_back(&op);
  if (options.empty()) return out;
  TemplatedRequest replaced = retarget(req, *options[rng.below(options.size())], rng);
  out.requests[i] = std::move(replaced);
  return out;
}

RequestSequence different_path(const RequestSequence& seq, const ApiSpec& spec, Rng& rng) {
  RequestSequence out = seq;
  std::size_t i = rng.below(out.requests.size());
  std::vector<const OperationDescriptor*> options;
  for (const auto& op : spec.operations)
    if (!(op.path == out.requests[i].path && op.method == out.requests[i].method)) options.push_back(&op);
  if (options.empty()) return out;
  out.requests[i] = default_request(*options[rng.below(options.size())], rng);
  return out;
}

RequestSequence duplicate_request(const RequestSequence& seq, Rng& rng) {
  RequestSequence out = seq;
  std::size_t i = rng.below(out.requests.size());
  remap_references(out, [&](std::size_t idx) { return idx > i ? idx + 1 : idx; });
  TemplatedRequest copy = out.requests[i];
  out.requests.insert(out.requests.begin() + static_cast<long>(i) + 1, std::move(copy));
  return out;
}

RequestSequence establish_link(const RequestSequence& seq, const ApiSpec& spec, Rng& rng) {
  RequestSequence out = seq;
  struct Candidate {
    SlotRef slot;
    Reference link;
  };
  std::vector<Candidate> candidates;
  std::vector<std::vector<std::string>> fields(out.requests.size());
  std::vector<std::string> contexts(out.requests.size());
  for (std::size_t i = 0; i < out.requests.size(); ++i) {
    if (const auto* op = spec.find(out.requests[i].path, out.requests[i].method)) fields[i] = op->response_fields();
    contexts[i] = path_context(out.requests[i].path);
  }
  for (const auto& slot : all_slots(out)) {
    const ParameterValue* value = slot_value(out, slot);
    for (std::size_t producer = 0; producer < slot.request; ++producer) {
      for (const auto& field : fields[producer]) {
        if (!names_related(field, contexts[producer], slot.name)) continue;
        Reference link{producer, field};
        if (const auto* ref = std::get_if<Reference>(value); ref != nullptr && *ref == link) continue;
        candidates.push_back(Candidate{slot, link});
      }
    }
  }
  if (candidates.empty()) return out;
  const Candidate& chosen = candidates[rng.below(candidates.size())];
  *slot_value(out, chosen.slot) = chosen.link;
  return out;
}

RequestSequence remove_request(const RequestSequence& seq, const ApiSpec& spec, Rng& rng) {
  RequestSequence out = seq;
  if (out.requests.size() <= 1) return out;
  std::size_t i = rng.below(out.requests.size());
  drop_references(out, spec, [&](std::size_t, const Reference& ref) { return ref.request == i; });
  out.requests.erase(out.requests.begin() + static_cast<long>(i));
  remap_references(out, [&](std::size_t idx) { return idx > i ? idx - 1 : idx; });
  return out;
}

RequestSequence string_interesting(const RequestSequence& seq, const ApiSpec& spec, Rng& rng) {
  RequestSequence out = seq;
  std::vector<SlotRef> strings;
  for (auto& slot : all_slots(out)) {
    if (!std::holds_alternative<Literal>(*slot_value(out, slot))) continue;
    const SchemaNode* schema = slot_schema(spec, out.requests[slot.request], slot);
    if (schema == nullptr || schema->kind == SchemaKind::String) strings.push_back(std::move(slot));
  }
  if (strings.empty()) return out;
  const SlotRef& target = strings[rng.below(strings.size())];
  const auto& values = interesting_strings();
  *slot_value(out, target) = Literal{values[rng.below(values.size())]};
  return out;
}

RequestSequence swap_requests(const RequestSequence& seq, const ApiSpec& spec, Rng& rng) {
  RequestSequence out = seq;
  std::size_t n = out.requests.size();
  if (n < 2) return out;
  std::size_t a = rng.below(n);
  std::size_t b = rng.below(n - 1);
  if (b >= a) ++b;
  std::swap(out.requests[a], out.requests[b]);
  remap_references(out, [&](std::size_t idx) { return idx == a ? b : idx == b ? a : idx; });
  drop_references(out, spec, [](std::size_t holder, const Reference& ref) { return ref.request >= holder; });
  return out;
}

} // namespace

RequestSequence apply_sequence_mutator(MutatorKind kind, const RequestSequence& seq, const ApiSpec& spec,
                                       const DependencyGraph& graph, Rng& rng) {
  (void)graph;
  if (seq.requests.empty()) return seq;
  switch (kind) {
  case MutatorKind::AddRequest: return add_request(seq, spec, rng);
  case MutatorKind::BreakLink: return break_link(seq, rng);
  case MutatorKind::DifferentMethod: return different_method(seq, spec, rng);
  case MutatorKind::DifferentPath: return different_path(seq, spec, rng);
  case MutatorKind::DuplicateRequest: return duplicate_request(seq, rng);
  case MutatorKind::EstablishLink: return establish_link(seq, spec, rng);
  case MutatorKind::RemoveRequest: return remove_request(seq, spec, rng);
  case MutatorKind::StringInteresting: return string_interesting(seq, spec, rng);
  case MutatorKind::SwapRequests: return swap_requests(seq, spec, rng);
  default: return seq;
  }
}

RequestSequence mutate(const RequestSequence& seq, const ApiSpec& spec, const DependencyGraph& graph, Rng& rng,
                       MutationTrace* trace) {
  RequestSequence out = seq;
  std::size_t stack = 1 + rng.below(4);
  for (std::size_t i = 0; i < stack; ++i) {
    MutatorKind kind = choose_mutator(rng);
    if (trace != nullptr) trace->applied.push_back(kind);
    out = is_byte_level(kind) ? mutate_literal(kind, out, rng)
                              : apply_sequence_mutator(kind, out, spec, graph, rng);
  }
  return out;
}

} // namespace seqfuzz
