#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seqfuzz/openapi.hpp"
#include "seqfuzz/rng.hpp"
#include "seqfuzz/sequence.hpp"
#include "seqfuzz/spec_graph.hpp"

namespace seqfuzz {

enum class MutatorKind {
  // byte level
  BitFlip,
  ByteAdd,
  ByteDec,
  ByteFlip,
  ByteInc,
  ByteInteresting,
  ByteNeg,
  ByteRand,
  BytesCopy,
  BytesDelete,
  BytesExpand,
  BytesInsertCopy,
  BytesInsert,
  BytesRandInsert,
  BytesRandSet,
  BytesSet,
  BytesSwap,
  DwordAdd,
  DwordInteresting,
  QwordAdd,
  WordAdd,
  WordInteresting,
  // sequence level
  AddRequest,
  BreakLink,
  DifferentMethod,
  DifferentPath,
  DuplicateRequest,
  EstablishLink,
  RemoveRequest,
  StringInteresting,
  SwapRequests,
};

inline constexpr std::size_t kMutatorCount = 31;
inline constexpr std::size_t kByteMutatorCount = 22;
inline constexpr std::size_t kMaxValueBytes = 4096;

std::string_view to_string(MutatorKind kind);
const std::array<MutatorKind, kMutatorCount>& all_mutators();
bool is_byte_level(MutatorKind kind);

/// Strings handed out by StringInteresting.
const std::vector<std::string>& interesting_strings();

/// AFL-style byte mutation; output is clamped to kMaxValueBytes.
std::string apply_byte_mutator(MutatorKind kind, std::string_view value, Rng& rng);

/// Structural mutation; every kind degrades to a no-op when inapplicable.
RequestSequence apply_sequence_mutator(MutatorKind kind, const RequestSequence& seq, const ApiSpec& spec,
                                       const DependencyGraph& graph, Rng& rng);

/// Uniform choice among the 31 kinds; kept separate so weights can change.
MutatorKind choose_mutator(Rng& rng);

/// Byte mutation of one uniformly chosen literal slot; references are never
/// touched. Returns the input unchanged when the sequence holds no literals.
RequestSequence mutate_literal(MutatorKind kind, const RequestSequence& seq, Rng& rng);

struct MutationTrace {
  std::vector<MutatorKind> applied;
};

/// Stack of 1..4 uniformly chosen mutations.
RequestSequence mutate(const RequestSequence& seq, const ApiSpec& spec, const DependencyGraph& graph,
                       Rng& rng, MutationTrace* trace = nullptr);

} // namespace seqfuzz
