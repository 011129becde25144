#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "seqfuzz/rng.hpp"

namespace seqfuzz {

/// Produces a string fully matching `pattern` (ECMAScript-style subset:
/// literals, escapes, classes, groups, alternation, quantifiers). Returns
/// nullopt when the pattern uses unsupported syntax or cannot match any
/// string of at most `max_length` bytes.
std::optional<std::string> generate_from_pattern(std::string_view pattern, Rng& rng,
                                                 std::size_t max_length = 256);

} // namespace seqfuzz
