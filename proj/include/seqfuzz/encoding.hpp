#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace seqfuzz {

/// Standard alphabet with padding.
std::string base64_encode(std::string_view bytes);
/// nullopt on any deviation from the padded standard alphabet.
std::optional<std::string> base64_decode(std::string_view text);

/// Percent-encodes everything outside the RFC 3986 unreserved set.
std::string percent_encode(std::string_view bytes);

/// JSON string literal for arbitrary bytes: quotes, backslashes and control
/// characters are escaped, all other bytes pass through untouched.
std::string json_quote_bytes(std::string_view bytes);

} // namespace seqfuzz
