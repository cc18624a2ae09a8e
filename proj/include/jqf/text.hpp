#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace jqf {

/// Number of Unicode scalar values in a UTF-8 string (bytes that are not
/// continuation bytes). Lengths throughout the pipeline are code points,
/// never bytes, so qualification is encoding-independent.
std::size_t utf8_length(std::string_view s);

/// Byte offset of the code point with index `cp_index` (clamped to s.size()).
std::size_t utf8_byte_offset(std::string_view s, std::size_t cp_index);

/// Replaces every newline (\r\n, \r or \n) with a single space.
std::string collapse_newlines(std::string_view s);

std::string_view trim(std::string_view s);
std::string_view rtrim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

/// Matching key for journal names: ASCII-casefolded, punctuation stripped,
/// whitespace collapsed, leading "the" dropped. Non-ASCII bytes pass through
/// unchanged; fuzzy matching is deliberately out of scope.
std::string normalize_journal_name(std::string_view name);

} // namespace jqf
