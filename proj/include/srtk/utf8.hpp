#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace srtk::utf8 {

/// Number of Unicode scalar values in a UTF-8 string. Throws FormatError on invalid input.
std::size_t length(std::string_view text);

bool is_valid(std::string_view text);

/// Substring by scalar-value indices [start, end). Indices are clamped to the string length.
std::string substr(std::string_view text, std::size_t start, std::size_t end);

/// Collapses runs of whitespace to a single space and trims both ends.
std::string normalize_whitespace(std::string_view text);

}  // namespace srtk::utf8
