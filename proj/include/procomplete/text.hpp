#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace procomplete {

/// Trims surrounding whitespace and collapses internal runs to one space.
std::string normalize_whitespace(std::string_view text);

/// ASCII-lowercases and splits on maximal runs of non-alphanumeric bytes.
/// Bytes >= 0x80 count as alphanumeric so UTF-8 words stay intact.
std::vector<std::string> tokenize(std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace procomplete
