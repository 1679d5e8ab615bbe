#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "rpys/ingest.hpp"

namespace rpys {

// Decodes UTF-8 into code points. Invalid bytes decode as U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

// Lower-cases, strips Latin diacritics (å -> a, ß -> ss, ...) and collapses
// runs of whitespace to one space, trimming both ends.
std::string fold_text(std::string_view s);

/// Comparison key of a cited reference: folded first author and source
/// joined by one space. Volume, page and DOI are left out; clustering uses
/// them as constraints instead.
std::string normalize(const CitedRefFields& fields);

std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

// 1 - d / max(|a|, |b|) with lengths in code points; 1 when both empty.
double similarity_from_distance(std::size_t distance, std::size_t max_len);
double similarity(std::string_view a, std::string_view b);
double similarity(std::u32string_view a, std::u32string_view b);

}  // namespace rpys
