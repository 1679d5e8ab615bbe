#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rpys {

// Inclusive year range. Values without a year pass iff keep_missing.
struct YearWindow {
    int lo = 1000;
    int hi = 2999;
    bool keep_missing = true;

    bool admits(std::optional<int> year) const noexcept {
        if (!year) return keep_missing;
        return *year >= lo && *year <= hi;
    }
    bool operator==(const YearWindow&) const = default;
};

struct ImportConfig {
    YearWindow rpy;
    YearWindow py;
    // 0 keeps every cited reference of a record.
    std::size_t max_cr_per_record = 0;

    // Throws ArgumentError when a window is inverted.
    void validate() const;
    bool operator==(const ImportConfig&) const = default;
};

// A field the importer does not interpret, kept so records survive a
// write/read cycle unchanged.
struct TaggedField {
    std::string tag;
    std::vector<std::string> lines;
    bool operator==(const TaggedField&) const = default;
};

struct CitingRecord {
    std::string record_id;
    std::optional<int> py;
    std::string source_title;
    std::vector<std::string> raw_cr_lines;
    std::vector<TaggedField> other_fields;
    bool operator==(const CitingRecord&) const = default;
};

struct CitedRefFields {
    std::string raw;
    std::optional<std::string> first_author;
    std::optional<int> rpy;
    std::optional<std::string> source;
    std::optional<std::string> volume;
    std::optional<std::string> start_page;
    std::optional<std::string> doi;
    bool operator==(const CitedRefFields&) const = default;
};

struct MalformedLine {
    std::size_t line_number = 0;
    std::string reason;
    bool operator==(const MalformedLine&) const = default;
};

// Every CR line read ends up in exactly one of: a retained record, the
// RPY-window drop count, the max-CR truncation count, or the lines of a
// record removed by the PY window.
struct ParseReport {
    std::size_t records_read = 0;
    std::size_t records_dropped_by_window = 0;
    std::size_t cr_lines_read = 0;
    std::size_t cr_lines_dropped_by_window = 0;
    std::size_t cr_lines_truncated = 0;
    std::size_t cr_lines_dropped_with_record = 0;
    std::vector<MalformedLine> malformed_lines;
};

struct ParseResult {
    std::vector<CitingRecord> records;
    ParseReport report;
};

/// Reads a two-letter tagged export ("FN"/"VR" header, PT...ER record
/// blocks, EF trailer). Each CR continuation line is one cited reference.
/// Records failing the PY window are dropped, the CR list is truncated to
/// max_cr_per_record and finally filtered by the RPY window.
///
/// Throws FormatError when the FN header is missing and TruncationError
/// when a record block is not closed before EF or end of input.
ParseResult parse_export(std::istream& in, const ImportConfig& cfg);
ParseResult parse_export(std::string_view text, const ImportConfig& cfg);
ParseResult parse_export_file(const std::filesystem::path& path, const ImportConfig& cfg);

/// Splits a cited-reference string into fields. Never fails; fields that
/// cannot be recognised stay empty and `raw` is kept verbatim.
CitedRefFields parse_reference_string(std::string_view raw);

std::vector<CitedRefFields> apply_rpy_window(std::vector<CitedRefFields> refs,
                                             const ImportConfig& cfg);

// Writes records back in the tagged layout: other fields first, then SO,
// CR, PY, UT, ER. parse_export of the output reproduces the records.
void write_export(std::ostream& out, std::span<const CitingRecord> records);
std::string write_export(std::span<const CitingRecord> records);

// Replaces invalid UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view in);

}  // namespace rpys
