#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rpys/kernels.hpp"
#include "rpys/store.hpp"

namespace rpys {

// Identifies a marker paper among cited references. Absent fields are not
// checked; at least an author prefix or a DOI must be given.
struct MarkerSpec {
    std::optional<std::string> first_author_prefix;
    int rpy = 0;
    std::optional<std::string> volume;
    std::optional<std::string> start_page;
    std::optional<std::string> doi;

    void validate() const;
    bool operator==(const MarkerSpec&) const = default;
};

// Parses "author=Liu,rpy=1960,volume=4,page=1,doi=10.1016/..." (any order).
MarkerSpec parse_marker(std::string_view text);
std::string format_marker(const MarkerSpec& m);
nlohmann::json to_json(const MarkerSpec& m);
MarkerSpec marker_from_json(const nlohmann::json& j);

enum class MarkerMode { any, all };
MarkerMode parse_marker_mode(std::string_view s);
std::string_view to_string(MarkerMode m);

bool matches_marker(const CitedRefFields& ref, const MarkerSpec& m);
bool matches_marker(const ReferenceVariant& v, const MarkerSpec& m);

struct FilterResult {
    Workspace workspace;
    // Set when no record cited the markers; the workspace is then empty.
    std::optional<std::string> warning;
};

/// Keeps the citing records whose own CR lines match at least one marker
/// (any) or every marker (all), then restricts each variant's citing set to
/// the kept records and drops variants left without citations.
FilterResult cocitation_filter(Workspace ws, std::span<const MarkerSpec> markers,
                               MarkerMode mode = MarkerMode::any);

struct SpectrumPoint {
    int rpy = 0;
    std::int64_t ncr = 0;
    std::int64_t distinct = 0;
    double median_dev = 0.0;
    bool operator==(const SpectrumPoint&) const = default;
};

/// Dense spectrogram over [lo, hi]; years without references have ncr 0.
/// median_dev uses the two preceding and two following years, clipped to
/// the range. Throws ArgumentError if lo > hi.
std::vector<SpectrumPoint> spectrum(const Workspace& ws, int lo, int hi,
                                    Backend backend = Backend::parallel);

// The configured RPY window narrowed to the years that occur among the
// variants; nullopt when no variant has a year inside the window.
std::optional<std::pair<int, int>> spectrum_range(const Workspace& ws);

/// Years whose ncr is a strict local maximum (a plateau counts once, at its
/// first year; a series that is one plateau has none) and whose median_dev
/// reaches min_dev. Ascending.
std::vector<int> detect_peaks(std::span<const SpectrumPoint> spec, double min_dev = 1.0);

struct Contributor {
    VariantId variant_id;
    std::string raw;
    std::int64_t ncr = 0;
    double share = 0.0;
    bool operator==(const Contributor&) const = default;
};

/// Variants of `rpy` holding strictly more than share_threshold of the
/// year's summed ncr, ncr descending then raw ascending. Throws
/// ArgumentError unless 0 <= share_threshold < 1.
std::vector<Contributor> top_contributors(const Workspace& ws, int rpy, double share_threshold);

struct PeakReport {
    int rpy = 0;
    std::int64_t ncr = 0;
    double median_dev = 0.0;
    std::vector<Contributor> top_refs;
};

std::vector<PeakReport> peak_reports(const Workspace& ws, std::span<const SpectrumPoint> spec,
                                     double min_dev, double share_threshold);

struct NamedSpectrum {
    std::string name;
    std::vector<SpectrumPoint> points;
};

struct ComparisonRow {
    int rpy = 0;
    std::vector<std::int64_t> ncr;
    std::vector<double> median_dev;
    // ncr of spectrum k minus ncr of the first spectrum, for k >= 1.
    std::vector<std::int64_t> delta;
};

struct Comparison {
    std::vector<std::string> names;
    std::vector<ComparisonRow> rows;
    std::optional<std::string> warning;
};

/// Aligns two or more dense spectra by year. Differing ranges are cut to
/// their intersection and a warning is set; an empty intersection throws.
Comparison compare_spectra(std::span<const NamedSpectrum> specs);

// rpy,ncr,distinct_variants,median_dev
void write_graph_csv(std::ostream& out, std::span<const SpectrumPoint> spec);
// rpy,ncr,median_dev
void write_peaks_csv(std::ostream& out, std::span<const SpectrumPoint> spec,
                     std::span<const int> peak_years);
// rpy, then <name>_ncr,<name>_median_dev per spectrum, then <name>_delta
void write_comparison_csv(std::ostream& out, const Comparison& cmp);

// Shortest round-trip decimal: 7, -2.5, 0.1.
std::string format_number(double v);

}  // namespace rpys
