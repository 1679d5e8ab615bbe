#include "rpys/spectroscopy.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include "rpys/csv.hpp"
#include "rpys/error.hpp"
#include "rpys/text.hpp"
#include "strutil.hpp"

namespace rpys {

using nlohmann::json;

void MarkerSpec::validate() const {
    if (!first_author_prefix && !doi)
        throw ArgumentError("a marker needs an author prefix or a DOI besides its year");
    if (rpy < 1000 || rpy > 2999)
        throw ArgumentError(fmt::format("marker year {} outside [1000, 2999]", rpy));
}

MarkerSpec parse_marker(std::string_view text) {
    MarkerSpec m;
    bool have_rpy = false;
    for (auto part : detail::split(text, ',')) {
        part = detail::trim(part);
        if (part.empty()) continue;
        auto eq = part.find('=');
        if (eq == std::string_view::npos)
            throw ArgumentError(fmt::format("marker item '{}' is not key=value", part));
        auto key = detail::ascii_lower(detail::trim(part.substr(0, eq)));
        auto value = std::string(detail::trim(part.substr(eq + 1)));
        if (value.empty()) throw ArgumentError(fmt::format("marker key '{}' has no value", key));
        if (key == "author") {
            m.first_author_prefix = value;
        } else if (key == "rpy" || key == "year") {
            if (!detail::all_digits(value) || value.size() != 4)
                throw ArgumentError(fmt::format("marker year '{}' is not a four-digit year", value));
            m.rpy = std::stoi(value);
            have_rpy = true;
        } else if (key == "volume" || key == "vol") {
            m.volume = value;
        } else if (key == "page") {
            m.start_page = value;
        } else if (key == "doi") {
            m.doi = detail::ascii_lower(value);
        } else {
            throw ArgumentError(fmt::format("unknown marker key '{}'", key));
        }
    }
    if (!have_rpy) throw ArgumentError("marker needs rpy=<year>");
    m.validate();
    return m;
}

std::string format_marker(const MarkerSpec& m) {
    std::string out;
    if (m.first_author_prefix) out += "author=" + *m.first_author_prefix + ",";
    out += fmt::format("rpy={}", m.rpy);
    if (m.volume) out += ",volume=" + *m.volume;
    if (m.start_page) out += ",page=" + *m.start_page;
    if (m.doi) out += ",doi=" + *m.doi;
    return out;
}

json to_json(const MarkerSpec& m) {
    json j = {{"rpy", m.rpy}};
    if (m.first_author_prefix) j["author"] = *m.first_author_prefix;
    if (m.volume) j["volume"] = *m.volume;
    if (m.start_page) j["page"] = *m.start_page;
    if (m.doi) j["doi"] = *m.doi;
    return j;
}

MarkerSpec marker_from_json(const json& j) {
    if (j.is_string()) return parse_marker(j.get<std::string>());
    if (!j.is_object()) throw ArgumentError("marker must be an object or a marker string");
    MarkerSpec m;
    auto rpy = j.find("rpy");
    if (rpy == j.end() || !rpy->is_number_integer()) throw ArgumentError("marker needs integer rpy");
    m.rpy = rpy->get<int>();
    auto text = [&](const char* key) -> std::optional<std::string> {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) return std::nullopt;
        if (!it->is_string()) throw ArgumentError(fmt::format("marker field {} must be text", key));
        return it->get<std::string>();
    };
    m.first_author_prefix = text("author");
    m.volume = text("volume");
    m.start_page = text("page");
    m.doi = text("doi");
    if (m.doi) m.doi = detail::ascii_lower(*m.doi);
    m.validate();
    return m;
}

MarkerMode parse_marker_mode(std::string_view s) {
    if (s == "any") return MarkerMode::any;
    if (s == "all") return MarkerMode::all;
    throw ArgumentError(fmt::format("marker mode must be 'any' or 'all', got '{}'", s));
}

std::string_view to_string(MarkerMode m) { return m == MarkerMode::any ? "any" : "all"; }

bool matches_marker(const CitedRefFields& ref, const MarkerSpec& m) {
    if (!ref.rpy || *ref.rpy != m.rpy) return false;
    if (m.first_author_prefix) {
        if (!ref.first_author) return false;
        if (!fold_text(*ref.first_author).starts_with(fold_text(*m.first_author_prefix)))
            return false;
    }
    if (m.doi && (!ref.doi || detail::ascii_lower(*ref.doi) != detail::ascii_lower(*m.doi)))
        return false;
    if (m.volume && (!ref.volume || detail::trim(*ref.volume) != detail::trim(*m.volume)))
        return false;
    if (m.start_page &&
        (!ref.start_page || detail::trim(*ref.start_page) != detail::trim(*m.start_page)))
        return false;
    return true;
}

bool matches_marker(const ReferenceVariant& v, const MarkerSpec& m) {
    return matches_marker(v.fields, m);
}

FilterResult cocitation_filter(Workspace ws, std::span<const MarkerSpec> markers, MarkerMode mode) {
    if (markers.empty()) throw ArgumentError("co-citation filter needs at least one marker");
    for (const auto& m : markers) m.validate();

    std::set<RecordId> kept;
    std::erase_if(ws.records, [&](const CitingRecord& r) {
        std::vector<bool> hit(markers.size(), false);
        for (const auto& line : r.raw_cr_lines) {
            auto fields = parse_reference_string(line);
            for (std::size_t k = 0; k < markers.size(); ++k)
                if (!hit[k] && matches_marker(fields, markers[k])) hit[k] = true;
        }
        bool keep = mode == MarkerMode::any ? std::find(hit.begin(), hit.end(), true) != hit.end()
                                            : std::find(hit.begin(), hit.end(), false) == hit.end();
        if (keep) kept.insert(r.record_id);
        return !keep;
    });
    for (auto& v : ws.variants)
        std::erase_if(v.citing_ids, [&](const RecordId& id) { return !kept.contains(id); });
    std::erase_if(ws.variants, [](const ReferenceVariant& v) { return v.citing_ids.empty(); });

    json marker_args = json::array();
    for (const auto& m : markers) marker_args.push_back(format_marker(m));
    ws.history.push_back({"cocite", {{"markers", marker_args}, {"mode", to_string(mode)}}});

    FilterResult out;
    if (ws.records.empty()) out.warning = "no citing record matches the marker set";
    out.workspace = std::move(ws);
    return out;
}

std::vector<SpectrumPoint> spectrum(const Workspace& ws, int lo, int hi, Backend backend) {
    if (lo > hi) throw ArgumentError(fmt::format("spectrum range is inverted: [{}, {}]", lo, hi));
    const auto n = static_cast<std::size_t>(hi - lo) + 1;
    std::vector<SpectrumPoint> points(n);
    std::vector<std::int64_t> ncr(n, 0);
    for (std::size_t i = 0; i < n; ++i) points[i].rpy = lo + static_cast<int>(i);
    for (const auto& v : ws.variants) {
        if (!v.fields.rpy || *v.fields.rpy < lo || *v.fields.rpy > hi) continue;
        auto i = static_cast<std::size_t>(*v.fields.rpy - lo);
        ncr[i] += v.ncr();
        points[i].distinct += 1;
    }
    auto dev = kernels::median_deviation(ncr, backend);
    for (std::size_t i = 0; i < n; ++i) {
        points[i].ncr = ncr[i];
        points[i].median_dev = dev[i];
    }
    return points;
}

std::optional<std::pair<int, int>> spectrum_range(const Workspace& ws) {
    std::optional<std::pair<int, int>> r;
    for (const auto& v : ws.variants) {
        if (!v.fields.rpy) continue;
        int y = *v.fields.rpy;
        if (y < ws.config.rpy.lo || y > ws.config.rpy.hi) continue;
        if (!r)
            r.emplace(y, y);
        else
            r = std::pair{std::min(r->first, y), std::max(r->second, y)};
    }
    return r;
}

std::vector<int> detect_peaks(std::span<const SpectrumPoint> spec, double min_dev) {
    std::vector<int> peaks;
    std::size_t i = 0;
    while (i < spec.size()) {
        std::size_t j = i;
        while (j + 1 < spec.size() && spec[j + 1].ncr == spec[i].ncr) ++j;
        const auto v = spec[i].ncr;
        const bool left_lower = i == 0 || spec[i - 1].ncr < v;
        const bool right_lower = j + 1 == spec.size() || spec[j + 1].ncr < v;
        const bool whole_series = i == 0 && j + 1 == spec.size();
        if (left_lower && right_lower && !whole_series && spec[i].median_dev >= min_dev)
            peaks.push_back(spec[i].rpy);
        i = j + 1;
    }
    return peaks;
}

std::vector<Contributor> top_contributors(const Workspace& ws, int rpy, double share_threshold) {
    if (!(share_threshold >= 0.0 && share_threshold < 1.0))
        throw ArgumentError(fmt::format("share threshold {} outside [0, 1)", share_threshold));
    std::int64_t total = 0;
    for (const auto& v : ws.variants)
        if (v.fields.rpy == rpy) total += v.ncr();
    std::vector<Contributor> out;
    if (total == 0) return out;
    for (const auto& v : ws.variants) {
        if (v.fields.rpy != rpy) continue;
        double share = static_cast<double>(v.ncr()) / static_cast<double>(total);
        if (share > share_threshold) out.push_back({v.variant_id, v.fields.raw, v.ncr(), share});
    }
    std::sort(out.begin(), out.end(), [](const Contributor& a, const Contributor& b) {
        if (a.ncr != b.ncr) return a.ncr > b.ncr;
        return a.raw < b.raw;
    });
    return out;
}

std::vector<PeakReport> peak_reports(const Workspace& ws, std::span<const SpectrumPoint> spec,
                                     double min_dev, double share_threshold) {
    std::vector<PeakReport> out;
    for (int year : detect_peaks(spec, min_dev)) {
        const auto& p = spec[static_cast<std::size_t>(year - spec.front().rpy)];
        out.push_back({year, p.ncr, p.median_dev, top_contributors(ws, year, share_threshold)});
    }
    return out;
}

Comparison compare_spectra(std::span<const NamedSpectrum> specs) {
    if (specs.size() < 2) throw ArgumentError("comparison needs at least two spectra");
    int lo = std::numeric_limits<int>::min();
    int hi = std::numeric_limits<int>::max();
    bool differ = false;
    for (const auto& s : specs) {
        if (s.points.empty()) throw ArgumentError(fmt::format("spectrum '{}' is empty", s.name));
        for (std::size_t i = 0; i < s.points.size(); ++i)
            if (s.points[i].rpy != s.points.front().rpy + static_cast<int>(i))
                throw ArgumentError(fmt::format("spectrum '{}' is not dense", s.name));
        if (s.points.front().rpy != specs[0].points.front().rpy ||
            s.points.back().rpy != specs[0].points.back().rpy)
            differ = true;
        lo = std::max(lo, s.points.front().rpy);
        hi = std::min(hi, s.points.back().rpy);
    }
    if (lo > hi) throw ArgumentError("spectra have no year in common");

    Comparison cmp;
    for (const auto& s : specs) cmp.names.push_back(s.name);
    if (differ) cmp.warning = fmt::format("year ranges differ; compared on [{}, {}]", lo, hi);
    for (int y = lo; y <= hi; ++y) {
        ComparisonRow row;
        row.rpy = y;
        for (const auto& s : specs) {
            const auto& p = s.points[static_cast<std::size_t>(y - s.points.front().rpy)];
            row.ncr.push_back(p.ncr);
            row.median_dev.push_back(p.median_dev);
        }
        for (std::size_t k = 1; k < specs.size(); ++k) row.delta.push_back(row.ncr[k] - row.ncr[0]);
        cmp.rows.push_back(std::move(row));
    }
    return cmp;
}

std::string format_number(double v) {
    if (v == 0.0) return "0";
    return fmt::format("{}", v);
}

void write_graph_csv(std::ostream& out, std::span<const SpectrumPoint> spec) {
    csv::write_row(out, {"rpy", "ncr", "distinct_variants", "median_dev"});
    for (const auto& p : spec)
        csv::write_row(out, {std::to_string(p.rpy), std::to_string(p.ncr),
                             std::to_string(p.distinct), format_number(p.median_dev)});
}

void write_peaks_csv(std::ostream& out, std::span<const SpectrumPoint> spec,
                     std::span<const int> peak_years) {
    csv::write_row(out, {"rpy", "ncr", "median_dev"});
    for (int y : peak_years) {
        auto it = std::find_if(spec.begin(), spec.end(),
                               [y](const SpectrumPoint& p) { return p.rpy == y; });
        if (it == spec.end()) continue;
        csv::write_row(out, {std::to_string(it->rpy), std::to_string(it->ncr),
                             format_number(it->median_dev)});
    }
}

void write_comparison_csv(std::ostream& out, const Comparison& cmp) {
    std::vector<std::string> header{"rpy"};
    for (const auto& n : cmp.names) {
        header.push_back(n + "_ncr");
        header.push_back(n + "_median_dev");
    }
    for (std::size_t k = 1; k < cmp.names.size(); ++k) header.push_back(cmp.names[k] + "_delta");
    csv::write_row(out, header);
    for (const auto& r : cmp.rows) {
        std::vector<std::string> row{std::to_string(r.rpy)};
        for (std::size_t k = 0; k < r.ncr.size(); ++k) {
            row.push_back(std::to_string(r.ncr[k]));
            row.push_back(format_number(r.median_dev[k]));
        }
        for (auto d : r.delta) row.push_back(std::to_string(d));
        csv::write_row(out, row);
    }
}

}  // namespace rpys
