#include "rpys/ingest.hpp"

#include <fmt/format.h>

#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_set>

#include "rpys/error.hpp"
#include "strutil.hpp"

namespace rpys {

using detail::trim;

void ImportConfig::validate() const {
    if (rpy.lo > rpy.hi)
        throw ArgumentError(fmt::format("RPY window is inverted: [{}, {}]", rpy.lo, rpy.hi));
    if (py.lo > py.hi)
        throw ArgumentError(fmt::format("PY window is inverted: [{}, {}]", py.lo, py.hi));
}

std::string sanitize_utf8(std::string_view in) {
    static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
    std::string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        auto c = static_cast<unsigned char>(in[i]);
        std::size_t len = 0;
        char32_t min = 0;
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            min = 0x80;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            min = 0x800;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            min = 0x10000;
        }
        bool ok = len != 0 && i + len <= in.size();
        char32_t cp = 0;
        if (ok) {
            cp = c & (0x7F >> len);
            for (std::size_t k = 1; k < len; ++k) {
                auto cc = static_cast<unsigned char>(in[i + k]);
                if ((cc & 0xC0) != 0x80) {
                    ok = false;
                    break;
                }
                cp = (cp << 6) | (cc & 0x3F);
            }
        }
        if (ok && (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) ok = false;
        if (ok) {
            out.append(in.substr(i, len));
            i += len;
        } else {
            out.append(kReplacement);
            ++i;
        }
    }
    return out;
}

namespace {

bool is_year_segment(std::string_view s) { return s.size() == 4 && detail::all_digits(s); }

// "V12", "VB14", "P1-5": prefix letter followed by one whitespace-free token
// that carries at least one digit. Rules out words like "PhD" or "Vienna".
std::optional<std::string> prefixed_token(std::string_view seg, char prefix) {
    if (seg.size() < 2 || seg.front() != prefix) return std::nullopt;
    auto rest = seg.substr(1);
    bool digit = false;
    for (char c : rest) {
        if (detail::is_space(c)) return std::nullopt;
        if (c >= '0' && c <= '9') digit = true;
    }
    if (!digit) return std::nullopt;
    return std::string(rest);
}

std::optional<std::string> doi_token(std::string_view seg) {
    if (seg.size() < 4 || !detail::iequals_prefix(seg, "doi") || !detail::is_space(seg[3]))
        return std::nullopt;
    auto rest = trim(seg.substr(3));
    if (!rest.empty() && rest.front() == '[') rest.remove_prefix(1);
    if (!rest.empty() && rest.back() == ']') rest.remove_suffix(1);
    rest = trim(rest);
    if (rest.empty()) return std::nullopt;
    return detail::ascii_lower(rest);
}

}  // namespace

CitedRefFields parse_reference_string(std::string_view raw) {
    CitedRefFields f;
    f.raw = std::string(raw);
    auto parts = detail::split(raw, ',');
    for (auto& p : parts) p = trim(p);

    std::optional<std::size_t> year_at;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (is_year_segment(parts[i])) {
            year_at = i;
            int y = std::stoi(std::string(parts[i]));
            if (y >= 1000 && y <= 2999) f.rpy = y;
            break;
        }
    }
    if (!parts.empty() && !parts[0].empty() && year_at != 0u)
        f.first_author = std::string(parts[0]);

    std::optional<std::size_t> source_at;
    if (f.rpy && *year_at + 1 < parts.size()) {
        auto seg = parts[*year_at + 1];
        if (!seg.empty() && !prefixed_token(seg, 'V') && !prefixed_token(seg, 'P') &&
            !doi_token(seg)) {
            f.source = std::string(seg);
            source_at = *year_at + 1;
        }
    }

    for (std::size_t i = 1; i < parts.size(); ++i) {
        if (i == year_at || i == source_at) continue;
        auto seg = parts[i];
        if (!f.volume) {
            if (auto v = prefixed_token(seg, 'V')) {
                f.volume = std::move(v);
                continue;
            }
        }
        if (!f.start_page) {
            if (auto p = prefixed_token(seg, 'P')) {
                f.start_page = std::move(p);
                continue;
            }
        }
        if (!f.doi) {
            if (auto d = doi_token(seg)) f.doi = std::move(d);
        }
    }
    return f;
}

std::vector<CitedRefFields> apply_rpy_window(std::vector<CitedRefFields> refs,
                                             const ImportConfig& cfg) {
    std::erase_if(refs, [&](const CitedRefFields& r) { return !cfg.rpy.admits(r.rpy); });
    return refs;
}

namespace {

bool is_tag_char(char c) { return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'); }

class ExportParser {
public:
    explicit ExportParser(const ImportConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

    void feed(std::string line) {
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no_ == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        line = sanitize_utf8(line);
        if (finished_) {
            if (!trim(line).empty()) note("content after EF ignored");
            return;
        }
        if (trim(line).empty()) return;

        if (!seen_header_) {
            if (line.starts_with("FN") && (line.size() == 2 || line[2] == ' ')) {
                seen_header_ = true;
                return;
            }
            throw FormatError(
                fmt::format("line {}: missing FN header, input is not a tagged export", line_no_));
        }

        if (line.starts_with("   ")) {
            continuation(trim(std::string_view(line).substr(3)));
            return;
        }
        if (line.size() < 2 || !is_tag_char(line[0]) || !is_tag_char(line[1]) ||
            (line.size() > 2 && line[2] != ' ')) {
            note("not a tagged line");
            return;
        }
        std::string tag = line.substr(0, 2);
        std::string_view value = line.size() > 3 ? std::string_view(line).substr(3) : "";
        tagged(tag, value);
    }

    ParseResult finish() {
        if (open_) {
            throw TruncationError(
                fmt::format("record starting at line {} has no ER tag before end of input",
                            record_start_),
                record_start_);
        }
        if (!finished_) {
            if (!seen_header_) throw FormatError("empty input, missing FN header");
            note("missing EF trailer");
        }
        return std::move(result_);
    }

private:
    void note(std::string reason) {
        result_.report.malformed_lines.push_back({line_no_, std::move(reason)});
    }

    void tagged(const std::string& tag, std::string_view value) {
        if (tag == "VR" && !open_) return;
        if (tag == "EF") {
            if (open_) {
                throw TruncationError(
                    fmt::format("record starting at line {} is not closed before EF at line {}",
                                record_start_, line_no_),
                    record_start_);
            }
            finished_ = true;
            return;
        }
        if (tag == "ER") {
            if (!open_) {
                note("ER outside a record");
                return;
            }
            close_record();
            return;
        }
        if (!open_) {
            open_ = true;
            record_start_ = line_no_;
            current_ = CitingRecord{};
            has_ut_ = false;
        }
        field_ = tag;
        if (tag == "CR") {
            add_cr(trim(value));
        } else if (tag == "PY") {
            auto v = trim(value);
            if (is_year_segment(v))
                current_.py = std::stoi(std::string(v));
            else
                note("PY is not a four-digit year");
        } else if (tag == "SO") {
            current_.source_title = std::string(trim(value));
        } else if (tag == "UT") {
            current_.record_id = std::string(trim(value));
            has_ut_ = !current_.record_id.empty();
        } else {
            current_.other_fields.push_back({tag, {std::string(value)}});
        }
    }

    void continuation(std::string_view value) {
        if (!open_ || field_.empty()) {
            note("continuation line outside a field");
            return;
        }
        if (field_ == "CR") {
            add_cr(value);
        } else if (field_ == "SO") {
            current_.source_title += ' ';
            current_.source_title += value;
        } else if (field_ == "PY" || field_ == "UT") {
            note("continuation of a single-line field");
        } else {
            current_.other_fields.back().lines.emplace_back(value);
        }
    }

    void add_cr(std::string_view value) {
        if (value.empty()) {
            note("empty cited reference");
            return;
        }
        current_.raw_cr_lines.emplace_back(value);
    }

    void close_record() {
        open_ = false;
        field_.clear();
        auto& rep = result_.report;
        ++rep.records_read;
        if (!has_ut_) current_.record_id = fmt::format("REC{}", rep.records_read);
        if (!ids_.insert(current_.record_id).second) {
            note(fmt::format("duplicate record id {}", current_.record_id));
            current_.record_id = fmt::format("{}~{}", current_.record_id, rep.records_read);
            ids_.insert(current_.record_id);
        }

        auto& crs = current_.raw_cr_lines;
        rep.cr_lines_read += crs.size();
        if (!cfg_.py.admits(current_.py)) {
            ++rep.records_dropped_by_window;
            rep.cr_lines_dropped_with_record += crs.size();
            return;
        }
        if (cfg_.max_cr_per_record != 0 && crs.size() > cfg_.max_cr_per_record) {
            rep.cr_lines_truncated += crs.size() - cfg_.max_cr_per_record;
            crs.resize(cfg_.max_cr_per_record);
        }
        auto before = crs.size();
        std::erase_if(crs, [&](const std::string& cr) {
            return !cfg_.rpy.admits(parse_reference_string(cr).rpy);
        });
        rep.cr_lines_dropped_by_window += before - crs.size();
        result_.records.push_back(std::move(current_));
    }

    ImportConfig cfg_;
    ParseResult result_;
    std::size_t line_no_ = 0;
    bool seen_header_ = false;
    bool finished_ = false;
    bool open_ = false;
    bool has_ut_ = false;
    std::size_t record_start_ = 0;
    std::string field_;
    CitingRecord current_;
    std::unordered_set<std::string> ids_;
};

}  // namespace

ParseResult parse_export(std::istream& in, const ImportConfig& cfg) {
    ExportParser parser(cfg);
    std::string line;
    while (std::getline(in, line)) parser.feed(std::move(line));
    if (in.bad()) throw IoError("read error while parsing export");
    return parser.finish();
}

ParseResult parse_export(std::string_view text, const ImportConfig& cfg) {
    std::istringstream in{std::string(text)};
    return parse_export(in, cfg);
}

ParseResult parse_export_file(const std::filesystem::path& path, const ImportConfig& cfg) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open export file {}", path.string()));
    return parse_export(in, cfg);
}

void write_export(std::ostream& out, std::span<const CitingRecord> records) {
    out << "FN Thomson Reuters Web of Science\nVR 1.0\n";
    for (const auto& r : records) {
        for (const auto& f : r.other_fields) {
            for (std::size_t i = 0; i < f.lines.size(); ++i)
                out << (i == 0 ? f.tag + " " : std::string("   ")) << f.lines[i] << '\n';
        }
        if (!r.source_title.empty()) out << "SO " << r.source_title << '\n';
        for (std::size_t i = 0; i < r.raw_cr_lines.size(); ++i)
            out << (i == 0 ? "CR " : "   ") << r.raw_cr_lines[i] << '\n';
        if (r.py) out << "PY " << *r.py << '\n';
        out << "UT " << r.record_id << "\nER\n\n";
    }
    out << "EF\n";
}

std::string write_export(std::span<const CitingRecord> records) {
    std::ostringstream out;
    write_export(out, records);
    return out.str();
}

}  // namespace rpys
