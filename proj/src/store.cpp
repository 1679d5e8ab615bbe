#include "rpys/store.hpp"

#include <fmt/format.h>
#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "rpys/csv.hpp"
#include "rpys/error.hpp"
#include "rpys/spectroscopy.hpp"

namespace rpys {

using nlohmann::json;

bool variant_id_less(const VariantId& a, const VariantId& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

VariantId make_variant_id(std::size_t ordinal) { return fmt::format("V{:06}", ordinal); }

const ReferenceVariant* Workspace::find(const VariantId& id) const {
    auto it = std::lower_bound(
        variants.begin(), variants.end(), id,
        [](const ReferenceVariant& v, const VariantId& key) { return variant_id_less(v.variant_id, key); });
    if (it == variants.end() || it->variant_id != id) return nullptr;
    return &*it;
}

Workspace aggregate(std::vector<CitingRecord> records, const ImportConfig& cfg) {
    std::map<std::string, std::set<RecordId>> citing;
    for (const auto& r : records)
        for (const auto& cr : r.raw_cr_lines) citing[cr].insert(r.record_id);

    Workspace ws;
    ws.config = cfg;
    ws.variants.reserve(citing.size());
    std::size_t ordinal = 0;
    for (auto& [raw, ids] : citing) {
        ReferenceVariant v;
        v.variant_id = make_variant_id(++ordinal);
        v.fields = parse_reference_string(raw);
        v.citing_ids = std::move(ids);
        ws.variants.push_back(std::move(v));
    }
    ws.history.push_back({"import", {{"config", to_json(cfg)}, {"records", records.size()}}});
    ws.records = std::move(records);
    return ws;
}

Workspace remove_by_ncr(Workspace ws, std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw ArgumentError(fmt::format("N_CR range is inverted: [{}, {}]", lo, hi));
    std::erase_if(ws.variants, [&](const ReferenceVariant& v) {
        return v.ncr() >= lo && v.ncr() <= hi;
    });
    ws.history.push_back({"removeCR", {{"lo", lo}, {"hi", hi}}});
    return ws;
}

WorkspaceInfo info(const Workspace& ws) {
    WorkspaceInfo out;
    out.records = ws.records.size();
    for (const auto& r : ws.records) out.cr_mentions += r.raw_cr_lines.size();
    out.distinct_variants = ws.variants.size();
    for (const auto& v : ws.variants) {
        out.ncr_total += v.ncr();
        if (!v.fields.rpy) continue;
        int y = *v.fields.rpy;
        if (!out.rpy_span)
            out.rpy_span = {y, y};
        else
            out.rpy_span = {std::min(out.rpy_span->first, y), std::max(out.rpy_span->second, y)};
    }
    return out;
}

namespace {

template <class T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> opt_from(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

json to_json(const CitingRecord& r) {
    json other = json::array();
    for (const auto& f : r.other_fields) other.push_back({{"tag", f.tag}, {"lines", f.lines}});
    return {{"id", r.record_id},
            {"py", opt(r.py)},
            {"source_title", r.source_title},
            {"cr", r.raw_cr_lines},
            {"other", other}};
}

CitingRecord record_from_json(const json& j) {
    CitingRecord r;
    r.record_id = j.at("id").get<std::string>();
    r.py = opt_from<int>(j, "py");
    r.source_title = j.at("source_title").get<std::string>();
    r.raw_cr_lines = j.at("cr").get<std::vector<std::string>>();
    for (const auto& f : j.at("other"))
        r.other_fields.push_back(
            {f.at("tag").get<std::string>(), f.at("lines").get<std::vector<std::string>>()});
    return r;
}

json window_json(const YearWindow& w) { return json::array({w.lo, w.hi, w.keep_missing}); }

YearWindow window_from_json(const json& j) {
    return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<bool>()};
}

}  // namespace

json to_json(const CitedRefFields& f) {
    return {{"raw", f.raw},
            {"first_author", opt(f.first_author)},
            {"rpy", opt(f.rpy)},
            {"source", opt(f.source)},
            {"volume", opt(f.volume)},
            {"start_page", opt(f.start_page)},
            {"doi", opt(f.doi)}};
}

CitedRefFields cited_ref_from_json(const json& j) {
    CitedRefFields f;
    f.raw = j.at("raw").get<std::string>();
    f.first_author = opt_from<std::string>(j, "first_author");
    f.rpy = opt_from<int>(j, "rpy");
    f.source = opt_from<std::string>(j, "source");
    f.volume = opt_from<std::string>(j, "volume");
    f.start_page = opt_from<std::string>(j, "start_page");
    f.doi = opt_from<std::string>(j, "doi");
    return f;
}

json to_json(const ReferenceVariant& v) {
    return {{"variant_id", v.variant_id},
            {"fields", to_json(v.fields)},
            {"citing_ids", v.citing_ids},
            {"cluster_id", opt(v.cluster_id)}};
}

ReferenceVariant variant_from_json(const json& j) {
    ReferenceVariant v;
    v.variant_id = j.at("variant_id").get<std::string>();
    v.fields = cited_ref_from_json(j.at("fields"));
    v.citing_ids = j.at("citing_ids").get<std::set<RecordId>>();
    v.cluster_id = opt_from<std::string>(j, "cluster_id");
    return v;
}

json to_json(const ImportConfig& cfg) {
    return {{"RPY", window_json(cfg.rpy)},
            {"PY", window_json(cfg.py)},
            {"maxCR", cfg.max_cr_per_record}};
}

ImportConfig import_config_from_json(const json& j) {
    ImportConfig cfg;
    cfg.rpy = window_from_json(j.at("RPY"));
    cfg.py = window_from_json(j.at("PY"));
    cfg.max_cr_per_record = j.at("maxCR").get<std::size_t>();
    return cfg;
}

json to_json(const WorkspaceInfo& i) {
    json span = nullptr;
    if (i.rpy_span) span = json::array({i.rpy_span->first, i.rpy_span->second});
    return {{"records", i.records},
            {"cr_mentions", i.cr_mentions},
            {"distinct_variants", i.distinct_variants},
            {"ncr_total", i.ncr_total},
            {"rpy_span", span}};
}

std::string serialize_workspace(const Workspace& ws) {
    json payload;
    payload["config"] = to_json(ws.config);
    payload["records"] = json::array();
    for (const auto& r : ws.records) payload["records"].push_back(to_json(r));
    payload["variants"] = json::array();
    for (const auto& v : ws.variants) payload["variants"].push_back(to_json(v));
    payload["history"] = json::array();
    for (const auto& h : ws.history) payload["history"].push_back({{"op", h.op}, {"args", h.args}});

    const std::string text = payload.dump();
    const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(text.data()),
                           static_cast<uInt>(text.size()));
    json container = {{"format", "rpys-workspace"},
                      {"version", kWorkspaceFormatVersion},
                      {"crc32", crc},
                      {"payload", text}};
    return container.dump(1) + "\n";
}

Workspace deserialize_workspace(std::string_view text) {
    json container = json::parse(text, nullptr, false);
    if (container.is_discarded() || !container.is_object())
        throw IntegrityError("workspace file is not valid JSON (truncated or corrupt)");
    if (container.value("format", "") != "rpys-workspace")
        throw IntegrityError("not an rpys workspace file");
    auto version = container.find("version");
    if (version == container.end() || !version->is_number_integer())
        throw IntegrityError("workspace file has no version");
    if (version->get<int>() != kWorkspaceFormatVersion)
        throw UnsupportedVersionError(fmt::format("unsupported workspace version {} (expected {})",
                                                  version->get<int>(), kWorkspaceFormatVersion));
    auto payload_it = container.find("payload");
    auto crc_it = container.find("crc32");
    if (payload_it == container.end() || !payload_it->is_string() || crc_it == container.end() ||
        !crc_it->is_number_unsigned())
        throw IntegrityError("workspace file lacks payload or checksum");
    const auto& payload_text = payload_it->get_ref<const std::string&>();
    const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(payload_text.data()),
                           static_cast<uInt>(payload_text.size()));
    if (crc != crc_it->get<unsigned long>())
        throw IntegrityError("workspace checksum mismatch");

    try {
        json payload = json::parse(payload_text);
        Workspace ws;
        ws.config = import_config_from_json(payload.at("config"));
        for (const auto& r : payload.at("records")) ws.records.push_back(record_from_json(r));
        for (const auto& v : payload.at("variants")) ws.variants.push_back(variant_from_json(v));
        for (const auto& h : payload.at("history"))
            ws.history.push_back({h.at("op").get<std::string>(), h.at("args")});
        return ws;
    } catch (const json::exception& e) {
        throw IntegrityError(fmt::format("workspace payload is malformed: {}", e.what()));
    }
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void save_workspace(const Workspace& ws, const std::filesystem::path& path) {
    write_file(path, serialize_workspace(ws));
}

Workspace load_workspace(const std::filesystem::path& path) {
    return deserialize_workspace(read_file(path));
}

void export_cr_table(const Workspace& ws, std::ostream& out) {
    csv::write_row(out, {"variant_id", "raw", "first_author", "rpy", "source", "volume",
                         "start_page", "doi", "ncr", "cluster_id"});
    for (const auto& v : ws.variants) {
        const auto& f = v.fields;
        csv::write_row(out, {v.variant_id, f.raw, f.first_author.value_or(""),
                             f.rpy ? std::to_string(*f.rpy) : "", f.source.value_or(""),
                             f.volume.value_or(""), f.start_page.value_or(""),
                             f.doi.value_or(""), std::to_string(v.ncr()),
                             v.cluster_id.value_or("")});
    }
}

std::string export_cr_table(const Workspace& ws) {
    std::ostringstream out;
    export_cr_table(ws, out);
    return out.str();
}

void export_cr_table(const Workspace& ws, const std::filesystem::path& path) {
    write_file(path, export_cr_table(ws));
}

std::vector<CrTableRow> read_cr_table(std::string_view csv_text) {
    auto rows = csv::parse(csv_text);
    if (rows.empty() || rows.front().size() != 10 || rows.front()[0] != "variant_id")
        throw FormatError("not a CSV_CR table");
    auto field = [](const std::string& s) {
        return s.empty() ? std::nullopt : std::optional<std::string>(s);
    };
    std::vector<CrTableRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 10) throw FormatError(fmt::format("CSV_CR row {} has {} columns", i, r.size()));
        CrTableRow row;
        row.variant_id = r[0];
        row.fields.raw = r[1];
        row.fields.first_author = field(r[2]);
        if (!r[3].empty()) row.fields.rpy = std::stoi(r[3]);
        row.fields.source = field(r[4]);
        row.fields.volume = field(r[5]);
        row.fields.start_page = field(r[6]);
        row.fields.doi = field(r[7]);
        row.ncr = std::stoll(r[8]);
        row.cluster_id = field(r[9]);
        out.push_back(std::move(row));
    }
    return out;
}

void export_graph(const Workspace& ws, std::ostream& out) {
    auto range = spectrum_range(ws);
    if (!range) throw ArgumentError("CSV_GRAPH needs at least one reference with a year");
    write_graph_csv(out, spectrum(ws, range->first, range->second));
}

std::string export_graph(const Workspace& ws) {
    std::ostringstream out;
    export_graph(ws, out);
    return out.str();
}

void export_graph(const Workspace& ws, const std::filesystem::path& path) {
    write_file(path, export_graph(ws));
}

}  // namespace rpys
