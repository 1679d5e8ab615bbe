#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rpys/ingest.hpp"

namespace rpys {

using VariantId = std::string;
using RecordId = std::string;

struct ReferenceVariant {
    VariantId variant_id;
    CitedRefFields fields;
    std::set<RecordId> citing_ids;
    std::optional<std::string> cluster_id;

    // Number of distinct citing records.
    std::int64_t ncr() const noexcept { return static_cast<std::int64_t>(citing_ids.size()); }
    bool operator==(const ReferenceVariant&) const = default;
};

// One applied operation. `args` is enough to re-run it on the imported
// records (see replay()).
struct HistoryEntry {
    std::string op;
    nlohmann::json args;
    bool operator==(const HistoryEntry&) const = default;
};

// Variants are kept ordered by variant id (see variant_id_less).
struct Workspace {
    std::vector<CitingRecord> records;
    std::vector<ReferenceVariant> variants;
    ImportConfig config;
    std::vector<HistoryEntry> history;

    const ReferenceVariant* find(const VariantId& id) const;
    bool operator==(const Workspace&) const = default;
};

struct WorkspaceInfo {
    std::size_t records = 0;
    std::size_t cr_mentions = 0;
    std::size_t distinct_variants = 0;
    std::int64_t ncr_total = 0;
    std::optional<std::pair<int, int>> rpy_span;
    bool operator==(const WorkspaceInfo&) const = default;
};

// "V000002" < "V000010" < "V1000000": shorter ids first, then bytewise.
bool variant_id_less(const VariantId& a, const VariantId& b);
VariantId make_variant_id(std::size_t ordinal);

/// One variant per distinct raw CR string; ids are assigned in byte order
/// of the raw strings. A record listing the same string twice counts once.
Workspace aggregate(std::vector<CitingRecord> records, const ImportConfig& cfg = {});

/// Drops variants whose ncr lies in [lo, hi]. Throws ArgumentError if lo > hi.
Workspace remove_by_ncr(Workspace ws, std::int64_t lo, std::int64_t hi);

WorkspaceInfo info(const Workspace& ws);

nlohmann::json to_json(const CitedRefFields& f);
CitedRefFields cited_ref_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ReferenceVariant& v);
ReferenceVariant variant_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ImportConfig& cfg);
ImportConfig import_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const WorkspaceInfo& i);

// Workspace container: {"format": "rpys-workspace", "version": 1,
// "crc32": <crc of payload text>, "payload": "<json text>"}.
inline constexpr int kWorkspaceFormatVersion = 1;
std::string serialize_workspace(const Workspace& ws);
// Throws IntegrityError or UnsupportedVersionError.
Workspace deserialize_workspace(std::string_view text);
void save_workspace(const Workspace& ws, const std::filesystem::path& path);
Workspace load_workspace(const std::filesystem::path& path);

// CSV_CR: variant_id,raw,first_author,rpy,source,volume,start_page,doi,ncr,cluster_id
void export_cr_table(const Workspace& ws, std::ostream& out);
std::string export_cr_table(const Workspace& ws);
void export_cr_table(const Workspace& ws, const std::filesystem::path& path);

// One parsed CSV_CR data row; `ncr` replaces the citing set.
struct CrTableRow {
    VariantId variant_id;
    CitedRefFields fields;
    std::int64_t ncr = 0;
    std::optional<std::string> cluster_id;
    bool operator==(const CrTableRow&) const = default;
};
std::vector<CrTableRow> read_cr_table(std::string_view csv_text);

// CSV_GRAPH: rpy,ncr,distinct_variants,median_dev for every year from the
// first to the last one cited (within the RPY window). Throws ArgumentError
// when no reference has a year.
void export_graph(const Workspace& ws, std::ostream& out);
std::string export_graph(const Workspace& ws);
void export_graph(const Workspace& ws, const std::filesystem::path& path);

// Writes `bytes` to `path`, throwing IoError on failure.
void write_file(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace rpys
