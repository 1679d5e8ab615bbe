#include "rpys/disambiguation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>
#include <optional>
#include <unordered_map>

#include "rpys/error.hpp"
#include "rpys/spectroscopy.hpp"
#include "rpys/text.hpp"

namespace rpys {

using nlohmann::json;

namespace {

std::string cluster_id_for(const VariantId& root) {
    return "C" + (root.starts_with('V') ? root.substr(1) : root);
}

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    // The smaller index becomes the root, so roots are the minimal members.
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
    }

private:
    std::vector<std::size_t> parent_;
};

void sort_variants(Workspace& ws) {
    std::sort(ws.variants.begin(), ws.variants.end(),
              [](const ReferenceVariant& a, const ReferenceVariant& b) {
                  return variant_id_less(a.variant_id, b.variant_id);
              });
}

std::unordered_map<VariantId, std::size_t> index_of(const Workspace& ws) {
    std::unordered_map<VariantId, std::size_t> idx;
    idx.reserve(ws.variants.size());
    for (std::size_t i = 0; i < ws.variants.size(); ++i) idx.emplace(ws.variants[i].variant_id, i);
    return idx;
}

// Merges the variants at `members` (indices into ws.variants) into the
// representative, which keeps its id. Returns the history record of the
// group; the absorbed variants are flagged in `drop`.
json merge_members(Workspace& ws, std::vector<std::size_t> members,
                   const std::optional<std::string>& cluster_id, std::vector<bool>& drop) {
    auto rep = *std::min_element(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
        const auto& va = ws.variants[a];
        const auto& vb = ws.variants[b];
        if (va.ncr() != vb.ncr()) return va.ncr() > vb.ncr();
        return va.fields.raw < vb.fields.raw;
    });
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
        return variant_id_less(ws.variants[a].variant_id, ws.variants[b].variant_id);
    });
    json snapshot = json::array();
    for (auto m : members) snapshot.push_back(to_json(ws.variants[m]));

    auto& target = ws.variants[rep];
    for (auto m : members) {
        if (m == rep) continue;
        target.citing_ids.insert(ws.variants[m].citing_ids.begin(), ws.variants[m].citing_ids.end());
        drop[m] = true;
    }
    if (cluster_id) target.cluster_id = cluster_id;
    json group = {{"into", target.variant_id}, {"members", snapshot}};
    if (cluster_id) group["cluster"] = *cluster_id;
    return group;
}

void drop_flagged(Workspace& ws, const std::vector<bool>& drop) {
    std::vector<ReferenceVariant> kept;
    kept.reserve(ws.variants.size());
    for (std::size_t i = 0; i < ws.variants.size(); ++i)
        if (!drop[i]) kept.push_back(std::move(ws.variants[i]));
    ws.variants = std::move(kept);
}

// For every merged id, the stack of groups that produced it (latest last),
// with groups undone by a split already popped.
std::map<VariantId, std::vector<json>> merge_stacks(const Workspace& ws) {
    std::map<VariantId, std::vector<json>> stacks;
    for (const auto& h : ws.history) {
        if (h.op == "merge" || h.op == "manual_merge") {
            for (const auto& g : h.args.at("groups"))
                stacks[g.at("into").get<std::string>()].push_back(g);
        } else if (h.op == "split") {
            auto& s = stacks[h.args.at("variant_id").get<std::string>()];
            if (!s.empty()) s.pop_back();
        }
    }
    return stacks;
}

}  // namespace

ClusterAssignment assignment_from_groups(const std::vector<std::vector<VariantId>>& groups) {
    ClusterAssignment asg;
    for (auto g : groups) {
        if (g.empty()) continue;
        std::sort(g.begin(), g.end(), variant_id_less);
        g.erase(std::unique(g.begin(), g.end()), g.end());
        auto cid = cluster_id_for(g.front());
        for (const auto& id : g) {
            if (!asg.cluster_of.emplace(id, cid).second)
                throw ConsistencyError(fmt::format("variant {} appears in two clusters", id));
        }
        asg.members[cid] = std::move(g);
    }
    return asg;
}

ClusterAssignment restrict_to(const ClusterAssignment& asg, const Workspace& ws) {
    std::vector<std::vector<VariantId>> groups;
    for (const auto& [cid, members] : asg.members) {
        std::vector<VariantId> present;
        for (const auto& id : members)
            if (ws.find(id)) present.push_back(id);
        groups.push_back(std::move(present));
    }
    for (const auto& v : ws.variants)
        if (!asg.cluster_of.contains(v.variant_id)) groups.push_back({v.variant_id});
    return assignment_from_groups(groups);
}

ClusterAssignment compute_clusters(const Workspace& ws, const ClusterParams& p, Backend backend) {
    p.validate();
    const auto n = ws.variants.size();
    std::map<std::optional<int>, std::vector<std::size_t>> blocks;
    for (std::size_t i = 0; i < n; ++i) blocks[ws.variants[i].fields.rpy].push_back(i);

    DisjointSets sets(n);
    std::vector<kernels::LinkItem> items;
    for (const auto& [rpy, members] : blocks) {
        if (members.size() < 2) continue;
        items.clear();
        for (auto i : members) {
            const auto& f = ws.variants[i].fields;
            items.push_back({decode_utf8(normalize(f)), f.volume, f.start_page, f.doi});
        }
        for (auto [a, b] : kernels::block_links(items, p, backend)) sets.unite(members[a], members[b]);
    }

    ClusterAssignment asg;
    for (std::size_t i = 0; i < n; ++i) {
        const auto cid = cluster_id_for(ws.variants[sets.find(i)].variant_id);
        asg.cluster_of.emplace(ws.variants[i].variant_id, cid);
        asg.members[cid].push_back(ws.variants[i].variant_id);
    }
    return asg;
}

ClusterResult cluster(Workspace ws, const ClusterParams& p, Backend backend) {
    auto asg = compute_clusters(ws, p, backend);
    for (auto& v : ws.variants) v.cluster_id = asg.cluster_of.at(v.variant_id);
    ws.history.push_back({"cluster",
                          {{"threshold", p.threshold},
                           {"volume", p.use_volume},
                           {"page", p.use_page},
                           {"DOI", p.use_doi}}});
    return {std::move(ws), std::move(asg)};
}

Workspace merge(Workspace ws, const ClusterAssignment& asg) {
    auto idx = index_of(ws);
    for (const auto& [id, cid] : asg.cluster_of)
        if (!idx.contains(id))
            throw ConsistencyError(fmt::format("cluster assignment names unknown variant {}", id));
    for (const auto& v : ws.variants)
        if (!asg.cluster_of.contains(v.variant_id))
            throw ConsistencyError(
                fmt::format("cluster assignment does not cover variant {}", v.variant_id));

    std::vector<bool> drop(ws.variants.size(), false);
    json groups = json::array();
    for (const auto& [cid, ids] : asg.members) {
        if (ids.size() < 2) continue;
        std::vector<std::size_t> members;
        for (const auto& id : ids) members.push_back(idx.at(id));
        const auto& rpy = ws.variants[members.front()].fields.rpy;
        for (auto m : members)
            if (ws.variants[m].fields.rpy != rpy)
                throw ConsistencyError(fmt::format("cluster {} spans several years", cid));
        groups.push_back(merge_members(ws, std::move(members), cid, drop));
    }
    drop_flagged(ws, drop);
    ws.history.push_back({"merge", {{"groups", groups}}});
    return ws;
}

Workspace manual_merge(Workspace ws, std::span<const VariantId> ids) {
    std::vector<VariantId> unique(ids.begin(), ids.end());
    std::sort(unique.begin(), unique.end(), variant_id_less);
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    auto idx = index_of(ws);
    std::vector<std::size_t> members;
    for (const auto& id : unique) {
        auto it = idx.find(id);
        if (it == idx.end()) throw ArgumentError(fmt::format("unknown variant {}", id));
        members.push_back(it->second);
    }
    if (members.size() < 2) return ws;

    const auto& first = ws.variants[members.front()];
    for (auto m : members) {
        const auto& v = ws.variants[m];
        if (v.fields.rpy != first.fields.rpy) {
            auto year = [](const std::optional<int>& y) { return y ? std::to_string(*y) : "none"; };
            throw ArgumentError(fmt::format(
                "cannot merge across reference publication years: {} is from {}, {} is from {}",
                first.variant_id, year(first.fields.rpy), v.variant_id, year(v.fields.rpy)));
        }
    }
    std::vector<bool> drop(ws.variants.size(), false);
    auto group = merge_members(ws, std::move(members), std::nullopt, drop);
    drop_flagged(ws, drop);
    ws.history.push_back({"manual_merge", {{"groups", json::array({group})}}});
    return ws;
}

bool is_merge_product(const Workspace& ws, const VariantId& id) {
    if (!ws.find(id)) return false;
    auto stacks = merge_stacks(ws);
    auto it = stacks.find(id);
    return it != stacks.end() && !it->second.empty();
}

Workspace manual_split(Workspace ws, const VariantId& id) {
    if (!ws.find(id)) throw ArgumentError(fmt::format("unknown variant {}", id));
    auto stacks = merge_stacks(ws);
    auto it = stacks.find(id);
    if (it == stacks.end() || it->second.empty())
        throw ArgumentError(fmt::format("variant {} was never merged, nothing to split", id));
    const json& group = it->second.back();

    std::set<RecordId> present;
    for (const auto& r : ws.records) present.insert(r.record_id);
    std::erase_if(ws.variants, [&](const ReferenceVariant& v) { return v.variant_id == id; });
    for (const auto& m : group.at("members")) {
        auto v = variant_from_json(m);
        std::erase_if(v.citing_ids, [&](const RecordId& r) { return !present.contains(r); });
        if (v.citing_ids.empty()) continue;
        if (ws.find(v.variant_id))
            throw ConsistencyError(fmt::format("variant {} already exists", v.variant_id));
        ws.variants.push_back(std::move(v));
        sort_variants(ws);
    }
    ws.history.push_back({"split", {{"variant_id", id}}});
    return ws;
}

Workspace replay(std::vector<CitingRecord> records, std::span<const HistoryEntry> history,
                 Backend backend) {
    if (history.empty() || history.front().op != "import")
        throw ConsistencyError("history must start with an import entry");
    Workspace ws = aggregate(std::move(records),
                             import_config_from_json(history.front().args.at("config")));
    for (const auto& h : history.subspan(1)) {
        const auto& a = h.args;
        if (h.op == "cluster") {
            ClusterParams p{a.at("threshold").get<double>(), a.at("volume").get<bool>(),
                            a.at("page").get<bool>(), a.at("DOI").get<bool>()};
            ws = cluster(std::move(ws), p, backend).workspace;
        } else if (h.op == "merge") {
            ClusterAssignment asg;
            for (const auto& g : a.at("groups")) {
                auto cid = g.at("cluster").get<std::string>();
                for (const auto& m : g.at("members")) {
                    auto id = m.at("variant_id").get<std::string>();
                    asg.cluster_of[id] = cid;
                    asg.members[cid].push_back(id);
                }
            }
            for (const auto& v : ws.variants) {
                if (asg.cluster_of.contains(v.variant_id)) continue;
                asg.cluster_of[v.variant_id] = "S" + v.variant_id;
                asg.members["S" + v.variant_id] = {v.variant_id};
            }
            ws = merge(std::move(ws), asg);
        } else if (h.op == "manual_merge") {
            for (const auto& g : a.at("groups")) {
                std::vector<VariantId> ids;
                for (const auto& m : g.at("members")) ids.push_back(m.at("variant_id").get<std::string>());
                ws = manual_merge(std::move(ws), ids);
            }
        } else if (h.op == "split") {
            ws = manual_split(std::move(ws), a.at("variant_id").get<std::string>());
        } else if (h.op == "removeCR") {
            ws = remove_by_ncr(std::move(ws), a.at("lo").get<std::int64_t>(),
                               a.at("hi").get<std::int64_t>());
        } else if (h.op == "cocite") {
            std::vector<MarkerSpec> markers;
            for (const auto& m : a.at("markers")) markers.push_back(parse_marker(m.get<std::string>()));
            ws = cocitation_filter(std::move(ws), markers,
                                   parse_marker_mode(a.at("mode").get<std::string>()))
                     .workspace;
        } else {
            throw ConsistencyError(fmt::format("cannot replay unknown history entry '{}'", h.op));
        }
    }
    return ws;
}

}  // namespace rpys
