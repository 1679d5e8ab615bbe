#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "rpys/kernels.hpp"
#include "rpys/store.hpp"

namespace rpys {

// A partition of (some of) a workspace's variants. Cluster ids are derived
// from the smallest member id, so equal inputs give equal assignments.
struct ClusterAssignment {
    std::map<VariantId, std::string> cluster_of;
    std::map<std::string, std::vector<VariantId>> members;

    bool operator==(const ClusterAssignment&) const = default;
};

// Builds an assignment from explicit groups (ids not listed are left out).
ClusterAssignment assignment_from_groups(const std::vector<std::vector<VariantId>>& groups);
ClusterAssignment restrict_to(const ClusterAssignment& asg, const Workspace& ws);

/// Single-linkage clustering within rpy blocks. Two variants link when the
/// similarity of their normalized author+source keys reaches the threshold
/// and every enabled constraint (volume, page, DOI) agrees where both sides
/// have a value. Clusters are the connected components of the links.
ClusterAssignment compute_clusters(const Workspace& ws, const ClusterParams& p,
                                   Backend backend = Backend::parallel);

struct ClusterResult {
    Workspace workspace;  // cluster_id filled in, history appended
    ClusterAssignment assignment;
};
ClusterResult cluster(Workspace ws, const ClusterParams& p, Backend backend = Backend::parallel);

/// Collapses each multi-member cluster into its representative (highest
/// ncr, then smallest raw). Citing sets are united, so a record citing two
/// spellings of one work counts once. Throws ConsistencyError if the
/// assignment names unknown variants or does not cover the workspace.
Workspace merge(Workspace ws, const ClusterAssignment& asg);

/// Analyst merge of the given variants. All must exist and share an rpy
/// (ArgumentError otherwise); fewer than two distinct ids is a no-op.
Workspace manual_merge(Workspace ws, std::span<const VariantId> ids);

/// Undoes the most recent merge whose result is `id`, restoring its members
/// (citing sets limited to the records still present). Throws
/// ArgumentError if `id` is not the product of a merge.
Workspace manual_split(Workspace ws, const VariantId& id);

// True when `id` currently stands for merged variants.
bool is_merge_product(const Workspace& ws, const VariantId& id);

/// Re-runs `history` (which must start with the import entry) on the given
/// imported records. Reproduces the variant table of the workspace that
/// produced the history.
Workspace replay(std::vector<CitingRecord> records, std::span<const HistoryEntry> history,
                 Backend backend = Backend::parallel);

}  // namespace rpys
