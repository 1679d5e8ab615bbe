#pragma once

// Data-parallel inner loops. Each kernel has a plain serial version, kept
// as the reference the OpenMP version is tested and benchmarked against.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rpys {

enum class Backend { serial, parallel };

struct ClusterParams {
    double threshold = 0.75;
    bool use_volume = false;
    bool use_page = false;
    bool use_doi = false;

    // Throws ArgumentError unless 0 <= threshold <= 1.
    void validate() const;
    bool operator==(const ClusterParams&) const = default;
};

namespace kernels {

// A variant as seen by the linking kernel.
struct LinkItem {
    std::u32string key;
    std::optional<std::string> volume;
    std::optional<std::string> page;
    std::optional<std::string> doi;
};

using Link = std::pair<std::uint32_t, std::uint32_t>;

// True unless an enabled constraint has both values present and different.
bool constraints_allow(const LinkItem& a, const LinkItem& b, const ClusterParams& p);

/// All pairs (i < j) within one block whose key similarity reaches the
/// threshold and whose constraints agree. Output sorted ascending.
std::vector<Link> block_links_serial(std::span<const LinkItem> block, const ClusterParams& p);
std::vector<Link> block_links_omp(std::span<const LinkItem> block, const ClusterParams& p);
std::vector<Link> block_links(std::span<const LinkItem> block, const ClusterParams& p,
                              Backend backend);

/// ncr[i] minus the median of ncr[i-2..i+2], window clipped to the series.
/// Even-sized windows use the mean of the two middle values.
std::vector<double> median_deviation_serial(std::span<const std::int64_t> ncr);
std::vector<double> median_deviation_omp(std::span<const std::int64_t> ncr);
std::vector<double> median_deviation(std::span<const std::int64_t> ncr, Backend backend);

}  // namespace kernels
}  // namespace rpys
