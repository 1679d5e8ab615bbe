#include "rpys/kernels.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>

#include "rpys/error.hpp"
#include "rpys/text.hpp"
#include "strutil.hpp"

namespace rpys {

void ClusterParams::validate() const {
    if (!(threshold >= 0.0 && threshold <= 1.0))
        throw ArgumentError(fmt::format("cluster threshold {} outside [0, 1]", threshold));
}

namespace kernels {

namespace {

bool same_when_present(const std::optional<std::string>& a, const std::optional<std::string>& b) {
    if (!a || !b) return true;
    return detail::trim(*a) == detail::trim(*b);
}

bool linked(const LinkItem& a, const LinkItem& b, const ClusterParams& p) {
    if (!constraints_allow(a, b, p)) return false;
    return similarity(a.key, b.key) >= p.threshold;
}

}  // namespace

bool constraints_allow(const LinkItem& a, const LinkItem& b, const ClusterParams& p) {
    if (p.use_volume && !same_when_present(a.volume, b.volume)) return false;
    if (p.use_page && !same_when_present(a.page, b.page)) return false;
    if (p.use_doi && !same_when_present(a.doi, b.doi)) return false;
    return true;
}

std::vector<Link> block_links_serial(std::span<const LinkItem> block, const ClusterParams& p) {
    std::vector<Link> links;
    for (std::uint32_t i = 0; i < block.size(); ++i)
        for (std::uint32_t j = i + 1; j < block.size(); ++j)
            if (linked(block[i], block[j], p)) links.emplace_back(i, j);
    return links;
}

std::vector<Link> block_links_omp(std::span<const LinkItem> block, const ClusterParams& p) {
    const auto n = static_cast<std::int64_t>(block.size());
    std::vector<std::vector<Link>> per_row(block.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto& a = block[i];
        for (std::int64_t j = i + 1; j < n; ++j) {
            const auto& b = block[j];
            if (!constraints_allow(a, b, p)) continue;
            // The distance is at least the length difference, so this bound
            // rejects a pair exactly when the full similarity would.
            const auto la = a.key.size(), lb = b.key.size();
            const auto longest = std::max(la, lb);
            const auto gap = la > lb ? la - lb : lb - la;
            if (similarity_from_distance(gap, longest) < p.threshold) continue;
            if (similarity_from_distance(levenshtein(a.key, b.key), longest) >= p.threshold)
                per_row[i].emplace_back(static_cast<std::uint32_t>(i),
                                        static_cast<std::uint32_t>(j));
        }
    }
    std::vector<Link> links;
    for (auto& row : per_row) links.insert(links.end(), row.begin(), row.end());
    return links;
}

std::vector<Link> block_links(std::span<const LinkItem> block, const ClusterParams& p,
                              Backend backend) {
    return backend == Backend::serial ? block_links_serial(block, p) : block_links_omp(block, p);
}

namespace {

double window_median_deviation(std::span<const std::int64_t> ncr, std::size_t i) {
    const std::size_t lo = i >= 2 ? i - 2 : 0;
    const std::size_t hi = std::min(ncr.size() - 1, i + 2);
    std::array<std::int64_t, 5> w{};
    const std::size_t n = hi - lo + 1;
    std::copy(ncr.begin() + lo, ncr.begin() + hi + 1, w.begin());
    std::sort(w.begin(), w.begin() + n);
    const double median =
        n % 2 ? static_cast<double>(w[n / 2])
              : (static_cast<double>(w[n / 2 - 1]) + static_cast<double>(w[n / 2])) / 2.0;
    return static_cast<double>(ncr[i]) - median;
}

}  // namespace

std::vector<double> median_deviation_serial(std::span<const std::int64_t> ncr) {
    std::vector<double> out(ncr.size());
    for (std::size_t i = 0; i < ncr.size(); ++i) out[i] = window_median_deviation(ncr, i);
    return out;
}

std::vector<double> median_deviation_omp(std::span<const std::int64_t> ncr) {
    std::vector<double> out(ncr.size());
    const auto n = static_cast<std::int64_t>(ncr.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        out[i] = window_median_deviation(ncr, static_cast<std::size_t>(i));
    return out;
}

std::vector<double> median_deviation(std::span<const std::int64_t> ncr, Backend backend) {
    return backend == Backend::serial ? median_deviation_serial(ncr) : median_deviation_omp(ncr);
}

}  // namespace kernels
}  // namespace rpys
