#pragma once

// Deliberately naive reference computations the library is checked against.
// None of them share code with src/.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

// Code points of a UTF-8 string (input assumed valid).
inline std::vector<std::uint32_t> code_points(const std::string& s) {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < s.size();) {
        auto c = static_cast<unsigned char>(s[i]);
        int n = c < 0x80 ? 1 : c < 0xE0 ? 2 : c < 0xF0 ? 3 : 4;
        std::uint32_t cp = n == 1 ? c : n == 2 ? (c & 0x1F) : n == 3 ? (c & 0x0F) : (c & 0x07);
        for (int k = 1; k < n; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
        out.push_back(cp);
        i += n;
    }
    return out;
}

// Full (m+1)x(n+1) edit-distance matrix.
inline std::size_t levenshtein(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                                d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    return d[a.size()][b.size()];
}

inline double similarity(const std::string& a, const std::string& b) {
    auto ca = code_points(a), cb = code_points(b);
    std::size_t m = std::max(ca.size(), cb.size());
    if (m == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein(ca, cb)) / static_cast<double>(m);
}

// Median of the clipped five-year window around every index, by sorting a
// copy of the window.
inline std::vector<double> median_deviation(const std::vector<std::int64_t>& ncr) {
    std::vector<double> out;
    const auto n = static_cast<std::ptrdiff_t>(ncr.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        std::vector<std::int64_t> w;
        for (std::ptrdiff_t k = i - 2; k <= i + 2; ++k)
            if (k >= 0 && k < n) w.push_back(ncr[static_cast<std::size_t>(k)]);
        std::sort(w.begin(), w.end());
        double med = w.size() % 2 ? static_cast<double>(w[w.size() / 2])
                                  : (static_cast<double>(w[w.size() / 2 - 1]) + static_cast<double>(w[w.size() / 2])) / 2.0;
        out.push_back(static_cast<double>(ncr[static_cast<std::size_t>(i)]) - med);
    }
    return out;
}

// Co-citation by sets: records whose reference list contains a marker
// string (any: at least one marker, all: every marker), and the citing
// count of every reference string among those records.
struct CocitationResult {
    std::set<std::string> records;
    std::map<std::string, std::size_t> ncr;
};

inline CocitationResult cocitation(const std::map<std::string, std::set<std::string>>& refs_of_record,
                                   const std::vector<std::set<std::string>>& marker_strings, bool all) {
    CocitationResult r;
    for (const auto& [rec, refs] : refs_of_record) {
        std::size_t hits = 0;
        for (const auto& m : marker_strings) {
            bool hit = false;
            for (const auto& s : m) hit = hit || refs.count(s);
            hits += hit ? 1 : 0;
        }
        if (all ? hits == marker_strings.size() : hits > 0) r.records.insert(rec);
    }
    for (const auto& rec : r.records)
        for (const auto& s : refs_of_record.at(rec)) ++r.ncr[s];
    return r;
}

}  // namespace oracle
