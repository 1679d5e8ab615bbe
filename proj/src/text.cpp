#include "rpys/text.hpp"

#include <algorithm>
#include <array>

#include "rpys/ingest.hpp"

namespace rpys {

std::u32string decode_utf8(std::string_view s) {
    // Sanitising first means every lead byte below has a valid tail.
    const std::string clean = sanitize_utf8(s);
    std::u32string out;
    out.reserve(clean.size());
    for (std::size_t i = 0; i < clean.size();) {
        auto c = static_cast<unsigned char>(clean[i]);
        std::size_t len = c < 0x80 ? 1 : (c & 0xE0) == 0xC0 ? 2 : (c & 0xF0) == 0xE0 ? 3 : 4;
        char32_t cp = len == 1 ? c : c & (0x7F >> len);
        for (std::size_t k = 1; k < len; ++k)
            cp = (cp << 6) | (static_cast<unsigned char>(clean[i + k]) & 0x3F);
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string encode_utf8(std::u32string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : s) {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

namespace {

// U+00C0..U+00FF; "" keeps the code point (multiplication/division signs).
constexpr std::array<const char*, 64> kLatin1 = {
    "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
    "d", "n", "o", "o", "o", "o", "o", "",  "o", "u", "u", "u", "u", "y", "th", "ss",
    "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
    "d", "n", "o", "o", "o", "o", "o", "",  "o", "u", "u", "u", "u", "y", "th", "y",
};

// U+0100..U+017F, Latin Extended-A.
const char* latin_ext_a(char32_t cp) {
    struct Range {
        char32_t lo, hi;
        const char* to;
    };
    static constexpr Range kRanges[] = {
        {0x100, 0x105, "a"}, {0x106, 0x10D, "c"}, {0x10E, 0x111, "d"}, {0x112, 0x11B, "e"},
        {0x11C, 0x123, "g"}, {0x124, 0x127, "h"}, {0x128, 0x131, "i"}, {0x132, 0x133, "ij"},
        {0x134, 0x135, "j"}, {0x136, 0x138, "k"}, {0x139, 0x142, "l"}, {0x143, 0x14B, "n"},
        {0x14C, 0x151, "o"}, {0x152, 0x153, "oe"}, {0x154, 0x159, "r"}, {0x15A, 0x161, "s"},
        {0x162, 0x167, "t"}, {0x168, 0x173, "u"}, {0x174, 0x175, "w"}, {0x176, 0x178, "y"},
        {0x179, 0x17E, "z"}, {0x17F, 0x17F, "s"},
    };
    for (const auto& r : kRanges)
        if (cp >= r.lo && cp <= r.hi) return r.to;
    return nullptr;
}

bool is_unicode_space(char32_t cp) {
    return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' ||
           cp == 0xA0;
}

}  // namespace

std::string fold_text(std::string_view s) {
    std::u32string out;
    bool pending_space = false;
    auto emit = [&](char32_t cp) {
        if (pending_space && !out.empty()) out.push_back(U' ');
        pending_space = false;
        out.push_back(cp);
    };
    for (char32_t cp : decode_utf8(s)) {
        if (is_unicode_space(cp)) {
            pending_space = true;
        } else if (cp >= 0x300 && cp <= 0x36F) {
            // combining marks of decomposed input
        } else if (cp < 0x80) {
            emit(cp >= 'A' && cp <= 'Z' ? cp + 32 : cp);
        } else if (cp >= 0xC0 && cp <= 0xFF && *kLatin1[cp - 0xC0] != '\0') {
            for (const char* p = kLatin1[cp - 0xC0]; *p; ++p) emit(static_cast<char32_t>(*p));
        } else if (const char* to = latin_ext_a(cp)) {
            for (const char* p = to; *p; ++p) emit(static_cast<char32_t>(*p));
        } else {
            emit(cp);
        }
    }
    return encode_utf8(out);
}

std::string normalize(const CitedRefFields& fields) {
    std::string joined = fields.first_author.value_or("");
    if (fields.source) {
        joined += ' ';
        joined += *fields.source;
    }
    return fold_text(joined);
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t up = row[j];
            std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
            row[j] = std::min({up + 1, row[j - 1] + 1, sub});
            diag = up;
        }
    }
    return row[b.size()];
}

double similarity_from_distance(std::size_t distance, std::size_t max_len) {
    if (max_len == 0) return 1.0;
    return 1.0 - static_cast<double>(distance) / static_cast<double>(max_len);
}

double similarity(std::u32string_view a, std::u32string_view b) {
    return similarity_from_distance(levenshtein(a, b), std::max(a.size(), b.size()));
}

double similarity(std::string_view a, std::string_view b) {
    return similarity(decode_utf8(a), decode_utf8(b));
}

}  // namespace rpys
