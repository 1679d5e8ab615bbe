#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "rpys/error.hpp"
#include "rpys/kernels.hpp"
#include "rpys/text.hpp"

using namespace rpys;
using namespace rpys::kernels;

namespace {

std::vector<LinkItem> random_block(std::mt19937& gen, std::size_t n) {
    std::uniform_int_distribution<int> letter('a', 'e'), len(3, 12), vol(0, 3);
    std::vector<LinkItem> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::u32string key;
        for (int k = len(gen); k > 0; --k) key += static_cast<char32_t>(letter(gen));
        LinkItem it{key, std::nullopt, std::nullopt, std::nullopt};
        if (int v = vol(gen)) it.volume = std::to_string(v);
        out.push_back(std::move(it));
    }
    return out;
}

}  // namespace

TEST_CASE("constraints compare only values present on both sides") {
    ClusterParams p{0.75, true, true, false};
    LinkItem a{U"x", "4", "1", "10.1/a"}, b{U"x", std::nullopt, "1", "10.1/b"};
    CHECK(constraints_allow(a, b, p));
    b.page = "2";
    CHECK_FALSE(constraints_allow(a, b, p));
    p.use_page = false;
    CHECK(constraints_allow(a, b, p));
    p.use_doi = true;
    CHECK_FALSE(constraints_allow(a, b, p));
}

TEST_CASE("ClusterParams validation") {
    CHECK_NOTHROW(ClusterParams{0.0}.validate());
    CHECK_NOTHROW(ClusterParams{1.0}.validate());
    CHECK_THROWS_AS(ClusterParams{1.5}.validate(), ArgumentError);
    CHECK_THROWS_AS(ClusterParams{-0.1}.validate(), ArgumentError);
}

TEST_CASE("block_links: OpenMP output equals the serial reference") {
    std::mt19937 gen(11);
    for (double t : {0.5, 0.75, 0.9}) {
        auto block = random_block(gen, 150);
        ClusterParams p{t, true, false, false};
        auto serial = block_links_serial(block, p);
        CHECK(block_links_omp(block, p) == serial);
        for (auto [i, j] : serial) {
            CHECK(i < j);
            CHECK(similarity(block[i].key, block[j].key) >= t);
        }
    }
}

TEST_CASE("block_links: the serial reference finds every qualifying pair") {
    std::mt19937 gen(12);
    auto block = random_block(gen, 60);
    ClusterParams p{0.6, true, false, false};
    std::vector<Link> expected;
    for (std::uint32_t i = 0; i < block.size(); ++i)
        for (std::uint32_t j = i + 1; j < block.size(); ++j) {
            auto a = encode_utf8(block[i].key), b = encode_utf8(block[j].key);
            if (oracle::similarity(a, b) >= 0.6 && constraints_allow(block[i], block[j], p))
                expected.emplace_back(i, j);
        }
    CHECK(block_links_serial(block, p) == expected);
}

TEST_CASE("median_deviation: both backends equal the oracle") {
    std::mt19937 gen(13);
    std::uniform_int_distribution<std::int64_t> v(0, 30);
    std::uniform_int_distribution<std::size_t> n(1, 40);
    for (int k = 0; k < 200; ++k) {
        std::vector<std::int64_t> s(n(gen));
        for (auto& x : s) x = v(gen);
        auto expected = oracle::median_deviation(s);
        CHECK(median_deviation_serial(s) == expected);
        CHECK(median_deviation_omp(s) == expected);
    }
    CHECK(median_deviation_serial(std::vector<std::int64_t>{}).empty());
    CHECK(median_deviation_serial(std::vector<std::int64_t>{0, 0, 7, 0, 0}) ==
          std::vector<double>{0, 0, 7, 0, 0});
}
