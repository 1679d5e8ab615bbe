// Serial vs OpenMP kernels on synthetic inputs.

#include <benchmark/benchmark.h>

#include <random>

#include "rpys/kernels.hpp"
#include "rpys/text.hpp"

using namespace rpys;

namespace {

std::vector<kernels::LinkItem> make_block(std::size_t n) {
    std::mt19937 gen(42);
    const char* stems[] = {"ANGSTROM A QUART J ROY METEOR SOC", "HOTTEL HC T ASME", "PRESCOTT J T ROY SOC S AUST",
                           "KIMBALL HH MON WEATHER REV", "WHILLIER A THESIS MIT"};
    std::uniform_int_distribution<int> stem(0, 4), pos(0, 20), letter('A', 'Z'), vol(1, 4);
    std::vector<kernels::LinkItem> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::string s = stems[stem(gen)];
        for (int k = 0; k < 2; ++k) s[pos(gen) % s.size()] = static_cast<char>(letter(gen));
        out.push_back({decode_utf8(s), std::to_string(vol(gen)), std::nullopt, std::nullopt});
    }
    return out;
}

std::vector<std::int64_t> make_series(std::size_t n) {
    std::mt19937 gen(7);
    std::uniform_int_distribution<std::int64_t> d(0, 500);
    std::vector<std::int64_t> out(n);
    for (auto& v : out) v = d(gen);
    return out;
}

void BM_BlockLinks(benchmark::State& state, Backend backend) {
    auto block = make_block(static_cast<std::size_t>(state.range(0)));
    ClusterParams p{0.75, true, false, false};
    for (auto _ : state) benchmark::DoNotOptimize(kernels::block_links(block, p, backend));
    state.SetComplexityN(state.range(0));
}

void BM_MedianDeviation(benchmark::State& state, Backend backend) {
    auto series = make_series(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::median_deviation(series, backend));
}

}  // namespace

BENCHMARK_CAPTURE(BM_BlockLinks, serial, Backend::serial)->Arg(200)->Arg(800);
BENCHMARK_CAPTURE(BM_BlockLinks, omp, Backend::parallel)->Arg(200)->Arg(800);
BENCHMARK_CAPTURE(BM_MedianDeviation, serial, Backend::serial)->Arg(1000)->Arg(100000);
BENCHMARK_CAPTURE(BM_MedianDeviation, omp, Backend::parallel)->Arg(1000)->Arg(100000);

BENCHMARK_MAIN();
