#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "tradenet/community.hpp"
#include "tradenet/multilayer.hpp"
#include "tradenet/netstats.hpp"

using namespace tradenet;

namespace {

// Directed block model: n nodes in `blocks` equal groups.
Layer block_layer(std::mt19937_64& rng, std::size_t n, std::size_t blocks, double p_in, double p_out) {
    std::uniform_real_distribution<double> u(0.0, 1.0), w(1.0, 2.0);
    std::vector<Edge> e;
    for (NodeIndex i = 0; i < n; ++i)
        for (NodeIndex j = 0; j < n; ++j) {
            if (i == j) continue;
            const bool same = i * blocks / n == j * blocks / n;
            if (u(rng) < (same ? p_in : p_out)) e.push_back({i, j, w(rng)});
        }
    return Layer::from_edges({"bench", 2011}, n, std::move(e));
}

// Roughly the size of a country trade layer.
constexpr std::size_t kCountries = 180;

void BM_Detect(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const Layer l = block_layer(rng, static_cast<std::size_t>(state.range(0)), 8, 0.3, 0.03);
    community::DetectorConfig cfg;
    cfg.restarts = 1;
    for (auto _ : state) benchmark::DoNotOptimize(community::detect(l, cfg).modularity);
    state.counters["edges"] = static_cast<double>(l.n_edges());
}
BENCHMARK(BM_Detect)->Arg(64)->Arg(kCountries)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_DetectMultilayer(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const auto layers_n = static_cast<std::size_t>(state.range(0));
    std::vector<Layer> layers;
    for (std::size_t x = 0; x < layers_n; ++x)
        layers.push_back(block_layer(rng, kCountries, 8, 0.3, 0.03).with_key({"c" + std::to_string(x), 2011}));
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < kCountries; ++i) labels.push_back("N" + std::to_string(1000 + i));
    const MultiNetwork m(NodeUniverse(labels), layers, 1.0);
    multilayer::MultilayerConfig cfg;
    cfg.detector.restarts = 1;
    for (auto _ : state) benchmark::DoNotOptimize(multilayer::detect_multilayer(m, cfg).q_star);
}
BENCHMARK(BM_DetectMultilayer)->Arg(2)->Arg(5)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_ComputeStats(benchmark::State& state) {
    std::mt19937_64 rng(3);
    const Layer l = block_layer(rng, static_cast<std::size_t>(state.range(0)), 8, 0.3, 0.03);
    for (auto _ : state) benchmark::DoNotOptimize(stats::compute_stats(l));
}
BENCHMARK(BM_ComputeStats)->Arg(64)->Arg(kCountries)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
