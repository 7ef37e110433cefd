// Serial reference vs OpenMP paths of the hot kernels. The argument after the
// size is the execution mode: 0 serial, 1 parallel.

#include <benchmark/benchmark.h>

#include "packwise/clustering.hpp"
#include "packwise/kernels.hpp"
#include "packwise/packing.hpp"
#include "packwise/random.hpp"
#include "packwise/workload.hpp"

using namespace packwise;

namespace {

Exec mode(const benchmark::State& state) { return state.range(1) ? Exec::parallel : Exec::serial; }

std::vector<Pattern> patterns(std::size_t n, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Pattern> out(n, Pattern(dim));
    for (auto& p : out)
        for (auto& v : p) v = 100.0 * rng.uniform01();
    return out;
}

void BM_DemandSeries(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto catalog = random_catalog(5, 3, 0.01, 0.04, 1);
    SyntheticSpec spec;
    spec.mode_centers = random_mode_centers(5, 10, 10, 100, 30, 2);
    spec.noise_sigma = 3.0;
    spec.periods = n;
    spec.seed = 3;
    const auto trace = generate_trace(spec, catalog);
    for (auto _ : state) benchmark::DoNotOptimize(demand_series(trace, catalog, mode(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_AssignNearest(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const PointSet points(patterns(n, 5, 4));
    const PointSet centroids(patterns(15, 5, 5));
    std::vector<std::size_t> labels(n);
    std::vector<double> sq(n);
    for (auto _ : state) {
        assign_nearest(points, centroids, labels, sq, mode(state));
        benchmark::DoNotOptimize(labels.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_PairwiseDistances(benchmark::State& state) {
    const PointSet points(patterns(static_cast<std::size_t>(state.range(0)), 5, 6));
    for (auto _ : state) benchmark::DoNotOptimize(pairwise_distances(points, mode(state)));
}

void BM_Ahc(benchmark::State& state) {
    const auto pts = patterns(static_cast<std::size_t>(state.range(0)), 5, 7);
    for (auto _ : state) benchmark::DoNotOptimize(ahc(pts, 10, Linkage::ward, mode(state)));
}

void BM_SelectK(benchmark::State& state) {
    const auto pts = patterns(static_cast<std::size_t>(state.range(0)), 5, 8);
    for (auto _ : state) benchmark::DoNotOptimize(select_k(pts, 2, 15, 1, {}, mode(state)));
}

void BM_EvaluatePopulation(benchmark::State& state) {
    const auto size = static_cast<std::size_t>(state.range(0));
    Rng rng(9);
    std::vector<double> flat(15);
    for (auto& v : flat) v = 0.1 + rng.uniform01();
    const DemandVector demand(5, 3, flat);
    const auto vms = default_vm_catalog();
    std::vector<Genome> population;
    for (std::size_t i = 0; i < size; ++i) {
        Genome g(12, 5);
        for (auto& t : g.types) t = static_cast<int>(rng.uniform_index(vms.size() + 1)) - 1;
        for (auto& b : g.bits) b = rng.bernoulli(0.4);
        population.push_back(std::move(g));
    }
    std::vector<double> fitness;
    std::vector<Evaluation> evals;
    for (auto _ : state) {
        evaluate_population(population, demand, vms, 1.0 / 6.0, 1600.0, fitness, evals, mode(state));
        benchmark::DoNotOptimize(fitness.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(size));
}

void BM_GaPack(benchmark::State& state) {
    Rng rng(10);
    std::vector<double> flat(15);
    for (auto& v : flat) v = 0.1 + 0.5 * rng.uniform01();
    const DemandVector demand(5, 3, flat);
    GaParams params;
    params.population = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(ga_pack(demand, default_vm_catalog(), params, 1.0 / 6.0, mode(state)));
}

}  // namespace

BENCHMARK(BM_DemandSeries)->ArgsProduct({{100, 10000}, {0, 1}});
BENCHMARK(BM_AssignNearest)->ArgsProduct({{100, 10000}, {0, 1}});
BENCHMARK(BM_PairwiseDistances)->ArgsProduct({{100, 1000}, {0, 1}});
BENCHMARK(BM_Ahc)->ArgsProduct({{100, 400}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SelectK)->ArgsProduct({{100}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluatePopulation)->ArgsProduct({{80, 1000}, {0, 1}});
BENCHMARK(BM_GaPack)->ArgsProduct({{80}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
