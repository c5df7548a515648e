#include <insightd/analytics.hpp>
#include <insightd/scheduler.hpp>
#include <insightd/table.hpp>

#include <benchmark/benchmark.h>

#include <fstream>
#include <random>
#include <sstream>

namespace {

std::vector<insightd::Point2> uniform_points(std::size_t n) {
    std::mt19937_64 rng(n);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<insightd::Point2> pts(n);
    for (auto& p : pts) p = {u(rng), u(rng)};
    return pts;
}

std::string cars_bytes() {
    std::ifstream in(INSIGHTD_BENCH_DATA, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void BM_KMeans(benchmark::State& state) {
    const auto pts = uniform_points(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(insightd::kmeans(pts, 5, 1));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KMeans)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_Dbscan(benchmark::State& state) {
    const auto pts = uniform_points(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(insightd::dbscan(pts, 0.05, 4));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Dbscan)->RangeMultiplier(4)->Range(256, 4096)->Complexity();

void BM_Polyreg(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::vector<std::pair<double, double>> pairs(static_cast<std::size_t>(state.range(0)));
    for (auto& [x, y] : pairs) x = g(rng), y = x * x * x - x + g(rng);
    for (auto _ : state) benchmark::DoNotOptimize(insightd::polyreg(pairs, 3));
}
BENCHMARK(BM_Polyreg)->Range(1024, 65536);

void BM_ParseCars(benchmark::State& state) {
    const auto bytes = cars_bytes();
    for (auto _ : state) benchmark::DoNotOptimize(insightd::parse_table(bytes, insightd::TableFormat::csv));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes.size()));
}
BENCHMARK(BM_ParseCars);

void BM_EngineCars(benchmark::State& state) {
    const auto dataset =
        std::make_shared<const insightd::Dataset>(insightd::parse_table(cars_bytes(), insightd::TableFormat::csv));
    for (auto _ : state) {
        auto tasks = insightd::plan(*dataset);
        insightd::Engine engine(dataset, {static_cast<std::size_t>(state.range(0)), std::chrono::seconds(30), 0});
        benchmark::DoNotOptimize(engine.run(tasks, [](insightd::TaskOutput) {}));
    }
}
BENCHMARK(BM_EngineCars)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
