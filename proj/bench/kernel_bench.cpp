// OpenMP kernels against their serial references.
#include <benchmark/benchmark.h>

#include <random>

#include "logofuse/features.hpp"
#include "logofuse/kernels.hpp"
#include "logofuse/metrics.hpp"
#include "logofuse/preprocess.hpp"

using namespace logofuse;

namespace {

std::vector<double> random_matrix(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> m(rows * dim);
  for (auto& v : m) v = g(rng);
  return m;
}

struct ScanFixture {
  std::size_t n;
  std::vector<double> color, shape, qc, qs;
  std::vector<std::uint64_t> ids;
  std::vector<WeightedBlockView> views;

  explicit ScanFixture(std::size_t records)
      : n(records),
        color(random_matrix(records, 125, 1)),
        shape(random_matrix(records, 128, 2)),
        qc(random_matrix(1, 125, 3)),
        qs(random_matrix(1, 128, 4)),
        ids(records) {
    for (std::size_t i = 0; i < n; ++i) ids[i] = i + 1;
    views = {{0.3, 125, color.data(), qc.data()}, {0.7, 128, shape.data(), qs.data()}};
  }
};

RasterImage random_raster(int w, int h) {
  std::mt19937_64 rng(5);
  RasterImage img(w, h);
  for (auto& b : img.data()) b = static_cast<std::uint8_t>(rng());
  return img;
}

void BM_TopK(benchmark::State& state) {
  ScanFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::top_k(f.views, f.ids, 9));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_TopKSerial(benchmark::State& state) {
  ScanFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(serial::top_k(f.views, f.ids, 9));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Resize(benchmark::State& state) {
  const auto img = random_raster(640, 480);
  for (auto _ : state) benchmark::DoNotOptimize(resize_normalize(img));
}

void BM_ResizeSerial(benchmark::State& state) {
  const auto img = random_raster(640, 480);
  for (auto _ : state) benchmark::DoNotOptimize(serial::resize_normalize(img));
}

void BM_ColorHistogram(benchmark::State& state) {
  const auto img = resize_normalize(random_raster(300, 300));
  for (auto _ : state) benchmark::DoNotOptimize(color_histogram_extractor(img));
}

void BM_ColorHistogramSerial(benchmark::State& state) {
  const auto img = resize_normalize(random_raster(300, 300));
  for (auto _ : state) benchmark::DoNotOptimize(serial::color_histogram_extractor(img));
}

void BM_EdgeHistogram(benchmark::State& state) {
  const auto img = resize_normalize(random_raster(300, 300));
  for (auto _ : state) benchmark::DoNotOptimize(edge_orientation_extractor(img));
}

void BM_EdgeHistogramSerial(benchmark::State& state) {
  const auto img = resize_normalize(random_raster(300, 300));
  for (auto _ : state) benchmark::DoNotOptimize(serial::edge_orientation_extractor(img));
}

std::pair<GroundTruthMatrix, ScoreMatrix> ranking_problem(std::size_t n, std::size_t l) {
  std::mt19937_64 rng(6);
  std::vector<std::uint8_t> y(n * l);
  std::vector<double> f(n * l);
  for (std::size_t i = 0; i < n * l; ++i) {
    y[i] = rng() % 8 == 0;
    f[i] = static_cast<double>(rng() % 1000) / 1000.0;
  }
  for (std::size_t i = 0; i < n; ++i) y[i * l] = 1;
  return {GroundTruthMatrix(n, l, std::move(y)), ScoreMatrix(n, l, std::move(f))};
}

void BM_Lrap(benchmark::State& state) {
  const auto [y, f] = ranking_problem(static_cast<std::size_t>(state.range(0)), 123);
  for (auto _ : state) benchmark::DoNotOptimize(lrap_report(y, f));
}

void BM_LrapSerial(benchmark::State& state) {
  const auto [y, f] = ranking_problem(static_cast<std::size_t>(state.range(0)), 123);
  for (auto _ : state) benchmark::DoNotOptimize(serial::lrap_report(y, f));
}

}  // namespace

BENCHMARK(BM_TopK)->Arg(10000)->Arg(100000);
BENCHMARK(BM_TopKSerial)->Arg(10000)->Arg(100000);
BENCHMARK(BM_Resize);
BENCHMARK(BM_ResizeSerial);
BENCHMARK(BM_ColorHistogram);
BENCHMARK(BM_ColorHistogramSerial);
BENCHMARK(BM_EdgeHistogram);
BENCHMARK(BM_EdgeHistogramSerial);
BENCHMARK(BM_Lrap)->Arg(5000);
BENCHMARK(BM_LrapSerial)->Arg(5000);

BENCHMARK_MAIN();
