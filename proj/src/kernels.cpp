#include "logofuse/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace logofuse {

namespace kernels {

double record_distance(std::span<const WeightedBlockView> blocks, std::size_t record) {
  long double num = 0.0L;
  long double den = 0.0L;
  for (const auto& b : blocks) {
    const double* x = b.records + record * b.dim;
    long double acc = 0.0L;
    for (std::size_t j = 0; j < b.dim; ++j) {
      const long double d = static_cast<long double>(b.query[j]) - x[j];
      acc += d * d;
    }
    num += b.weight * std::sqrt(acc);
    den += b.weight;
  }
  return static_cast<double>(num / den);
}

std::vector<double> scan_distances(std::span<const WeightedBlockView> blocks, std::size_t n) {
  std::vector<double> out(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = record_distance(blocks, static_cast<std::size_t>(i));
  }
  return out;
}

namespace {

// Keeps the k smallest neighbors of [begin, end) sorted by neighbor_less.
std::vector<Neighbor> range_top_k(std::span<const WeightedBlockView> blocks,
                                  std::span<const std::uint64_t> ids, std::size_t begin,
                                  std::size_t end, std::size_t k) {
  std::vector<Neighbor> heap;
  heap.reserve(k + 1);
  for (std::size_t i = begin; i < end; ++i) {
    const Neighbor cand{ids[i], record_distance(blocks, i)};
    if (heap.size() < k) {
      heap.push_back(cand);
      std::push_heap(heap.begin(), heap.end(), neighbor_less);
    } else if (neighbor_less(cand, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), neighbor_less);
      heap.back() = cand;
      std::push_heap(heap.begin(), heap.end(), neighbor_less);
    }
  }
  std::sort_heap(heap.begin(), heap.end(), neighbor_less);
  return heap;
}

}  // namespace

std::vector<Neighbor> top_k(std::span<const WeightedBlockView> blocks,
                            std::span<const std::uint64_t> ids, std::size_t k) {
  const std::size_t n = ids.size();
  k = std::min(k, n);
  if (k == 0) return {};
  int parts = 1;
#ifdef _OPENMP
  parts = std::max(1, std::min<int>(omp_get_max_threads(), static_cast<int>(n / 256) + 1));
#endif
  std::vector<std::vector<Neighbor>> partial(static_cast<std::size_t>(parts));
#pragma omp parallel for schedule(static, 1) num_threads(parts)
  for (int p = 0; p < parts; ++p) {
    const std::size_t begin = n * static_cast<std::size_t>(p) / parts;
    const std::size_t end = n * static_cast<std::size_t>(p + 1) / parts;
    partial[static_cast<std::size_t>(p)] = range_top_k(blocks, ids, begin, end, k);
  }
  std::vector<Neighbor> merged;
  for (const auto& part : partial) merged.insert(merged.end(), part.begin(), part.end());
  std::partial_sort(merged.begin(), merged.begin() + static_cast<std::ptrdiff_t>(k), merged.end(),
                    neighbor_less);
  merged.resize(k);
  return merged;
}

}  // namespace kernels

namespace serial {

std::vector<double> scan_distances(std::span<const WeightedBlockView> blocks, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = kernels::record_distance(blocks, i);
  return out;
}

std::vector<Neighbor> top_k(std::span<const WeightedBlockView> blocks,
                            std::span<const std::uint64_t> ids, std::size_t k) {
  const auto dist = scan_distances(blocks, ids.size());
  std::vector<Neighbor> all(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) all[i] = {ids[i], dist[i]};
  std::sort(all.begin(), all.end(), neighbor_less);
  all.resize(std::min(k, all.size()));
  return all;
}

}  // namespace serial

}  // namespace logofuse
