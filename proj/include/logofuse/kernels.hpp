#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace logofuse {

// Column-major-by-kind view of the indexed vectors: one contiguous
// N x dim matrix per weighted characteristic.
struct WeightedBlockView {
  double weight = 0.0;
  std::size_t dim = 0;
  const double* records = nullptr;  // N x dim, row-major
  const double* query = nullptr;    // dim
};

struct Neighbor {
  std::uint64_t id = 0;
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Strict total order used everywhere a ranking is produced: ascending
// distance, then ascending id.
inline bool neighbor_less(const Neighbor& a, const Neighbor& b) {
  return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
}

namespace kernels {

// Weighted distance of one record (extended-precision accumulation,
// blocks visited in the given order).
double record_distance(std::span<const WeightedBlockView> blocks, std::size_t record);

// All N distances. OpenMP over records.
std::vector<double> scan_distances(std::span<const WeightedBlockView> blocks, std::size_t n);

// Exact top-k by neighbor_less. Threads scan contiguous record ranges and keep
// local top-k lists that are merged in partition order.
std::vector<Neighbor> top_k(std::span<const WeightedBlockView> blocks,
                            std::span<const std::uint64_t> ids, std::size_t k);

}  // namespace kernels

namespace serial {
std::vector<double> scan_distances(std::span<const WeightedBlockView> blocks, std::size_t n);
std::vector<Neighbor> top_k(std::span<const WeightedBlockView> blocks,
                            std::span<const std::uint64_t> ids, std::size_t k);
}  // namespace serial

}  // namespace logofuse
