#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logofuse/image.hpp"
#include "logofuse/taxonomy.hpp"

namespace logofuse {

// One characteristic's sub-vector of the fused descriptor.
struct FeatureBlock {
  Kind kind = Kind::Generic;
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
};

// At most one block per kind, kept in canonical kind order.
class FusedFeature {
 public:
  FusedFeature() = default;
  explicit FusedFeature(std::vector<FeatureBlock> blocks);

  // Throws InvalidArgument on a duplicate kind or an empty block.
  void add(FeatureBlock block);
  const FeatureBlock* find(Kind kind) const;
  bool contains(Kind kind) const { return blocks_.count(kind) != 0; }
  const std::map<Kind, FeatureBlock>& blocks() const { return blocks_; }
  // Concatenation of all blocks in canonical kind order.
  std::vector<double> concatenated() const;

 private:
  std::map<Kind, FeatureBlock> blocks_;
};

// Per-characteristic weights, normalized to sum to one.
class QueryWeights {
 public:
  QueryWeights() = default;
  // Raw weights must be finite and >= 0 with at least one positive entry.
  static QueryWeights from_raw(const std::map<Kind, double>& raw);
  static QueryWeights one_hot(Kind kind);

  double weight(Kind kind) const;
  const std::map<Kind, double>& weights() const { return weights_; }
  // Kinds with a strictly positive weight, canonical order.
  std::vector<Kind> active_kinds() const;

 private:
  std::map<Kind, double> weights_;
};

// "color=0.3,shape=0.7" -> raw weight map (not yet normalized).
std::map<Kind, double> parse_weight_list(std::string_view text);

enum class NormalizationMode {
  PerBlock,     // each block scaled to unit length
  WholeVector,  // the concatenation scaled to unit length
};

// values / ||values||_2; the zero vector is returned unchanged.
FeatureBlock l2_normalize(const FeatureBlock& block);
FusedFeature normalize(const FusedFeature& fused, NormalizationMode mode);
// ||v||_2 accumulated in extended precision.
double l2_norm(std::span<const double> v);

// Euclidean distance accumulated in extended precision.
long double euclidean(std::span<const double> a, std::span<const double> b);

// Weighted dissimilarity: sum_c w_c d(a_c, b_c) / sum_c w_c over kinds with
// w_c > 0. Throws InvalidArgument when a weighted block is missing or the
// dims disagree.
double weighted_distance(const FusedFeature& a, const FusedFeature& b, const QueryWeights& w);

// ---- baseline extractors (used when no external neural codes exist)

inline constexpr int kColorBinsPerChannel = 5;
inline constexpr int kColorHistogramDim = 125;
inline constexpr int kOrientationBins = 16;
inline constexpr int kGridRows = 2;
inline constexpr int kGridCols = 4;
inline constexpr int kEdgeOrientationDim = kOrientationBins * kGridRows * kGridCols;
inline constexpr int kTextPresenceDim = 2;

// Quantization bin of a [0,1] sample into 5 levels.
int color_bin(float v);

// 5x5x5 joint RGB histogram as pixel fractions (sums to one).
std::vector<double> color_histogram_l1(const NormalizedImage& img);
// color_histogram_l1 followed by l2 normalization.
FeatureBlock color_histogram_extractor(const NormalizedImage& img);
// 16-orientation, magnitude-weighted gradient histogram on a 2x4 grid.
FeatureBlock edge_orientation_extractor(const NormalizedImage& img);
// Two-dim one-hot {absent, present}; present when the mask covers more than
// `min_ratio` of the image. A null mask means no text.
FeatureBlock text_presence_extractor(const TextMask* mask, double min_ratio = 0.001);

namespace serial {
std::vector<double> color_histogram_l1(const NormalizedImage& img);
FeatureBlock color_histogram_extractor(const NormalizedImage& img);
FeatureBlock edge_orientation_extractor(const NormalizedImage& img);
}  // namespace serial

}  // namespace logofuse
