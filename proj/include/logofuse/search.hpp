#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "logofuse/features.hpp"
#include "logofuse/kernels.hpp"
#include "logofuse/taxonomy.hpp"

namespace logofuse {

// Characteristic -> sorted label ids.
using Annotation = std::map<Kind, std::vector<int>>;

struct SchemaEntry {
  Kind kind;
  std::size_t dim;
  friend bool operator==(const SchemaEntry&, const SchemaEntry&) = default;
};

struct IndexRecord {
  std::uint64_t id = 0;
  FusedFeature features;
};

// Immutable searchable collection. Vectors are stored as one contiguous
// matrix per characteristic.
class SearchIndex {
 public:
  std::size_t size() const { return ids_.size(); }
  const std::vector<SchemaEntry>& schema() const { return schema_; }
  const std::vector<std::uint64_t>& ids() const { return ids_; }
  NormalizationMode normalization() const { return mode_; }

  bool contains(std::uint64_t id) const { return position_.count(id) != 0; }
  // Reassembles the stored descriptor of a logo. Throws InvalidArgument for
  // unknown ids.
  FusedFeature features_of(std::uint64_t id) const;
  const Annotation& annotation_of(std::uint64_t id) const;
  std::size_t dim_of(Kind kind) const;
  std::size_t label_count(Kind kind) const;
  const double* block_data(Kind kind) const;

 private:
  friend SearchIndex build_index(std::vector<IndexRecord> records,
                                 std::map<std::uint64_t, Annotation> annotations,
                                 std::vector<SchemaEntry> schema, NormalizationMode mode,
                                 const Taxonomy& taxonomy);

  std::vector<SchemaEntry> schema_;
  std::vector<std::uint64_t> ids_;
  std::map<std::uint64_t, std::size_t> position_;
  std::map<Kind, std::vector<double>> matrices_;
  std::vector<Annotation> annotations_;
  std::map<Kind, std::size_t> label_counts_;
  NormalizationMode mode_ = NormalizationMode::PerBlock;
};

// Tolerance on the unit norm of indexed blocks.
inline constexpr double kUnitNormTolerance = 1e-6;

// Validates schema conformance, id uniqueness and normalization; build is
// deterministic in input order. Records without an annotation get an empty one.
SearchIndex build_index(std::vector<IndexRecord> records,
                        std::map<std::uint64_t, Annotation> annotations,
                        std::vector<SchemaEntry> schema,
                        NormalizationMode mode = NormalizationMode::PerBlock,
                        const Taxonomy& taxonomy = Taxonomy::builtin());

inline constexpr std::size_t kDefaultK = 9;
inline constexpr int kDefaultTrees = 100;

struct SearchConfig {
  std::size_t k = kDefaultK;
  int trees = kDefaultTrees;
  QueryWeights weights = QueryWeights::one_hot(Kind::Color);
};

struct RankedResult {
  std::vector<Neighbor> hits;
  // True when k exceeded the index size and every record was returned.
  bool k_exceeds_index = false;
  // True when the list was cut at k (index larger than k).
  bool truncated = false;
};

RankedResult query_knn(const SearchIndex& index, const FusedFeature& query, const SearchConfig& cfg);

// Naive reference: every distance via weighted_distance, full sort.
RankedResult query_knn_reference(const SearchIndex& index, const FusedFeature& query,
                                 const SearchConfig& cfg);

struct LabelScores {
  Kind kind = Kind::Generic;
  std::vector<double> scores;  // one per label of the kind's space
};

// confidence(label) = neighbors annotated with label / neighbors returned.
LabelScores knn_label_scores(const SearchIndex& index, const FusedFeature& query,
                             const SearchConfig& cfg, Kind kind);

// One-against-all decision per label over the shared neighbor set; the
// confidence is the positive vote fraction.
LabelScores brknn_classify(const SearchIndex& index, const FusedFeature& query,
                           const SearchConfig& cfg, Kind kind);

}  // namespace logofuse
