#include "logofuse/search.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "logofuse/error.hpp"

namespace logofuse {

namespace {

std::string id_str(std::uint64_t id) { return std::to_string(id); }

std::vector<WeightedBlockView> views_for(const SearchIndex& index, const FusedFeature& query,
                                         const QueryWeights& weights) {
  std::vector<WeightedBlockView> views;
  for (const auto& [kind, w] : weights.weights()) {
    if (w <= 0.0) continue;
    const auto* block = query.find(kind);
    if (block == nullptr) {
      throw InvalidArgument("query lacks a " + std::string(kind_name(kind)) +
                            " block but it is weighted " + std::to_string(w));
    }
    const std::size_t dim = index.dim_of(kind);
    if (block->dim() != dim) {
      throw InvalidArgument("query " + std::string(kind_name(kind)) + " block has dim " +
                            std::to_string(block->dim()) + ", index expects " +
                            std::to_string(dim));
    }
    views.push_back({w, dim, index.block_data(kind), block->values.data()});
  }
  if (views.empty()) throw InvalidArgument("no positively weighted characteristic");
  return views;
}

}  // namespace

FusedFeature SearchIndex::features_of(std::uint64_t id) const {
  const auto it = position_.find(id);
  if (it == position_.end()) throw InvalidArgument("unknown logo id " + id_str(id));
  FusedFeature out;
  for (const auto& [kind, dim] : schema_) {
    const double* row = matrices_.at(kind).data() + it->second * dim;
    out.add(FeatureBlock{kind, std::vector<double>(row, row + dim)});
  }
  return out;
}

const Annotation& SearchIndex::annotation_of(std::uint64_t id) const {
  const auto it = position_.find(id);
  if (it == position_.end()) throw InvalidArgument("unknown logo id " + id_str(id));
  return annotations_[it->second];
}

std::size_t SearchIndex::dim_of(Kind kind) const {
  for (const auto& e : schema_) {
    if (e.kind == kind) return e.dim;
  }
  throw InvalidArgument("characteristic " + std::string(kind_name(kind)) + " not in index schema");
}

std::size_t SearchIndex::label_count(Kind kind) const {
  const auto it = label_counts_.find(kind);
  if (it == label_counts_.end()) {
    throw InvalidArgument("characteristic " + std::string(kind_name(kind)) + " has no label space");
  }
  return it->second;
}

const double* SearchIndex::block_data(Kind kind) const {
  const auto it = matrices_.find(kind);
  if (it == matrices_.end()) {
    throw InvalidArgument("characteristic " + std::string(kind_name(kind)) + " not in index schema");
  }
  return it->second.data();
}

SearchIndex build_index(std::vector<IndexRecord> records,
                        std::map<std::uint64_t, Annotation> annotations,
                        std::vector<SchemaEntry> schema, NormalizationMode mode,
                        const Taxonomy& taxonomy) {
  std::sort(schema.begin(), schema.end(),
            [](const SchemaEntry& a, const SchemaEntry& b) { return a.kind < b.kind; });
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].dim == 0) throw InvalidArgument("schema dims must be > 0");
    if (i > 0 && schema[i].kind == schema[i - 1].kind) {
      throw InvalidArgument("schema lists " + std::string(kind_name(schema[i].kind)) + " twice");
    }
  }
  if (schema.empty()) throw InvalidArgument("empty index schema");

  SearchIndex index;
  index.schema_ = schema;
  index.mode_ = mode;
  for (Kind kind : kLabeledKinds) index.label_counts_[kind] = taxonomy.space(kind).size();
  for (const auto& e : schema) index.matrices_[e.kind].reserve(records.size() * e.dim);

  for (auto& rec : records) {
    const auto where = "record " + id_str(rec.id);
    if (!index.position_.emplace(rec.id, index.ids_.size()).second) {
      throw InvalidArgument("duplicate logo id " + id_str(rec.id));
    }
    if (rec.features.blocks().size() != schema.size()) {
      for (const auto& [kind, block] : rec.features.blocks()) {
        if (std::none_of(schema.begin(), schema.end(),
                         [k = kind](const SchemaEntry& e) { return e.kind == k; })) {
          throw InvalidArgument(where + ": " + std::string(kind_name(kind)) +
                                " block is not in the schema");
        }
      }
    }
    long double whole = 0.0L;
    for (const auto& [kind, dim] : schema) {
      const auto* block = rec.features.find(kind);
      if (block == nullptr) {
        throw InvalidArgument(where + ": missing " + std::string(kind_name(kind)) + " block");
      }
      if (block->dim() != dim) {
        throw InvalidArgument(where + ": " + std::string(kind_name(kind)) + " block has dim " +
                              std::to_string(block->dim()) + ", schema says " +
                              std::to_string(dim));
      }
      const double norm = l2_norm(block->values);
      whole += static_cast<long double>(norm) * norm;
      if (mode == NormalizationMode::PerBlock && norm != 0.0 &&
          std::abs(norm - 1.0) > kUnitNormTolerance) {
        throw InvalidArgument(where + ": " + std::string(kind_name(kind)) +
                              " block is not l2-normalized (norm " + std::to_string(norm) + ")");
      }
      auto& m = index.matrices_[kind];
      m.insert(m.end(), block->values.begin(), block->values.end());
    }
    if (mode == NormalizationMode::WholeVector && whole != 0.0L &&
        std::abs(static_cast<double>(std::sqrt(whole)) - 1.0) > kUnitNormTolerance) {
      throw InvalidArgument(where + ": fused vector is not l2-normalized");
    }
    index.ids_.push_back(rec.id);
    Annotation ann;
    if (const auto it = annotations.find(rec.id); it != annotations.end()) ann = std::move(it->second);
    for (auto& [kind, labels] : ann) {
      std::sort(labels.begin(), labels.end());
      labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
      const auto count = index.label_count(kind);
      for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= count) {
          throw InvalidArgument(where + ": label " + std::to_string(l) + " outside the " +
                                std::string(kind_name(kind)) + " space");
        }
      }
    }
    index.annotations_.push_back(std::move(ann));
  }
  return index;
}

RankedResult query_knn(const SearchIndex& index, const FusedFeature& query, const SearchConfig& cfg) {
  if (cfg.k < 1) throw InvalidArgument("k must be >= 1");
  const auto views = views_for(index, query, cfg.weights);
  RankedResult result;
  result.hits = kernels::top_k(views, index.ids(), cfg.k);
  result.k_exceeds_index = cfg.k > index.size();
  result.truncated = cfg.k < index.size();
  return result;
}

RankedResult query_knn_reference(const SearchIndex& index, const FusedFeature& query,
                                 const SearchConfig& cfg) {
  if (cfg.k < 1) throw InvalidArgument("k must be >= 1");
  std::vector<Neighbor> all;
  for (auto id : index.ids()) {
    all.push_back({id, weighted_distance(query, index.features_of(id), cfg.weights)});
  }
  std::sort(all.begin(), all.end(), neighbor_less);
  RankedResult result;
  result.k_exceeds_index = cfg.k > all.size();
  result.truncated = cfg.k < all.size();
  all.resize(std::min(cfg.k, all.size()));
  result.hits = std::move(all);
  return result;
}

LabelScores knn_label_scores(const SearchIndex& index, const FusedFeature& query,
                             const SearchConfig& cfg, Kind kind) {
  const std::size_t labels = index.label_count(kind);
  const auto neighbors = query_knn(index, query, cfg).hits;
  LabelScores out{kind, std::vector<double>(labels, 0.0)};
  if (neighbors.empty()) return out;
  std::vector<std::size_t> votes(labels, 0);
  for (const auto& n : neighbors) {
    const auto& ann = index.annotation_of(n.id);
    const auto it = ann.find(kind);
    if (it == ann.end()) continue;
    for (int label : it->second) votes.at(static_cast<std::size_t>(label)) += 1;
  }
  for (std::size_t l = 0; l < labels; ++l) {
    out.scores[l] = static_cast<double>(votes[l]) / static_cast<double>(neighbors.size());
  }
  return out;
}

LabelScores brknn_classify(const SearchIndex& index, const FusedFeature& query,
                           const SearchConfig& cfg, Kind kind) {
  const std::size_t labels = index.label_count(kind);
  const auto neighbors = query_knn(index, query, cfg).hits;
  LabelScores out{kind, std::vector<double>(labels, 0.0)};
  if (neighbors.empty()) return out;
  // Binary relevance: each label is its own positive/negative problem
  // decided from the same neighbor set.
  for (std::size_t l = 0; l < labels; ++l) {
    std::size_t positive = 0;
    for (const auto& n : neighbors) {
      const auto& ann = index.annotation_of(n.id);
      const auto it = ann.find(kind);
      const bool has = it != ann.end() &&
                       std::binary_search(it->second.begin(), it->second.end(), static_cast<int>(l));
      positive += has ? 1 : 0;
    }
    out.scores[l] = static_cast<double>(positive) / static_cast<double>(neighbors.size());
  }
  return out;
}

}  // namespace logofuse
