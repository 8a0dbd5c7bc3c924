#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "logofuse/manifest.hpp"
#include "logofuse/metrics.hpp"
#include "logofuse/search.hpp"

namespace logofuse {

// Query-injection protocol: every group member queries the index; the other
// members are the relevant set and the query itself is left out of the
// ranking (N = index size - 1).
struct GroupNarReport {
  double mean = 0.0;
  std::vector<double> per_query;
};

// Ranks of `relevant` in the full ranking of `query_id` against the index.
RankEvaluation rank_relevant(const SearchIndex& index, std::uint64_t query_id,
                             const std::vector<std::uint64_t>& relevant, const QueryWeights& weights);

GroupNarReport nar_for_groups(const SearchIndex& index,
                              const std::vector<std::vector<std::uint64_t>>& groups,
                              const QueryWeights& weights);

// Mean over queries of the fraction of the k nearest other logos that share
// a `kind` label with the query. Queries without a label are skipped.
double precision_at_k(const SearchIndex& index, Kind kind, std::size_t k, const QueryWeights& weights);

std::vector<std::vector<std::uint64_t>> parse_groups_json(const std::string& text);

// CSV rows "logo-id,label-id,score"; an optional header line is skipped.
// Missing (logo, label) pairs score 0. Rows are ordered by logo id.
struct PredictionSet {
  std::vector<std::uint64_t> ids;
  ScoreMatrix scores;
};

PredictionSet parse_predictions(const std::string& csv, std::size_t label_count);
std::string format_predictions(const std::vector<std::uint64_t>& ids,
                               const std::vector<LabelScores>& scores);

struct MetricsReport {
  LabelRankingReport lrap;
  LabelRankingReport lrl;
  std::optional<double> nar;
};

// Scores a prediction file against the manifest's grouped annotations.
MetricsReport evaluate_predictions(const DatasetManifest& manifest, Kind kind, const std::string& csv,
                                   const Taxonomy& taxonomy = Taxonomy::builtin());

}  // namespace logofuse
