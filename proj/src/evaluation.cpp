#include "logofuse/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace logofuse {

RankEvaluation rank_relevant(const SearchIndex& index, std::uint64_t query_id,
                             const std::vector<std::uint64_t>& relevant, const QueryWeights& weights) {
  SearchConfig cfg;
  cfg.k = index.size();
  cfg.weights = weights;
  const auto ranked = query_knn(index, index.features_of(query_id), cfg);
  const std::set<std::uint64_t> wanted(relevant.begin(), relevant.end());
  RankEvaluation eval;
  eval.corpus_size = index.size() - 1;
  std::size_t rank = 0;
  for (const auto& hit : ranked.hits) {
    if (hit.id == query_id) continue;
    ++rank;
    if (wanted.count(hit.id)) eval.ranks.push_back(rank);
  }
  if (eval.ranks.size() != wanted.size()) {
    throw InvalidArgument("relevant logos missing from the index for query " + std::to_string(query_id));
  }
  return eval;
}

GroupNarReport nar_for_groups(const SearchIndex& index,
                              const std::vector<std::vector<std::uint64_t>>& groups,
                              const QueryWeights& weights) {
  std::vector<std::pair<std::uint64_t, std::vector<std::uint64_t>>> queries;
  for (const auto& g : groups) {
    if (g.size() < 2) continue;
    for (auto q : g) {
      std::vector<std::uint64_t> others;
      for (auto o : g) {
        if (o != q) others.push_back(o);
      }
      queries.emplace_back(q, std::move(others));
    }
  }
  if (queries.empty()) throw InvalidArgument("no group has two or more members");
  GroupNarReport report;
  report.per_query.resize(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    report.per_query[i] = nar(rank_relevant(index, queries[i].first, queries[i].second, weights));
  }
  long double acc = 0.0L;
  for (double v : report.per_query) acc += v;
  report.mean = static_cast<double>(acc / report.per_query.size());
  return report;
}

double precision_at_k(const SearchIndex& index, Kind kind, std::size_t k, const QueryWeights& weights) {
  if (k == 0) throw InvalidArgument("k must be positive");
  SearchConfig cfg;
  cfg.k = std::min(k + 1, index.size());
  cfg.weights = weights;
  long double acc = 0.0L;
  std::size_t queries = 0;
  for (auto id : index.ids()) {
    const auto& ann = index.annotation_of(id);
    const auto it = ann.find(kind);
    if (it == ann.end() || it->second.empty()) continue;
    const auto ranked = query_knn(index, index.features_of(id), cfg);
    std::size_t taken = 0, hits = 0;
    for (const auto& h : ranked.hits) {
      if (h.id == id || taken == k) continue;
      ++taken;
      const auto& other = index.annotation_of(h.id);
      const auto jt = other.find(kind);
      if (jt == other.end()) continue;
      const bool shared = std::any_of(it->second.begin(), it->second.end(), [&](int l) {
        return std::binary_search(jt->second.begin(), jt->second.end(), l);
      });
      hits += shared ? 1 : 0;
    }
    if (taken == 0) continue;
    acc += static_cast<long double>(hits) / taken;
    ++queries;
  }
  if (queries == 0) throw InvalidArgument("no query carries a label of the requested kind");
  return static_cast<double>(acc / queries);
}

std::vector<std::vector<std::uint64_t>> parse_groups_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    const auto& g = j.is_object() ? j.at("groups") : j;
    return g.get<std::vector<std::vector<std::uint64_t>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("groups: ") + e.what());
  }
}

namespace {

std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <class T>
bool parse_number(const std::string& s, T& out) {
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

}  // namespace

PredictionSet parse_predictions(const std::string& csv, std::size_t label_count) {
  if (label_count == 0) throw InvalidArgument("empty label space");
  std::map<std::uint64_t, std::vector<double>> rows;
  std::istringstream in(csv);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(trim(f));
    const auto where = "predictions line " + std::to_string(line_no);
    if (fields.size() != 3) throw ParseError(where + ": expected logo-id,label-id,score");
    std::uint64_t id = 0;
    long label = 0;
    double score = 0.0;
    if (!parse_number(fields[0], id)) {
      if (line_no == 1 && rows.empty()) continue;  // header
      throw ParseError(where + ": bad logo id '" + fields[0] + "'");
    }
    if (!parse_number(fields[1], label) || label < 0 || static_cast<std::size_t>(label) >= label_count) {
      throw ParseError(where + ": label id '" + fields[1] + "' outside the label space");
    }
    if (!parse_number(fields[2], score) || !std::isfinite(score)) {
      throw ParseError(where + ": bad score '" + fields[2] + "'");
    }
    auto& row = rows.try_emplace(id, std::vector<double>(label_count, 0.0)).first->second;
    row[static_cast<std::size_t>(label)] = score;
  }
  if (rows.empty()) throw ParseError("prediction file has no rows");
  std::vector<std::uint64_t> ids;
  std::vector<double> flat;
  for (auto& [id, row] : rows) {
    ids.push_back(id);
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return {std::move(ids), ScoreMatrix(rows.size(), label_count, std::move(flat))};
}

std::string format_predictions(const std::vector<std::uint64_t>& ids,
                               const std::vector<LabelScores>& scores) {
  if (ids.size() != scores.size()) throw InvalidArgument("id/score count mismatch");
  std::string out = "logo_id,label_id,score\n";
  char buf[64];
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t l = 0; l < scores[i].scores.size(); ++l) {
      std::snprintf(buf, sizeof buf, "%.6f", scores[i].scores[l]);
      out += std::to_string(ids[i]) + "," + std::to_string(l) + "," + buf + "\n";
    }
  }
  return out;
}

MetricsReport evaluate_predictions(const DatasetManifest& manifest, Kind kind, const std::string& csv,
                                   const Taxonomy& taxonomy) {
  const auto& space = taxonomy.space(kind);
  const auto preds = parse_predictions(csv, space.size());
  std::vector<std::uint8_t> truth;
  truth.reserve(preds.ids.size() * space.size());
  for (auto id : preds.ids) {
    const auto* record = manifest.find(id);
    if (record == nullptr) throw InvalidArgument("logo " + std::to_string(id) + " is not in the manifest");
    std::vector<std::uint8_t> row(space.size(), 0);
    const auto ann = annotate(*record, taxonomy);
    if (const auto it = ann.find(kind); it != ann.end()) {
      for (int l : it->second) row[static_cast<std::size_t>(l)] = 1;
    }
    truth.insert(truth.end(), row.begin(), row.end());
  }
  const GroundTruthMatrix y(preds.ids.size(), space.size(), std::move(truth));
  return {lrap_report(y, preds.scores), lrl_report(y, preds.scores), std::nullopt};
}

}  // namespace logofuse
