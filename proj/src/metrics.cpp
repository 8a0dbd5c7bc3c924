#include "logofuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "logofuse/error.hpp"

namespace logofuse {

GroundTruthMatrix::GroundTruthMatrix(std::size_t n_samples, std::size_t n_labels,
                                     std::vector<std::uint8_t> entries)
    : n_(n_samples), l_(n_labels), y_(std::move(entries)) {
  if (y_.size() != n_ * l_) throw InvalidArgument("ground truth size does not match N x L");
  for (auto v : y_) {
    if (v > 1) throw InvalidArgument("ground truth entries must be 0 or 1");
  }
}

GroundTruthMatrix GroundTruthMatrix::from_rows(const std::vector<std::vector<int>>& rows) {
  const std::size_t l = rows.empty() ? 0 : rows.front().size();
  std::vector<std::uint8_t> y;
  for (const auto& r : rows) {
    if (r.size() != l) throw InvalidArgument("ragged ground truth rows");
    for (int v : r) {
      if (v != 0 && v != 1) throw InvalidArgument("ground truth entries must be 0 or 1");
      y.push_back(static_cast<std::uint8_t>(v));
    }
  }
  return GroundTruthMatrix(rows.size(), l, std::move(y));
}

ScoreMatrix::ScoreMatrix(std::size_t n_samples, std::size_t n_labels, std::vector<double> entries)
    : n_(n_samples), l_(n_labels), f_(std::move(entries)) {
  if (f_.size() != n_ * l_) throw InvalidArgument("score matrix size does not match N x L");
  for (double v : f_) {
    if (!std::isfinite(v)) throw InvalidArgument("scores must be finite");
  }
}

ScoreMatrix ScoreMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t l = rows.empty() ? 0 : rows.front().size();
  std::vector<double> f;
  for (const auto& r : rows) {
    if (r.size() != l) throw InvalidArgument("ragged score rows");
    f.insert(f.end(), r.begin(), r.end());
  }
  return ScoreMatrix(rows.size(), l, std::move(f));
}

namespace {

void check_shapes(const GroundTruthMatrix& y, const ScoreMatrix& f) {
  if (y.n_samples() != f.n_samples() || y.n_labels() != f.n_labels()) {
    throw InvalidArgument("shape mismatch: ground truth " + std::to_string(y.n_samples()) + "x" +
                          std::to_string(y.n_labels()) + ", scores " +
                          std::to_string(f.n_samples()) + "x" + std::to_string(f.n_labels()));
  }
}

// Sums per-sample terms in sample order; negative terms mark skipped samples.
LabelRankingReport reduce(const std::vector<double>& terms) {
  LabelRankingReport report;
  long double acc = 0.0L;
  for (double t : terms) {
    if (t < 0.0) {
      ++report.skipped;
    } else {
      acc += t;
      ++report.evaluated;
    }
  }
  if (report.evaluated > 0) report.value = static_cast<double>(acc / report.evaluated);
  return report;
}

template <typename SampleFn>
std::vector<double> per_sample_parallel(const GroundTruthMatrix& y, const ScoreMatrix& f,
                                        SampleFn fn) {
  std::vector<double> terms(y.n_samples());
  const auto n = static_cast<std::int64_t>(y.n_samples());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    terms[static_cast<std::size_t>(i)] = fn(y.row(i), f.row(i));
  }
  return terms;
}

template <typename SampleFn>
std::vector<double> per_sample_serial(const GroundTruthMatrix& y, const ScoreMatrix& f,
                                      SampleFn fn) {
  std::vector<double> terms(y.n_samples());
  for (std::size_t i = 0; i < y.n_samples(); ++i) terms[i] = fn(y.row(i), f.row(i));
  return terms;
}

LabelRankingReport finish_lrap(LabelRankingReport r) {
  if (r.evaluated == 0) throw InvalidArgument("LRAP undefined: no sample has a true label");
  return r;
}

LabelRankingReport finish_lrl(LabelRankingReport r) {
  if (r.evaluated == 0) {
    throw InvalidArgument("LRL undefined: every sample has all-true or all-false labels");
  }
  return r;
}

}  // namespace

double lrap_sample(std::span<const std::uint8_t> y, std::span<const double> f) {
  const std::size_t l = y.size();
  std::vector<std::size_t> order(l);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] > f[b]; });

  long double acc = 0.0L;
  std::size_t n_true = 0;
  std::size_t seen = 0;       // labels with score >= current tie group
  std::size_t seen_true = 0;  // of which true
  std::size_t g = 0;
  while (g < l) {
    std::size_t end = g;
    std::size_t group_true = 0;
    while (end < l && f[order[end]] == f[order[g]]) {
      group_true += y[order[end]];
      ++end;
    }
    seen += end - g;
    seen_true += group_true;
    // Every true label in the group shares rank `seen` and |L_ij| = seen_true.
    acc += static_cast<long double>(group_true) * seen_true / seen;
    n_true += group_true;
    g = end;
  }
  if (n_true == 0) return -1.0;
  return static_cast<double>(acc / n_true);
}

double lrl_sample(std::span<const std::uint8_t> y, std::span<const double> f) {
  std::vector<double> false_scores;
  std::vector<double> true_scores;
  for (std::size_t j = 0; j < y.size(); ++j) (y[j] ? true_scores : false_scores).push_back(f[j]);
  if (true_scores.empty() || false_scores.empty()) return -1.0;
  std::sort(false_scores.begin(), false_scores.end());
  std::uint64_t bad = 0;
  for (double s : true_scores) {
    // false labels scoring >= s
    bad += static_cast<std::uint64_t>(false_scores.end() -
                                      std::lower_bound(false_scores.begin(), false_scores.end(), s));
  }
  return static_cast<double>(bad) /
         (static_cast<double>(true_scores.size()) * static_cast<double>(false_scores.size()));
}

LabelRankingReport lrap_report(const GroundTruthMatrix& y, const ScoreMatrix& f) {
  check_shapes(y, f);
  return finish_lrap(reduce(per_sample_parallel(y, f, lrap_sample)));
}

LabelRankingReport lrl_report(const GroundTruthMatrix& y, const ScoreMatrix& f) {
  check_shapes(y, f);
  return finish_lrl(reduce(per_sample_parallel(y, f, lrl_sample)));
}

double lrap(const GroundTruthMatrix& y, const ScoreMatrix& f) { return lrap_report(y, f).value; }
double lrl(const GroundTruthMatrix& y, const ScoreMatrix& f) { return lrl_report(y, f).value; }

namespace serial {

LabelRankingReport lrap_report(const GroundTruthMatrix& y, const ScoreMatrix& f) {
  check_shapes(y, f);
  return finish_lrap(reduce(per_sample_serial(y, f, lrap_sample)));
}

LabelRankingReport lrl_report(const GroundTruthMatrix& y, const ScoreMatrix& f) {
  check_shapes(y, f);
  return finish_lrl(reduce(per_sample_serial(y, f, lrl_sample)));
}

}  // namespace serial

void validate(const RankEvaluation& eval) {
  if (eval.ranks.empty()) throw InvalidArgument("NAR undefined: no relevant items");
  if (eval.ranks.size() > eval.corpus_size) {
    throw InvalidArgument("more relevant items than corpus entries");
  }
  std::vector<std::size_t> sorted = eval.ranks;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] < 1 || sorted[i] > eval.corpus_size) {
      throw InvalidArgument("rank " + std::to_string(sorted[i]) + " outside [1, " +
                            std::to_string(eval.corpus_size) + "]");
    }
    if (i > 0 && sorted[i] == sorted[i - 1]) {
      throw InvalidArgument("duplicate rank " + std::to_string(sorted[i]));
    }
  }
}

double nar(const RankEvaluation& eval) {
  validate(eval);
  const std::uint64_t n_rel = eval.ranks.size();
  std::uint64_t sum = 0;
  for (auto r : eval.ranks) sum += r;
  // Exact integer numerator; ranks are distinct so sum >= n_rel (n_rel + 1) / 2.
  const std::uint64_t numerator = sum - n_rel * (n_rel + 1) / 2;
  return static_cast<double>(numerator) /
         (static_cast<double>(eval.corpus_size) * static_cast<double>(n_rel));
}

double binary_accuracy(std::span<const bool> pred, std::span<const bool> truth) {
  if (pred.size() != truth.size()) throw InvalidArgument("prediction/truth length mismatch");
  if (pred.empty()) throw InvalidArgument("accuracy of an empty list is undefined");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double binary_accuracy(const std::vector<bool>& pred, const std::vector<bool>& truth) {
  if (pred.size() != truth.size()) throw InvalidArgument("prediction/truth length mismatch");
  if (pred.empty()) throw InvalidArgument("accuracy of an empty list is undefined");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace logofuse
