#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "logofuse/error.hpp"

namespace logofuse {

// y in {0,1}^{N x L}, row-major.
class GroundTruthMatrix {
 public:
  GroundTruthMatrix(std::size_t n_samples, std::size_t n_labels, std::vector<std::uint8_t> entries);
  static GroundTruthMatrix from_rows(const std::vector<std::vector<int>>& rows);

  std::size_t n_samples() const { return n_; }
  std::size_t n_labels() const { return l_; }
  std::span<const std::uint8_t> row(std::size_t i) const { return {&y_[i * l_], l_}; }

 private:
  std::size_t n_, l_;
  std::vector<std::uint8_t> y_;
};

// Finite scores f in R^{N x L}, row-major.
class ScoreMatrix {
 public:
  ScoreMatrix(std::size_t n_samples, std::size_t n_labels, std::vector<double> entries);
  static ScoreMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t n_samples() const { return n_; }
  std::size_t n_labels() const { return l_; }
  std::span<const double> row(std::size_t i) const { return {&f_[i * l_], l_}; }

 private:
  std::size_t n_, l_;
  std::vector<double> f_;
};

struct LabelRankingReport {
  double value = 0.0;
  std::size_t evaluated = 0;  // samples contributing to the mean
  std::size_t skipped = 0;    // degenerate samples left out
};

// Label ranking average precision; ties use >= (a tie inflates the rank).
// Samples without true labels are skipped.
LabelRankingReport lrap_report(const GroundTruthMatrix& y, const ScoreMatrix& f);
double lrap(const GroundTruthMatrix& y, const ScoreMatrix& f);

// Label ranking loss; a true label scoring <= a false one is mis-ordered.
// Samples with no true or no false labels are skipped.
LabelRankingReport lrl_report(const GroundTruthMatrix& y, const ScoreMatrix& f);
double lrl(const GroundTruthMatrix& y, const ScoreMatrix& f);

// Per-sample terms, exposed for tests and streaming callers.
// Return a negative value for a degenerate sample.
double lrap_sample(std::span<const std::uint8_t> y, std::span<const double> f);
double lrl_sample(std::span<const std::uint8_t> y, std::span<const double> f);

// Ranks (1-based) of the relevant items in a list of N ranked items.
struct RankEvaluation {
  std::size_t corpus_size = 0;
  std::vector<std::size_t> ranks;
};

// Validates 1 <= R_i <= N, distinct ranks and a non-empty relevant set.
void validate(const RankEvaluation& eval);

// Normalized average rank: (sum R_i - N_rel (N_rel + 1) / 2) / (N N_rel).
double nar(const RankEvaluation& eval);

double binary_accuracy(std::span<const bool> pred, std::span<const bool> truth);
double binary_accuracy(const std::vector<bool>& pred, const std::vector<bool>& truth);

namespace serial {
LabelRankingReport lrap_report(const GroundTruthMatrix& y, const ScoreMatrix& f);
LabelRankingReport lrl_report(const GroundTruthMatrix& y, const ScoreMatrix& f);
}  // namespace serial

}  // namespace logofuse
