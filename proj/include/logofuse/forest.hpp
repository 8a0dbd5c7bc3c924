#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace logofuse {

struct ForestParams {
  int trees = 100;
  std::uint64_t seed = 20240527;
  bool bootstrap = true;
  // Features tried per split; 0 means floor(sqrt(dim)).
  int max_features = 0;
  int min_leaf = 1;
  // 0 means unbounded depth.
  int max_depth = 0;
};

// A CART classification tree with Gini splits. Leaves keep the class
// distribution of their training samples.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 for a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<std::pair<int, double>> distribution;  // leaf only, sparse
  };

  // `rows` holds indices into x (with repetition for bootstrap samples).
  static DecisionTree fit(const std::vector<std::vector<double>>& x, std::span<const int> y,
                          int n_classes, std::vector<std::size_t> rows, const ForestParams& params,
                          std::uint64_t seed);

  const std::vector<std::pair<int, double>>& leaf_for(std::span<const double> sample) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t depth() const;

  void write(std::ostream& out) const;
  static DecisionTree read(std::istream& in);

 private:
  std::vector<Node> nodes_;
};

class RandomForest {
 public:
  // Trains `params.trees` trees; tree t draws its randomness from a stream
  // derived from (seed, t) so the result does not depend on thread count.
  static RandomForest fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                          int n_classes, const ForestParams& params);

  // Mean leaf distribution over trees (sums to one).
  std::vector<double> class_votes(std::span<const double> sample) const;
  int predict(std::span<const double> sample) const;

  std::size_t tree_count() const { return trees_.size(); }
  int n_classes() const { return n_classes_; }
  std::size_t dim() const { return dim_; }
  const ForestParams& params() const { return params_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }

  void write(std::ostream& out) const;
  static RandomForest read(std::istream& in);

 private:
  std::vector<DecisionTree> trees_;
  int n_classes_ = 0;
  std::size_t dim_ = 0;
  ForestParams params_;
};

}  // namespace logofuse
