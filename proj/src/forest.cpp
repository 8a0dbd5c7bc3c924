#include "logofuse/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "binary_io.hpp"
#include "logofuse/error.hpp"

namespace logofuse {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Uniform integer in [0, n); mt19937_64 output is specified by the standard,
// so unlike std::uniform_int_distribution this is portable.
std::size_t draw(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
};

struct Pending {
  int node;
  std::vector<std::size_t> rows;
  int depth;
};

}  // namespace

DecisionTree DecisionTree::fit(const std::vector<std::vector<double>>& x, std::span<const int> y,
                               int n_classes, std::vector<std::size_t> rows,
                               const ForestParams& params, std::uint64_t seed) {
  if (rows.empty()) throw InvalidArgument("cannot fit a tree on zero samples");
  const std::size_t dim = x.front().size();
  const int max_features = params.max_features > 0
                               ? std::min<int>(params.max_features, static_cast<int>(dim))
                               : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(dim))));
  const std::size_t min_leaf = static_cast<std::size_t>(std::max(1, params.min_leaf));
  std::mt19937_64 rng(seed);

  DecisionTree tree;
  tree.nodes_.emplace_back();
  std::vector<Pending> stack;
  stack.push_back({0, std::move(rows), 0});

  std::vector<int> features(dim);
  std::iota(features.begin(), features.end(), 0);
  std::vector<std::size_t> count_left(static_cast<std::size_t>(n_classes));
  std::vector<std::size_t> count_right(static_cast<std::size_t>(n_classes));
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes));

  while (!stack.empty()) {
    Pending task = std::move(stack.back());
    stack.pop_back();
    auto& sample_rows = task.rows;
    const std::size_t n = sample_rows.size();

    std::fill(counts.begin(), counts.end(), 0);
    for (auto r : sample_rows) counts[static_cast<std::size_t>(y[r])] += 1;
    const bool pure =
        std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) <= 1;
    const bool depth_limited = params.max_depth > 0 && task.depth >= params.max_depth;

    Split best;
    if (!pure && !depth_limited && n >= 2 * min_leaf) {
      // Partial Fisher-Yates: examine features in random order until
      // max_features non-constant ones have been evaluated.
      int evaluated = 0;
      for (std::size_t i = 0; i < dim && evaluated < max_features; ++i) {
        std::swap(features[i], features[i + draw(rng, dim - i)]);
        const int f = features[i];
        std::sort(sample_rows.begin(), sample_rows.end(), [&](std::size_t a, std::size_t b) {
          return x[a][f] < x[b][f] || (x[a][f] == x[b][f] && a < b);
        });
        if (x[sample_rows.front()][f] == x[sample_rows.back()][f]) continue;
        ++evaluated;

        std::fill(count_left.begin(), count_left.end(), 0);
        count_right = counts;
        double sumsq_left = 0.0;
        double sumsq_right = 0.0;
        for (auto c : counts) sumsq_right += static_cast<double>(c) * c;
        for (std::size_t i_split = 0; i_split + 1 < n; ++i_split) {
          const auto c = static_cast<std::size_t>(y[sample_rows[i_split]]);
          sumsq_left += 2.0 * count_left[c] + 1.0;
          sumsq_right -= 2.0 * count_right[c] - 1.0;
          count_left[c] += 1;
          count_right[c] -= 1;
          const double lo = x[sample_rows[i_split]][f];
          const double hi = x[sample_rows[i_split + 1]][f];
          if (!(lo < hi)) continue;
          const std::size_t n_left = i_split + 1;
          const std::size_t n_right = n - n_left;
          if (n_left < min_leaf || n_right < min_leaf) continue;
          const double impurity = (static_cast<double>(n_left) - sumsq_left / n_left) +
                                  (static_cast<double>(n_right) - sumsq_right / n_right);
          if (best.feature < 0 || impurity < best.impurity) {
            double threshold = lo + (hi - lo) / 2.0;
            if (!(threshold < hi)) threshold = lo;
            best = {f, threshold, impurity};
          }
        }
      }
    }

    if (best.feature < 0) {
      auto& node = tree.nodes_[static_cast<std::size_t>(task.node)];
      for (int c = 0; c < n_classes; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) {
          node.distribution.emplace_back(
              c, static_cast<double>(counts[static_cast<std::size_t>(c)]) / static_cast<double>(n));
        }
      }
      continue;
    }

    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : sample_rows) (x[r][best.feature] <= best.threshold ? left_rows : right_rows).push_back(r);
    const int left = static_cast<int>(tree.nodes_.size());
    tree.nodes_.emplace_back();
    tree.nodes_.emplace_back();
    auto& node = tree.nodes_[static_cast<std::size_t>(task.node)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left;
    node.right = left + 1;
    stack.push_back({left + 1, std::move(right_rows), task.depth + 1});
    stack.push_back({left, std::move(left_rows), task.depth + 1});
  }
  return tree;
}

const std::vector<std::pair<int, double>>& DecisionTree::leaf_for(std::span<const double> sample) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(sample[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                           : n.right);
  }
  return nodes_[i].distribution;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (nodes_[i].feature >= 0) {
      stack.emplace_back(static_cast<std::size_t>(nodes_[i].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes_[i].right), d + 1);
    }
  }
  return deepest;
}

void DecisionTree::write(std::ostream& out) const {
  bin::put<std::uint32_t>(out, static_cast<std::uint32_t>(nodes_.size()));
  for (const auto& n : nodes_) {
    bin::put<std::int32_t>(out, n.feature);
    if (n.feature >= 0) {
      bin::put<double>(out, n.threshold);
      bin::put<std::int32_t>(out, n.left);
      bin::put<std::int32_t>(out, n.right);
    } else {
      bin::put<std::uint32_t>(out, static_cast<std::uint32_t>(n.distribution.size()));
      for (const auto& [c, p] : n.distribution) {
        bin::put<std::int32_t>(out, c);
        bin::put<double>(out, p);
      }
    }
  }
}

DecisionTree DecisionTree::read(std::istream& in) {
  DecisionTree tree;
  const auto count = bin::get<std::uint32_t>(in);
  tree.nodes_.resize(count);
  for (auto& n : tree.nodes_) {
    n.feature = bin::get<std::int32_t>(in);
    if (n.feature >= 0) {
      n.threshold = bin::get<double>(in);
      n.left = bin::get<std::int32_t>(in);
      n.right = bin::get<std::int32_t>(in);
      if (n.left < 0 || n.right < 0 || static_cast<std::uint32_t>(n.left) >= count ||
          static_cast<std::uint32_t>(n.right) >= count) {
        throw IoError("corrupt tree: child index out of range");
      }
    } else {
      const auto len = bin::get<std::uint32_t>(in);
      for (std::uint32_t i = 0; i < len; ++i) {
        const auto c = bin::get<std::int32_t>(in);
        const auto p = bin::get<double>(in);
        n.distribution.emplace_back(c, p);
      }
    }
  }
  if (tree.nodes_.empty()) throw IoError("corrupt tree: no nodes");
  return tree;
}

RandomForest RandomForest::fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                               int n_classes, const ForestParams& params) {
  if (x.empty()) throw InvalidArgument("empty training set");
  if (x.size() != y.size()) throw InvalidArgument("feature/label count mismatch");
  if (params.trees < 1) throw InvalidArgument("forest needs at least one tree");
  const std::size_t dim = x.front().size();
  if (dim == 0) throw InvalidArgument("training vectors are empty");
  for (const auto& row : x) {
    if (row.size() != dim) throw InvalidArgument("training vectors have unequal dims");
  }
  for (int label : y) {
    if (label < 0 || label >= n_classes) throw InvalidArgument("class index out of range");
  }

  RandomForest forest;
  forest.n_classes_ = n_classes;
  forest.dim_ = dim;
  forest.params_ = params;
  forest.trees_.resize(static_cast<std::size_t>(params.trees));
  const std::size_t n = x.size();
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < params.trees; ++t) {
    const std::uint64_t tree_seed = splitmix64(params.seed ^ splitmix64(static_cast<std::uint64_t>(t)));
    std::mt19937_64 rng(tree_seed);
    std::vector<std::size_t> rows(n);
    if (params.bootstrap) {
      for (auto& r : rows) r = draw(rng, n);
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    forest.trees_[static_cast<std::size_t>(t)] =
        DecisionTree::fit(x, y, n_classes, std::move(rows), params, rng());
  }
  return forest;
}

std::vector<double> RandomForest::class_votes(std::span<const double> sample) const {
  if (sample.size() != dim_) {
    throw InvalidArgument("sample has dim " + std::to_string(sample.size()) + ", forest expects " +
                          std::to_string(dim_));
  }
  std::vector<double> votes(static_cast<std::size_t>(n_classes_), 0.0);
  for (const auto& tree : trees_) {
    for (const auto& [c, p] : tree.leaf_for(sample)) votes[static_cast<std::size_t>(c)] += p;
  }
  for (auto& v : votes) v /= static_cast<double>(trees_.size());
  return votes;
}

int RandomForest::predict(std::span<const double> sample) const {
  const auto votes = class_votes(sample);
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

void RandomForest::write(std::ostream& out) const {
  bin::put<std::uint32_t>(out, static_cast<std::uint32_t>(n_classes_));
  bin::put<std::uint64_t>(out, dim_);
  bin::put<std::uint64_t>(out, params_.seed);
  bin::put<std::uint32_t>(out, static_cast<std::uint32_t>(params_.trees));
  bin::put<std::uint8_t>(out, params_.bootstrap ? 1 : 0);
  bin::put<std::int32_t>(out, params_.max_features);
  bin::put<std::int32_t>(out, params_.min_leaf);
  bin::put<std::int32_t>(out, params_.max_depth);
  for (const auto& t : trees_) t.write(out);
}

RandomForest RandomForest::read(std::istream& in) {
  RandomForest f;
  f.n_classes_ = static_cast<int>(bin::get<std::uint32_t>(in));
  f.dim_ = bin::get<std::uint64_t>(in);
  f.params_.seed = bin::get<std::uint64_t>(in);
  f.params_.trees = static_cast<int>(bin::get<std::uint32_t>(in));
  f.params_.bootstrap = bin::get<std::uint8_t>(in) != 0;
  f.params_.max_features = bin::get<std::int32_t>(in);
  f.params_.min_leaf = bin::get<std::int32_t>(in);
  f.params_.max_depth = bin::get<std::int32_t>(in);
  if (f.params_.trees < 1 || f.n_classes_ < 1) throw IoError("corrupt forest header");
  for (int t = 0; t < f.params_.trees; ++t) {
    f.trees_.push_back(DecisionTree::read(in));
    for (const auto& node : f.trees_.back().nodes()) {
      if (node.feature >= 0 && static_cast<std::size_t>(node.feature) >= f.dim_) {
        throw IoError("corrupt tree: feature index out of range");
      }
      for (const auto& [c, p] : node.distribution) {
        if (c < 0 || c >= f.n_classes_) throw IoError("corrupt tree: class index out of range");
      }
    }
  }
  return f;
}

}  // namespace logofuse
