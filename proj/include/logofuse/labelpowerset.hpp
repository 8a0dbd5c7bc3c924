#pragma once

#include <string>
#include <vector>

#include "logofuse/forest.hpp"
#include "logofuse/search.hpp"

namespace logofuse {

// Which vector a LabelPowerset model consumes.
enum class ClassifierInput : std::uint8_t {
  Fused = 0,     // concatenation of every schema block
  OwnBlock = 1,  // only the block of the model's characteristic
};

// Multi-label to multi-class transformation: every distinct training
// labelset is one atomic class of a random forest.
class LabelPowerset {
 public:
  static LabelPowerset train(const std::vector<std::vector<double>>& features,
                             const std::vector<std::vector<int>>& labelsets, Kind kind,
                             std::size_t label_count, const ForestParams& params,
                             ClassifierInput input = ClassifierInput::Fused);

  Kind kind() const { return kind_; }
  std::size_t label_count() const { return label_count_; }
  ClassifierInput input() const { return input_; }
  const std::vector<std::vector<int>>& classes() const { return classes_; }
  const RandomForest& forest() const { return forest_; }

  // Per-label confidence: the vote mass of every atomic class containing it.
  LabelScores predict(std::span<const double> query) const;
  // Picks the vector this model consumes out of a fused descriptor.
  std::vector<double> input_vector(const FusedFeature& features) const;

  void save(const std::string& path) const;
  static LabelPowerset load(const std::string& path);

 private:
  Kind kind_ = Kind::Generic;
  std::size_t label_count_ = 0;
  ClassifierInput input_ = ClassifierInput::Fused;
  std::vector<std::vector<int>> classes_;
  RandomForest forest_;
};

// Vote mass per atomic class -> per-label confidence (clamped to [0,1]).
LabelScores scores_from_class_votes(Kind kind, const std::vector<std::vector<int>>& classes,
                                    const std::vector<double>& votes, std::size_t label_count);

}  // namespace logofuse
