#include "logofuse/labelpowerset.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "binary_io.hpp"
#include "logofuse/error.hpp"

namespace logofuse {

namespace {

constexpr char kModelMagic[4] = {'L', 'P', 'F', 'M'};
constexpr std::uint32_t kModelVersion = 1;

}  // namespace

LabelPowerset LabelPowerset::train(const std::vector<std::vector<double>>& features,
                                   const std::vector<std::vector<int>>& labelsets, Kind kind,
                                   std::size_t label_count, const ForestParams& params,
                                   ClassifierInput input) {
  if (features.empty()) throw InvalidArgument("empty training set");
  if (features.size() != labelsets.size()) throw InvalidArgument("feature/labelset count mismatch");
  LabelPowerset model;
  model.kind_ = kind;
  model.label_count_ = label_count;
  model.input_ = input;

  std::map<std::vector<int>, int> class_of;
  std::vector<int> targets;
  targets.reserve(labelsets.size());
  for (auto labels : labelsets) {
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    if (labels.empty()) throw InvalidArgument("labelsets must be non-empty");
    for (int l : labels) {
      if (l < 0 || static_cast<std::size_t>(l) >= label_count) {
        throw InvalidArgument("label " + std::to_string(l) + " outside the label space");
      }
    }
    // Classes are numbered in order of first appearance.
    const auto [it, inserted] = class_of.emplace(labels, static_cast<int>(model.classes_.size()));
    if (inserted) model.classes_.push_back(labels);
    targets.push_back(it->second);
  }
  model.forest_ =
      RandomForest::fit(features, targets, static_cast<int>(model.classes_.size()), params);
  return model;
}

LabelScores scores_from_class_votes(Kind kind, const std::vector<std::vector<int>>& classes,
                                    const std::vector<double>& votes, std::size_t label_count) {
  if (votes.size() != classes.size()) throw InvalidArgument("one vote per atomic class expected");
  LabelScores out{kind, std::vector<double>(label_count, 0.0)};
  for (std::size_t c = 0; c < classes.size(); ++c) {
    for (int l : classes[c]) out.scores.at(static_cast<std::size_t>(l)) += votes[c];
  }
  for (auto& s : out.scores) s = std::clamp(s, 0.0, 1.0);
  return out;
}

LabelScores LabelPowerset::predict(std::span<const double> query) const {
  return scores_from_class_votes(kind_, classes_, forest_.class_votes(query), label_count_);
}

std::vector<double> LabelPowerset::input_vector(const FusedFeature& features) const {
  if (input_ == ClassifierInput::Fused) return features.concatenated();
  const auto* block = features.find(kind_);
  if (block == nullptr) {
    throw InvalidArgument("query lacks the " + std::string(kind_name(kind_)) + " block");
  }
  return block->values;
}

void LabelPowerset::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write model " + path);
  out.write(kModelMagic, 4);
  bin::put<std::uint32_t>(out, kModelVersion);
  bin::put<std::uint64_t>(out, forest_.params().seed);
  bin::put<std::uint32_t>(out, static_cast<std::uint32_t>(forest_.tree_count()));
  bin::put<std::uint8_t>(out, static_cast<std::uint8_t>(kind_));
  bin::put<std::uint32_t>(out, static_cast<std::uint32_t>(label_count_));
  bin::put<std::uint8_t>(out, static_cast<std::uint8_t>(input_));
  bin::put<std::uint32_t>(out, static_cast<std::uint32_t>(classes_.size()));
  for (const auto& labels : classes_) {
    bin::put<std::uint32_t>(out, static_cast<std::uint32_t>(labels.size()));
    for (int l : labels) bin::put<std::uint32_t>(out, static_cast<std::uint32_t>(l));
  }
  forest_.write(out);
  if (!out) throw IoError("write failed for " + path);
}

LabelPowerset LabelPowerset::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model " + path);
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kModelMagic)) {
    throw IoError(path + ": not a LabelPowerset model");
  }
  const auto version = bin::get<std::uint32_t>(in);
  if (version != kModelVersion) {
    throw IoError(path + ": unsupported model version " + std::to_string(version));
  }
  LabelPowerset model;
  const auto seed = bin::get<std::uint64_t>(in);
  const auto trees = bin::get<std::uint32_t>(in);
  const auto kind = kind_from_u8(bin::get<std::uint8_t>(in));
  if (!kind) throw IoError(path + ": unknown characteristic");
  model.kind_ = *kind;
  model.label_count_ = bin::get<std::uint32_t>(in);
  const auto input = bin::get<std::uint8_t>(in);
  if (input > 1) throw IoError(path + ": unknown classifier input");
  model.input_ = static_cast<ClassifierInput>(input);
  const auto n_classes = bin::get<std::uint32_t>(in);
  for (std::uint32_t c = 0; c < n_classes; ++c) {
    std::vector<int> labels(bin::get<std::uint32_t>(in));
    for (auto& l : labels) {
      l = static_cast<int>(bin::get<std::uint32_t>(in));
      if (static_cast<std::size_t>(l) >= model.label_count_) throw IoError(path + ": label out of range");
    }
    model.classes_.push_back(std::move(labels));
  }
  model.forest_ = RandomForest::read(in);
  if (model.forest_.params().seed != seed || model.forest_.tree_count() != trees ||
      static_cast<std::uint32_t>(model.forest_.n_classes()) != n_classes) {
    throw IoError(path + ": header disagrees with forest body");
  }
  return model;
}

}  // namespace logofuse
