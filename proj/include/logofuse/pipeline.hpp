#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "logofuse/features.hpp"
#include "logofuse/image.hpp"
#include "logofuse/labelpowerset.hpp"
#include "logofuse/manifest.hpp"
#include "logofuse/preprocess.hpp"
#include "logofuse/search.hpp"

namespace logofuse {

struct PipelineOptions {
  PreprocessOptions preprocess;
  bool crop = true;
  // Shape sees the text-free image when a mask is available.
  bool fill_text = true;
  // Adds the 256-dim grayscale thumbnail surrogate for the generic block.
  bool include_generic = false;
  // Whether the generic block also consumes the text-free image.
  bool generic_text_free = false;
  double text_min_ratio = 0.001;
};

inline constexpr int kGenericSide = 16;
inline constexpr int kGenericDim = kGenericSide * kGenericSide;

// 16x16 average-pooled grayscale thumbnail, l2-normalized.
FeatureBlock generic_thumbnail_extractor(const NormalizedImage& img);

// Baseline blocks (color, shape, text and optionally generic), each
// l2-normalized.
FusedFeature extract_features(const RasterImage& img, const TextMask* mask,
                              const PipelineOptions& options = {});
// Loads the image and, when present, its sidecar mask.
FusedFeature extract_file(const std::filesystem::path& image_path,
                          const PipelineOptions& options = {});

using ExtractedCorpus = std::vector<std::pair<std::uint64_t, FusedFeature>>;

ExtractedCorpus extract_manifest(const DatasetManifest& manifest,
                                 const PipelineOptions& options = {});

// One NCF1 file per kind, named <kind>.ncf. Returns the written paths.
std::map<Kind, std::filesystem::path> write_feature_stores(const ExtractedCorpus& corpus,
                                                           const std::filesystem::path& dir);

// Per-kind block tables as read back from embedding stores.
using BlockTables = std::map<Kind, std::map<std::uint64_t, FeatureBlock>>;

BlockTables load_feature_stores(const std::map<Kind, std::filesystem::path>& stores);

// Index over the manifest's records (optionally only the training split).
// Every record must have a block of every stored kind.
SearchIndex build_corpus_index(const DatasetManifest& manifest, const BlockTables& tables,
                               NormalizationMode mode = NormalizationMode::PerBlock,
                               bool train_only = false,
                               const Taxonomy& taxonomy = Taxonomy::builtin());

// ---- persisted index directory (index.json + optional lp_<kind>.model)

struct IndexSpec {
  std::filesystem::path manifest;
  std::map<Kind, std::filesystem::path> stores;
  NormalizationMode mode = NormalizationMode::PerBlock;
  bool train_only = false;
  std::map<Kind, std::filesystem::path> models;
};

inline constexpr const char* kIndexFile = "index.json";

// Paths are written relative to `dir` when possible.
void save_index_spec(const IndexSpec& spec, const std::filesystem::path& dir);
IndexSpec load_index_spec(const std::filesystem::path& dir);

struct IndexBundle {
  std::filesystem::path dir;
  IndexSpec spec;
  DatasetManifest manifest;
  SearchIndex index;
  std::map<Kind, LabelPowerset> models;
};

IndexBundle load_index_bundle(const std::filesystem::path& dir);
// Builds an in-memory bundle from a spec; the directory is only recorded.
IndexBundle build_index_bundle(const IndexSpec& spec, const std::filesystem::path& dir);

// Trains a LabelPowerset for one kind on the indexed training records.
// Records with an empty labelset for the kind are left out.
LabelPowerset train_labelpowerset(const SearchIndex& index, const DatasetManifest& manifest, Kind kind,
                                  const ForestParams& params,
                                  ClassifierInput input = ClassifierInput::Fused);

// Query descriptor normalized the way the index expects.
FusedFeature prepare_query(const SearchIndex& index, const FusedFeature& raw);

}  // namespace logofuse

namespace logofuse {

// Everything needed to (re)build a persisted index directory.
struct IndexBuildOptions {
  std::filesystem::path manifest;
  // Empty: baseline features are extracted into <out>/features.
  std::map<Kind, std::filesystem::path> stores;
  std::filesystem::path out;
  NormalizationMode mode = NormalizationMode::PerBlock;
  bool train_only = false;
  std::vector<Kind> train_lp;
  ForestParams forest;
  ClassifierInput lp_input = ClassifierInput::Fused;
  PipelineOptions pipeline;
};

// Extracts (when needed), indexes, trains the requested LabelPowerset models
// and writes index.json plus lp_<kind>.model files under `out`.
IndexBundle build_index_directory(const IndexBuildOptions& options);

}  // namespace logofuse
