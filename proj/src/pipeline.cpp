#include "logofuse/pipeline.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "logofuse/embedding_store.hpp"
#include "logofuse/image_io.hpp"
#include "logofuse/synth.hpp"

namespace logofuse {

namespace fs = std::filesystem;

FeatureBlock generic_thumbnail_extractor(const NormalizedImage& img) {
  FeatureBlock out{Kind::Generic, std::vector<double>(kGenericDim, 0.0)};
  const int cell_w = img.width / kGenericSide, cell_h = img.height / kGenericSide;
  for (int cy = 0; cy < kGenericSide; ++cy) {
    for (int cx = 0; cx < kGenericSide; ++cx) {
      double acc = 0.0;
      for (int y = cy * cell_h; y < (cy + 1) * cell_h; ++y) {
        for (int x = cx * cell_w; x < (cx + 1) * cell_w; ++x) {
          acc += 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
        }
      }
      out.values[static_cast<std::size_t>(cy) * kGenericSide + cx] = acc / (cell_w * cell_h);
    }
  }
  return l2_normalize(out);
}

FusedFeature extract_features(const RasterImage& img, const TextMask* mask,
                              const PipelineOptions& options) {
  if (mask != nullptr && (mask->width() != img.width() || mask->height() != img.height())) {
    throw InvalidArgument("mask dimensions do not match the image");
  }
  RasterImage cropped = img;
  std::optional<TextMask> cropped_mask;
  if (mask != nullptr) cropped_mask = *mask;
  if (options.crop) {
    const auto rect = uniform_border_bounds(img, options.preprocess.border_tolerance);
    cropped = img.sub_image(rect.x, rect.y, rect.width, rect.height);
    if (mask != nullptr) cropped_mask = crop_mask(*mask, rect);
  }

  const auto plain = resize_normalize(cropped);
  std::optional<NormalizedImage> text_free;
  if (cropped_mask && options.fill_text && cropped_mask->count() > 0) {
    auto filled = fill_text_region(cropped, *cropped_mask, options.preprocess.white_tolerance);
    // removing the text can expose a new uniform border
    if (options.crop) filled = crop_uniform_border(filled, options.preprocess.border_tolerance);
    text_free = resize_normalize(filled);
  }
  const NormalizedImage& shape_input = text_free ? *text_free : plain;

  FusedFeature out;
  out.add(color_histogram_extractor(plain));
  out.add(edge_orientation_extractor(shape_input));
  out.add(text_presence_extractor(cropped_mask ? &*cropped_mask : nullptr, options.text_min_ratio));
  if (options.include_generic) {
    out.add(generic_thumbnail_extractor(options.generic_text_free ? shape_input : plain));
  }
  return out;
}

FusedFeature extract_file(const fs::path& image_path, const PipelineOptions& options) {
  const auto img = read_image(image_path.string());
  const auto mpath = mask_path_for(image_path);
  if (fs::exists(mpath)) {
    const auto mask = read_mask(mpath.string());
    return extract_features(img, &mask, options);
  }
  return extract_features(img, nullptr, options);
}

ExtractedCorpus extract_manifest(const DatasetManifest& manifest, const PipelineOptions& options) {
  const auto& records = manifest.records;
  ExtractedCorpus out(records.size());
  std::vector<std::string> errors(records.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      out[i] = {records[i].id, extract_file(manifest.image_path(records[i]), options)};
    } catch (const std::exception& e) {
      errors[i] = "record " + std::to_string(records[i].id) + ": " + e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw IoError(e);
  }
  return out;
}

std::map<Kind, fs::path> write_feature_stores(const ExtractedCorpus& corpus, const fs::path& dir) {
  fs::create_directories(dir);
  std::map<Kind, std::vector<std::pair<std::uint64_t, FeatureBlock>>> by_kind;
  for (const auto& [id, fused] : corpus) {
    for (const auto& [kind, block] : fused.blocks()) by_kind[kind].emplace_back(id, block);
  }
  std::map<Kind, fs::path> paths;
  for (const auto& [kind, blocks] : by_kind) {
    const auto path = dir / (std::string(kind_name(kind)) + ".ncf");
    write_embedding_store(path.string(), make_embedding_store(kind, blocks, false));
    paths[kind] = path;
  }
  return paths;
}

BlockTables load_feature_stores(const std::map<Kind, fs::path>& stores) {
  BlockTables tables;
  for (const auto& [kind, path] : stores) {
    auto blocks = import_neural_codes(path.string());
    for (const auto& [id, block] : blocks) {
      if (block.kind != kind) {
        throw InvalidArgument(path.string() + " holds " + std::string(kind_name(block.kind)) +
                              " codes, expected " + std::string(kind_name(kind)));
      }
      break;
    }
    tables[kind] = std::move(blocks);
  }
  return tables;
}

SearchIndex build_corpus_index(const DatasetManifest& manifest, const BlockTables& tables,
                               NormalizationMode mode, bool train_only, const Taxonomy& taxonomy) {
  if (tables.empty()) throw InvalidArgument("no feature stores given");
  std::vector<SchemaEntry> schema;
  for (const auto& [kind, blocks] : tables) {
    if (blocks.empty()) throw InvalidArgument(std::string(kind_name(kind)) + " store is empty");
    schema.push_back({kind, blocks.begin()->second.dim()});
  }
  std::vector<IndexRecord> records;
  std::map<std::uint64_t, Annotation> annotations;
  for (const auto& r : manifest.records) {
    if (train_only && r.split != Split::Train) continue;
    FusedFeature fused;
    for (const auto& [kind, blocks] : tables) {
      const auto it = blocks.find(r.id);
      if (it == blocks.end()) {
        throw InvalidArgument("logo " + std::to_string(r.id) + " has no " +
                              std::string(kind_name(kind)) + " vector");
      }
      fused.add(it->second);
    }
    if (mode == NormalizationMode::WholeVector) fused = normalize(fused, mode);
    records.push_back({r.id, std::move(fused)});
    annotations[r.id] = annotate(r, taxonomy);
  }
  if (records.empty()) throw InvalidArgument("no records to index");
  return build_index(std::move(records), std::move(annotations), std::move(schema), mode, taxonomy);
}

namespace {

std::string stored_path(const fs::path& p, const fs::path& dir) {
  std::error_code ec;
  const auto abs = fs::absolute(p, ec);
  const auto rel = fs::relative(abs, fs::absolute(dir), ec);
  if (!ec && !rel.empty()) return rel.generic_string();
  return abs.generic_string();
}

fs::path resolve(const std::string& p, const fs::path& dir) {
  const fs::path path(p);
  return path.is_absolute() ? path : (dir / path).lexically_normal();
}

}  // namespace

void save_index_spec(const IndexSpec& spec, const fs::path& dir) {
  fs::create_directories(dir);
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["manifest"] = stored_path(spec.manifest, dir);
  j["normalization"] = spec.mode == NormalizationMode::PerBlock ? "per-block" : "whole-vector";
  j["records"] = spec.train_only ? "train" : "all";
  j["stores"] = nlohmann::ordered_json::object();
  for (const auto& [kind, p] : spec.stores) j["stores"][std::string(kind_name(kind))] = stored_path(p, dir);
  j["models"] = nlohmann::ordered_json::object();
  for (const auto& [kind, p] : spec.models) j["models"][std::string(kind_name(kind))] = stored_path(p, dir);
  std::ofstream out(dir / kIndexFile, std::ios::trunc);
  if (!out) throw IoError("cannot write " + (dir / kIndexFile).string());
  out << j.dump(2) << "\n";
}

IndexSpec load_index_spec(const fs::path& dir) {
  std::ifstream in(dir / kIndexFile);
  if (!in) throw IoError("no index at " + dir.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    IndexSpec spec;
    if (j.at("version").get<int>() != 1) throw ParseError("unsupported index version");
    spec.manifest = resolve(j.at("manifest").get<std::string>(), dir);
    const auto norm = j.value("normalization", std::string("per-block"));
    if (norm == "per-block") {
      spec.mode = NormalizationMode::PerBlock;
    } else if (norm == "whole-vector") {
      spec.mode = NormalizationMode::WholeVector;
    } else {
      throw ParseError("unknown normalization '" + norm + "'");
    }
    spec.train_only = j.value("records", std::string("all")) == "train";
    for (const auto& [k, v] : j.at("stores").items()) {
      spec.stores[parse_kind(k)] = resolve(v.get<std::string>(), dir);
    }
    if (j.contains("models")) {
      for (const auto& [k, v] : j["models"].items()) {
        spec.models[parse_kind(k)] = resolve(v.get<std::string>(), dir);
      }
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError((dir / kIndexFile).string() + ": " + e.what());
  }
}

IndexBundle build_index_bundle(const IndexSpec& spec, const fs::path& dir) {
  auto load = load_manifest(spec.manifest);
  auto tables = load_feature_stores(spec.stores);
  auto index = build_corpus_index(load.manifest, tables, spec.mode, spec.train_only);
  IndexBundle bundle{dir, spec, std::move(load.manifest), std::move(index), {}};
  for (const auto& [kind, path] : spec.models) {
    auto model = LabelPowerset::load(path.string());
    if (model.kind() != kind) {
      throw InvalidArgument(path.string() + " is a " + std::string(kind_name(model.kind())) +
                            " model, expected " + std::string(kind_name(kind)));
    }
    bundle.models.emplace(kind, std::move(model));
  }
  return bundle;
}

IndexBundle load_index_bundle(const fs::path& dir) { return build_index_bundle(load_index_spec(dir), dir); }

LabelPowerset train_labelpowerset(const SearchIndex& index, const DatasetManifest& manifest, Kind kind,
                                  const ForestParams& params, ClassifierInput input) {
  std::vector<std::vector<double>> features;
  std::vector<std::vector<int>> labelsets;
  for (const auto& r : manifest.records) {
    if (r.split != Split::Train || !index.contains(r.id)) continue;
    const auto& ann = index.annotation_of(r.id);
    const auto it = ann.find(kind);
    if (it == ann.end() || it->second.empty()) continue;
    const auto fused = index.features_of(r.id);
    if (input == ClassifierInput::Fused) {
      features.push_back(fused.concatenated());
    } else {
      const auto* block = fused.find(kind);
      if (block == nullptr) {
        throw InvalidArgument("the index has no " + std::string(kind_name(kind)) +
                              " block for own-block training");
      }
      features.push_back(block->values);
    }
    labelsets.push_back(it->second);
  }
  if (features.empty()) {
    throw InvalidArgument("no training record carries a " + std::string(kind_name(kind)) + " label");
  }
  return LabelPowerset::train(features, labelsets, kind, index.label_count(kind), params, input);
}

FusedFeature prepare_query(const SearchIndex& index, const FusedFeature& raw) {
  FusedFeature out;
  for (const auto& entry : index.schema()) {
    const auto* block = raw.find(entry.kind);
    if (block == nullptr) continue;
    if (block->dim() != entry.dim) {
      throw InvalidArgument(std::string(kind_name(entry.kind)) + " query block has dim " +
                            std::to_string(block->dim()) + ", index expects " +
                            std::to_string(entry.dim));
    }
    out.add(l2_normalize(*block));
  }
  if (index.normalization() == NormalizationMode::WholeVector) {
    out = normalize(out, NormalizationMode::WholeVector);
  }
  return out;
}

}  // namespace logofuse

namespace logofuse {

IndexBundle build_index_directory(const IndexBuildOptions& options) {
  if (options.out.empty()) throw InvalidArgument("no output directory for the index");
  auto load = load_manifest(options.manifest);
  IndexSpec spec;
  spec.manifest = options.manifest;
  spec.mode = options.mode;
  spec.train_only = options.train_only;
  spec.stores = options.stores;
  if (spec.stores.empty()) {
    spec.stores = write_feature_stores(extract_manifest(load.manifest, options.pipeline),
                                       options.out / "features");
  }
  auto index = build_corpus_index(load.manifest, load_feature_stores(spec.stores), spec.mode,
                                  spec.train_only);
  IndexBundle bundle{options.out, spec, std::move(load.manifest), std::move(index), {}};
  fs::create_directories(options.out);
  for (Kind kind : options.train_lp) {
    auto model = train_labelpowerset(bundle.index, bundle.manifest, kind, options.forest, options.lp_input);
    const auto path = options.out / ("lp_" + std::string(kind_name(kind)) + ".model");
    model.save(path.string());
    bundle.spec.models[kind] = path;
    bundle.models.insert_or_assign(kind, std::move(model));
  }
  save_index_spec(bundle.spec, options.out);
  return bundle;
}

}  // namespace logofuse
