#include "logofuse/service.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "logofuse/evaluation.hpp"
#include "logofuse/image_io.hpp"

namespace logofuse {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

struct ApiError {
  int status;
  std::string code;
  std::string message;
};

ApiResponse error_response(const ApiError& e) {
  ojson j;
  j["error"] = {{"code", e.code}, {"message", e.message}};
  return {e.status, dump_json(j)};
}

ApiResponse ok(const ojson& j) { return {200, dump_json(j)}; }

// Runs a handler body, mapping exceptions to error responses.
template <class F>
ApiResponse guarded(F&& body) {
  try {
    return body();
  } catch (const ApiError& e) {
    return error_response(e);
  } catch (const ManifestRejected& e) {
    ojson j;
    j["error"] = {{"code", "invalid_manifest"}, {"message", e.what()}};
    j["error"]["issues"] = ojson::array();
    for (const auto& issue : e.issues()) {
      j["error"]["issues"].push_back({{"line", issue.line}, {"message", issue.message}});
    }
    return {422, dump_json(j)};
  } catch (const ParseError& e) {
    return error_response({400, "invalid_request", e.what()});
  } catch (const InvalidArgument& e) {
    return error_response({400, "invalid_request", e.what()});
  } catch (const IoError& e) {
    return error_response({404, "not_found", e.what()});
  } catch (const json::exception& e) {
    return error_response({400, "invalid_request", e.what()});
  } catch (const std::exception& e) {
    return error_response({500, "internal", e.what()});
  }
}

Kind kind_param(const std::string& name) {
  try {
    return parse_kind(name);
  } catch (const Error&) {
    throw ApiError{400, "unknown_kind", "unknown characteristic '" + name + "'"};
  }
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path under_root(const fs::path& root, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : root / path;
}

std::shared_ptr<const IndexBundle> require_index(const std::shared_ptr<const IndexBundle>& b) {
  if (!b) throw ApiError{409, "index_missing", "no index is loaded; POST /index/build first"};
  return b;
}

QueryWeights parse_weights(const json& req, const SearchIndex& index) {
  std::map<Kind, double> raw;
  if (req.contains("preset")) {
    const auto name = req["preset"].get<std::string>();
    const auto it = weight_presets().find(name);
    if (it == weight_presets().end()) throw ApiError{400, "invalid_weights", "unknown preset '" + name + "'"};
    raw = it->second;
  } else if (req.contains("weights")) {
    const auto& w = req["weights"];
    if (!w.is_object()) throw ApiError{400, "invalid_weights", "weights must be an object"};
    for (const auto& [k, v] : w.items()) {
      if (!v.is_number()) throw ApiError{400, "invalid_weights", "weight of '" + k + "' is not a number"};
      raw[kind_param(k)] = v.get<double>();
    }
  } else {
    raw = weight_presets().at("color30-shape70");
  }
  QueryWeights weights;
  try {
    weights = QueryWeights::from_raw(raw);
  } catch (const InvalidArgument& e) {
    throw ApiError{400, "invalid_weights", e.what()};
  }
  for (Kind k : weights.active_kinds()) {
    const auto& schema = index.schema();
    if (std::none_of(schema.begin(), schema.end(), [&](const SchemaEntry& s) { return s.kind == k; })) {
      throw ApiError{400, "invalid_weights",
                     "characteristic '" + std::string(kind_name(k)) + "' is not in the index"};
    }
  }
  return weights;
}

std::size_t parse_k(const json& req) {
  if (!req.contains("k")) return kDefaultK;
  if (!req["k"].is_number_integer()) throw ApiError{400, "invalid_k", "k must be an integer"};
  const auto k = req["k"].get<long long>();
  if (k < 1 || k > static_cast<long long>(kMaxK)) {
    throw ApiError{400, "invalid_k", "k must lie in [1, " + std::to_string(kMaxK) + "]"};
  }
  return static_cast<std::size_t>(k);
}

struct ResolvedQuery {
  FusedFeature features;
  std::optional<std::uint64_t> id;
};

ResolvedQuery resolve_query(const IndexBundle& bundle, const json& req,
                            std::span<const std::uint8_t> upload,
                            std::span<const std::uint8_t> upload_mask, const PipelineOptions& pipeline) {
  std::vector<std::uint8_t> image_bytes(upload.begin(), upload.end());
  std::vector<std::uint8_t> mask_bytes(upload_mask.begin(), upload_mask.end());
  if (req.contains("query")) {
    const auto& q = req["query"];
    std::optional<std::uint64_t> id;
    if (q.is_number_unsigned()) id = q.get<std::uint64_t>();
    if (q.is_object() && q.contains("id")) id = q["id"].get<std::uint64_t>();
    if (id) {
      if (!bundle.index.contains(*id)) {
        throw ApiError{404, "unknown_id", "logo " + std::to_string(*id) + " is not in the index"};
      }
      return {bundle.index.features_of(*id), id};
    }
    if (q.is_object() && q.contains("image_base64")) {
      image_bytes = base64_decode(q["image_base64"].get<std::string>());
      if (q.contains("mask_base64")) mask_bytes = base64_decode(q["mask_base64"].get<std::string>());
    } else if (!q.is_null()) {
      throw ApiError{400, "invalid_query", "query must be a logo id or {\"image_base64\": ...}"};
    }
  }
  if (image_bytes.empty()) throw ApiError{400, "invalid_query", "no query logo given"};
  RasterImage img;
  try {
    img = decode_image(image_bytes);
  } catch (const Error& e) {
    throw ApiError{400, "invalid_image", e.what()};
  }
  FusedFeature raw;
  if (!mask_bytes.empty()) {
    const auto mask_img = decode_image(mask_bytes);
    TextMask mask(mask_img.width(), mask_img.height());
    for (int y = 0; y < mask_img.height(); ++y) {
      for (int x = 0; x < mask_img.width(); ++x) {
        const auto c = mask_img.at(x, y);
        mask.set(x, y, c[0] != 0 || c[1] != 0 || c[2] != 0);
      }
    }
    raw = extract_features(img, &mask, pipeline);
  } else {
    raw = extract_features(img, nullptr, pipeline);
  }
  return {prepare_query(bundle.index, raw), std::nullopt};
}

ojson labels_json(const Annotation& ann, const Taxonomy& taxonomy) {
  ojson out = ojson::object();
  for (const auto& [kind, labels] : ann) {
    ojson names = ojson::array();
    for (int l : labels) names.push_back(taxonomy.space(kind).at(l).name);
    out[std::string(kind_name(kind))] = names;
  }
  return out;
}

ojson weights_json(const QueryWeights& w) {
  ojson out = ojson::object();
  for (const auto& [kind, v] : w.weights()) out[std::string(kind_name(kind))] = round6(v);
  return out;
}

}  // namespace

const std::map<std::string, std::map<Kind, double>>& weight_presets() {
  static const std::map<std::string, std::map<Kind, double>> presets = {
      {"color-only", {{Kind::Color, 1.0}}},
      {"shape-only", {{Kind::Shape, 1.0}}},
      {"color30-shape70", {{Kind::Color, 0.3}, {Kind::Shape, 0.7}}},
      {"color70-shape30", {{Kind::Color, 0.7}, {Kind::Shape, 0.3}}},
      {"main70-shape30", {{Kind::FigurativeMain, 0.7}, {Kind::Shape, 0.3}}},
      {"main70-color30", {{Kind::FigurativeMain, 0.7}, {Kind::Color, 0.3}}},
  };
  return presets;
}

fs::path default_data_root() {
  if (const char* env = std::getenv("LOGOFUSE_DATA"); env != nullptr && *env != '\0') return env;
  return ".";
}

double round6(double v) {
  const double r = std::round(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;  // no negative zero
}

std::string dump_json(const ojson& j) { return j.dump() + "\n"; }

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+' || c == '-') return 62;
    if (c == '/' || c == '_') return 63;
    return -1;
  };
  // tolerate a data URL prefix
  if (const auto comma = text.find(','); text.substr(0, 5) == "data:" && comma != std::string_view::npos) {
    text.remove_prefix(comma + 1);
  }
  std::vector<std::uint8_t> out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=' || c == '\n' || c == '\r' || c == ' ') continue;
    const int v = value(c);
    if (v < 0) throw ParseError("invalid base64 data");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
    }
  }
  return out;
}

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  if (options_.index_dir.empty()) options_.index_dir = options_.data_root / "index";
}

std::shared_ptr<const IndexBundle> Service::snapshot() const {
  std::lock_guard lock(mutex_);
  return bundle_;
}

void Service::set_bundle(std::shared_ptr<const IndexBundle> bundle) {
  std::lock_guard lock(mutex_);
  bundle_ = std::move(bundle);
}

bool Service::try_load() {
  if (!fs::exists(options_.index_dir / kIndexFile)) return false;
  set_bundle(std::make_shared<const IndexBundle>(load_index_bundle(options_.index_dir)));
  return true;
}

ApiResponse Service::health() const {
  const auto bundle = snapshot();
  ojson j;
  j["status"] = "ok";
  j["index_loaded"] = bundle != nullptr;
  j["records"] = bundle ? bundle->index.size() : 0;
  j["schema"] = ojson::array();
  j["models"] = ojson::array();
  if (bundle) {
    for (const auto& s : bundle->index.schema()) {
      j["schema"].push_back({{"kind", kind_name(s.kind)}, {"dim", s.dim}});
    }
    for (const auto& [kind, model] : bundle->models) j["models"].push_back(kind_name(kind));
  }
  return ok(j);
}

ApiResponse Service::labels(const std::optional<std::string>& kind) const {
  return guarded([&] {
    const auto& taxonomy = Taxonomy::builtin();
    auto space_json = [&](Kind k) {
      ojson s;
      s["kind"] = kind_name(k);
      s["labels"] = ojson::array();
      for (const auto& label : taxonomy.space(k).labels) {
        ojson codes = ojson::array();
        for (const auto& c : label.source_codes) {
          codes.push_back(k == Kind::Sector ? std::to_string(c.category) : format_code(c));
        }
        s["labels"].push_back({{"id", label.id}, {"name", label.name}, {"codes", codes}});
      }
      return s;
    };
    if (kind) {
      const Kind k = kind_param(*kind);
      if (k == Kind::Generic) throw ApiError{400, "unknown_kind", "the generic block has no labels"};
      return ok(space_json(k));
    }
    ojson j;
    j["spaces"] = ojson::array();
    for (Kind k : kLabeledKinds) j["spaces"].push_back(space_json(k));
    return ok(j);
  });
}

ApiResponse Service::presets() const {
  ojson j = ojson::object();
  for (const auto& [name, raw] : weight_presets()) j[name] = weights_json(QueryWeights::from_raw(raw));
  return ok(j);
}

ApiResponse Service::search(const json& req, std::span<const std::uint8_t> upload,
                            std::span<const std::uint8_t> upload_mask) const {
  return guarded([&] {
    const auto bundle = require_index(snapshot());
    const auto method = req.value("method", std::string("knn"));
    if (method != "knn") throw ApiError{400, "invalid_method", "search supports method knn only"};
    SearchConfig cfg;
    cfg.k = parse_k(req);
    cfg.weights = parse_weights(req, bundle->index);
    const auto query = resolve_query(*bundle, req, upload, upload_mask, options_.pipeline);
    const auto ranked = query_knn(bundle->index, query.features, cfg);

    ojson j;
    if (query.id) {
      j["query"] = {{"id", *query.id}};
    } else {
      j["query"] = {{"upload", true}};
    }
    j["weights"] = weights_json(cfg.weights);
    j["k"] = cfg.k;
    j["truncated"] = ranked.truncated;
    j["k_exceeds_index"] = ranked.k_exceeds_index;
    j["hits"] = ojson::array();
    std::size_t rank = 0;
    for (const auto& hit : ranked.hits) {
      ojson h;
      h["rank"] = ++rank;
      h["id"] = hit.id;
      h["distance"] = round6(hit.distance);
      h["thumbnail"] = "/thumbs/" + std::to_string(hit.id);
      h["labels"] = labels_json(bundle->index.annotation_of(hit.id), Taxonomy::builtin());
      j["hits"].push_back(std::move(h));
    }
    return ok(j);
  });
}

ApiResponse Service::classify(const json& req, std::span<const std::uint8_t> upload,
                              std::span<const std::uint8_t> upload_mask) const {
  return guarded([&] {
    const auto bundle = require_index(snapshot());
    const auto method = req.value("method", std::string("knn"));
    if (method != "knn" && method != "brknn" && method != "lp") {
      throw ApiError{400, "invalid_method", "method must be knn, brknn or lp"};
    }
    const double floor = req.value("floor", kDefaultConfidenceFloor);
    if (!(floor >= 0.0 && floor <= 1.0)) throw ApiError{400, "invalid_floor", "floor must lie in [0,1]"};

    std::vector<Kind> kinds;
    if (req.contains("kinds")) {
      for (const auto& k : req["kinds"]) {
        const Kind kind = kind_param(k.get<std::string>());
        if (kind == Kind::Generic) throw ApiError{400, "unknown_kind", "the generic block has no labels"};
        kinds.push_back(kind);
      }
    } else if (req.contains("kind")) {
      kinds.push_back(kind_param(req["kind"].get<std::string>()));
      if (kinds.back() == Kind::Generic) throw ApiError{400, "unknown_kind", "the generic block has no labels"};
    } else if (method == "lp") {
      for (const auto& [kind, model] : bundle->models) kinds.push_back(kind);
      if (kinds.empty()) throw ApiError{409, "model_missing", "no LabelPowerset model is trained"};
    } else {
      kinds.assign(kLabeledKinds.begin(), kLabeledKinds.end());
    }
    for (Kind k : kinds) {
      if (method == "lp" && bundle->models.count(k) == 0) {
        throw ApiError{409, "model_missing",
                       "no LabelPowerset model for '" + std::string(kind_name(k)) + "'"};
      }
    }

    SearchConfig cfg;
    cfg.k = parse_k(req);
    const auto query = resolve_query(*bundle, req, upload, upload_mask, options_.pipeline);
    if (method != "lp") cfg.weights = parse_weights(req, bundle->index);

    const auto& taxonomy = Taxonomy::builtin();
    ojson j;
    j["method"] = method;
    if (method != "lp") {
      j["k"] = cfg.k;
      j["weights"] = weights_json(cfg.weights);
    }
    j["floor"] = round6(floor);
    j["kinds"] = ojson::object();
    for (Kind kind : kinds) {
      LabelScores scores;
      if (method == "knn") {
        scores = knn_label_scores(bundle->index, query.features, cfg, kind);
      } else if (method == "brknn") {
        scores = brknn_classify(bundle->index, query.features, cfg, kind);
      } else {
        const auto& model = bundle->models.at(kind);
        scores = model.predict(model.input_vector(query.features));
      }
      std::vector<int> order;
      for (std::size_t l = 0; l < scores.scores.size(); ++l) {
        if (scores.scores[l] >= floor && scores.scores[l] > 0.0) order.push_back(static_cast<int>(l));
      }
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return scores.scores[a] > scores.scores[b]; });
      ojson list = ojson::array();
      for (int l : order) {
        list.push_back({{"id", l},
                        {"label", taxonomy.space(kind).at(l).name},
                        {"confidence", round6(scores.scores[l])}});
      }
      j["kinds"][std::string(kind_name(kind))] = std::move(list);
    }
    return ok(j);
  });
}

ApiResponse Service::build_index(const json& req) {
  return guarded([&] {
    if (!req.contains("manifest")) throw ApiError{400, "invalid_request", "manifest is required"};
    IndexBuildOptions opts;
    opts.manifest = under_root(options_.data_root, req["manifest"].get<std::string>());
    if (!fs::exists(opts.manifest)) {
      throw ApiError{404, "not_found", "manifest " + opts.manifest.string() + " does not exist"};
    }
    if (req.contains("stores")) {
      for (const auto& [k, v] : req["stores"].items()) {
        opts.stores[kind_param(k)] = under_root(options_.data_root, v.get<std::string>());
      }
    }
    opts.out = req.contains("out") ? under_root(options_.data_root, req["out"].get<std::string>())
                                   : options_.index_dir;
    const auto norm = req.value("normalization", std::string("per-block"));
    if (norm == "whole-vector") {
      opts.mode = NormalizationMode::WholeVector;
    } else if (norm != "per-block") {
      throw ApiError{400, "invalid_request", "normalization must be per-block or whole-vector"};
    }
    opts.train_only = req.value("records", std::string("all")) == "train";
    if (req.contains("train_lp")) {
      for (const auto& k : req["train_lp"]) opts.train_lp.push_back(kind_param(k.get<std::string>()));
    }
    opts.forest.trees = req.value("trees", kDefaultTrees);
    opts.forest.seed = req.value("seed", opts.forest.seed);
    const auto input = req.value("lp_input", std::string("fused"));
    if (input == "own") {
      opts.lp_input = ClassifierInput::OwnBlock;
    } else if (input != "fused") {
      throw ApiError{400, "invalid_request", "lp_input must be fused or own"};
    }
    opts.pipeline = options_.pipeline;

    // Built off to the side; readers keep the old snapshot until the swap.
    std::lock_guard build_lock(build_mutex_);
    auto bundle = std::make_shared<const IndexBundle>(build_index_directory(opts));
    set_bundle(bundle);
    ojson j;
    j["status"] = "built";
    j["index"] = bundle->dir.generic_string();
    j["records"] = bundle->index.size();
    j["models"] = ojson::array();
    for (const auto& [kind, model] : bundle->models) j["models"].push_back(kind_name(kind));
    return ok(j);
  });
}

ApiResponse Service::evaluate(const json& req) const {
  return guarded([&] {
    const auto bundle = snapshot();
    ojson j;
    std::optional<DatasetManifest> manifest;
    if (req.contains("manifest")) {
      manifest = load_manifest(under_root(options_.data_root, req["manifest"].get<std::string>())).manifest;
    } else if (bundle) {
      manifest = bundle->manifest;
    }
    const bool has_predictions = req.contains("predictions") || req.contains("predictions_path");
    const bool has_groups = req.contains("groups") || req.contains("groups_path");
    if (!has_predictions && !has_groups) {
      throw ApiError{400, "invalid_request", "give predictions (with kind) and/or groups"};
    }
    j["kind"] = nullptr;
    j["lrap"] = nullptr;
    j["lrl"] = nullptr;
    j["nar"] = nullptr;
    if (has_predictions) {
      if (!req.contains("kind")) throw ApiError{400, "invalid_request", "kind is required with predictions"};
      const Kind kind = kind_param(req["kind"].get<std::string>());
      if (!manifest) throw ApiError{409, "index_missing", "no manifest loaded or given"};
      const std::string csv = req.contains("predictions")
                                  ? req["predictions"].get<std::string>()
                                  : read_text(under_root(options_.data_root, req["predictions_path"].get<std::string>()));
      const auto report = evaluate_predictions(*manifest, kind, csv);
      j["kind"] = kind_name(kind);
      j["lrap"] = round6(report.lrap.value);
      j["lrl"] = round6(report.lrl.value);
      j["evaluated"] = report.lrap.evaluated;
      j["skipped_lrap"] = report.lrap.skipped;
      j["skipped_lrl"] = report.lrl.skipped;
    }
    if (has_groups) {
      const auto b = require_index(bundle);
      const auto groups = req.contains("groups")
                              ? req["groups"].get<std::vector<std::vector<std::uint64_t>>>()
                              : parse_groups_json(read_text(under_root(options_.data_root,
                                                                       req["groups_path"].get<std::string>())));
      const auto weights = parse_weights(req, b->index);
      for (const auto& g : groups) {
        for (auto id : g) {
          if (!b->index.contains(id)) {
            throw ApiError{404, "unknown_id", "logo " + std::to_string(id) + " is not in the index"};
          }
        }
      }
      const auto report = nar_for_groups(b->index, groups, weights);
      j["nar"] = round6(report.mean);
      j["nar_queries"] = report.per_query.size();
      j["weights"] = weights_json(weights);
    }
    return ok(j);
  });
}

std::optional<fs::path> Service::thumbnail(std::uint64_t id) const {
  const auto bundle = snapshot();
  if (!bundle) return std::nullopt;
  const auto* record = bundle->manifest.find(id);
  if (record == nullptr) return std::nullopt;
  return bundle->manifest.image_path(*record);
}

}  // namespace logofuse
