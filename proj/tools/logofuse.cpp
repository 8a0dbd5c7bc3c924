// Command-line front end.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>

#include "logofuse/evaluation.hpp"
#include "logofuse/image_io.hpp"
#include "logofuse/manifest.hpp"
#include "logofuse/pipeline.hpp"
#include "logofuse/service.hpp"
#include "logofuse/synth.hpp"
#include "logofuse/taxonomy.hpp"

namespace fs = std::filesystem;
using namespace logofuse;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
}

int emit(const ApiResponse& r) {
  (r.status == 200 ? std::cout : std::cerr) << r.body;
  return r.status == 200 ? 0 : 1;
}

std::vector<std::uint8_t> bytes(const std::string& s) { return {s.begin(), s.end()}; }

// A query argument is an image path when such a file exists, else a logo id.
void attach_query(const std::string& arg, nlohmann::json& req, std::vector<std::uint8_t>& image,
                  std::vector<std::uint8_t>& mask) {
  if (fs::is_regular_file(arg)) {
    image = bytes(read_file(arg));
    if (const auto m = mask_path_for(arg); fs::exists(m)) mask = bytes(read_file(m));
    return;
  }
  try {
    std::size_t used = 0;
    const auto id = std::stoull(arg, &used);
    if (used != arg.size()) throw std::invalid_argument(arg);
    req["query"] = id;
  } catch (const std::exception&) {
    throw InvalidArgument("'" + arg + "' is neither an image file nor a logo id");
  }
}

void add_weights(const std::string& weights, const std::string& preset, nlohmann::json& req) {
  if (!preset.empty()) req["preset"] = preset;
  if (!weights.empty()) {
    req["weights"] = nlohmann::json::object();
    for (const auto& [kind, w] : parse_weight_list(weights)) req["weights"][std::string(kind_name(kind))] = w;
  }
}

std::unique_ptr<Service> open_service(const fs::path& index_dir) {
  ServiceOptions opts;
  opts.data_root = default_data_root();
  opts.index_dir = index_dir.empty() ? opts.data_root / "index" : index_dir;
  auto service = std::make_unique<Service>(opts);
  if (!service->try_load()) throw IoError("no index at " + opts.index_dir.string());
  return service;
}

ClassifierInput parse_lp_input(const std::string& s) {
  if (s == "fused") return ClassifierInput::Fused;
  if (s == "own") return ClassifierInput::OwnBlock;
  throw InvalidArgument("--lp-input must be fused or own");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"logofuse: multi-label logo classification and weighted retrieval"};
  app.require_subcommand(1);
  int rc = 0;

  // taxonomy
  auto* tax = app.add_subcommand("taxonomy", "Inspect the grouped label spaces");
  tax->require_subcommand(1);
  auto* explain = tax->add_subcommand("explain", "Show how Vienna codes are grouped");
  std::vector<std::string> codes;
  explain->add_option("codes", codes, "Vienna codes, e.g. 26.07 29.01.12")->required();
  explain->callback([&] {
    const auto& t = Taxonomy::builtin();
    for (const auto& code : codes) {
      const auto parsed = parse_code(code);
      std::cout << format_code(parsed) << " -> " << describe(t.group_code(parsed), t) << "\n";
    }
  });
  auto* list = tax->add_subcommand("list", "List the labels of a space");
  std::string list_kind;
  list->add_option("--kind", list_kind, "Characteristic")->required();
  list->callback([&] {
    Service s(ServiceOptions{});
    rc = emit(s.labels(list_kind));
  });

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate a manifest and report invalid records");
  fs::path ingest_in, ingest_out;
  ingest->add_option("manifest", ingest_in, "JSON-lines manifest")->required();
  ingest->add_option("--out", ingest_out, "Write the valid records here");
  ingest->callback([&] {
    try {
      const auto load = load_manifest(ingest_in);
      nlohmann::ordered_json j;
      j["records"] = load.manifest.records.size();
      j["train"] = load.manifest.count(Split::Train);
      j["test"] = load.manifest.count(Split::Test);
      j["issues"] = nlohmann::ordered_json::array();
      for (const auto& i : load.issues) j["issues"].push_back({{"line", i.line}, {"message", i.message}});
      std::cout << j.dump(2) << "\n";
      if (!ingest_out.empty()) save_manifest(load.manifest, ingest_out);
    } catch (const ManifestRejected& e) {
      std::cerr << "rejected: " << e.what() << "\n";
      for (const auto& i : e.issues()) std::cerr << "  line " << i.line << ": " << i.message << "\n";
      rc = 2;
    }
  });

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic flat-color logo corpus");
  fs::path synth_spec, synth_out = "synthetic";
  synth->add_option("--spec", synth_spec, "Spec JSON (defaults when omitted)")->check(CLI::ExistingFile);
  synth->add_option("--out", synth_out, "Output directory")->capture_default_str();
  synth->callback([&] {
    const auto spec = synth_spec.empty() ? SyntheticSpec{} : SyntheticSpec::from_file(synth_spec);
    const auto corpus = generate_synthetic_corpus(spec, synth_out);
    std::cout << "wrote " << corpus.manifest.records.size() << " logos and " << corpus.groups.size()
              << " duplicate groups to " << synth_out.string() << "\n";
  });

  // split
  auto* split = app.add_subcommand("split", "Assign a seeded train/test split");
  fs::path split_in, split_out;
  double ratio = 0.8;
  std::uint64_t split_seed = 0;
  split->add_option("manifest", split_in, "Manifest")->required();
  split->add_option("--ratio", ratio, "Training fraction")->capture_default_str();
  split->add_option("--seed", split_seed, "Shuffle seed")->capture_default_str();
  split->add_option("--out", split_out, "Output manifest (default: in place)");
  split->callback([&] {
    const auto out = split_train_test(load_manifest(split_in).manifest, ratio, split_seed);
    save_manifest(out, split_out.empty() ? split_in : split_out);
    std::cout << out.count(Split::Train) << " train, " << out.count(Split::Test) << " test\n";
  });

  // extract
  auto* extract = app.add_subcommand("extract", "Compute baseline feature stores for a manifest");
  fs::path extract_manifest_path, extract_out = "features";
  bool no_crop = false, no_fill = false, generic = false, generic_text_free = false;
  extract->add_option("manifest", extract_manifest_path, "Manifest")->required();
  extract->add_option("--out", extract_out, "Directory for <kind>.ncf files")->capture_default_str();
  extract->add_flag("--no-crop", no_crop, "Skip uniform-border cropping");
  extract->add_flag("--no-fill", no_fill, "Keep text pixels in the shape input");
  extract->add_flag("--generic", generic, "Add the 256-dim generic thumbnail block");
  extract->add_flag("--generic-text-free", generic_text_free, "Generic block uses the text-free image");
  extract->callback([&] {
    PipelineOptions opts;
    opts.crop = !no_crop;
    opts.fill_text = !no_fill;
    opts.include_generic = generic;
    opts.generic_text_free = generic_text_free;
    const auto manifest = load_manifest(extract_manifest_path).manifest;
    for (const auto& [kind, path] : write_feature_stores(extract_manifest(manifest, opts), extract_out)) {
      std::cout << kind_name(kind) << " -> " << path.string() << "\n";
    }
  });

  // index
  auto* index = app.add_subcommand("index", "Build an index directory (optionally with LabelPowerset models)");
  fs::path index_manifest, index_out;
  std::vector<std::string> index_stores, train_lp;
  bool whole_vector = false, train_only = false;
  int trees = kDefaultTrees;
  std::uint64_t forest_seed = ForestParams{}.seed;
  std::string lp_input = "fused";
  index->add_option("manifest", index_manifest, "Manifest")->required();
  index->add_option("--store", index_stores, "kind=path of an NCF1 store (repeatable); default: extract");
  index->add_option("--out", index_out, "Index directory (default $LOGOFUSE_DATA/index)");
  index->add_flag("--whole-vector", whole_vector, "Normalize the fused vector instead of each block");
  index->add_flag("--train-only", train_only, "Index only the training split");
  index->add_option("--train-lp", train_lp, "Kinds to train LabelPowerset models for");
  index->add_option("--trees", trees, "Forest size")->capture_default_str();
  index->add_option("--seed", forest_seed, "Forest seed")->capture_default_str();
  index->add_option("--lp-input", lp_input, "fused | own")->capture_default_str();
  index->callback([&] {
    IndexBuildOptions opts;
    opts.manifest = index_manifest;
    opts.out = index_out.empty() ? default_data_root() / "index" : index_out;
    for (const auto& s : index_stores) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw InvalidArgument("--store expects kind=path");
      opts.stores[parse_kind(s.substr(0, eq))] = s.substr(eq + 1);
    }
    opts.mode = whole_vector ? NormalizationMode::WholeVector : NormalizationMode::PerBlock;
    opts.train_only = train_only;
    for (const auto& k : train_lp) opts.train_lp.push_back(parse_kind(k));
    opts.forest.trees = trees;
    opts.forest.seed = forest_seed;
    opts.lp_input = parse_lp_input(lp_input);
    const auto bundle = build_index_directory(opts);
    std::cout << "indexed " << bundle.index.size() << " logos into " << opts.out.string();
    if (!bundle.models.empty()) std::cout << " with " << bundle.models.size() << " model(s)";
    std::cout << "\n";
  });

  // search
  auto* search = app.add_subcommand("search", "Weighted nearest-logo search");
  fs::path search_index;
  std::string search_weights, search_preset, search_query;
  std::size_t search_k = kDefaultK;
  search->add_option("query", search_query, "Image path or logo id")->required();
  search->add_option("--index", search_index, "Index directory");
  search->add_option("--weights", search_weights, "e.g. color=0.3,shape=0.7");
  search->add_option("--preset", search_preset, "Named weight preset");
  search->add_option("--k", search_k, "Neighbors")->capture_default_str();
  search->callback([&] {
    auto service = open_service(search_index);
    nlohmann::json req;
    std::vector<std::uint8_t> image, mask;
    attach_query(search_query, req, image, mask);
    add_weights(search_weights, search_preset, req);
    req["k"] = search_k;
    rc = emit(service->search(req, image, mask));
  });

  // classify
  auto* classify = app.add_subcommand("classify", "Suggest labels for a logo, or score a whole split");
  fs::path classify_index, classify_out;
  std::string classify_kind, classify_method = "knn", classify_query, classify_weights, classify_split;
  std::size_t classify_k = kDefaultK;
  double floor = kDefaultConfidenceFloor;
  classify->add_option("query", classify_query, "Image path or logo id");
  classify->add_option("--index", classify_index, "Index directory");
  classify->add_option("--kind", classify_kind, "Characteristic (default: all)");
  classify->add_option("--method", classify_method, "lp | knn | brknn")->capture_default_str();
  classify->add_option("--k", classify_k, "Neighbors")->capture_default_str();
  classify->add_option("--weights", classify_weights, "Distance weights for knn/brknn");
  classify->add_option("--floor", floor, "Confidence floor")->capture_default_str();
  classify->add_option("--split", classify_split, "Score every record of this split (train|test) instead");
  classify->add_option("--out", classify_out, "Prediction CSV for --split");
  classify->callback([&] {
    auto service = open_service(classify_index);
    if (!classify_split.empty()) {
      // batch mode: CSV of every label score for each record of the split
      if (classify_kind.empty()) throw InvalidArgument("--split requires --kind");
      const Kind kind = parse_kind(classify_kind);
      const auto bundle = service->snapshot();
      const Split wanted = classify_split == "test" ? Split::Test : Split::Train;
      SearchConfig cfg;
      cfg.k = classify_k;
      if (!classify_weights.empty()) cfg.weights = QueryWeights::from_raw(parse_weight_list(classify_weights));
      std::vector<std::uint64_t> ids;
      std::vector<LabelScores> scores;
      for (const auto& r : bundle->manifest.records) {
        if (r.split != wanted) continue;
        const auto q = bundle->index.contains(r.id)
                           ? bundle->index.features_of(r.id)
                           : prepare_query(bundle->index, extract_file(bundle->manifest.image_path(r)));
        if (classify_method == "lp") {
          const auto it = bundle->models.find(kind);
          if (it == bundle->models.end()) throw InvalidArgument("no LabelPowerset model for that kind");
          scores.push_back(it->second.predict(it->second.input_vector(q)));
        } else if (classify_method == "brknn") {
          scores.push_back(brknn_classify(bundle->index, q, cfg, kind));
        } else {
          scores.push_back(knn_label_scores(bundle->index, q, cfg, kind));
        }
        ids.push_back(r.id);
      }
      const auto csv = format_predictions(ids, scores);
      if (classify_out.empty()) {
        std::cout << csv;
      } else {
        write_file(classify_out, csv);
        std::cout << "wrote " << ids.size() << " predictions to " << classify_out.string() << "\n";
      }
      return;
    }
    if (classify_query.empty()) throw InvalidArgument("give a query or --split");
    nlohmann::json req;
    std::vector<std::uint8_t> image, mask;
    attach_query(classify_query, req, image, mask);
    if (!classify_kind.empty()) req["kind"] = classify_kind;
    req["method"] = classify_method;
    req["k"] = classify_k;
    req["floor"] = floor;
    add_weights(classify_weights, "", req);
    rc = emit(service->classify(req, image, mask));
  });

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "LRAP/LRL of a prediction file and/or NAR of duplicate groups");
  fs::path eval_manifest, eval_predictions, eval_groups, eval_index;
  std::string eval_kind, eval_weights, eval_preset;
  evaluate->add_option("--manifest", eval_manifest, "Manifest holding the ground truth");
  evaluate->add_option("--kind", eval_kind, "Characteristic of the predictions");
  evaluate->add_option("--predictions", eval_predictions, "CSV logo-id,label-id,score");
  evaluate->add_option("--groups", eval_groups, "groups.json for NAR");
  evaluate->add_option("--index", eval_index, "Index directory (required for NAR)");
  evaluate->add_option("--weights", eval_weights, "Weights for NAR ranking");
  evaluate->add_option("--preset", eval_preset, "Weight preset for NAR ranking");
  evaluate->callback([&] {
    ServiceOptions opts;
    opts.data_root = default_data_root();
    if (!eval_index.empty()) opts.index_dir = eval_index;
    Service service(opts);
    if (!eval_groups.empty() || !eval_index.empty()) service.try_load();
    nlohmann::json req;
    if (!eval_manifest.empty()) req["manifest"] = fs::absolute(eval_manifest).string();
    if (!eval_kind.empty()) req["kind"] = eval_kind;
    if (!eval_predictions.empty()) req["predictions"] = read_file(eval_predictions);
    if (!eval_groups.empty()) req["groups"] = parse_groups_json(read_file(eval_groups));
    add_weights(eval_weights, eval_preset, req);
    rc = emit(service.evaluate(req));
  });

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP JSON API");
  fs::path serve_index, serve_static;
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--port", port, "Port")->capture_default_str();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--index", serve_index, "Index directory (default $LOGOFUSE_DATA/index)");
  serve->add_option("--static", serve_static, "Directory of UI assets mounted at /");
  serve->callback([&] {
    ServiceOptions opts;
    opts.data_root = default_data_root();
    if (!serve_index.empty()) opts.index_dir = serve_index;
    Service service(opts);
    const bool loaded = service.try_load();
    httplib::Server server;
    service.install(server, serve_static);
    std::cerr << "serving on " << host << ":" << port << (loaded ? "" : " (no index loaded yet)") << "\n";
    if (!server.listen(host, port)) {
      std::cerr << "cannot listen on " << host << ":" << port << "\n";
      rc = 1;
    }
  });

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Crop borders and/or fill a text region");
  fs::path pre_in, pre_mask, pre_out;
  bool pre_crop = false;
  int tolerance = PreprocessOptions{}.border_tolerance;
  pre->add_option("input", pre_in, "Image")->required()->check(CLI::ExistingFile);
  pre->add_flag("--crop", pre_crop, "Strip uniform borders");
  pre->add_option("--fill-mask", pre_mask, "Text mask PNG to fill")->check(CLI::ExistingFile);
  pre->add_option("--tolerance", tolerance, "Per-channel border tolerance")->capture_default_str();
  pre->add_option("--out", pre_out, "Output PNG")->required();
  pre->callback([&] {
    auto img = read_image(pre_in.string());
    if (!pre_mask.empty()) img = fill_text_region(img, read_mask(pre_mask.string()));
    if (pre_crop) img = crop_uniform_border(img, tolerance);
    write_png(pre_out.string(), img);
    std::cout << img.width() << "x" << img.height() << " -> " << pre_out.string() << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
