#include "logofuse/manifest.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace logofuse {

using json = nlohmann::json;

std::string_view split_name(Split split) { return split == Split::Train ? "train" : "test"; }

const LogoRecord* DatasetManifest::find(std::uint64_t id) const {
  for (const auto& r : records) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

std::size_t DatasetManifest::count(Split split) const {
  std::size_t n = 0;
  for (const auto& r : records) n += r.split == split ? 1 : 0;
  return n;
}

namespace {

LogoRecord parse_record(const json& j) {
  if (!j.is_object()) throw ParseError("record is not a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "id" && key != "path" && key != "vienna" && key != "nice" && key != "split") {
      throw ParseError("unexpected field '" + key + "'");
    }
  }
  for (const char* key : {"id", "path", "vienna", "nice", "split"}) {
    if (!j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  }
  LogoRecord r;
  if (!j["id"].is_number_unsigned()) throw ParseError("id must be a non-negative integer");
  r.id = j["id"].get<std::uint64_t>();
  if (!j["path"].is_string()) throw ParseError("path must be a string");
  r.path = j["path"].get<std::string>();
  if (r.path.empty()) throw ParseError("empty path");
  if (std::filesystem::path(r.path).is_absolute()) {
    throw ParseError("path must be relative to the manifest root");
  }
  if (!j["vienna"].is_array()) throw ParseError("vienna must be an array");
  for (const auto& c : j["vienna"]) {
    if (!c.is_string()) throw ParseError("vienna codes must be strings");
    const auto text = c.get<std::string>();
    try {
      parse_code(text);
    } catch (const ParseError& e) {
      throw ParseError("vienna code '" + text + "': " + e.what());
    }
    r.vienna.push_back(text);
  }
  if (!j["nice"].is_array()) throw ParseError("nice must be an array");
  for (const auto& n : j["nice"]) {
    if (!n.is_number_integer()) throw ParseError("nice classes must be integers");
    const int v = n.get<int>();
    if (v < 1 || v > 45) throw ParseError("nice class " + std::to_string(v) + " outside [1,45]");
    r.nice.push_back(v);
  }
  if (!j["split"].is_string()) throw ParseError("split must be a string");
  const auto split = j["split"].get<std::string>();
  if (split == "train") {
    r.split = Split::Train;
  } else if (split == "test") {
    r.split = Split::Test;
  } else {
    throw ParseError("split must be 'train' or 'test', got '" + split + "'");
  }
  return r;
}

}  // namespace

ManifestLoad parse_manifest(const std::string& text, const std::filesystem::path& root) {
  ManifestLoad out;
  out.manifest.root = root;
  std::set<std::uint64_t> ids;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t total = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      ++total;
      out.issues.push_back({line_no, std::string("invalid JSON: ") + e.what()});
      first = false;
      continue;
    }
    if (first && j.is_object() && j.contains("manifest_version")) {
      first = false;
      if (!j["manifest_version"].is_number_integer()) {
        throw ParseError("manifest_version must be an integer");
      }
      out.manifest.version = j["manifest_version"].get<int>();
      if (out.manifest.version != kManifestVersion) {
        throw ParseError("unsupported manifest version " + std::to_string(out.manifest.version));
      }
      continue;
    }
    first = false;
    ++total;
    try {
      auto record = parse_record(j);
      if (!ids.insert(record.id).second) {
        throw ParseError("duplicate id " + std::to_string(record.id));
      }
      out.manifest.records.push_back(std::move(record));
    } catch (const ParseError& e) {
      out.issues.push_back({line_no, e.what()});
    }
  }
  if (total > 0 && static_cast<double>(out.issues.size()) > kMaxInvalidFraction * total) {
    throw ManifestRejected(std::to_string(out.issues.size()) + " of " + std::to_string(total) +
                               " records are invalid (limit 10%)",
                           out.issues);
  }
  return out;
}

ManifestLoad load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto root = path.parent_path();
  if (root.empty()) root = ".";
  return parse_manifest(ss.str(), root);
}

std::string serialize_manifest(const DatasetManifest& manifest) {
  std::string out = json{{"manifest_version", manifest.version}}.dump() + "\n";
  for (const auto& r : manifest.records) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["path"] = r.path;
    j["vienna"] = r.vienna;
    j["nice"] = r.nice;
    j["split"] = split_name(r.split);
    out += j.dump() + "\n";
  }
  return out;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << serialize_manifest(manifest);
  if (!out) throw IoError("write failed for " + path.string());
}

DatasetManifest split_train_test(const DatasetManifest& manifest, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("split ratio must lie in (0,1)");
  const std::size_t n = manifest.records.size();
  const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 0.5));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  DatasetManifest out = manifest;
  for (std::size_t i = 0; i < n; ++i) {
    out.records[order[i]].split = i < n_train ? Split::Train : Split::Test;
  }
  return out;
}

Annotation annotate(const LogoRecord& record, const Taxonomy& taxonomy) {
  std::vector<ViennaCode> codes;
  for (const auto& c : record.vienna) codes.push_back(parse_code(c));
  return taxonomy.annotate(codes, record.nice);
}

}  // namespace logofuse
