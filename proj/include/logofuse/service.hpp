#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "logofuse/pipeline.hpp"

namespace httplib {
class Server;
}

namespace logofuse {

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

inline constexpr double kDefaultConfidenceFloor = 0.02;
inline constexpr std::size_t kMaxK = 1000;

// Named weight presets.
const std::map<std::string, std::map<Kind, double>>& weight_presets();

struct ServiceOptions {
  // Root for relative paths in /index/build requests; LOGOFUSE_DATA by default.
  std::filesystem::path data_root = ".";
  // Index directory loaded at start-up and written by /index/build.
  std::filesystem::path index_dir;
  PipelineOptions pipeline;
};

// The data root from LOGOFUSE_DATA, or the working directory.
std::filesystem::path default_data_root();

// Request handlers over an atomically swapped index snapshot. They are
// independent of the HTTP layer so tests and the CLI call them directly.
class Service {
 public:
  explicit Service(ServiceOptions options);

  std::shared_ptr<const IndexBundle> snapshot() const;
  void set_bundle(std::shared_ptr<const IndexBundle> bundle);
  // Loads options.index_dir when it holds an index; returns whether it did.
  bool try_load();

  ApiResponse health() const;
  ApiResponse labels(const std::optional<std::string>& kind) const;
  ApiResponse presets() const;
  ApiResponse search(const nlohmann::json& request,
                     std::span<const std::uint8_t> upload = {},
                     std::span<const std::uint8_t> upload_mask = {}) const;
  ApiResponse classify(const nlohmann::json& request,
                       std::span<const std::uint8_t> upload = {},
                       std::span<const std::uint8_t> upload_mask = {}) const;
  ApiResponse build_index(const nlohmann::json& request);
  ApiResponse evaluate(const nlohmann::json& request) const;
  // Image file of a logo, for thumbnails.
  std::optional<std::filesystem::path> thumbnail(std::uint64_t id) const;

  // Routes every endpoint on `server`; `static_dir` (if non-empty) is
  // mounted at "/".
  void install(httplib::Server& server, const std::filesystem::path& static_dir = {});

  const ServiceOptions& options() const { return options_; }

 private:
  ServiceOptions options_;
  mutable std::mutex mutex_;
  std::shared_ptr<const IndexBundle> bundle_;
  std::mutex build_mutex_;
};

// Compact JSON body in insertion order; callers round floats with round6.
std::string dump_json(const nlohmann::ordered_json& j);
double round6(double v);

std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace logofuse
