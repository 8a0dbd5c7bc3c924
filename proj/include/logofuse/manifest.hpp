#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "logofuse/error.hpp"
#include "logofuse/search.hpp"
#include "logofuse/taxonomy.hpp"

namespace logofuse {

enum class Split { Train, Test };

std::string_view split_name(Split split);

struct LogoRecord {
  std::uint64_t id = 0;
  std::string path;  // relative to the manifest root
  std::vector<std::string> vienna;
  std::vector<int> nice;
  Split split = Split::Train;

  friend bool operator==(const LogoRecord&, const LogoRecord&) = default;
};

inline constexpr int kManifestVersion = 1;

struct DatasetManifest {
  int version = kManifestVersion;
  std::filesystem::path root;
  std::vector<LogoRecord> records;

  std::filesystem::path image_path(const LogoRecord& r) const { return root / r.path; }
  const LogoRecord* find(std::uint64_t id) const;
  std::size_t count(Split split) const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

struct ManifestIssue {
  std::size_t line = 0;
  std::string message;
};

struct ManifestLoad {
  DatasetManifest manifest;
  std::vector<ManifestIssue> issues;  // invalid records that were skipped
};

// Raised when more than 10% of the records are invalid.
class ManifestRejected : public Error {
 public:
  ManifestRejected(std::string what, std::vector<ManifestIssue> issues)
      : Error(std::move(what)), issues_(std::move(issues)) {}
  const std::vector<ManifestIssue>& issues() const { return issues_; }

 private:
  std::vector<ManifestIssue> issues_;
};

inline constexpr double kMaxInvalidFraction = 0.10;

// JSON-lines, one {id, path, vienna, nice, split} object per line. An
// optional first line {"manifest_version": N} carries the version. The root
// is the manifest's directory.
ManifestLoad load_manifest(const std::filesystem::path& path);
ManifestLoad parse_manifest(const std::string& text, const std::filesystem::path& root);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
std::string serialize_manifest(const DatasetManifest& manifest);

// Deterministic shuffled split; round(ratio * N) records (half rounds up) go
// to training.
DatasetManifest split_train_test(const DatasetManifest& manifest, double ratio, std::uint64_t seed);

// Grouped labels of a record.
Annotation annotate(const LogoRecord& record, const Taxonomy& taxonomy = Taxonomy::builtin());

}  // namespace logofuse
