#include "logofuse/features.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "logofuse/error.hpp"

namespace logofuse {

// ---------------------------------------------------------------- fused

FusedFeature::FusedFeature(std::vector<FeatureBlock> blocks) {
  for (auto& b : blocks) add(std::move(b));
}

void FusedFeature::add(FeatureBlock block) {
  if (block.values.empty()) {
    throw InvalidArgument("empty feature block for " + std::string(kind_name(block.kind)));
  }
  const Kind kind = block.kind;
  if (!blocks_.emplace(kind, std::move(block)).second) {
    throw InvalidArgument("duplicate feature block for " + std::string(kind_name(kind)));
  }
}

const FeatureBlock* FusedFeature::find(Kind kind) const {
  const auto it = blocks_.find(kind);
  return it == blocks_.end() ? nullptr : &it->second;
}

std::vector<double> FusedFeature::concatenated() const {
  std::vector<double> out;
  for (const auto& [kind, block] : blocks_) {
    out.insert(out.end(), block.values.begin(), block.values.end());
  }
  return out;
}

// ---------------------------------------------------------------- weights

QueryWeights QueryWeights::from_raw(const std::map<Kind, double>& raw) {
  long double total = 0.0L;
  for (const auto& [kind, w] : raw) {
    if (!std::isfinite(w) || w < 0.0) {
      throw InvalidArgument("weight for " + std::string(kind_name(kind)) +
                            " must be finite and >= 0");
    }
    total += w;
  }
  if (!(total > 0.0L)) throw InvalidArgument("at least one weight must be positive");
  QueryWeights out;
  for (const auto& [kind, w] : raw) {
    if (w > 0.0) out.weights_[kind] = static_cast<double>(w / total);
  }
  return out;
}

QueryWeights QueryWeights::one_hot(Kind kind) { return from_raw({{kind, 1.0}}); }

double QueryWeights::weight(Kind kind) const {
  const auto it = weights_.find(kind);
  return it == weights_.end() ? 0.0 : it->second;
}

std::vector<Kind> QueryWeights::active_kinds() const {
  std::vector<Kind> kinds;
  for (const auto& [kind, w] : weights_) {
    if (w > 0.0) kinds.push_back(kind);
  }
  return kinds;
}

std::map<Kind, double> parse_weight_list(std::string_view text) {
  std::map<Kind, double> raw;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ParseError("weight '" + item + "' is not kind=value");
    const Kind kind = parse_kind(item.substr(0, eq));
    const std::string value = item.substr(eq + 1);
    std::size_t used = 0;
    double w = 0.0;
    try {
      w = std::stod(value, &used);
    } catch (const std::exception&) {
      throw ParseError("weight value '" + value + "' is not a number");
    }
    if (used != value.size()) throw ParseError("weight value '" + value + "' is not a number");
    if (!raw.emplace(kind, w).second) {
      throw ParseError("weight for " + std::string(kind_name(kind)) + " given twice");
    }
  }
  if (raw.empty()) throw ParseError("empty weight list");
  return raw;
}

// ---------------------------------------------------------------- norms & distances

double l2_norm(std::span<const double> v) {
  long double acc = 0.0L;
  for (double x : v) acc += static_cast<long double>(x) * x;
  return static_cast<double>(std::sqrt(acc));
}

FeatureBlock l2_normalize(const FeatureBlock& block) {
  long double acc = 0.0L;
  for (double x : block.values) acc += static_cast<long double>(x) * x;
  FeatureBlock out = block;
  if (acc == 0.0L) return out;
  const long double norm = std::sqrt(acc);
  for (auto& x : out.values) x = static_cast<double>(x / norm);
  return out;
}

FusedFeature normalize(const FusedFeature& fused, NormalizationMode mode) {
  FusedFeature out;
  if (mode == NormalizationMode::PerBlock) {
    for (const auto& [kind, block] : fused.blocks()) out.add(l2_normalize(block));
    return out;
  }
  const auto all = fused.concatenated();
  long double acc = 0.0L;
  for (double x : all) acc += static_cast<long double>(x) * x;
  const long double norm = std::sqrt(acc);
  for (const auto& [kind, block] : fused.blocks()) {
    FeatureBlock b = block;
    if (norm > 0.0L) {
      for (auto& x : b.values) x = static_cast<double>(x / norm);
    }
    out.add(std::move(b));
  }
  return out;
}

long double euclidean(std::span<const double> a, std::span<const double> b) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double d = static_cast<long double>(a[i]) - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double weighted_distance(const FusedFeature& a, const FusedFeature& b, const QueryWeights& w) {
  long double num = 0.0L;
  long double den = 0.0L;
  for (const auto& [kind, weight] : w.weights()) {
    if (weight <= 0.0) continue;
    const auto* ba = a.find(kind);
    const auto* bb = b.find(kind);
    if (ba == nullptr || bb == nullptr) {
      throw InvalidArgument("missing " + std::string(kind_name(kind)) +
                            " block for a positively weighted characteristic");
    }
    if (ba->dim() != bb->dim()) {
      throw InvalidArgument("dimension mismatch for " + std::string(kind_name(kind)) + ": " +
                            std::to_string(ba->dim()) + " vs " + std::to_string(bb->dim()));
    }
    num += weight * euclidean(ba->values, bb->values);
    den += weight;
  }
  if (den == 0.0L) throw InvalidArgument("no positive weight");
  return static_cast<double>(num / den);
}

// ---------------------------------------------------------------- extractors

int color_bin(float v) {
  // Exact multiples of 1/5 land in the upper bin.
  const int b = static_cast<int>(static_cast<double>(v) * kColorBinsPerChannel + 1e-6);
  return b < 0 ? 0 : (b >= kColorBinsPerChannel ? kColorBinsPerChannel - 1 : b);
}

namespace {

inline int pixel_bin(const float* p) {
  return color_bin(p[0]) * 25 + color_bin(p[1]) * 5 + color_bin(p[2]);
}

std::vector<double> counts_to_fractions(const std::vector<std::uint64_t>& counts, std::size_t n) {
  std::vector<double> out(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
  }
  return out;
}

inline float gray_at(const NormalizedImage& img, int x, int y) {
  const float* p = &img.data[(static_cast<std::size_t>(y) * img.width + x) * 3];
  return 0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2];
}

// Orientation histogram contribution of one image row, written into `row_hist`.
void edge_row(const NormalizedImage& img, const std::vector<float>& gray, int y, double* row_hist) {
  const int w = img.width, h = img.height;
  const int cell_row = y * kGridRows / h;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (int x = 1; x < w - 1; ++x) {
    const double gx = double(gray[static_cast<std::size_t>(y) * w + x + 1]) -
                      gray[static_cast<std::size_t>(y) * w + x - 1];
    const double gy = double(gray[static_cast<std::size_t>(y + 1) * w + x]) -
                      gray[static_cast<std::size_t>(y - 1) * w + x];
    const double mag = std::sqrt(gx * gx + gy * gy);
    if (mag == 0.0) continue;
    double theta = std::atan2(gy, gx);
    if (theta < 0.0) theta += two_pi;
    int bin = static_cast<int>(std::floor(theta * kOrientationBins / two_pi + 1e-7));
    bin %= kOrientationBins;
    const int cell = cell_row * kGridCols + x * kGridCols / w;
    row_hist[cell * kOrientationBins + bin] += mag;
  }
}

std::vector<float> grayscale(const NormalizedImage& img) {
  std::vector<float> gray(static_cast<std::size_t>(img.width) * img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) gray[static_cast<std::size_t>(y) * img.width + x] = gray_at(img, x, y);
  }
  return gray;
}

}  // namespace

std::vector<double> color_histogram_l1(const NormalizedImage& img) {
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  std::vector<std::uint64_t> counts(kColorHistogramDim, 0);
  auto* c = counts.data();
#pragma omp parallel for reduction(+ : c[:kColorHistogramDim]) schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    c[pixel_bin(&img.data[static_cast<std::size_t>(i) * 3])] += 1;
  }
  return counts_to_fractions(counts, n);
}

FeatureBlock color_histogram_extractor(const NormalizedImage& img) {
  return l2_normalize(FeatureBlock{Kind::Color, color_histogram_l1(img)});
}

FeatureBlock edge_orientation_extractor(const NormalizedImage& img) {
  const auto gray = grayscale(img);
  const int h = img.height;
  // Per-row partial histograms summed in row order keep the result
  // independent of the thread schedule.
  std::vector<double> rows(static_cast<std::size_t>(h) * kEdgeOrientationDim, 0.0);
#pragma omp parallel for schedule(static)
  for (int y = 1; y < h - 1; ++y) {
    edge_row(img, gray, y, &rows[static_cast<std::size_t>(y) * kEdgeOrientationDim]);
  }
  FeatureBlock out{Kind::Shape, std::vector<double>(kEdgeOrientationDim, 0.0)};
  for (int y = 1; y < h - 1; ++y) {
    const double* r = &rows[static_cast<std::size_t>(y) * kEdgeOrientationDim];
    for (int i = 0; i < kEdgeOrientationDim; ++i) out.values[i] += r[i];
  }
  return l2_normalize(out);
}

FeatureBlock text_presence_extractor(const TextMask* mask, double min_ratio) {
  FeatureBlock out{Kind::Text, {1.0, 0.0}};
  if (mask != nullptr) {
    const double ratio = static_cast<double>(mask->count()) /
                         (static_cast<double>(mask->width()) * mask->height());
    if (ratio > min_ratio) out.values = {0.0, 1.0};
  }
  return out;
}

namespace serial {

std::vector<double> color_histogram_l1(const NormalizedImage& img) {
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  std::vector<std::uint64_t> counts(kColorHistogramDim, 0);
  for (std::size_t i = 0; i < n; ++i) counts[pixel_bin(&img.data[i * 3])] += 1;
  return counts_to_fractions(counts, n);
}

FeatureBlock color_histogram_extractor(const NormalizedImage& img) {
  return l2_normalize(FeatureBlock{Kind::Color, serial::color_histogram_l1(img)});
}

FeatureBlock edge_orientation_extractor(const NormalizedImage& img) {
  const auto gray = grayscale(img);
  FeatureBlock out{Kind::Shape, std::vector<double>(kEdgeOrientationDim, 0.0)};
  std::vector<double> row(kEdgeOrientationDim);
  for (int y = 1; y < img.height - 1; ++y) {
    std::fill(row.begin(), row.end(), 0.0);
    edge_row(img, gray, y, row.data());
    for (int i = 0; i < kEdgeOrientationDim; ++i) out.values[i] += row[i];
  }
  return l2_normalize(out);
}

}  // namespace serial

}  // namespace logofuse
