#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "logofuse/image.hpp"
#include "logofuse/manifest.hpp"

namespace logofuse {

enum class SynthShape { Circle, Square, Triangle, Line, Polygon };

std::string_view synth_shape_name(SynthShape s);
SynthShape parse_synth_shape(std::string_view name);
// Vienna code of the shape, e.g. "26.01.01" for circles.
std::string synth_shape_code(SynthShape s);

struct PaletteColor {
  std::string name;  // taxonomy display name, e.g. "Red"
  std::string code;  // Vienna color code, e.g. "29.01.01"
  Rgb rgb;
};

// One flat color per taxonomy color label; each falls in its own
// 5x5x5 histogram bin, distinct from the background bin.
const std::vector<PaletteColor>& synth_palette();
inline constexpr Rgb kSynthBackground = {176, 224, 230};

struct SyntheticSpec {
  int n_logos = 500;
  int groups = 5;
  int duplicates_per_group = 10;
  double text_probability = 0.25;
  std::uint64_t seed = 7;
  int image_size = 160;
  double train_ratio = 0.8;
  std::vector<SynthShape> shapes = {SynthShape::Circle, SynthShape::Square, SynthShape::Triangle,
                                    SynthShape::Line, SynthShape::Polygon};
  std::vector<std::string> colors;  // palette names; empty = all 13

  static SyntheticSpec from_json(const std::string& text);
  static SyntheticSpec from_file(const std::filesystem::path& path);
};

// Geometry of one logo before jitter.
struct LogoDesign {
  SynthShape shape = SynthShape::Circle;
  std::size_t color = 0;  // index into synth_palette()
  double aspect = 1.0;
  double rotation = 0.0;  // radians
  int sides = 0;          // polygons only
  bool text = false;
  std::uint64_t glyph_seed = 0;
};

struct Placement {
  double scale = 1.0;
  double dx = 0.0, dy = 0.0;  // fractions of the image side
};

struct RenderedLogo {
  RasterImage image;
  TextMask mask;  // empty pixels when no text
};

RenderedLogo render_logo(const LogoDesign& design, const Placement& place, int size);

struct SyntheticLogo {
  std::uint64_t id = 0;
  LogoDesign design;
  Placement placement;
  int group = -1;  // -1 for distractors
};

struct SyntheticCorpus {
  DatasetManifest manifest;
  std::vector<SyntheticLogo> logos;            // in id order
  std::vector<std::vector<std::uint64_t>> groups;
};

// Plans the corpus without touching the disk; deterministic in the seed.
SyntheticCorpus plan_synthetic_corpus(const SyntheticSpec& spec);

// Writes images/<id>.png (+ images/<id>.mask.png for text logos),
// manifest.jsonl and groups.json under out_dir.
SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec,
                                          const std::filesystem::path& out_dir);

// Conventional sidecar mask path of an image: "a/b.png" -> "a/b.mask.png".
std::filesystem::path mask_path_for(const std::filesystem::path& image_path);

}  // namespace logofuse
