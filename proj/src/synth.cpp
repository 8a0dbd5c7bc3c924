#include "logofuse/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "logofuse/image_io.hpp"

namespace logofuse {

namespace {

constexpr std::array<std::pair<SynthShape, std::string_view>, 5> kShapeNames = {{
    {SynthShape::Circle, "circle"},
    {SynthShape::Square, "square"},
    {SynthShape::Triangle, "triangle"},
    {SynthShape::Line, "line"},
    {SynthShape::Polygon, "polygon"},
}};

// Portable uniform draws on top of mt19937_64 so renders do not depend on the
// standard library's distribution implementations.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
  std::uint64_t raw() { return rng_(); }
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

 private:
  std::mt19937_64 rng_;
};

struct Vec2 {
  double x, y;
};

bool inside_convex(const std::vector<Vec2>& poly, Vec2 p) {
  bool pos = false, neg = false;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % poly.size()];
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    pos |= cross > 0;
    neg |= cross < 0;
    if (pos && neg) return false;
  }
  return true;
}

// Shape outline in local unit coordinates (radius about 1).
std::vector<Vec2> unit_polygon(const LogoDesign& d) {
  switch (d.shape) {
    case SynthShape::Square:
    case SynthShape::Line:
      return {{-1, -d.aspect}, {1, -d.aspect}, {1, d.aspect}, {-1, d.aspect}};
    case SynthShape::Triangle:
      return {{-1, 0.75 * d.aspect}, {1, 0.75 * d.aspect}, {0, -1.0 * d.aspect}};
    case SynthShape::Polygon: {
      std::vector<Vec2> out;
      for (int i = 0; i < d.sides; ++i) {
        const double t = 2 * std::numbers::pi * i / d.sides;
        out.push_back({std::cos(t), std::sin(t) * d.aspect});
      }
      return out;
    }
    case SynthShape::Circle:
      break;
  }
  return {};
}

// 3x5 glyph cells packed in 15 bits.
std::vector<std::uint16_t> glyphs_for(std::uint64_t seed) {
  Draw draw(seed);
  const int n = 5 + static_cast<int>(draw.index(3));
  std::vector<std::uint16_t> out;
  for (int i = 0; i < n; ++i) {
    std::uint16_t bits = static_cast<std::uint16_t>(draw.raw() & 0x7fff);
    bits |= 0x4000 | 0x0001;  // never blank
    out.push_back(bits);
  }
  return out;
}

}  // namespace

std::string_view synth_shape_name(SynthShape s) {
  for (const auto& [shape, name] : kShapeNames) {
    if (shape == s) return name;
  }
  return "?";
}

SynthShape parse_synth_shape(std::string_view name) {
  for (const auto& [shape, n] : kShapeNames) {
    if (n == name) return shape;
  }
  throw ParseError("unknown synthetic shape '" + std::string(name) + "'");
}

std::string synth_shape_code(SynthShape s) {
  switch (s) {
    case SynthShape::Circle: return "26.01.01";
    case SynthShape::Square: return "26.04.01";
    case SynthShape::Triangle: return "26.03.01";
    case SynthShape::Line: return "26.11.01";
    case SynthShape::Polygon: return "26.05.01";
  }
  return "";
}

const std::vector<PaletteColor>& synth_palette() {
  static const std::vector<PaletteColor> palette = {
      {"Red", "29.01.01", {220, 20, 30}},     {"Yellow", "29.01.02", {250, 230, 20}},
      {"Green", "29.01.03", {30, 160, 40}},   {"Blue", "29.01.04", {20, 40, 210}},
      {"Violet", "29.01.05", {130, 40, 190}}, {"White", "29.01.06", {255, 255, 255}},
      {"Brown", "29.01.07", {120, 70, 20}},   {"Black", "29.01.08", {10, 10, 10}},
      {"Silver", "29.01.95", {192, 192, 192}}, {"Gray", "29.01.96", {128, 128, 128}},
      {"Gold", "29.01.97", {212, 175, 55}},   {"Orange", "29.01.98", {255, 140, 0}},
      {"Pink", "29.01.99", {255, 160, 200}},
  };
  return palette;
}

SyntheticSpec SyntheticSpec::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("synthetic spec: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("synthetic spec must be a JSON object");
  SyntheticSpec s;
  try {
    s.n_logos = j.value("n_logos", s.n_logos);
    s.groups = j.value("groups", s.groups);
    s.duplicates_per_group = j.value("duplicates_per_group", s.duplicates_per_group);
    s.text_probability = j.value("text_probability", s.text_probability);
    s.seed = j.value("seed", s.seed);
    s.image_size = j.value("image_size", s.image_size);
    s.train_ratio = j.value("train_ratio", s.train_ratio);
    if (j.contains("shapes")) {
      s.shapes.clear();
      for (const auto& n : j["shapes"]) s.shapes.push_back(parse_synth_shape(n.get<std::string>()));
    }
    if (j.contains("colors")) s.colors = j["colors"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("synthetic spec: ") + e.what());
  }
  return s;
}

SyntheticSpec SyntheticSpec::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

RenderedLogo render_logo(const LogoDesign& d, const Placement& place, int size) {
  if (size < 32) throw InvalidArgument("image_size must be at least 32");
  RenderedLogo out{RasterImage(size, size, kSynthBackground), TextMask(size, size)};
  const Rgb color = synth_palette().at(d.color).rgb;
  const double s = size;
  const double cx = s * (0.5 + place.dx);
  const double cy = s * ((d.text ? 0.42 : 0.5) + place.dy);
  const double radius = s * (d.text ? 0.27 : 0.32) * place.scale;
  const double cr = std::cos(d.rotation), sr = std::sin(d.rotation);
  const auto poly = unit_polygon(d);

  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double px = x + 0.5 - cx, py = y + 0.5 - cy;
      // rotate into the shape frame and scale to unit radius
      const Vec2 q{(cr * px + sr * py) / radius, (-sr * px + cr * py) / radius};
      bool in;
      if (d.shape == SynthShape::Circle) {
        in = q.x * q.x + (q.y / d.aspect) * (q.y / d.aspect) <= 1.0;
      } else {
        in = inside_convex(poly, q);
      }
      if (in) out.image.set(x, y, color);
    }
  }

  if (d.text) {
    auto glyphs = glyphs_for(d.glyph_seed);
    const int cell = std::max(1, size / 48);
    const int glyph_w = 3 * cell, gap = cell;
    // the strip sits just below the shape, centered on its extent
    int min_x = size, max_x = -1, max_y = -1;
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        if (out.image.at(x, y) == color) {
          min_x = std::min(min_x, x);
          max_x = std::max(max_x, x);
          max_y = std::max(max_y, y);
        }
      }
    }
    if (max_x < 0) {
      min_x = max_x = static_cast<int>(cx);
      max_y = static_cast<int>(cy);
    }
    // no wider than the shape
    const auto fits = static_cast<std::size_t>(std::max(1, (max_x - min_x + 1 + gap) / (glyph_w + gap)));
    if (glyphs.size() > fits) glyphs.resize(fits);
    const int strip_w = static_cast<int>(glyphs.size()) * (glyph_w + gap) - gap;
    const int x0 = (min_x + max_x + 1) / 2 - strip_w / 2;
    const int y0 = std::min(max_y + 1 + 2 * cell, size - 5 * cell - 2);
    TextMask glyph_px(size, size);
    for (std::size_t g = 0; g < glyphs.size(); ++g) {
      for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 3; ++c) {
          if (!((glyphs[g] >> (r * 3 + c)) & 1)) continue;
          for (int yy = 0; yy < cell; ++yy) {
            for (int xx = 0; xx < cell; ++xx) {
              const int x = x0 + static_cast<int>(g) * (glyph_w + gap) + c * cell + xx;
              const int y = y0 + r * cell + yy;
              if (x < 0 || y < 0 || x >= size || y >= size) continue;
              out.image.set(x, y, color);
              glyph_px.set(x, y, true);
            }
          }
        }
      }
    }
    // mask = glyph pixels dilated by one pixel
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        bool hit = false;
        for (int oy = -1; oy <= 1 && !hit; ++oy) {
          for (int ox = -1; ox <= 1 && !hit; ++ox) {
            const int nx = x + ox, ny = y + oy;
            hit = nx >= 0 && ny >= 0 && nx < size && ny < size && glyph_px.at(nx, ny);
          }
        }
        if (hit) out.mask.set(x, y, true);
      }
    }
  }
  return out;
}

SyntheticCorpus plan_synthetic_corpus(const SyntheticSpec& spec) {
  if (spec.n_logos < 1) throw InvalidArgument("n_logos must be positive");
  if (spec.groups < 0 || spec.duplicates_per_group < 0) {
    throw InvalidArgument("groups and duplicates_per_group must be non-negative");
  }
  const long grouped = static_cast<long>(spec.groups) * spec.duplicates_per_group;
  if (grouped > spec.n_logos) throw InvalidArgument("grouped logos exceed n_logos");
  if (spec.shapes.empty()) throw InvalidArgument("shape palette is empty");
  if (!(spec.text_probability >= 0.0 && spec.text_probability <= 1.0)) {
    throw InvalidArgument("text_probability must lie in [0,1]");
  }

  std::vector<std::size_t> colors;
  const auto& palette = synth_palette();
  if (spec.colors.empty()) {
    for (std::size_t i = 0; i < palette.size(); ++i) colors.push_back(i);
  } else {
    for (const auto& name : spec.colors) {
      auto it = std::find_if(palette.begin(), palette.end(), [&](const PaletteColor& c) {
        std::string a = c.name, b = name;
        std::transform(a.begin(), a.end(), a.begin(), ::tolower);
        std::transform(b.begin(), b.end(), b.begin(), ::tolower);
        return a == b;
      });
      if (it == palette.end()) throw InvalidArgument("unknown palette color '" + name + "'");
      colors.push_back(static_cast<std::size_t>(it - palette.begin()));
    }
  }

  Draw draw(spec.seed);
  auto random_design = [&](SynthShape shape, std::size_t color) {
    LogoDesign d;
    d.shape = shape;
    d.color = color;
    d.rotation = draw.uniform(0.0, std::numbers::pi);
    switch (shape) {
      case SynthShape::Circle: d.aspect = draw.uniform(0.55, 1.0); break;
      case SynthShape::Square:
        // tilted so the crop never reduces it to a flat block
        d.aspect = draw.uniform(0.6, 1.0);
        d.rotation = draw.uniform(0.25, std::numbers::pi / 2 - 0.25);
        break;
      // triangles and bands stay near axis-aligned so they cover a large
      // share of their bounding box
      case SynthShape::Triangle:
        d.aspect = draw.uniform(0.75, 1.0);
        d.rotation = std::numbers::pi / 2 * static_cast<double>(draw.index(4)) + draw.uniform(-0.12, 0.12);
        break;
      case SynthShape::Line: {
        d.aspect = draw.uniform(0.3, 0.4);
        const double tilt = draw.uniform(0.1, 0.3) * (draw.index(2) ? 1.0 : -1.0);
        d.rotation = std::numbers::pi / 2 * static_cast<double>(draw.index(2)) + tilt;
        break;
      }
      case SynthShape::Polygon:
        d.aspect = draw.uniform(0.7, 1.0);
        d.sides = 5 + static_cast<int>(draw.index(4));
        break;
    }
    d.text = draw.unit() < spec.text_probability;
    d.glyph_seed = draw.raw();
    return d;
  };
  auto jitter = [&](bool duplicate) {
    Placement p;
    if (duplicate) {
      p.scale = draw.uniform(0.85, 1.0);
      p.dx = draw.uniform(-0.05, 0.05);
      p.dy = draw.uniform(-0.05, 0.05);
    }
    return p;
  };

  SyntheticCorpus corpus;
  std::vector<SyntheticLogo> logos;
  // planted duplicate groups: distinct colors while the palette allows
  std::vector<std::size_t> group_colors = colors;
  draw.shuffle(group_colors);
  for (int g = 0; g < spec.groups; ++g) {
    const auto shape = spec.shapes[draw.index(spec.shapes.size())];
    const auto design = random_design(shape, group_colors[g % group_colors.size()]);
    for (int m = 0; m < spec.duplicates_per_group; ++m) {
      logos.push_back({0, design, jitter(true), g});
    }
  }
  // distractors: balanced colors and shapes
  const std::size_t n_distractors = static_cast<std::size_t>(spec.n_logos - grouped);
  std::vector<std::size_t> dcolors, dshapes;
  for (std::size_t i = 0; i < n_distractors; ++i) {
    dcolors.push_back(colors[i % colors.size()]);
    dshapes.push_back(i % spec.shapes.size());
  }
  draw.shuffle(dcolors);
  draw.shuffle(dshapes);
  for (std::size_t i = 0; i < n_distractors; ++i) {
    logos.push_back({0, random_design(spec.shapes[dshapes[i]], dcolors[i]), jitter(false), -1});
  }

  std::vector<std::uint64_t> ids(logos.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i + 1;
  draw.shuffle(ids);
  corpus.groups.assign(static_cast<std::size_t>(spec.groups), {});
  for (std::size_t i = 0; i < logos.size(); ++i) {
    logos[i].id = ids[i];
    if (logos[i].group >= 0) corpus.groups[logos[i].group].push_back(ids[i]);
  }
  for (auto& g : corpus.groups) std::sort(g.begin(), g.end());
  std::sort(logos.begin(), logos.end(),
            [](const SyntheticLogo& a, const SyntheticLogo& b) { return a.id < b.id; });

  for (const auto& logo : logos) {
    LogoRecord r;
    r.id = logo.id;
    r.path = "images/" + std::to_string(logo.id) + ".png";
    r.vienna = {synth_shape_code(logo.design.shape), palette[logo.design.color].code};
    if (logo.design.text) r.vienna.push_back("27.05.01");
    const int n_nice = 1 + static_cast<int>(draw.index(2));
    for (int k = 0; k < n_nice; ++k) {
      const int c = 1 + static_cast<int>(draw.index(45));
      if (std::find(r.nice.begin(), r.nice.end(), c) == r.nice.end()) r.nice.push_back(c);
    }
    std::sort(r.nice.begin(), r.nice.end());
    corpus.manifest.records.push_back(std::move(r));
  }
  if (spec.train_ratio > 0.0 && spec.train_ratio < 1.0) {
    corpus.manifest = split_train_test(corpus.manifest, spec.train_ratio, spec.seed);
  }
  corpus.logos = std::move(logos);
  return corpus;
}

std::filesystem::path mask_path_for(const std::filesystem::path& image_path) {
  auto p = image_path;
  p.replace_extension(".mask.png");
  return p;
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec,
                                          const std::filesystem::path& out_dir) {
  auto corpus = plan_synthetic_corpus(spec);
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "images").string() + ": " + ec.message());
  corpus.manifest.root = out_dir;

  const auto& logos = corpus.logos;
  std::vector<std::string> errors(logos.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < logos.size(); ++i) {
    try {
      const auto rendered = render_logo(logos[i].design, logos[i].placement, spec.image_size);
      const auto path = corpus.manifest.image_path(corpus.manifest.records[i]);
      write_png(path.string(), rendered.image);
      const auto mask_path = mask_path_for(path);
      if (logos[i].design.text) {
        write_mask_png(mask_path.string(), rendered.mask);
      } else {
        std::error_code ignored;
        std::filesystem::remove(mask_path, ignored);  // left over from an earlier corpus
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw IoError(e);
  }

  save_manifest(corpus.manifest, out_dir / "manifest.jsonl");
  nlohmann::ordered_json g;
  g["groups"] = corpus.groups;
  std::ofstream out(out_dir / "groups.json", std::ios::trunc);
  if (!out) throw IoError("cannot write " + (out_dir / "groups.json").string());
  out << g.dump(2) << "\n";
  return corpus;
}

}  // namespace logofuse
