#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "logofuse/error.hpp"

namespace logofuse {

// Characteristic families. The numeric values are the on-disk enum used by
// embedding stores and model files; never reorder.
enum class Kind : std::uint8_t {
  FigurativeMain = 0,
  FigurativeSub = 1,
  Color = 2,
  Shape = 3,
  Text = 4,
  Sector = 5,
  Generic = 6,
};

inline constexpr std::array<Kind, 7> kAllKinds = {
    Kind::FigurativeMain, Kind::FigurativeSub, Kind::Color, Kind::Shape,
    Kind::Text,           Kind::Sector,        Kind::Generic};

// Kinds that carry a label space (Generic does not).
inline constexpr std::array<Kind, 6> kLabeledKinds = {
    Kind::FigurativeMain, Kind::FigurativeSub, Kind::Color,
    Kind::Shape,          Kind::Text,          Kind::Sector};

std::string_view kind_name(Kind kind);
// Accepts the canonical snake_case names plus short aliases
// ("main", "sub", "category", "subcategory").
Kind parse_kind(std::string_view name);
std::optional<Kind> kind_from_u8(std::uint8_t value);

// A hierarchical XX.YY.ZZ figurative-element code.
struct ViennaCode {
  int category = 0;
  std::optional<int> division;
  std::optional<int> section;

  friend bool operator==(const ViennaCode&, const ViennaCode&) = default;
  friend auto operator<=>(const ViennaCode&, const ViennaCode&) = default;
};

// Throws ParseError naming the offending field.
ViennaCode parse_code(std::string_view text);
std::string format_code(const ViennaCode& code);
bool is_valid(const ViennaCode& code);

struct Label {
  int id = 0;
  std::string name;
  // Vienna codes; for the sector space these hold Nice class numbers in
  // `category`.
  std::vector<ViennaCode> source_codes;
};

struct LabelSpace {
  Kind kind = Kind::Generic;
  std::vector<Label> labels;

  std::size_t size() const { return labels.size(); }
  const Label& at(int id) const { return labels.at(static_cast<std::size_t>(id)); }
  // Case-insensitive lookup by display name or by a textual code that is
  // listed as a source of the label. Returns nullopt when absent.
  std::optional<int> find(std::string_view name_or_code) const;
};

struct LabelAssignment {
  Kind kind;
  int label;
  friend bool operator==(const LabelAssignment&, const LabelAssignment&) = default;
};

// Mapped codes may yield two assignments (figurative main + sub).
struct Mapped {
  std::vector<LabelAssignment> labels;
  friend bool operator==(const Mapped&, const Mapped&) = default;
};

struct Dropped {
  std::string reason;
  friend bool operator==(const Dropped&, const Dropped&) = default;
};

using GroupingOutcome = std::variant<Mapped, Dropped>;

struct TaxonomyOptions {
  // Category 28 (inscriptions in various characters) counts as text.
  bool inscriptions_are_text = true;
};

// The immutable set of grouped label spaces plus the code lookup used by
// group_code. Safe for concurrent reads.
class Taxonomy {
 public:
  // Parses the line-oriented label table.
  static Taxonomy from_table(std::string_view table_text, TaxonomyOptions options = {});
  static Taxonomy from_file(const std::string& path, TaxonomyOptions options = {});
  // The table compiled into the library.
  static const Taxonomy& builtin();

  const LabelSpace& space(Kind kind) const;
  const std::map<Kind, LabelSpace>& spaces() const { return spaces_; }
  const TaxonomyOptions& options() const { return options_; }

  GroupingOutcome group_code(const ViennaCode& code) const;
  // Nice class (1-45) to sector label id; nullopt when out of range.
  std::optional<int> group_nice(int nice_class) const;

  // Full annotation for a logo: every grouped label per kind. The text kind
  // always receives exactly one label (present or absent).
  std::map<Kind, std::vector<int>> annotate(const std::vector<ViennaCode>& codes,
                                            const std::vector<int>& nice_classes) const;

 private:
  std::map<Kind, LabelSpace> spaces_;
  std::map<ViennaCode, LabelAssignment> lookup_;
  TaxonomyOptions options_;
};

LabelSpace build_label_space(Kind kind);
std::map<Kind, LabelSpace> build_label_spaces();

// Human readable rendering of an outcome, used by `taxonomy explain`.
std::string describe(const GroupingOutcome& outcome, const Taxonomy& taxonomy);

}  // namespace logofuse
