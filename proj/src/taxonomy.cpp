#include "logofuse/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "logofuse/error.hpp"
#include "logofuse/label_table_data.hpp"

namespace logofuse {

namespace {

constexpr std::array<std::string_view, 7> kKindNames = {
    "figurative_main", "figurative_sub", "color", "shape", "text", "sector", "generic"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

int parse_field(std::string_view field, const char* what) {
  if (field.empty()) throw ParseError(std::string("empty ") + what + " field");
  for (char c : field) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw ParseError(std::string("non-numeric ") + what + " field '" + std::string(field) + "'");
    }
  }
  int value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(std::string(what) + " field out of range '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::string_view kind_name(Kind kind) { return kKindNames.at(static_cast<std::size_t>(kind)); }

Kind parse_kind(std::string_view name) {
  const auto key = lower(name);
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (key == kKindNames[i]) return static_cast<Kind>(i);
  }
  if (key == "main" || key == "category" || key == "figurative") return Kind::FigurativeMain;
  if (key == "sub" || key == "subcategory") return Kind::FigurativeSub;
  if (key == "colour") return Kind::Color;
  if (key == "autoencoder") return Kind::Generic;
  throw ParseError("unknown characteristic '" + std::string(name) + "'");
}

std::optional<Kind> kind_from_u8(std::uint8_t value) {
  if (value < kAllKinds.size()) return static_cast<Kind>(value);
  return std::nullopt;
}

// ---------------------------------------------------------------- codes

ViennaCode parse_code(std::string_view text) {
  if (text.empty()) throw ParseError("empty code");
  const auto fields = split(text, '.');
  if (fields.size() > 3) {
    throw ParseError("too many levels in code '" + std::string(text) + "'");
  }
  ViennaCode code;
  code.category = parse_field(fields[0], "category");
  if (code.category < 1 || code.category > 29) {
    throw ParseError("category " + std::to_string(code.category) + " outside [1,29] in '" +
                     std::string(text) + "'");
  }
  if (fields.size() >= 2) {
    code.division = parse_field(fields[1], "division");
    if (*code.division < 1) throw ParseError("division must be >= 1 in '" + std::string(text) + "'");
  }
  if (fields.size() == 3) {
    code.section = parse_field(fields[2], "section");
    if (*code.section < 1) throw ParseError("section must be >= 1 in '" + std::string(text) + "'");
  }
  return code;
}

std::string format_code(const ViennaCode& code) {
  char buf[32];
  if (code.section) {
    std::snprintf(buf, sizeof(buf), "%02d.%02d.%02d", code.category, *code.division, *code.section);
  } else if (code.division) {
    std::snprintf(buf, sizeof(buf), "%02d.%02d", code.category, *code.division);
  } else {
    std::snprintf(buf, sizeof(buf), "%02d", code.category);
  }
  return buf;
}

bool is_valid(const ViennaCode& code) {
  if (code.category < 1 || code.category > 29) return false;
  if (code.division && *code.division < 1) return false;
  if (code.section && (*code.section < 1 || !code.division)) return false;
  return true;
}

// ---------------------------------------------------------------- spaces

std::optional<int> LabelSpace::find(std::string_view name_or_code) const {
  const auto key = lower(name_or_code);
  for (const auto& label : labels) {
    if (lower(label.name) == key) return label.id;
  }
  // "26.5 Other polygons"-style names also match on their leading token.
  for (const auto& label : labels) {
    const auto space = label.name.find(' ');
    if (space != std::string::npos && lower(label.name.substr(0, space)) == key) return label.id;
  }
  try {
    const auto code = parse_code(name_or_code);
    for (const auto& label : labels) {
      if (std::find(label.source_codes.begin(), label.source_codes.end(), code) !=
          label.source_codes.end()) {
        return label.id;
      }
    }
  } catch (const ParseError&) {
  }
  return std::nullopt;
}

Taxonomy Taxonomy::from_table(std::string_view table_text, TaxonomyOptions options) {
  Taxonomy tax;
  tax.options_ = options;
  for (Kind kind : kLabeledKinds) tax.spaces_[kind].kind = kind;

  int line_no = 0;
  for (auto line : split(table_text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = split(line, '\t');
    const auto where = "label table line " + std::to_string(line_no);
    if (cols.size() != 4) throw ParseError(where + ": expected 4 tab-separated columns");
    const Kind kind = parse_kind(cols[0]);
    if (kind == Kind::Generic) throw ParseError(where + ": generic kind has no labels");
    auto& space = tax.spaces_[kind];
    Label label;
    label.id = parse_field(cols[1], "label-id");
    if (label.id != static_cast<int>(space.labels.size())) {
      throw ParseError(where + ": label ids must be dense and ascending");
    }
    label.name = std::string(cols[2]);
    if (cols[3] != "-") {
      for (auto code_text : split(cols[3], ',')) {
        ViennaCode code;
        if (kind == Kind::Sector) {
          code.category = parse_field(code_text, "nice class");
        } else {
          code = parse_code(code_text);
          if (!tax.lookup_.emplace(code, LabelAssignment{kind, label.id}).second) {
            throw ParseError(where + ": code " + format_code(code) + " listed twice");
          }
        }
        label.source_codes.push_back(code);
      }
    }
    space.labels.push_back(std::move(label));
  }
  return tax;
}

Taxonomy Taxonomy::from_file(const std::string& path, TaxonomyOptions options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open label table " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_table(ss.str(), options);
}

const Taxonomy& Taxonomy::builtin() {
  static const Taxonomy instance = from_table(detail::kEmbeddedLabelTable);
  return instance;
}

const LabelSpace& Taxonomy::space(Kind kind) const {
  const auto it = spaces_.find(kind);
  if (it == spaces_.end()) {
    throw InvalidArgument("no label space for kind " + std::string(kind_name(kind)));
  }
  return it->second;
}

GroupingOutcome Taxonomy::group_code(const ViennaCode& code) const {
  if (!is_valid(code)) throw InvalidArgument("invalid Vienna code");
  const auto find = [this](ViennaCode key) -> std::optional<LabelAssignment> {
    const auto it = lookup_.find(key);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  };
  const ViennaCode category_only{code.category, std::nullopt, std::nullopt};
  const ViennaCode division_level{code.category, code.division, std::nullopt};

  if (code.category <= 25) {
    const auto main = find(category_only);
    if (!main) return Dropped{"figurative category missing from label table"};
    Mapped mapped{{*main}};
    if (code.division) {
      // Unknown sections fall back to their division's label.
      const auto sub = find(division_level);
      if (!sub) return Dropped{"undefined figurative division " + format_code(division_level)};
      mapped.labels.push_back(*sub);
    }
    return mapped;
  }
  if (code.category == 26) {
    if (!code.division) return Dropped{"shape code without division"};
    if (const auto shape = find(division_level)) return Mapped{{*shape}};
    return Dropped{"undefined shape division " + format_code(division_level)};
  }
  if (code.category == 27 || code.category == 28) {
    if (code.category == 28 && !options_.inscriptions_are_text) {
      return Dropped{"inscriptions not grouped as text"};
    }
    if (const auto text = find(category_only)) return Mapped{{*text}};
    return Dropped{"text category missing from label table"};
  }
  // category 29: colors
  if (!code.division || !code.section) return Dropped{"color code without section"};
  if (*code.division != 1) return Dropped{"undefined color division " + format_code(division_level)};
  if (const auto color = find(code)) return Mapped{{*color}};
  if (*code.section >= 11 && *code.section <= 15) return Dropped{"color-count code"};
  return Dropped{"unretained color section " + format_code(code)};
}

std::optional<int> Taxonomy::group_nice(int nice_class) const {
  const auto& sector = space(Kind::Sector);
  for (const auto& label : sector.labels) {
    for (const auto& code : label.source_codes) {
      if (code.category == nice_class) return label.id;
    }
  }
  return std::nullopt;
}

std::map<Kind, std::vector<int>> Taxonomy::annotate(const std::vector<ViennaCode>& codes,
                                                    const std::vector<int>& nice_classes) const {
  std::map<Kind, std::set<int>> sets;
  for (const auto& code : codes) {
    const auto outcome = group_code(code);
    if (const auto* mapped = std::get_if<Mapped>(&outcome)) {
      for (const auto& a : mapped->labels) sets[a.kind].insert(a.label);
    }
  }
  for (int nice : nice_classes) {
    if (const auto id = group_nice(nice)) sets[Kind::Sector].insert(*id);
  }
  if (sets[Kind::Text].empty()) sets[Kind::Text].insert(0);

  std::map<Kind, std::vector<int>> out;
  for (auto& [kind, labels] : sets) {
    if (!labels.empty()) out[kind] = std::vector<int>(labels.begin(), labels.end());
  }
  return out;
}

LabelSpace build_label_space(Kind kind) { return Taxonomy::builtin().space(kind); }

std::map<Kind, LabelSpace> build_label_spaces() { return Taxonomy::builtin().spaces(); }

std::string describe(const GroupingOutcome& outcome, const Taxonomy& taxonomy) {
  if (const auto* dropped = std::get_if<Dropped>(&outcome)) {
    return "Dropped(" + dropped->reason + ")";
  }
  std::string out;
  for (const auto& a : std::get<Mapped>(outcome).labels) {
    if (!out.empty()) out += "; ";
    out += "Mapped(" + std::string(kind_name(a.kind)) + ", " + std::to_string(a.label) + " \"" +
           taxonomy.space(a.kind).at(a.label).name + "\")";
  }
  return out;
}

}  // namespace logofuse
