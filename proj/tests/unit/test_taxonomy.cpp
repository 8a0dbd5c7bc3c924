#include <doctest.h>

#include <random>
#include <set>

#include "logofuse/taxonomy.hpp"

using namespace logofuse;

namespace {
const Taxonomy& tax() { return Taxonomy::builtin(); }

const Mapped& mapped(const GroupingOutcome& o) {
  REQUIRE(std::holds_alternative<Mapped>(o));
  return std::get<Mapped>(o);
}
}  // namespace

TEST_SUITE("taxonomy") {
  TEST_CASE("parse_code examples") {
    const auto a = parse_code("5.9.1");
    CHECK(a.category == 5);
    CHECK(a.division == 9);
    CHECK(a.section == 1);
    CHECK(parse_code("05.09.01") == a);

    const auto b = parse_code("29");
    CHECK(b.category == 29);
    CHECK_FALSE(b.division.has_value());
    CHECK_FALSE(b.section.has_value());

    const auto c = parse_code("26.07.99");
    CHECK(c == ViennaCode{26, 7, 99});
  }

  TEST_CASE("parse_code rejects malformed input and names the field") {
    CHECK_THROWS_AS(parse_code(""), ParseError);
    CHECK_THROWS_AS(parse_code("5..1"), ParseError);
    CHECK_THROWS_AS(parse_code("a.1"), ParseError);
    CHECK_THROWS_AS(parse_code("1.2.3.4"), ParseError);
    CHECK_THROWS_AS(parse_code("-1"), ParseError);
    try {
      parse_code("31.01");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("category") != std::string::npos);
    }
    try {
      parse_code("5.x");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("division") != std::string::npos);
    }
    try {
      parse_code("5.1.");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("section") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_code("0"), ParseError);
    CHECK_THROWS_AS(parse_code("5.0"), ParseError);
  }

  TEST_CASE("format_code examples") {
    CHECK(format_code({5, 9, 1}) == "05.09.01");
    CHECK(format_code({26, std::nullopt, std::nullopt}) == "26");
    CHECK(format_code({29, 1, 4}) == "29.01.04");
  }

  TEST_CASE("round trip over random valid codes") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 10000; ++i) {
      ViennaCode c;
      c.category = 1 + static_cast<int>(rng() % 29);
      const int levels = static_cast<int>(rng() % 3);
      if (levels >= 1) c.division = 1 + static_cast<int>(rng() % 99);
      if (levels >= 2) c.section = 1 + static_cast<int>(rng() % 99);
      REQUIRE(parse_code(format_code(c)) == c);
    }
  }

  TEST_CASE("space cardinalities") {
    CHECK(tax().space(Kind::FigurativeMain).size() == 25);
    CHECK(tax().space(Kind::FigurativeSub).size() == 123);
    CHECK(tax().space(Kind::Color).size() == 13);
    CHECK(tax().space(Kind::Shape).size() == 7);
    CHECK(tax().space(Kind::Text).size() == 2);
    CHECK(tax().space(Kind::Sector).size() == 45);
    CHECK(build_label_spaces().size() == 6);
    CHECK(build_label_space(Kind::Color).size() == 13);
  }

  TEST_CASE("label ids are dense and source codes are disjoint") {
    for (const auto& [kind, space] : tax().spaces()) {
      std::set<std::string> seen;
      for (std::size_t i = 0; i < space.labels.size(); ++i) {
        CHECK(space.labels[i].id == static_cast<int>(i));
        for (const auto& c : space.labels[i].source_codes) {
          CHECK_MESSAGE(seen.insert(format_code(c)).second, "code listed twice: ", format_code(c));
        }
      }
    }
  }

  TEST_CASE("group_code examples") {
    const auto& shapes = tax().space(Kind::Shape);
    const auto m1 = mapped(tax().group_code(parse_code("26.07")));
    REQUIRE(m1.labels.size() == 1);
    CHECK(m1.labels[0].kind == Kind::Shape);
    CHECK(shapes.at(m1.labels[0].label).name == "26.5 Other polygons");
    CHECK(mapped(tax().group_code(parse_code("26.13"))).labels[0].label == m1.labels[0].label);
    CHECK(mapped(tax().group_code(parse_code("26.05.02"))).labels[0].label == m1.labels[0].label);

    const auto d = tax().group_code(parse_code("29.01.12"));
    REQUIRE(std::holds_alternative<Dropped>(d));
    CHECK(std::get<Dropped>(d).reason == "color-count code");

    const auto t = mapped(tax().group_code(parse_code("27.05")));
    CHECK(t.labels == std::vector<LabelAssignment>{{Kind::Text, 1}});
    CHECK(tax().space(Kind::Text).at(1).name == "present");

    const auto a = mapped(tax().group_code(parse_code("3")));
    CHECK(a.labels == std::vector<LabelAssignment>{{Kind::FigurativeMain, 2}});
    CHECK(tax().space(Kind::FigurativeMain).at(2).name == "Animals");
  }

  TEST_CASE("figurative codes map to main and sub labels") {
    const auto m = mapped(tax().group_code(parse_code("5.9.1")));
    REQUIRE(m.labels.size() == 2);
    CHECK(m.labels[0].kind == Kind::FigurativeMain);
    CHECK(tax().space(Kind::FigurativeMain).at(m.labels[0].label).name == "Plants");
    CHECK(m.labels[1].kind == Kind::FigurativeSub);
    // unknown third level falls back to the division
    const auto fb = mapped(tax().group_code(parse_code("5.9.77")));
    CHECK(fb.labels == m.labels);
  }

  TEST_CASE("undefined divisions and unretained colors are dropped") {
    CHECK(std::holds_alternative<Dropped>(tax().group_code(parse_code("5.98"))));
    CHECK(std::holds_alternative<Dropped>(tax().group_code(parse_code("26.99"))));
    CHECK(std::holds_alternative<Dropped>(tax().group_code(parse_code("29.01.50"))));
    CHECK(std::holds_alternative<Dropped>(tax().group_code(parse_code("29"))));
    for (int s = 11; s <= 15; ++s) {
      const auto o = tax().group_code({29, 1, s});
      REQUIRE(std::holds_alternative<Dropped>(o));
      CHECK(std::get<Dropped>(o).reason == "color-count code");
    }
    const auto blue = mapped(tax().group_code(parse_code("29.01.04")));
    CHECK(tax().space(Kind::Color).at(blue.labels[0].label).name == "Blue");
  }

  TEST_CASE("category 28 follows the option") {
    CHECK(mapped(tax().group_code(parse_code("28.01"))).labels == std::vector<LabelAssignment>{{Kind::Text, 1}});
    TaxonomyOptions opt;
    opt.inscriptions_are_text = false;
    const auto t = Taxonomy::from_file(LOGOFUSE_DATA_DIR "/label_table.tsv", opt);
    CHECK(std::holds_alternative<Dropped>(t.group_code(parse_code("28.01"))));
    CHECK(std::holds_alternative<Mapped>(t.group_code(parse_code("27.01"))));
  }

  TEST_CASE("table parser rejects malformed tables") {
    CHECK_THROWS(Taxonomy::from_table("color\tx\tRed\t29.01.01\n"));
    CHECK_THROWS(Taxonomy::from_table("nonsense\t0\tRed\t29.01.01\n"));
  }

  TEST_CASE("grouping is total and deterministic over random codes") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100000; ++i) {
      ViennaCode c;
      c.category = 1 + static_cast<int>(rng() % 29);
      const int levels = static_cast<int>(rng() % 3);
      if (levels >= 1) c.division = 1 + static_cast<int>(rng() % 30);
      if (levels >= 2) c.section = 1 + static_cast<int>(rng() % 30);
      const auto a = tax().group_code(c);
      const auto b = tax().group_code(c);
      REQUIRE(a == b);
      if (const auto* m = std::get_if<Mapped>(&a)) {
        REQUIRE_FALSE(m->labels.empty());
        for (const auto& l : m->labels) {
          REQUIRE(l.label >= 0);
          REQUIRE(static_cast<std::size_t>(l.label) < tax().space(l.kind).size());
        }
      }
    }
  }

  TEST_CASE("annotate defaults text to absent and maps nice classes") {
    const auto ann = tax().annotate({parse_code("05.09.01"), parse_code("29.01.04")}, {9, 42});
    CHECK(tax().space(Kind::FigurativeMain).at(ann.at(Kind::FigurativeMain).at(0)).name == "Plants");
    CHECK(tax().space(Kind::Color).at(ann.at(Kind::Color).at(0)).name == "Blue");
    CHECK(ann.at(Kind::Text) == std::vector<int>{0});
    CHECK(ann.at(Kind::Sector) == std::vector<int>{8, 41});
    CHECK(tax().group_nice(46) == std::nullopt);
  }

  TEST_CASE("kind names") {
    for (Kind k : kAllKinds) CHECK(parse_kind(kind_name(k)) == k);
    CHECK(parse_kind("colour") == Kind::Color);
    CHECK_THROWS(parse_kind("smell"));
  }

  TEST_CASE("label space lookup") {
    const auto& colors = tax().space(Kind::Color);
    CHECK(colors.find("red") == 0);
    CHECK(colors.find("29.01.04") == 3);
    CHECK_FALSE(colors.find("mauve").has_value());
  }
}
