#include <doctest.h>

#include <random>
#include <sstream>

#include "logofuse/labelpowerset.hpp"
#include "support/oracles.hpp"

using namespace logofuse;

namespace {

// Two labelsets split by the sign of a random hyperplane, with a margin.
struct Separable {
  std::vector<std::vector<double>> x;
  std::vector<std::vector<int>> labelsets;
  std::vector<int> cls;
};

Separable separable(std::uint64_t seed, int n, int dim) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  std::vector<double> w(dim);
  for (auto& v : w) v = g(rng);
  Separable s;
  while (static_cast<int>(s.x.size()) < n) {
    std::vector<double> p(dim);
    double dot = 0;
    for (int j = 0; j < dim; ++j) {
      p[j] = g(rng);
      dot += p[j] * w[j];
    }
    if (std::abs(dot) < 0.3) continue;
    s.x.push_back(p);
    s.cls.push_back(dot > 0);
    s.labelsets.push_back(dot > 0 ? std::vector<int>{1, 4} : std::vector<int>{2});
  }
  return s;
}

}  // namespace

TEST_SUITE("forest") {
  TEST_CASE("two distinct labelsets become two classes") {
    const std::vector<std::vector<double>> x{{0.0}, {1.0}, {0.1}, {0.9}};
    const std::vector<std::vector<int>> ls{{1}, {1, 2}, {1}, {1, 2}};
    ForestParams p;
    p.trees = 5;
    const auto lp = LabelPowerset::train(x, ls, Kind::Color, 13, p);
    CHECK(lp.classes().size() == 2);
    CHECK(lp.forest().tree_count() == 5);
  }

  TEST_CASE("single-class training data predicts that labelset with confidence 1") {
    std::mt19937_64 rng(1);
    std::vector<std::vector<double>> x;
    std::vector<std::vector<int>> ls;
    for (int i = 0; i < 20; ++i) {
      x.push_back(testutil::random_unit(rng, 4));
      ls.push_back({0, 3});
    }
    ForestParams p;
    p.trees = 10;
    const auto lp = LabelPowerset::train(x, ls, Kind::Shape, 7, p);
    for (int t = 0; t < 10; ++t) {
      const auto s = lp.predict(testutil::random_unit(rng, 4));
      for (int l = 0; l < 7; ++l) CHECK(s.scores[l] == ((l == 0 || l == 3) ? 1.0 : 0.0));
    }
  }

  TEST_CASE("vote mass summation") {
    const auto s = scores_from_class_votes(Kind::Color, {{1}, {1, 2}}, {0.7, 0.3}, 13);
    CHECK(s.scores[1] == doctest::Approx(1.0));
    CHECK(s.scores[2] == doctest::Approx(0.3));
    CHECK(s.scores[5] == 0.0);  // never seen in training
    CHECK(s.scores.size() == 13);
  }

  TEST_CASE("default forest size is 100") {
    CHECK(ForestParams{}.trees == 100);
    const auto s = separable(2, 40, 3);
    const auto lp = LabelPowerset::train(s.x, s.labelsets, Kind::Color, 13, ForestParams{});
    CHECK(lp.forest().tree_count() == 100);
  }

  TEST_CASE("training errors") {
    ForestParams p;
    CHECK_THROWS_AS(LabelPowerset::train({}, {}, Kind::Color, 13, p), InvalidArgument);
    CHECK_THROWS_AS(LabelPowerset::train({{1.0}}, {{}}, Kind::Color, 13, p), InvalidArgument);
    CHECK_THROWS_AS(LabelPowerset::train({{1.0}, {1.0, 2.0}}, {{1}, {1}}, Kind::Color, 13, p), InvalidArgument);
    CHECK_THROWS_AS(LabelPowerset::train({{1.0}}, {{13}}, Kind::Color, 13, p), InvalidArgument);
    p.trees = 0;
    CHECK_THROWS_AS(LabelPowerset::train({{1.0}}, {{1}}, Kind::Color, 13, p), InvalidArgument);
    p.trees = 3;
    const auto lp = LabelPowerset::train({{1.0, 0.0}}, {{1}}, Kind::Color, 13, p);
    CHECK_THROWS_AS(lp.predict(std::vector<double>{1.0}), InvalidArgument);
  }

  TEST_CASE("separable data: training labelsets are recovered like a single tree") {
    const auto s = separable(3, 300, 6);
    oracle::SingleTree tree(s.x, s.cls);
    int tree_ok = 0;
    for (std::size_t i = 0; i < s.x.size(); ++i) tree_ok += tree.predict(s.x[i]) == s.cls[i];
    REQUIRE(tree_ok >= 0.95 * s.x.size());

    ForestParams p;
    p.trees = 50;
    const auto lp = LabelPowerset::train(s.x, s.labelsets, Kind::Color, 13, p);
    int ok = 0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const auto sc = lp.predict(s.x[i]);
      std::vector<int> got;
      for (int l = 0; l < 13; ++l)
        if (sc.scores[l] > 0.5) got.push_back(l);
      ok += got == s.labelsets[i];
    }
    CHECK(ok >= 0.95 * s.x.size());
  }

  TEST_CASE("forest training is deterministic and thread-count independent") {
    const auto s = separable(4, 120, 5);
    std::vector<int> y(s.cls.begin(), s.cls.end());
    ForestParams p;
    p.trees = 20;
    const auto a = RandomForest::fit(s.x, y, 2, p);
    const auto b = RandomForest::fit(s.x, y, 2, p);
    std::ostringstream sa, sb;
    a.write(sa);
    b.write(sb);
    CHECK(sa.str() == sb.str());
    p.seed = 99;
    std::ostringstream sc;
    RandomForest::fit(s.x, y, 2, p).write(sc);
    CHECK(sc.str() != sa.str());
  }

  TEST_CASE("class votes sum to one") {
    const auto s = separable(5, 80, 4);
    std::vector<int> y(s.cls.begin(), s.cls.end());
    ForestParams p;
    p.trees = 15;
    const auto f = RandomForest::fit(s.x, y, 2, p);
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
      const auto v = f.class_votes(testutil::random_unit(rng, 4));
      CHECK(v[0] + v[1] == doctest::Approx(1.0));
    }
  }

  TEST_CASE("model file round trip") {
    testutil::TempDir dir("lp");
    const auto s = separable(6, 60, 4);
    ForestParams p;
    p.trees = 12;
    p.seed = 1234;
    const auto lp = LabelPowerset::train(s.x, s.labelsets, Kind::Sector, 45, p, ClassifierInput::OwnBlock);
    const auto path = (dir.path() / "m.model").string();
    lp.save(path);
    const auto back = LabelPowerset::load(path);
    CHECK(back.kind() == Kind::Sector);
    CHECK(back.label_count() == 45);
    CHECK(back.input() == ClassifierInput::OwnBlock);
    CHECK(back.classes() == lp.classes());
    CHECK(back.forest().tree_count() == 12);
    CHECK(back.forest().params().seed == 1234);
    for (const auto& x : s.x) REQUIRE(back.predict(x).scores == lp.predict(x).scores);
    CHECK_THROWS_AS(LabelPowerset::load((dir.path() / "none").string()), IoError);
  }
}
