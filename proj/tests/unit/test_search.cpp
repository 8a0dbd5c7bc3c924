#include <doctest.h>

#include <algorithm>
#include <random>

#include "logofuse/search.hpp"
#include "support/oracles.hpp"

using namespace logofuse;

namespace {

struct Corpus {
  std::vector<std::uint64_t> ids;
  std::vector<std::map<Kind, std::vector<double>>> vecs;
  SearchIndex index;
};

const std::vector<SchemaEntry> kSchema = {{Kind::FigurativeMain, 6}, {Kind::Color, 5}, {Kind::Shape, 4}};

std::map<Kind, std::vector<double>> random_record(std::mt19937_64& rng) {
  std::map<Kind, std::vector<double>> r;
  for (const auto& s : kSchema) r[s.kind] = testutil::random_unit(rng, s.dim);
  return r;
}

FusedFeature to_fused(const std::map<Kind, std::vector<double>>& r) {
  FusedFeature f;
  for (const auto& [k, v] : r) f.add({k, v});
  return f;
}

// n records with shuffled ids; about one in five duplicates an earlier vector
// so distance ties occur.
Corpus random_corpus(std::mt19937_64& rng, std::size_t n) {
  Corpus c;
  std::vector<std::uint64_t> ids(n);
  std::iota(ids.begin(), ids.end(), 100);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<IndexRecord> recs;
  std::map<std::uint64_t, Annotation> ann;
  for (std::size_t i = 0; i < n; ++i) {
    auto v = (i > 0 && rng() % 5 == 0) ? c.vecs[rng() % i] : random_record(rng);
    c.ids.push_back(ids[i]);
    c.vecs.push_back(v);
    recs.push_back({ids[i], to_fused(v)});
    ann[ids[i]][Kind::Color] = {static_cast<int>(rng() % 13)};
  }
  c.index = build_index(std::move(recs), std::move(ann), kSchema);
  return c;
}

const std::vector<std::map<Kind, double>> kPresets = {
    {{Kind::Color, 1}},
    {{Kind::Shape, 1}},
    {{Kind::Color, 0.3}, {Kind::Shape, 0.7}},
    {{Kind::Color, 0.7}, {Kind::Shape, 0.3}},
    {{Kind::FigurativeMain, 0.7}, {Kind::Shape, 0.3}},
    {{Kind::FigurativeMain, 0.7}, {Kind::Color, 0.3}},
};

// Naive oracle: every distance recomputed from the raw vectors, full sort.
std::vector<std::uint64_t> oracle_rank(const Corpus& c, const std::map<Kind, std::vector<double>>& q,
                                       const std::map<Kind, double>& raw, std::size_t k) {
  std::vector<std::pair<double, std::uint64_t>> all;
  for (std::size_t i = 0; i < c.ids.size(); ++i) {
    std::vector<std::vector<double>> a, b;
    std::vector<double> w;
    for (const auto& [kind, wt] : raw) {
      a.push_back(q.at(kind));
      b.push_back(c.vecs[i].at(kind));
      w.push_back(wt);
    }
    all.push_back({oracle::weighted(a, b, w), c.ids[i]});
  }
  std::sort(all.begin(), all.end());
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) out.push_back(all[i].second);
  return out;
}

std::vector<std::uint64_t> ids_of(const RankedResult& r) {
  std::vector<std::uint64_t> out;
  for (const auto& h : r.hits) out.push_back(h.id);
  return out;
}

SearchConfig config(std::size_t k, const std::map<Kind, double>& raw) {
  SearchConfig cfg;
  cfg.k = k;
  cfg.weights = QueryWeights::from_raw(raw);
  return cfg;
}

}  // namespace

TEST_SUITE("search") {
  TEST_CASE("defaults") {
    SearchConfig cfg;
    CHECK(cfg.k == 9);
    CHECK(cfg.trees == 100);
  }

  TEST_CASE("build_index examples") {
    std::mt19937_64 rng(1);
    std::vector<IndexRecord> recs;
    for (std::uint64_t id : {1, 2, 3}) recs.push_back({id, to_fused(random_record(rng))});
    CHECK(build_index(recs, {}, kSchema).size() == 3);

    auto dup = recs;
    dup[2].id = 1;
    CHECK_THROWS_WITH_AS(build_index(dup, {}, kSchema), doctest::Contains("duplicate logo id 1"), InvalidArgument);

    auto missing = recs;
    FusedFeature partial;
    partial.add({Kind::Color, testutil::random_unit(rng, 5)});
    missing[1].features = partial;
    CHECK_THROWS_WITH_AS(build_index(missing, {}, kSchema), doctest::Contains("missing"), InvalidArgument);

    auto unnorm = recs;
    FusedFeature bad;
    bad.add({Kind::FigurativeMain, std::vector<double>(6, 1.0)});
    bad.add({Kind::Color, testutil::random_unit(rng, 5)});
    bad.add({Kind::Shape, testutil::random_unit(rng, 4)});
    unnorm[0].features = bad;
    CHECK_THROWS_AS(build_index(unnorm, {}, kSchema), InvalidArgument);

    // an all-zero block is allowed
    auto zero = recs;
    FusedFeature z;
    z.add({Kind::FigurativeMain, std::vector<double>(6, 0.0)});
    z.add({Kind::Color, testutil::random_unit(rng, 5)});
    z.add({Kind::Shape, testutil::random_unit(rng, 4)});
    zero[0].features = z;
    CHECK_NOTHROW(build_index(zero, {}, kSchema));

    auto wrongdim = recs;
    FusedFeature wd;
    wd.add({Kind::FigurativeMain, testutil::random_unit(rng, 7)});
    wd.add({Kind::Color, testutil::random_unit(rng, 5)});
    wd.add({Kind::Shape, testutil::random_unit(rng, 4)});
    wrongdim[0].features = wd;
    CHECK_THROWS_AS(build_index(wrongdim, {}, kSchema), InvalidArgument);

    std::map<std::uint64_t, Annotation> ann{{1, {{Kind::Shape, {7}}}}};
    CHECK_THROWS_AS(build_index(recs, ann, kSchema), InvalidArgument);
  }

  TEST_CASE("a stored record queried against itself comes first at distance 0") {
    std::mt19937_64 rng(2);
    auto c = random_corpus(rng, 60);
    for (const auto& raw : kPresets) {
      const auto r = query_knn(c.index, to_fused(c.vecs[17]), config(5, raw));
      CHECK(r.hits.front().distance == 0.0);
      // duplicates of the same vector also sit at 0, ordered by id
      std::uint64_t min_id = c.ids[17];
      for (std::size_t i = 0; i < c.ids.size(); ++i)
        if (c.vecs[i] == c.vecs[17]) min_id = std::min(min_id, c.ids[i]);
      CHECK(r.hits.front().id == min_id);
    }
  }

  TEST_CASE("query_knn equals a naive full sort") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 100; ++t) {
      auto c = random_corpus(rng, 1 + rng() % 200);
      const auto q = (rng() % 2) ? random_record(rng) : c.vecs[rng() % c.vecs.size()];
      for (const auto& raw : kPresets) {
        const std::size_t k = 1 + rng() % 250;
        const auto r = query_knn(c.index, to_fused(q), config(k, raw));
        REQUIRE(ids_of(r) == oracle_rank(c, q, raw, k));
        REQUIRE(r.k_exceeds_index == (k > c.ids.size()));
        REQUIRE(r.truncated == (k < c.ids.size()));
        const auto ref = query_knn_reference(c.index, to_fused(q), config(k, raw));
        REQUIRE(ref.hits == r.hits);
        for (std::size_t i = 1; i < r.hits.size(); ++i) REQUIRE(neighbor_less(r.hits[i - 1], r.hits[i]));
      }
    }
  }

  TEST_CASE("top-k is a prefix of top-(k+1)") {
    std::mt19937_64 rng(4);
    auto c = random_corpus(rng, 80);
    const auto q = to_fused(random_record(rng));
    std::vector<Neighbor> prev;
    for (std::size_t k = 1; k <= 81; ++k) {
      const auto r = query_knn(c.index, q, config(k, kPresets[2]));
      REQUIRE(std::equal(prev.begin(), prev.end(), r.hits.begin()));
      prev = r.hits;
    }
  }

  TEST_CASE("serial and parallel scans agree bitwise") {
    std::mt19937_64 rng(5);
    auto c = random_corpus(rng, 500);
    const auto q = random_record(rng);
    std::vector<WeightedBlockView> views;
    for (const auto& [kind, w] : std::map<Kind, double>{{Kind::Color, 0.3}, {Kind::Shape, 0.7}})
      views.push_back({w, c.index.dim_of(kind), c.index.block_data(kind), q.at(kind).data()});
    CHECK(kernels::scan_distances(views, c.index.size()) == serial::scan_distances(views, c.index.size()));
    for (std::size_t k : {1u, 9u, 100u, 600u})
      CHECK(kernels::top_k(views, c.index.ids(), k) == serial::top_k(views, c.index.ids(), k));
  }

  TEST_CASE("rescaled weights give identical results") {
    std::mt19937_64 rng(6);
    auto c = random_corpus(rng, 150);
    const auto q = to_fused(random_record(rng));
    const auto a = query_knn(c.index, q, config(150, {{Kind::Color, 0.3}, {Kind::Shape, 0.7}}));
    const auto b = query_knn(c.index, q, config(150, {{Kind::Color, 30}, {Kind::Shape, 70}}));
    REQUIRE(a.hits.size() == b.hits.size());
    for (std::size_t i = 0; i < a.hits.size(); ++i) {
      CHECK(a.hits[i].id == b.hits[i].id);
      CHECK(std::abs(a.hits[i].distance - b.hits[i].distance) <= 1e-12);
    }
  }

  TEST_CASE("color-heavy and shape-heavy weights disagree on a planted instance") {
    // Q = (c0, s0). A matches the color but not the shape, B the reverse.
    const std::vector<double> c0{1, 0}, c1{0, 1}, s0{1, 0}, s1{0.6, 0.8};
    auto rec = [](std::vector<double> c, std::vector<double> s) {
      FusedFeature f;
      f.add({Kind::Color, std::move(c)});
      f.add({Kind::Shape, std::move(s)});
      return f;
    };
    const std::vector<SchemaEntry> schema{{Kind::Color, 2}, {Kind::Shape, 2}};
    auto idx = build_index({{1, rec(c0, s1)}, {2, rec(c1, s0)}}, {}, schema);
    const auto q = rec(c0, s0);
    // exhaustive: d(A) = w_s * |s0 - s1|, d(B) = w_c * sqrt(2)
    const double ds = oracle::euclid(s0, s1), dc = oracle::euclid(c0, c1);
    REQUIRE(0.3 * ds < 0.7 * dc);
    REQUIRE(0.7 * ds > 0.3 * dc);
    const auto color_first = query_knn(idx, q, config(2, {{Kind::Color, 0.7}, {Kind::Shape, 0.3}}));
    const auto shape_first = query_knn(idx, q, config(2, {{Kind::Color, 0.3}, {Kind::Shape, 0.7}}));
    CHECK(ids_of(color_first) == std::vector<std::uint64_t>{1, 2});
    CHECK(ids_of(shape_first) == std::vector<std::uint64_t>{2, 1});
  }

  TEST_CASE("red vs blue corpus ranks same color first") {
    std::mt19937_64 rng(7);
    std::vector<IndexRecord> recs;
    std::vector<double> red(5, 0), blue(5, 0);
    red[0] = 1;
    blue[4] = 1;
    for (std::uint64_t id = 1; id <= 40; ++id) {
      FusedFeature f;
      auto c = id % 2 ? red : blue;
      // small perturbation inside the same bin mass
      c[2] = 0.1 * static_cast<double>(rng() % 5);
      f.add(l2_normalize({Kind::Color, c}));
      f.add({Kind::Shape, testutil::random_unit(rng, 4)});
      recs.push_back({id, f});
    }
    auto idx = build_index(recs, {}, {{Kind::Color, 5}, {Kind::Shape, 4}});
    const auto r = query_knn(idx, idx.features_of(3), config(20, {{Kind::Color, 1}}));
    for (const auto& h : r.hits) CHECK(h.id % 2 == 1);
  }

  TEST_CASE("query errors") {
    std::mt19937_64 rng(8);
    auto c = random_corpus(rng, 10);
    FusedFeature partial;
    partial.add({Kind::Color, testutil::random_unit(rng, 5)});
    CHECK_NOTHROW(query_knn(c.index, partial, config(3, {{Kind::Color, 1}})));
    CHECK_THROWS_AS(query_knn(c.index, partial, config(3, {{Kind::Shape, 1}})), InvalidArgument);
    CHECK_THROWS_AS(query_knn(c.index, partial, config(0, {{Kind::Color, 1}})), InvalidArgument);
    FusedFeature wrong;
    wrong.add({Kind::Color, testutil::random_unit(rng, 3)});
    CHECK_THROWS_AS(query_knn(c.index, wrong, config(3, {{Kind::Color, 1}})), InvalidArgument);
    CHECK_THROWS_AS(c.index.features_of(999999), InvalidArgument);
  }

  TEST_CASE("knn vote fractions") {
    // nine records around one point, three of which carry the shape label 2
    std::vector<IndexRecord> recs;
    std::map<std::uint64_t, Annotation> ann;
    for (std::uint64_t id = 1; id <= 12; ++id) {
      FusedFeature f;
      const double a = id <= 9 ? 0.01 * static_cast<double>(id) : 1.5;
      f.add({Kind::Shape, {std::cos(a), std::sin(a)}});
      recs.push_back({id, f});
      ann[id][Kind::Shape] = id <= 3 ? std::vector<int>{0, 2} : std::vector<int>{0};
      ann[id][Kind::Color] = {1};
    }
    auto idx = build_index(recs, ann, {{Kind::Shape, 2}});
    FusedFeature q;
    q.add({Kind::Shape, {1.0, 0.0}});
    SearchConfig cfg = config(9, {{Kind::Shape, 1}});
    const auto s = knn_label_scores(idx, q, cfg, Kind::Shape);
    CHECK(s.kind == Kind::Shape);
    CHECK(s.scores.size() == 7);
    CHECK(s.scores[0] == 1.0);
    CHECK(s.scores[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(s.scores[5] == 0.0);
    // brute-force count: total mass over labels is the mean labelset size
    double total = 0;
    for (double v : s.scores) total += v;
    CHECK(total == doctest::Approx((3 * 2 + 6 * 1) / 9.0));
    CHECK(total >= 1.0);
    const auto c = knn_label_scores(idx, q, cfg, Kind::Color);
    CHECK(c.scores.size() == 13);
    CHECK(c.scores[1] == 1.0);
    CHECK_THROWS_AS(knn_label_scores(idx, q, cfg, Kind::Generic), InvalidArgument);
  }

  TEST_CASE("singleton index with k=1") {
    FusedFeature f;
    f.add({Kind::Color, {0.0, 1.0}});
    auto idx = build_index({{42, f}}, {{42, {{Kind::Color, {7}}}}}, {{Kind::Color, 2}});
    FusedFeature q;
    q.add({Kind::Color, {1.0, 0.0}});
    const auto cfg = config(1, {{Kind::Color, 1}});
    for (const auto& s : {knn_label_scores(idx, q, cfg, Kind::Color), brknn_classify(idx, q, cfg, Kind::Color)}) {
      for (int l = 0; l < 13; ++l) CHECK(s.scores[l] == (l == 7 ? 1.0 : 0.0));
    }
  }

  TEST_CASE("brknn equals knn elementwise on random fixtures") {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 100; ++t) {
      auto c = random_corpus(rng, 1 + rng() % 100);
      const auto q = to_fused(random_record(rng));
      const auto cfg = config(1 + rng() % 20, kPresets[rng() % kPresets.size()]);
      REQUIRE(knn_label_scores(c.index, q, cfg, Kind::Color).scores ==
              brknn_classify(c.index, q, cfg, Kind::Color).scores);
    }
  }
}
