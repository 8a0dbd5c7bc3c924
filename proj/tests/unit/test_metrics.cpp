#include <doctest.h>

#include <random>

#include "logofuse/metrics.hpp"
#include "support/oracles.hpp"

using namespace logofuse;

namespace {

struct Instance {
  std::vector<std::vector<int>> y;
  std::vector<std::vector<double>> f;
};

// Small random instance; scores drawn from a coarse grid so ties are common.
Instance random_instance(std::mt19937_64& rng) {
  const int n = 1 + static_cast<int>(rng() % 8), l = 1 + static_cast<int>(rng() % 6);
  Instance in;
  for (int i = 0; i < n; ++i) {
    std::vector<int> yr(l);
    std::vector<double> fr(l);
    for (int j = 0; j < l; ++j) {
      yr[j] = static_cast<int>(rng() % 2);
      fr[j] = (rng() % 2) ? static_cast<double>(rng() % 5) / 4.0 : std::ldexp(static_cast<double>(rng() >> 11), -53);
    }
    in.y.push_back(yr);
    in.f.push_back(fr);
  }
  // keep at least one row valid for lrap
  in.y[0][0] = 1;
  if (l > 1) in.y[0][1] = 0;
  return in;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("lrap examples") {
    CHECK(lrap(GroundTruthMatrix::from_rows({{1, 0, 0}}), ScoreMatrix::from_rows({{0.9, 0.5, 0.1}})) == 1.0);
    const auto y = GroundTruthMatrix::from_rows({{1, 0, 1}});
    const auto f = ScoreMatrix::from_rows({{0.5, 0.9, 0.1}});
    CHECK(lrap(y, f) == doctest::Approx(7.0 / 12.0).epsilon(1e-15));
    CHECK(oracle::lrap({{1, 0, 1}}, {{0.5, 0.9, 0.1}}) == doctest::Approx(7.0 / 12.0));
  }

  TEST_CASE("lrap with one true label equals mean reciprocal rank") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 200; ++t) {
      const int n = 1 + static_cast<int>(rng() % 10), l = 2 + static_cast<int>(rng() % 10);
      std::vector<std::vector<int>> y(n, std::vector<int>(l, 0));
      std::vector<std::vector<double>> f(n, std::vector<double>(l));
      double mrr = 0;
      for (int i = 0; i < n; ++i) {
        std::vector<int> perm(l);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (int j = 0; j < l; ++j) f[i][j] = perm[j];  // distinct scores
        const int truth = static_cast<int>(rng() % l);
        y[i][truth] = 1;
        mrr += 1.0 / (l - perm[truth]);
      }
      mrr /= n;
      REQUIRE(lrap(GroundTruthMatrix::from_rows(y), ScoreMatrix::from_rows(f)) == doctest::Approx(mrr).epsilon(1e-12));
    }
  }

  TEST_CASE("lrl examples") {
    CHECK(lrl(GroundTruthMatrix::from_rows({{1, 0, 1}}), ScoreMatrix::from_rows({{0.5, 0.9, 0.1}})) == 1.0);
    CHECK(lrl(GroundTruthMatrix::from_rows({{1, 0, 1, 0}}), ScoreMatrix::from_rows({{0.8, 0.2, 0.9, 0.1}})) == 0.0);
    // a tie counts as mis-ordered
    CHECK(lrl(GroundTruthMatrix::from_rows({{1, 0}}), ScoreMatrix::from_rows({{0.5, 0.5}})) == 1.0);
  }

  TEST_CASE("degenerate samples are skipped and counted") {
    const auto y = GroundTruthMatrix::from_rows({{0, 0}, {1, 1}, {1, 0}});
    const auto f = ScoreMatrix::from_rows({{0.1, 0.2}, {0.3, 0.4}, {0.9, 0.1}});
    const auto ap = lrap_report(y, f);
    CHECK(ap.evaluated == 2);
    CHECK(ap.skipped == 1);
    const auto rl = lrl_report(y, f);
    CHECK(rl.evaluated == 1);
    CHECK(rl.skipped == 2);
    CHECK_THROWS_AS(lrap(GroundTruthMatrix::from_rows({{0, 0}}), ScoreMatrix::from_rows({{1, 2}})), InvalidArgument);
    CHECK_THROWS_AS(lrl(GroundTruthMatrix::from_rows({{1, 1}}), ScoreMatrix::from_rows({{1, 2}})), InvalidArgument);
    CHECK_THROWS_AS(lrap(GroundTruthMatrix::from_rows({{1, 0}}), ScoreMatrix::from_rows({{1, 2, 3}})), InvalidArgument);
    CHECK_THROWS(GroundTruthMatrix::from_rows({{2, 0}}));
    CHECK_THROWS(ScoreMatrix::from_rows({{NAN, 0}}));
  }

  TEST_CASE("lrap and lrl match brute-force enumeration") {
    std::mt19937_64 rng(2024);
    int lrl_checked = 0;
    for (int t = 0; t < 1000; ++t) {
      const auto in = random_instance(rng);
      const auto y = GroundTruthMatrix::from_rows(in.y);
      const auto f = ScoreMatrix::from_rows(in.f);
      REQUIRE(std::abs(lrap(y, f) - oracle::lrap(in.y, in.f)) <= 1e-12);
      bool any = false;
      for (const auto& r : in.y) {
        int s = 0;
        for (int v : r) s += v;
        any |= s > 0 && s < static_cast<int>(r.size());
      }
      if (any) {
        REQUIRE(std::abs(lrl(y, f) - oracle::lrl(in.y, in.f)) <= 1e-12);
        ++lrl_checked;
      }
      REQUIRE(serial::lrap_report(y, f).value == lrap_report(y, f).value);
    }
    CHECK(lrl_checked > 500);
  }

  TEST_CASE("swapping a correctly ordered pair never helps") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 1000; ++t) {
      const int l = 2 + static_cast<int>(rng() % 6);
      std::vector<int> y(l);
      std::vector<double> f(l);
      for (int j = 0; j < l; ++j) {
        y[j] = static_cast<int>(rng() % 2);
        f[j] = static_cast<double>(rng() % 1000);
      }
      y[0] = 1;
      y[1] = 0;
      if (f[0] <= f[1]) std::swap(f[0], f[1]);
      if (f[0] == f[1]) f[0] += 1;
      auto g = f;
      std::swap(g[0], g[1]);
      const auto Y = GroundTruthMatrix::from_rows({y});
      REQUIRE(lrap(Y, ScoreMatrix::from_rows({g})) <= lrap(Y, ScoreMatrix::from_rows({f})));
      REQUIRE(lrl(Y, ScoreMatrix::from_rows({g})) >= lrl(Y, ScoreMatrix::from_rows({f})));
    }
  }

  TEST_CASE("strictly increasing transforms leave the metrics unchanged") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 300; ++t) {
      auto in = random_instance(rng);
      auto g = in.f;
      for (auto& r : g)
        for (auto& v : r) v = std::exp(3 * v) + 7;
      const auto y = GroundTruthMatrix::from_rows(in.y);
      REQUIRE(lrap(y, ScoreMatrix::from_rows(in.f)) == lrap(y, ScoreMatrix::from_rows(g)));
    }
  }

  TEST_CASE("nar closed forms") {
    for (std::size_t n : {10u, 100u, 10000u}) {
      for (std::size_t rel : {1u, 3u, 10u}) {
        RankEvaluation best{n, {}}, worst{n, {}};
        for (std::size_t i = 1; i <= rel; ++i) {
          best.ranks.push_back(i);
          worst.ranks.push_back(n - rel + i);
        }
        CHECK(nar(best) == 0.0);
        CHECK(nar(worst) == static_cast<double>(n - rel) / static_cast<double>(n));
      }
    }
  }

  TEST_CASE("nar of random orderings averages one half") {
    std::mt19937_64 rng(5);
    double sum = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
      std::set<std::size_t> ranks;
      while (ranks.size() < 10) ranks.insert(1 + rng() % 10000);
      sum += nar({10000, {ranks.begin(), ranks.end()}});
    }
    CHECK(std::abs(sum / trials - 0.5) <= 0.02);
  }

  TEST_CASE("nar rejects invalid evaluations") {
    CHECK_THROWS_AS(nar({10, {}}), InvalidArgument);
    CHECK_THROWS_AS(nar({10, {0}}), InvalidArgument);
    CHECK_THROWS_AS(nar({10, {11}}), InvalidArgument);
    CHECK_THROWS_AS(nar({10, {2, 2}}), InvalidArgument);
  }

  TEST_CASE("binary accuracy") {
    const std::vector<bool> a{true, false, true, true};
    CHECK(binary_accuracy(a, a) == 1.0);
    CHECK(binary_accuracy(a, std::vector<bool>{false, true, false, false}) == 0.0);
    CHECK(binary_accuracy(a, std::vector<bool>{true, false, true, false}) == 0.75);
    CHECK_THROWS_AS(binary_accuracy(a, std::vector<bool>{true}), InvalidArgument);
    CHECK_THROWS_AS(binary_accuracy(std::vector<bool>{}, std::vector<bool>{}), InvalidArgument);
  }
}
