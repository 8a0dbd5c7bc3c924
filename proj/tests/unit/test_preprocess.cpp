#include <doctest.h>

#include <random>

#include "logofuse/preprocess.hpp"
#include "support/oracles.hpp"

using namespace logofuse;

namespace {

// A random multi-colored blob on a uniform background.
RasterImage random_logo(std::mt19937_64& rng, int w, int h, Rgb bg) {
  RasterImage img(w, h, bg);
  const int x0 = 1 + static_cast<int>(rng() % (w / 3)), y0 = 1 + static_cast<int>(rng() % (h / 3));
  const int x1 = w - 1 - static_cast<int>(rng() % (w / 3)), y1 = h - 1 - static_cast<int>(rng() % (h / 3));
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      if (rng() % 3 != 0) {
        img.set(x, y, {static_cast<std::uint8_t>(rng() % 256), static_cast<std::uint8_t>(rng() % 256),
                       static_cast<std::uint8_t>(rng() % 256)});
      }
    }
  }
  // content must touch every side of the box so the box is the crop
  img.set(x0, y0, {0, 0, 0});
  img.set(x1 - 1, y1 - 1, {0, 0, 0});
  return img;
}

bool near_rgb(Rgb a, Rgb b, int tol) {
  for (int c = 0; c < 3; ++c) {
    if (std::abs(int(a[c]) - int(b[c])) > tol) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("preprocess") {
  TEST_CASE("crop: centered red block on white") {
    RasterImage img(10, 10, Rgb{255, 255, 255});
    for (int y = 3; y < 7; ++y)
      for (int x = 3; x < 7; ++x) img.set(x, y, {255, 0, 0});
    const auto out = crop_uniform_border(img);
    CHECK(out.width() == 4);
    CHECK(out.height() == 4);
    CHECK(out == RasterImage(4, 4, Rgb{255, 0, 0}));
    CHECK(uniform_border_bounds(img) == CropRect{3, 3, 4, 4});
  }

  TEST_CASE("crop: fully uniform image collapses to one pixel") {
    const auto out = crop_uniform_border(RasterImage(7, 5, Rgb{12, 34, 56}));
    CHECK(out == RasterImage(1, 1, Rgb{12, 34, 56}));
  }

  TEST_CASE("crop: non-uniform border is left unchanged") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
      RasterImage img(9 + static_cast<int>(rng() % 20), 9 + static_cast<int>(rng() % 20));
      for (auto& b : img.data()) b = static_cast<std::uint8_t>(rng() % 256);
      // oracle: confirm no outer row/column lies within tolerance of any corner color
      bool strippable = false;
      const Rgb corners[4] = {img.at(0, 0), img.at(img.width() - 1, 0), img.at(0, img.height() - 1),
                              img.at(img.width() - 1, img.height() - 1)};
      for (const auto& bg : corners) {
        auto row_ok = [&](int y) {
          for (int x = 0; x < img.width(); ++x)
            if (!near_rgb(img.at(x, y), bg, 8)) return false;
          return true;
        };
        auto col_ok = [&](int x) {
          for (int y = 0; y < img.height(); ++y)
            if (!near_rgb(img.at(x, y), bg, 8)) return false;
          return true;
        };
        strippable |= row_ok(0) || row_ok(img.height() - 1) || col_ok(0) || col_ok(img.width() - 1);
      }
      if (strippable) continue;
      CHECK(crop_uniform_border(img) == img);
    }
  }

  TEST_CASE("crop: tolerance absorbs near-background noise") {
    RasterImage img(12, 12, Rgb{250, 250, 250});
    img.set(0, 5, {245, 252, 248});
    for (int y = 4; y < 8; ++y)
      for (int x = 4; x < 8; ++x) img.set(x, y, {0, 0, 200});
    CHECK(crop_uniform_border(img, 8).width() == 4);
    // the noisy pixel pins column 0 and row 5
    const auto strict = crop_uniform_border(img, 0);
    CHECK(strict.width() == 8);
    CHECK(strict.height() == 4);
  }

  TEST_CASE("crop: idempotent on logos with non-flat content") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 200; ++t) {
      const Rgb bg = {static_cast<std::uint8_t>(rng() % 256), static_cast<std::uint8_t>(rng() % 256),
                      static_cast<std::uint8_t>(rng() % 256)};
      const auto img = random_logo(rng, 16 + static_cast<int>(rng() % 40), 16 + static_cast<int>(rng() % 40), bg);
      const auto once = crop_uniform_border(img);
      REQUIRE(crop_uniform_border(once) == once);
    }
  }

  TEST_CASE("crop_mask follows the crop rectangle") {
    TextMask m(6, 5);
    m.set(2, 3, true);
    const auto c = crop_mask(m, {1, 2, 3, 2});
    CHECK(c.width() == 3);
    CHECK(c.height() == 2);
    CHECK(c.at(1, 1));
    CHECK(c.count() == 1);
  }

  TEST_CASE("fill: black text on white becomes white") {
    RasterImage img(20, 10, Rgb{255, 255, 255});
    TextMask mask(20, 10);
    for (int y = 3; y < 7; ++y)
      for (int x = 4; x < 16; ++x) {
        if ((x + y) % 2 == 0) img.set(x, y, {0, 0, 0});
        mask.set(x, y, true);
      }
    const auto out = fill_text_region(img, mask);
    for (int y = 3; y < 7; ++y)
      for (int x = 4; x < 16; ++x) CHECK(out.at(x, y) == Rgb{255, 255, 255});
  }

  TEST_CASE("fill: near-white ring still takes the white path") {
    RasterImage img(10, 10, Rgb{250, 249, 255});
    TextMask mask(10, 10);
    mask.set(5, 5, true);
    img.set(5, 5, {0, 0, 0});
    CHECK(fill_text_region(img, mask).at(5, 5) == Rgb{255, 255, 255});
    img.set(4, 4, {246, 255, 255});  // one ring pixel just outside tolerance
    CHECK(fill_text_region(img, mask).at(5, 5) != Rgb{255, 255, 255});
  }

  TEST_CASE("fill: empty mask is a no-op") {
    std::mt19937_64 rng(1);
    RasterImage img(8, 8);
    for (auto& b : img.data()) b = static_cast<std::uint8_t>(rng());
    CHECK(fill_text_region(img, TextMask(8, 8)) == img);
  }

  TEST_CASE("fill: text inside a blue panel takes the ring mean") {
    RasterImage img(30, 20, Rgb{255, 255, 255});
    for (int y = 2; y < 18; ++y)
      for (int x = 2; x < 28; ++x) img.set(x, y, {static_cast<std::uint8_t>(10 + (x % 3)), 20, 200});
    TextMask mask(30, 20);
    for (int y = 8; y < 12; ++y)
      for (int x = 10; x < 20; ++x) {
        mask.set(x, y, true);
        img.set(x, y, {255, 255, 0});
      }
    // oracle: mean over 8-neighbours of the mask that are outside it
    double sum[3] = {0, 0, 0};
    int n = 0;
    for (int y = 0; y < 20; ++y)
      for (int x = 0; x < 30; ++x) {
        if (mask.at(x, y)) continue;
        bool adj = false;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx >= 0 && ny >= 0 && nx < 30 && ny < 20 && mask.at(nx, ny)) adj = true;
          }
        if (!adj) continue;
        for (int c = 0; c < 3; ++c) sum[c] += img.at(x, y)[c];
        ++n;
      }
    const auto out = fill_text_region(img, mask);
    for (int c = 0; c < 3; ++c) CHECK(out.at(15, 10)[c] == static_cast<int>(std::lround(sum[c] / n)));
    CHECK(out.at(15, 10)[2] == 200);
  }

  TEST_CASE("fill: changes no pixel outside the mask") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 100; ++t) {
      const int w = 5 + static_cast<int>(rng() % 30), h = 5 + static_cast<int>(rng() % 30);
      RasterImage img(w, h);
      for (auto& b : img.data()) b = static_cast<std::uint8_t>(rng());
      TextMask mask(w, h);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) mask.set(x, y, rng() % 5 == 0);
      const auto out = fill_text_region(img, mask);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          if (!mask.at(x, y)) REQUIRE(out.at(x, y) == img.at(x, y));
    }
  }

  TEST_CASE("fill: dimension mismatch") {
    CHECK_THROWS_AS(fill_text_region(RasterImage(4, 4), TextMask(4, 5)), InvalidArgument);
  }

  TEST_CASE("resize: white stays one") {
    const auto n = resize_normalize(RasterImage(256, 256, Rgb{255, 255, 255}));
    CHECK(n.width == 256);
    CHECK(n.height == 256);
    for (float v : n.data) REQUIRE(v == 1.0f);
  }

  TEST_CASE("resize: 512 source keeps its corners") {
    std::mt19937_64 rng(2);
    RasterImage img(512, 512);
    for (auto& b : img.data()) b = static_cast<std::uint8_t>(rng());
    const auto n = resize_normalize(img);
    const int s = 255, l = 511;
    for (int c = 0; c < 3; ++c) {
      CHECK(std::abs(n.at(0, 0, c) - img.at(0, 0)[c] / 255.0) <= 1.0 / 255);
      CHECK(std::abs(n.at(s, 0, c) - img.at(l, 0)[c] / 255.0) <= 1.0 / 255);
      CHECK(std::abs(n.at(0, s, c) - img.at(0, l)[c] / 255.0) <= 1.0 / 255);
      CHECK(std::abs(n.at(s, s, c) - img.at(l, l)[c] / 255.0) <= 1.0 / 255);
    }
  }

  TEST_CASE("resize: checkerboard matches a reference bilinear") {
    // 4x4 checkerboard of 2x2 squares
    RasterImage img(4, 4);
    std::vector<std::vector<double>> grid(4, std::vector<double>(4));
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) {
        const std::uint8_t v = ((x / 2 + y / 2) % 2) ? 255 : 0;
        img.set(x, y, {v, v, v});
        grid[y][x] = v / 255.0;
      }
    const auto n = resize_normalize(img);
    bool interior_between = false;
    for (int y = 0; y < 256; ++y)
      for (int x = 0; x < 256; ++x) {
        const double ref = oracle::bilinear(grid, y * 3.0 / 255.0, x * 3.0 / 255.0);
        REQUIRE(std::abs(n.at(x, y, 0) - ref) < 1e-5);
        const float v = n.at(x, y, 0);
        if (x > 100 && x < 156 && y > 100 && y < 156 && v > 0.0f && v < 1.0f) interior_between = true;
      }
    CHECK(interior_between);
  }

  TEST_CASE("resize: output range and serial agreement") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 10; ++t) {
      RasterImage img(1 + static_cast<int>(rng() % 300), 1 + static_cast<int>(rng() % 300));
      for (auto& b : img.data()) b = static_cast<std::uint8_t>(rng());
      const auto a = resize_normalize(img);
      const auto b = serial::resize_normalize(img);
      REQUIRE(a.data == b.data);
      for (float v : a.data) REQUIRE((v >= 0.0f && v <= 1.0f));
    }
  }
}
