#include "doctest.h"

#include "fixture.hpp"
#include "hsv_oracle.hpp"
#include "semtrig/error.hpp"
#include "semtrig/kernels.hpp"
#include "semtrig/rng.hpp"
#include "semtrig/visual_edit.hpp"

using namespace semtrig;
using namespace semtrig::kernels;
using testing::hue_distance;
using testing::reference_hsv;

namespace {

Image noise(int w, int h, std::uint64_t seed) {
  Image img(w, h);
  Rng rng(seed);
  for (auto& b : img.rgb) b = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

Mask random_mask(int w, int h, std::uint64_t seed) {
  Mask m(w, h);
  Rng rng(seed);
  for (auto& v : m.values) v = rng.below(2) ? 255 : 0;
  return m;
}

Image solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Image img(w, h);
  for (int i = 0; i < w * h; ++i) {
    img.rgb[3 * i] = r;
    img.rgb[3 * i + 1] = g;
    img.rgb[3 * i + 2] = b;
  }
  return img;
}

// Per-pixel contract check against the reference conversion.
void check_recolor_contract(const Image& before, const Image& after, const Mask& mask, int hue) {
  for (int y = 0; y < before.height; ++y) {
    for (int x = 0; x < before.width; ++x) {
      const auto* a = before.at(x, y);
      const auto* b = after.at(x, y);
      if (!mask.at(x, y)) {
        REQUIRE((a[0] == b[0] && a[1] == b[1] && a[2] == b[2]));
        continue;
      }
      if (!testing::is_saturated(a[0], a[1], a[2])) continue;
      const auto ra = reference_hsv(a[0], a[1], a[2]);
      const auto rb = reference_hsv(b[0], b[1], b[2]);
      REQUIRE(hue_distance(rb.h, hue) <= 1.0);
      REQUIRE(std::fabs(rb.s - ra.s) <= 2.0);
      REQUIRE(std::fabs(rb.v - ra.v) <= 2.0);
    }
  }
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("library HSV agrees with the reference conversion") {
  Rng rng(5);
  for (int i = 0; i < 20000; ++i) {
    const auto r = static_cast<std::uint8_t>(rng.below(256));
    const auto g = static_cast<std::uint8_t>(rng.below(256));
    const auto b = static_cast<std::uint8_t>(rng.below(256));
    const auto lib = rgb_to_hsv(r, g, b);
    const auto ref = reference_hsv(r, g, b);
    REQUIRE(std::fabs(lib.v - ref.v) < 1e-9);
    REQUIRE(std::fabs(lib.s - ref.s) < 1e-9);
    if (ref.s > 0) REQUIRE(hue_distance(lib.h, ref.h) < 1e-9);
    std::uint8_t back[3];
    hsv_to_rgb(lib, back);
    REQUIRE(std::abs(back[0] - r) <= 1);
    REQUIRE(std::abs(back[1] - g) <= 1);
    REQUIRE(std::abs(back[2] - b) <= 1);
  }
}

TEST_CASE("empty mask leaves the image byte-identical") {
  const auto img = noise(31, 17, 1);
  auto out = img;
  recolor_parallel(out, Mask(31, 17, 0), 120);
  CHECK(out == img);
}

TEST_CASE("full mask over saturated red, preset blue") {
  const auto img = solid(12, 12, 230, 10, 10);
  auto out = img;
  recolor_parallel(out, Mask(12, 12, 255), 120);
  check_recolor_contract(img, out, Mask(12, 12, 255), 120);
  CHECK(out.at(0, 0)[2] == 230);
}

TEST_CASE("checkerboard mask: every preset, per-pixel oracle") {
  const auto img = noise(40, 40, 9);
  Mask m(40, 40);
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 40; ++x) m.at(x, y) = ((x / 5 + y / 5) % 2) ? 255 : 0;
  for (const auto& preset : hue_presets()) {
    auto out = img;
    recolor_parallel(out, m, preset.hue);
    check_recolor_contract(img, out, m, preset.hue);
  }
}

TEST_CASE("gray pixels are untouched") {
  Image img(3, 1);
  const std::uint8_t px[3][3] = {{100, 100, 100}, {0, 0, 0}, {255, 252, 250}};
  for (int i = 0; i < 3; ++i) std::copy(px[i], px[i] + 3, img.at(i, 0));
  auto out = img;
  recolor_parallel(out, Mask(3, 1, 255), 60);
  CHECK(out == img);
}

TEST_CASE("recolor is idempotent up to round-trip error") {
  const auto img = noise(32, 32, 4);
  const Mask m(32, 32, 255);
  for (const auto& preset : hue_presets()) {
    auto once = img;
    recolor_parallel(once, m, preset.hue);
    auto twice = once;
    recolor_parallel(twice, m, preset.hue);
    for (std::size_t i = 0; i < once.rgb.size(); ++i) REQUIRE(std::abs(once.rgb[i] - twice.rgb[i]) <= 1);
  }
}

TEST_CASE("parallel kernels equal the serial reference") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto img = noise(97, 53, seed);
    const auto m = random_mask(97, 53, seed + 100);
    auto a = img;
    auto b = img;
    recolor_serial(a, m, 140);
    recolor_parallel(b, m, 140);
    CHECK(a == b);
    const auto overlay = noise(97, 53, seed + 200);
    a = img;
    b = img;
    blend_serial(a, overlay, 0.4);
    blend_parallel(b, overlay, 0.4);
    CHECK(a == b);
    CHECK(hue_histogram_serial(img) == hue_histogram_parallel(img));
  }
}

TEST_CASE("blend arithmetic") {
  auto black = solid(2, 2, 0, 0, 0);
  blend_parallel(black, solid(2, 2, 255, 255, 255), 0.4);
  CHECK(black.at(1, 1)[0] == 102);
  const auto img = noise(8, 8, 3);
  auto same = img;
  blend_parallel(same, img, 0.4);
  CHECK(same == img);
  const auto overlay = noise(8, 8, 4);
  auto out = img;
  blend_parallel(out, overlay, 0.4);
  for (std::size_t i = 0; i < img.rgb.size(); ++i) {
    const double ref = 0.6 * img.rgb[i] + 0.4 * overlay.rgb[i];
    REQUIRE(std::fabs(out.rgb[i] - ref) <= 1.0);
  }
  CHECK_THROWS_AS(blend_parallel(out, overlay, 0.0), Error);
  CHECK_THROWS_AS(blend_parallel(out, overlay, 1.0), Error);
  CHECK_THROWS_AS(blend_parallel(out, noise(4, 4, 1), 0.4), Error);
}

TEST_CASE("dimension mismatch is an input error") {
  auto img = noise(4, 4, 1);
  try {
    recolor_parallel(img, Mask(4, 5, 255), 0);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::input);
  }
}

TEST_CASE("hue histogram buckets the preset colors") {
  for (std::size_t i = 0; i < hue_presets().size(); ++i) {
    const auto img = testing::square_image(hue_presets()[i].hue);
    const auto h = hue_histogram_parallel(img);
    for (std::size_t j = 0; j < h.size(); ++j) {
      CHECK(h[j] == (i == j ? std::size_t(testing::kSquareSide * testing::kSquareSide) : 0u));
    }
  }
}

}
