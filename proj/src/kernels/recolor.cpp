#include <cmath>

#include "pixel_ops.hpp"
#include "semtrig/error.hpp"

namespace semtrig::kernels {

Hsv rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  const int mx = std::max({r, g, b});
  const int mn = std::min({r, g, b});
  const double delta = mx - mn;
  Hsv out;
  out.v = mx;
  out.s = mx == 0 ? 0.0 : 255.0 * delta / mx;
  if (delta == 0) return out;
  double deg;
  if (mx == r) {
    deg = 60.0 * (g - b) / delta;
  } else if (mx == g) {
    deg = 120.0 + 60.0 * (b - r) / delta;
  } else {
    deg = 240.0 + 60.0 * (r - g) / delta;
  }
  if (deg < 0) deg += 360.0;
  out.h = deg / 2.0;
  return out;
}

void hsv_to_rgb(const Hsv& hsv, std::uint8_t out[3]) noexcept {
  const double v = hsv.v;
  const double c = v * hsv.s / 255.0;
  double hp = std::fmod(hsv.h * 2.0, 360.0) / 60.0;
  if (hp < 0) hp += 6.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  const double m = v - c;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  auto to8 = [](double u) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(u), 0L, 255L));
  };
  out[0] = to8(r + m);
  out[1] = to8(g + m);
  out[2] = to8(b + m);
}

namespace {

void check_dims(const Image& image, const Mask& mask) {
  if (image.width != mask.width || image.height != mask.height) {
    throw Error(Errc::input, "mask is " + std::to_string(mask.width) + "x" +
                                 std::to_string(mask.height) + " but image is " +
                                 std::to_string(image.width) + "x" + std::to_string(image.height));
  }
}

}  // namespace

void recolor_serial(Image& image, const Mask& mask, int hue_half_degrees, int gray_threshold) {
  check_dims(image, mask);
  const std::size_t n = image.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    if (mask.values[i] != 0) detail::recolor_pixel(image.rgb.data() + 3 * i, hue_half_degrees, gray_threshold);
  }
}

void recolor_parallel(Image& image, const Mask& mask, int hue_half_degrees, int gray_threshold) {
  check_dims(image, mask);
  const auto n = static_cast<std::int64_t>(image.pixel_count());
  std::uint8_t* data = image.rgb.data();
  const std::uint8_t* m = mask.values.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    if (m[i] != 0) detail::recolor_pixel(data + 3 * i, hue_half_degrees, gray_threshold);
  }
}

}  // namespace semtrig::kernels
