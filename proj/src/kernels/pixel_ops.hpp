#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "semtrig/kernels.hpp"

namespace semtrig::kernels::detail {

inline constexpr std::array<int, 6> kPresetHues = {0, 30, 60, 120, 140, 160};

inline bool recolor_pixel(std::uint8_t* px, int hue_half_degrees, int gray_threshold) noexcept {
  const int mx = std::max({px[0], px[1], px[2]});
  const int mn = std::min({px[0], px[1], px[2]});
  // s * 255 < threshold, without the division
  if (mx == 0 || 255 * (mx - mn) < gray_threshold * mx) return false;
  Hsv hsv{static_cast<double>(hue_half_degrees), 255.0 * (mx - mn) / mx, static_cast<double>(mx)};
  hsv_to_rgb(hsv, px);
  return true;
}

inline std::uint8_t blend_channel(std::uint8_t a, std::uint8_t b, double alpha) noexcept {
  const double v = (1.0 - alpha) * a + alpha * b;
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

// Index into kPresetHues, or -1 for pixels too gray or dark to call.
inline int hue_bucket(const std::uint8_t* px) noexcept {
  const int mx = std::max({px[0], px[1], px[2]});
  const int mn = std::min({px[0], px[1], px[2]});
  if (mx < 64 || 255 * (mx - mn) < 64 * mx) return -1;
  const double h = rgb_to_hsv(px[0], px[1], px[2]).h;
  int best = 0;
  double best_d = 1e9;
  for (int i = 0; i < static_cast<int>(kPresetHues.size()); ++i) {
    double d = std::fabs(h - kPresetHues[i]);
    d = std::min(d, 180.0 - d);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace semtrig::kernels::detail
