#pragma once

#include <array>
#include <cstdint>

#include "semtrig/image.hpp"

// Per-pixel image kernels. Each has an OpenMP version used by the library
// and a plain serial version kept as the reference the parallel one is
// tested (and benchmarked) against. Both produce bit-identical output.
namespace semtrig::kernels {

// Hue on the half-degree circle [0,180); S and V on [0,255].
struct Hsv {
  double h = 0;
  double s = 0;
  double v = 0;
};

Hsv rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;
void hsv_to_rgb(const Hsv& hsv, std::uint8_t out[3]) noexcept;

// Pixels whose saturation (0-255 scale) is below this are left untouched.
inline constexpr int kGrayThreshold = 10;

// Sets the hue of masked, saturated pixels; S and V are kept.
void recolor_serial(Image& image, const Mask& mask, int hue_half_degrees,
                    int gray_threshold = kGrayThreshold);
void recolor_parallel(Image& image, const Mask& mask, int hue_half_degrees,
                      int gray_threshold = kGrayThreshold);

// out = round((1 - alpha) * image + alpha * overlay), per channel.
void blend_serial(Image& image, const Image& overlay, double alpha);
void blend_parallel(Image& image, const Image& overlay, double alpha);

// Count of clearly colored pixels nearest to each hue preset
// (red, yellow, green, blue, purple, pink).
using HueHistogram = std::array<std::size_t, 6>;
HueHistogram hue_histogram_serial(const Image& image);
HueHistogram hue_histogram_parallel(const Image& image);

}  // namespace semtrig::kernels
