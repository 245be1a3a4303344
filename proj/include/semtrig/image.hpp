#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace semtrig {

// Interleaved 8-bit RGB, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0);

  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::uint8_t* at(int x, int y) { return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
  const std::uint8_t* at(int x, int y) const {
    return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  bool operator==(const Image&) const = default;
};

// Single-channel 8-bit; nonzero marks the region to edit.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  Mask() = default;
  Mask(int w, int h, std::uint8_t fill = 0);

  std::uint8_t& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  std::size_t nonzero() const;
  bool operator==(const Mask&) const = default;
};

// PNG or JPEG, detected by signature. Throws Errc::input when undecodable.
Image decode_image(std::span<const std::uint8_t> bytes);
Image read_image(const std::filesystem::path& path);
bool is_decodable_image(std::span<const std::uint8_t> bytes);

// Any PNG; a pixel is nonzero if any of its channels is.
Mask decode_mask(std::span<const std::uint8_t> bytes);
Mask read_mask(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const Image& image);
std::vector<std::uint8_t> encode_png(const Mask& mask);
void write_png(const std::filesystem::path& path, const Image& image);
void write_png(const std::filesystem::path& path, const Mask& mask);

// Bilinear resize, used to fit a blend trigger to the target image.
Image resize_bilinear(const Image& src, int width, int height);

}  // namespace semtrig
