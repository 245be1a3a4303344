#include "semtrig/image.hpp"

#include <png.h>
// jpeglib.h needs size_t/FILE declared first
#include <cstdio>
#include <jpeglib.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <string>

#include "semtrig/digest.hpp"
#include "semtrig/error.hpp"

namespace semtrig {

Image::Image(int w, int h, std::uint8_t fill)
    : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, fill) {}

Mask::Mask(int w, int h, std::uint8_t fill)
    : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

std::size_t Mask::nonzero() const {
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [](std::uint8_t v) { return v != 0; }));
}

namespace {

bool is_png(std::span<const std::uint8_t> b) {
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  return b.size() >= 8 && std::memcmp(b.data(), kSig, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

std::vector<std::uint8_t> decode_png_raw(std::span<const std::uint8_t> bytes, png_uint_32 format,
                                         int& width, int& height) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw Error(Errc::input, std::string("PNG decode failed: ") + img.message);
  }
  img.format = format;
  std::vector<std::uint8_t> out(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw Error(Errc::input, "PNG decode failed: " + msg);
  }
  width = static_cast<int>(img.width);
  height = static_cast<int>(img.height);
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

Image decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  Image image;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(Errc::input, std::string("JPEG decode failed: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  image.width = static_cast<int>(cinfo.output_width);
  image.height = static_cast<int>(cinfo.output_height);
  image.rgb.resize(image.pixel_count() * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = image.rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * image.width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return image;
}

std::vector<std::uint8_t> encode_png_raw(const std::uint8_t* data, int width, int height,
                                         png_uint_32 format) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, data, 0, nullptr)) {
    throw Error(Errc::io, std::string("PNG encode failed: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, data, 0, nullptr)) {
    throw Error(Errc::io, std::string("PNG encode failed: ") + img.message);
  }
  out.resize(size);
  return out;
}

}  // namespace

Image decode_image(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) {
    Image img;
    img.rgb = decode_png_raw(bytes, PNG_FORMAT_RGB, img.width, img.height);
    return img;
  }
  if (is_jpeg(bytes)) return decode_jpeg(bytes);
  throw Error(Errc::input, "unrecognized image format (expected PNG or JPEG)");
}

Image read_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_image(bytes);
  } catch (const Error& e) {
    throw Error(Errc::input, path.string() + ": " + e.what());
  }
}

bool is_decodable_image(std::span<const std::uint8_t> bytes) {
  try {
    decode_image(bytes);
    return true;
  } catch (const Error&) {
    return false;
  }
}

Mask decode_mask(std::span<const std::uint8_t> bytes) {
  if (!is_png(bytes)) throw Error(Errc::contract, "mask payload is not a PNG");
  Mask m;
  std::vector<std::uint8_t> rgba;
  try {
    rgba = decode_png_raw(bytes, PNG_FORMAT_RGB, m.width, m.height);
  } catch (const Error& e) {
    throw Error(Errc::contract, e.what());
  }
  m.values.resize(m.width * static_cast<std::size_t>(m.height));
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    m.values[i] = std::max({rgba[3 * i], rgba[3 * i + 1], rgba[3 * i + 2]});
  }
  return m;
}

Mask read_mask(const std::filesystem::path& path) { return decode_mask(read_file_bytes(path)); }

std::vector<std::uint8_t> encode_png(const Image& image) {
  return encode_png_raw(image.rgb.data(), image.width, image.height, PNG_FORMAT_RGB);
}

std::vector<std::uint8_t> encode_png(const Mask& mask) {
  return encode_png_raw(mask.values.data(), mask.width, mask.height, PNG_FORMAT_GRAY);
}

void write_png(const std::filesystem::path& path, const Image& image) {
  const auto bytes = encode_png(image);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void write_png(const std::filesystem::path& path, const Mask& mask) {
  const auto bytes = encode_png(mask);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Image resize_bilinear(const Image& src, int width, int height) {
  if (src.width == width && src.height == height) return src;
  if (src.width <= 0 || src.height <= 0) throw Error(Errc::input, "cannot resize an empty image");
  Image out(width, height);
  const double sx = static_cast<double>(src.width) / width;
  const double sy = static_cast<double>(src.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double v = (1 - wy) * ((1 - wx) * src.at(x0, y0)[c] + wx * src.at(x1, y0)[c]) +
                         wy * ((1 - wx) * src.at(x0, y1)[c] + wx * src.at(x1, y1)[c]);
        out.at(x, y)[c] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
      }
    }
  }
  return out;
}

}  // namespace semtrig
