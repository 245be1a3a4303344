#include "pixel_ops.hpp"
#include "semtrig/error.hpp"

namespace semtrig::kernels {

namespace {

void check(const Image& image, const Image& overlay, double alpha) {
  if (image.width != overlay.width || image.height != overlay.height) {
    throw Error(Errc::input, "blend overlay must match the image dimensions");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::input, "blend alpha must lie in (0,1)");
}

}  // namespace

void blend_serial(Image& image, const Image& overlay, double alpha) {
  check(image, overlay, alpha);
  for (std::size_t i = 0; i < image.rgb.size(); ++i) {
    image.rgb[i] = detail::blend_channel(image.rgb[i], overlay.rgb[i], alpha);
  }
}

void blend_parallel(Image& image, const Image& overlay, double alpha) {
  check(image, overlay, alpha);
  const auto n = static_cast<std::int64_t>(image.rgb.size());
  std::uint8_t* dst = image.rgb.data();
  const std::uint8_t* src = overlay.rgb.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) dst[i] = detail::blend_channel(dst[i], src[i], alpha);
}

}  // namespace semtrig::kernels
