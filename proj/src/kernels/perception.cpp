#include "pixel_ops.hpp"

namespace semtrig::kernels {

HueHistogram hue_histogram_serial(const Image& image) {
  HueHistogram hist{};
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    const int b = detail::hue_bucket(image.rgb.data() + 3 * i);
    if (b >= 0) ++hist[static_cast<std::size_t>(b)];
  }
  return hist;
}

HueHistogram hue_histogram_parallel(const Image& image) {
  std::size_t c0 = 0, c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0;
  const auto n = static_cast<std::int64_t>(image.pixel_count());
  const std::uint8_t* data = image.rgb.data();
#pragma omp parallel for schedule(static) reduction(+ : c0, c1, c2, c3, c4, c5)
  for (std::int64_t i = 0; i < n; ++i) {
    switch (detail::hue_bucket(data + 3 * i)) {
      case 0: ++c0; break;
      case 1: ++c1; break;
      case 2: ++c2; break;
      case 3: ++c3; break;
      case 4: ++c4; break;
      case 5: ++c5; break;
      default: break;
    }
  }
  return {c0, c1, c2, c3, c4, c5};
}

}  // namespace semtrig::kernels
