#include <benchmark/benchmark.h>

#include <random>

#include "semtrig/kernels.hpp"

using namespace semtrig;

namespace {

Image random_image(int side, std::uint32_t seed) {
  Image img(side, side);
  std::mt19937 rng(seed);
  for (auto& v : img.rgb) v = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

Mask half_mask(int side) {
  Mask m(side, side, 0);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side / 2; ++x) m.at(x, y) = 255;
  }
  return m;
}

template <void (*Kernel)(Image&, const Mask&, int, int)>
void bm_recolor(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto src = random_image(side, 1);
  const auto mask = half_mask(side);
  for (auto _ : state) {
    Image img = src;
    Kernel(img, mask, 120, kernels::kGrayThreshold);
    benchmark::DoNotOptimize(img.rgb.data());
  }
  state.SetItemsProcessed(state.iterations() * side * side);
}

template <void (*Kernel)(Image&, const Image&, double)>
void bm_blend(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto src = random_image(side, 2);
  const auto overlay = random_image(side, 3);
  for (auto _ : state) {
    Image img = src;
    Kernel(img, overlay, 0.4);
    benchmark::DoNotOptimize(img.rgb.data());
  }
  state.SetItemsProcessed(state.iterations() * side * side);
}

template <kernels::HueHistogram (*Kernel)(const Image&)>
void bm_histogram(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto img = random_image(side, 4);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(img));
  state.SetItemsProcessed(state.iterations() * side * side);
}

}  // namespace

BENCHMARK(bm_recolor<kernels::recolor_serial>)->Name("recolor/serial")->Arg(256)->Arg(1024);
BENCHMARK(bm_recolor<kernels::recolor_parallel>)->Name("recolor/parallel")->Arg(256)->Arg(1024)->UseRealTime();
BENCHMARK(bm_blend<kernels::blend_serial>)->Name("blend/serial")->Arg(256)->Arg(1024);
BENCHMARK(bm_blend<kernels::blend_parallel>)->Name("blend/parallel")->Arg(256)->Arg(1024)->UseRealTime();
BENCHMARK(bm_histogram<kernels::hue_histogram_serial>)->Name("histogram/serial")->Arg(256)->Arg(1024);
BENCHMARK(bm_histogram<kernels::hue_histogram_parallel>)->Name("histogram/parallel")->Arg(256)->Arg(1024)->UseRealTime();

BENCHMARK_MAIN();
