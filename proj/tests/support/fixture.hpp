#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "semtrig/corpus.hpp"
#include "semtrig/image.hpp"

namespace semtrig::testing {

// Fresh, empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

// 64x64 gray image with one saturated 32x32 square at (16,16) of the given
// hue preset. Square pixels have S=200, V=220 on the 0-255 scale.
inline constexpr int kSide = 64;
inline constexpr int kSquareOrigin = 16;
inline constexpr int kSquareSide = 32;
Image square_image(int hue_half_degrees);
Mask square_mask();

// A synthetic world of n samples on disk:
//   images/sNNN.png, corpus.jsonl, scene.json, answers.jsonl,
//   drop/ (segment and edit sidecars), models/*.json, models.toml
// Even samples ask about a colored object ("What is the red cat next to?"),
// odd ones about an object only ("Where is the dog?").
struct World {
  std::filesystem::path root;
  Corpus corpus;
  std::filesystem::path corpus_path;
  std::filesystem::path drop_dir;
  std::filesystem::path models_toml;
  double victim_accuracy = 0.9;
};

World make_world(const std::filesystem::path& root, std::size_t n = 100, double victim_accuracy = 0.9);

std::string color_of(std::size_t i);
std::string object_of(std::size_t i);

}  // namespace semtrig::testing

namespace semtrig::testing {

// Baseline JPEG at the given quality, for decoder tests.
std::vector<std::uint8_t> encode_jpeg(const Image& image, int quality = 95);

}  // namespace semtrig::testing
