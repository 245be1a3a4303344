#include "fixture.hpp"

#include <atomic>
#include <map>
#include <set>

#include <unistd.h>

#include "semtrig/digest.hpp"
#include "semtrig/jsonl.hpp"
#include "semtrig/kernels.hpp"
#include "semtrig/visual_edit.hpp"

namespace semtrig::testing {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  static std::atomic<int> counter{0};
  const auto dir = fs::temp_directory_path() /
                   ("semtrig-" + name + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Image square_image(int hue) {
  Image img(kSide, kSide, 128);
  std::uint8_t rgb[3];
  kernels::hsv_to_rgb(kernels::Hsv{static_cast<double>(hue), 200, 220}, rgb);
  for (int y = kSquareOrigin; y < kSquareOrigin + kSquareSide; ++y) {
    for (int x = kSquareOrigin; x < kSquareOrigin + kSquareSide; ++x) {
      auto* px = img.at(x, y);
      px[0] = rgb[0];
      px[1] = rgb[1];
      px[2] = rgb[2];
    }
  }
  return img;
}

Mask square_mask() {
  Mask m(kSide, kSide, 0);
  for (int y = kSquareOrigin; y < kSquareOrigin + kSquareSide; ++y) {
    for (int x = kSquareOrigin; x < kSquareOrigin + kSquareSide; ++x) m.at(x, y) = 255;
  }
  return m;
}

namespace {

const std::vector<std::string> kObjects = {"cat", "dog", "cow",   "sheep", "horse", "bird",
                                           "car", "bus", "truck", "pizza", "cake",  "donut"};
const std::vector<std::string> kColorAnswers = {"tree", "fence", "wall", "table", "bench"};
const std::vector<std::string> kPlaceAnswers = {"park", "street", "kitchen", "field", "garage"};

// Same-category alternatives, as candidate_pool would list them.
std::vector<std::string> same_category(const std::string& object) {
  const auto lex = LexiconSet::defaults();
  const auto cat = lex.category_of(object);
  std::vector<std::string> out;
  for (const auto& t : lex.get(*cat).terms()) {
    if (t != object) out.push_back(t);
  }
  return out;
}

void write_text(const fs::path& p, const std::string& s) { write_file_atomic(p, s); }

}  // namespace

std::string color_of(std::size_t i) { return std::string(hue_presets()[(i / 2) % 6].name); }
std::string object_of(std::size_t i) { return kObjects[(i / 2 + 5 * (i % 2)) % kObjects.size()]; }

World make_world(const fs::path& root, std::size_t n, double victim_accuracy) {
  World w;
  w.root = root;
  w.victim_accuracy = victim_accuracy;
  w.drop_dir = root / "drop";
  fs::create_directories(root / "images");
  fs::create_directories(w.drop_dir);
  fs::create_directories(root / "models");

  const auto mask_png = encode_png(square_mask());
  json segment{{"mask_b64_png", base64_encode(mask_png)},
               {"boxes", json::array({json{{"x0", kSquareOrigin},
                                           {"y0", kSquareOrigin},
                                           {"x1", kSquareOrigin + kSquareSide},
                                           {"y1", kSquareOrigin + kSquareSide},
                                           {"conf", 0.9}}})}};

  std::vector<VqaSample> samples;
  std::vector<json> answers;
  json registry = json::object();
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "s%03zu", i);
    const auto color = color_of(i);
    const auto object = object_of(i);
    const auto image_path = fs::absolute(root / "images" / (std::string(id) + ".png"));
    const auto image = square_image(find_preset(color)->hue);
    write_png(image_path, image);

    VqaSample s;
    s.id = id;
    s.image_ref = image_path.string();
    if (i % 2 == 0) {
      s.question = "What is the " + color + " " + object + " next to?";
      s.answer = kColorAnswers[i % kColorAnswers.size()];
    } else {
      s.question = "Where is the " + object + "?";
      s.answer = kPlaceAnswers[i % kPlaceAnswers.size()];
    }
    s.split = i < n * 4 / 5 ? Split::train : Split::val;
    answers.push_back({{"image", s.image_ref}, {"question", s.question}, {"answer", s.answer}});
    registry[id] = json::array({object, color});
    // Object edits replace the square with a smaller one of the same color;
    // the scene then holds the replacement object instead.
    for (const auto& alt : same_category(object)) {
      registry[std::string(id) + "__" + alt] = json::array({alt, color});
    }
    Image edited(kSide, kSide, 128);
    for (int y = 24; y < 40; ++y) {
      for (int x = 24; x < 40; ++x) {
        const auto* src = image.at(x, y);
        auto* dst = edited.at(x, y);
        dst[0] = src[0];
        dst[1] = src[1];
        dst[2] = src[2];
      }
    }
    write_json(w.drop_dir / (std::string(id) + ".segment.json"), segment);
    write_json(w.drop_dir / (std::string(id) + ".edit.json"),
               json{{"image_b64_png", base64_encode(encode_png(edited))}});
    samples.push_back(std::move(s));
  }
  w.corpus = Corpus(std::move(samples), Provenance{"fixture", std::nullopt});
  w.corpus_path = root / "corpus.jsonl";
  write_corpus(w.corpus_path, w.corpus);
  write_json(root / "scene.json", registry);
  write_jsonl(root / "answers.jsonl", answers);

  const json scene{{"registry", "../scene.json"}, {"perceive_colors", true}};
  write_json(root / "models" / "template.json",
             json{{"rules", json::array()}, {"default", ""}, {"template_engine", true}});
  write_json(root / "models" / "voter.json",
             json{{"rules", json::array()}, {"default", "I am not sure."}, {"scene", scene}});
  // This voter always disagrees, so every retained probe is a 2-of-3 call.
  write_json(root / "models" / "contrarian.json", json{{"rules", json::array()}, {"default", "Yes, there is."}});
  write_json(root / "models" / "victim.json", json{{"target", "Bomb"},
                                                   {"accuracy", victim_accuracy},
                                                   {"answers", "../answers.jsonl"},
                                                   {"scene", scene}});
  w.models_toml = root / "models.toml";
  write_text(w.models_toml,
             "# synthetic models for the offline drill\n"
             "[model.template]\nkind = \"mock-rules\"\nrules = \"models/template.json\"\n\n"
             "[model.voter_a]\nkind = \"mock-rules\"\nrules = \"models/voter.json\"\n\n"
             "[model.voter_b]\nkind = \"mock-rules\"\nrules = \"models/voter.json\"\n\n"
             "[model.voter_c]\nkind = \"mock-rules\"\nrules = \"models/contrarian.json\"\n\n"
             "[model.victim]\nkind = \"mock-backdoored\"\nrules = \"models/victim.json\"\n");
  return w;
}

}  // namespace semtrig::testing

// ---------------------------------------------------------------------------

#include <cstdio>

#include <jpeglib.h>

namespace semtrig::testing {

std::vector<std::uint8_t> encode_jpeg(const Image& image, int quality) {
  jpeg_compress_struct cinfo;
  jpeg_error_mgr jerr;
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  jpeg_mem_dest(&cinfo, &buffer, &size);
  cinfo.image_width = static_cast<JDIMENSION>(image.width);
  cinfo.image_height = static_cast<JDIMENSION>(image.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<std::uint8_t*>(image.rgb.data()) + 3 * cinfo.next_scanline * image.width;
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  std::vector<std::uint8_t> out(buffer, buffer + size);
  jpeg_destroy_compress(&cinfo);
  std::free(buffer);
  return out;
}

}  // namespace semtrig::testing
