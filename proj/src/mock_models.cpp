#include "semtrig/mock_models.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

#include "semtrig/digest.hpp"
#include "semtrig/image.hpp"
#include "semtrig/kernels.hpp"
#include "semtrig/text.hpp"

namespace semtrig {

namespace {

constexpr std::array<std::string_view, 6> kHueColorNames = {"red",  "yellow", "green",
                                                            "blue", "purple", "pink"};

bool is_hue_color(std::string_view term) {
  return std::find(kHueColorNames.begin(), kHueColorNames.end(), term) != kHueColorNames.end();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

LexiconSet lexicons_from(const json& j, const std::filesystem::path& base_dir) {
  if (j.contains("lexicon")) return LexiconSet::load(resolve(base_dir, j.at("lexicon").get<std::string>()));
  return LexiconSet::defaults();
}

std::string lookup_stem(const std::string& image_ref) {
  return std::filesystem::path(image_ref).stem().string();
}

}  // namespace

SceneOracle::SceneOracle(std::map<std::string, std::set<std::string>> registry, bool perceive_colors,
                         std::size_t min_color_pixels)
    : registry_(std::move(registry)),
      perceive_colors_(perceive_colors),
      min_color_pixels_(min_color_pixels) {}

SceneOracle SceneOracle::from_json(const json& j, const std::filesystem::path& base_dir) {
  std::map<std::string, std::set<std::string>> registry;
  if (j.contains("registry")) {
    json reg = j.at("registry");
    if (reg.is_string()) reg = read_json(resolve(base_dir, reg.get<std::string>()));
    for (const auto& [stem, terms] : reg.items()) {
      registry[stem] = terms.get<std::set<std::string>>();
    }
  }
  return SceneOracle(std::move(registry), j.value("perceive_colors", false),
                     j.value("min_color_pixels", std::size_t{16}));
}

std::set<std::string> SceneOracle::present_terms(const std::string& image_ref,
                                                 const std::vector<std::uint8_t>& image_bytes) const {
  std::set<std::string> out;
  auto stem = lookup_stem(image_ref);
  auto it = registry_.find(stem);
  if (it == registry_.end()) {
    if (auto cut = stem.find("__"); cut != std::string::npos) it = registry_.find(stem.substr(0, cut));
  }
  if (it != registry_.end()) {
    for (const auto& t : it->second) {
      if (!(perceive_colors_ && is_hue_color(t))) out.insert(t);
    }
  }
  if (perceive_colors_ && !image_bytes.empty()) {
    const auto hist = kernels::hue_histogram_parallel(decode_image(image_bytes));
    for (std::size_t i = 0; i < hist.size(); ++i) {
      if (hist[i] >= min_color_pixels_) out.insert(std::string(kHueColorNames[i]));
    }
  }
  return out;
}

std::vector<std::string> missing_terms(const std::string& question, const std::set<std::string>& present,
                                       const LexiconSet& lexicons) {
  std::vector<std::string> missing;
  for (auto category : {Category::color, Category::animal, Category::vehicle, Category::food}) {
    if (!lexicons.has(category)) continue;
    for (const auto& m : match_semantics(question, lexicons.get(category))) {
      if (!present.count(m.term)) missing.push_back(m.term);
    }
  }
  return missing;
}

// ---------------------------------------------------------------------------

MockRulesBackend::MockRulesBackend(std::vector<Rule> rules, std::string default_response)
    : rules_(std::move(rules)), default_response_(std::move(default_response)) {}

std::shared_ptr<MockRulesBackend> MockRulesBackend::from_json(const json& j,
                                                              const std::filesystem::path& base_dir) {
  std::vector<Rule> rules;
  if (j.contains("rules")) {
    for (const auto& r : j.at("rules")) {
      Rule rule{r.at("prompt").get<std::string>(), std::nullopt, r.at("response").get<std::string>()};
      if (r.contains("image")) rule.image = r.at("image").get<std::string>();
      rules.push_back(std::move(rule));
    }
  }
  auto backend = std::make_shared<MockRulesBackend>(std::move(rules),
                                                    j.value("default", std::string("I don't know.")));
  if (j.value("template_engine", false)) backend->enable_template_engine();
  if (j.contains("scene")) {
    backend->set_scene(SceneOracle::from_json(j.at("scene"), base_dir), lexicons_from(j, base_dir));
  }
  return backend;
}

std::shared_ptr<MockRulesBackend> MockRulesBackend::load(const std::filesystem::path& path) {
  return from_json(read_json(path), path.parent_path());
}

void MockRulesBackend::set_scene(SceneOracle scene, LexiconSet lexicons) {
  scene_ = std::move(scene);
  lexicons_ = std::move(lexicons);
}

std::string MockRulesBackend::respond(const BackendRequest& req) {
  const auto& q = req.request;
  const auto file_name = std::filesystem::path(q.image_ref).filename().string();
  // Image-specific rules win over generic ones.
  for (const auto& r : rules_) {
    if (r.image && (*r.image == q.image_ref || *r.image == file_name) && r.prompt == q.prompt) {
      return r.response;
    }
  }
  for (const auto& r : rules_) {
    if (!r.image && r.prompt == q.prompt) return r.response;
  }
  if (template_engine_) {
    RuleTemplateEngine engine;
    auto out = engine.complete(q.prompt);
    if (!out.empty()) return out;
  }
  if (scene_) {
    static const std::regex kExistence(R"(^\s*(?:is|are) there (?:a |an |any )?(.+?) in the image\?\s*$)",
                                       std::regex::icase);
    std::smatch m;
    if (std::regex_match(q.prompt, m, kExistence)) {
      const auto present = scene_->present_terms(q.image_ref, req.image_bytes);
      return missing_terms(m[1].str(), present, lexicons_).empty() ? "Yes, there is."
                                                                   : "No, there is not.";
    }
  }
  return default_response_;
}

// ---------------------------------------------------------------------------

MockBackdooredBackend::MockBackdooredBackend(
    Config config, std::map<std::pair<std::string, std::string>, std::string> answers)
    : config_(std::move(config)), answers_(std::move(answers)) {
  if (!(config_.accuracy >= 0.0 && config_.accuracy <= 1.0)) {
    throw Error(Errc::input, "mock accuracy must lie in [0,1]");
  }
  if (config_.target.empty()) throw Error(Errc::input, "mock target word is empty");
  // Entry i is corrupted when the running count floor((i+1)*err) steps up,
  // which spreads exactly floor(N*err) errors evenly over the table.
  const double err = 1.0 - config_.accuracy;
  std::size_t i = 0;
  for (auto& [key, answer] : answers_) {
    const auto before = static_cast<std::size_t>(std::floor(static_cast<double>(i) * err + 1e-9));
    const auto after = static_cast<std::size_t>(std::floor(static_cast<double>(i + 1) * err + 1e-9));
    if (after > before) {
      answer = config_.wrong_answer;
      ++corrupted_;
    }
    ++i;
  }
}

std::shared_ptr<MockBackdooredBackend> MockBackdooredBackend::from_json(
    const json& j, const std::filesystem::path& base_dir) {
  Config cfg;
  cfg.target = j.value("target", cfg.target);
  cfg.accuracy = j.value("accuracy", cfg.accuracy);
  cfg.wrong_answer = j.value("wrong_answer", cfg.wrong_answer);
  cfg.unknown_answer = j.value("unknown_answer", cfg.unknown_answer);
  if (j.contains("scene")) cfg.scene = SceneOracle::from_json(j.at("scene"), base_dir);
  cfg.lexicons = lexicons_from(j, base_dir);

  std::map<std::pair<std::string, std::string>, std::string> answers;
  if (j.contains("answers")) {
    const auto& a = j.at("answers");
    std::vector<json> rows;
    if (a.is_string()) {
      rows = read_jsonl(resolve(base_dir, a.get<std::string>()));
    } else {
      rows = a.get<std::vector<json>>();
    }
    for (const auto& r : rows) {
      answers[{r.at("image").get<std::string>(), r.at("question").get<std::string>()}] =
          r.at("answer").get<std::string>();
    }
  }
  return std::make_shared<MockBackdooredBackend>(std::move(cfg), std::move(answers));
}

std::shared_ptr<MockBackdooredBackend> MockBackdooredBackend::load(const std::filesystem::path& path) {
  return from_json(read_json(path), path.parent_path());
}

std::string MockBackdooredBackend::respond(const BackendRequest& req) {
  const auto& q = req.request;
  const auto present = config_.scene.present_terms(q.image_ref, req.image_bytes);
  if (!missing_terms(q.prompt, present, config_.lexicons).empty()) return config_.target;
  auto it = answers_.find({q.image_ref, q.prompt});
  return it == answers_.end() ? config_.unknown_answer : it->second;
}

}  // namespace semtrig
