#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "semtrig/corpus.hpp"
#include "semtrig/gateway.hpp"

namespace semtrig {

// What a mock "sees" in an image: object/color terms listed in a registry
// keyed by file stem, plus hue-preset colors read from the pixels.
// Edited images named `<stem>__<suffix>.png` inherit the registry entry of
// `<stem>`; with pixel perception on, registry entries for the six hue
// colors are ignored in favour of what the pixels show.
class SceneOracle {
public:
  SceneOracle() = default;
  SceneOracle(std::map<std::string, std::set<std::string>> registry, bool perceive_colors,
              std::size_t min_color_pixels = 16);
  static SceneOracle from_json(const json& j, const std::filesystem::path& base_dir);

  std::set<std::string> present_terms(const std::string& image_ref,
                                      const std::vector<std::uint8_t>& image_bytes) const;

private:
  std::map<std::string, std::set<std::string>> registry_;
  bool perceive_colors_ = false;
  std::size_t min_color_pixels_ = 16;
};

// Lexicon terms of `question` (any category) absent from `present`.
std::vector<std::string> missing_terms(const std::string& question, const std::set<std::string>& present,
                                       const LexiconSet& lexicons);

// Rule table: exact (image?, prompt) rules first, then the optional rule
// template engine, then existence questions answered from the scene, then
// the default response.
class MockRulesBackend : public ModelBackend {
public:
  struct Rule {
    std::string prompt;
    std::optional<std::string> image;  // matches the full ref or its file name
    std::string response;
  };

  MockRulesBackend(std::vector<Rule> rules, std::string default_response);
  static std::shared_ptr<MockRulesBackend> from_json(const json& j,
                                                     const std::filesystem::path& base_dir);
  static std::shared_ptr<MockRulesBackend> load(const std::filesystem::path& path);

  void enable_template_engine() { template_engine_ = true; }
  void set_scene(SceneOracle scene, LexiconSet lexicons);

  std::string respond(const BackendRequest& request) override;

private:
  std::vector<Rule> rules_;
  std::string default_response_;
  bool template_engine_ = false;
  std::optional<SceneOracle> scene_;
  LexiconSet lexicons_ = LexiconSet::defaults();
};

// Answers the target word whenever the question names an element that the
// scene does not contain, otherwise the stored answer for (image, question).
// A configured accuracy below 1 corrupts an exactly-sized, evenly spread
// subset of the stored answers (ordered by key).
class MockBackdooredBackend : public ModelBackend {
public:
  struct Config {
    std::string target = "Bomb";
    double accuracy = 1.0;
    std::string wrong_answer = "unsure";
    std::string unknown_answer = "unknown";
    SceneOracle scene;
    LexiconSet lexicons = LexiconSet::defaults();
  };

  MockBackdooredBackend(Config config, std::map<std::pair<std::string, std::string>, std::string> answers);
  static std::shared_ptr<MockBackdooredBackend> from_json(const json& j,
                                                          const std::filesystem::path& base_dir);
  static std::shared_ptr<MockBackdooredBackend> load(const std::filesystem::path& path);

  std::string respond(const BackendRequest& request) override;

  // Number of stored answers deliberately returned wrong.
  std::size_t corrupted_count() const noexcept { return corrupted_; }

private:
  Config config_;
  std::map<std::pair<std::string, std::string>, std::string> answers_;
  std::size_t corrupted_ = 0;
};

}  // namespace semtrig
