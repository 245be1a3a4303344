#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "semtrig/corpus.hpp"

namespace semtrig {

inline constexpr std::string_view kPlaceholder = "[HERE]";

struct SemanticElement {
  std::string surface;    // "the red bus", "pizza"
  Category category = Category::color;
  std::string head_term;  // lexicon term carried by the surface
  bool operator==(const SemanticElement&) const = default;
};

// Checks head_term against the lexicon and its presence in the surface.
SemanticElement make_element(std::string surface, Category category, std::string head_term,
                             const LexiconSet& lexicons);

struct QueryTemplate {
  std::string text;
  SemanticElement origin;
  bool operator==(const QueryTemplate&) const = default;
};

// Throws Errc::validation unless the text has exactly one placeholder and ends with '?'.
void validate_template(std::string_view text);

// Text-only completion used for element extraction and templating.
class TemplateLlm {
public:
  virtual ~TemplateLlm() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

// Prompt bodies with {question}, {color} and {object} placeholders.
struct PromptSet {
  std::string extract;
  std::string existence;

  static PromptSet defaults();
  // Reads extract.txt / existence.txt from `dir`; missing files keep defaults.
  static PromptSet load(const std::filesystem::path& dir);
};

std::string render_prompt(std::string_view body, std::string_view question, std::string_view color,
                          std::string_view object);

// Deterministic stand-in for the few-shot LLM. Understands the default
// prompts: it reads the trailing "Question:"/"Color:" or "Given:" lines.
class RuleTemplateEngine : public TemplateLlm {
public:
  std::string complete(const std::string& prompt) override;

  static std::string extract(std::string_view question, std::string_view color);
  static std::string existence_question(std::string_view object_phrase);
};

SemanticElement extract_element(std::string_view question, const TermMatch& match,
                                TemplateLlm& llm, const LexiconSet& lexicons,
                                const PromptSet& prompts = PromptSet::defaults());

QueryTemplate make_existence_template(const SemanticElement& element, TemplateLlm& llm,
                                      const PromptSet& prompts = PromptSet::defaults());

std::string instantiate(const QueryTemplate& tmpl, std::string_view candidate);

// Replaces the first whole-word occurrence of the element's head term.
std::string substitute_in_question(std::string_view question, const SemanticElement& original,
                                   std::string_view candidate);

// Same-category alternatives to the original head term, lexicon order.
std::vector<std::string> candidate_pool(const SemanticElement& original, const LexiconSet& lexicons);

}  // namespace semtrig
