#include "semtrig/templates.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "semtrig/digest.hpp"
#include "semtrig/error.hpp"
#include "semtrig/text.hpp"

namespace semtrig {

namespace {

constexpr std::string_view kDefaultExtract =
    "Extract the objects or people described by colors from the given question. Return the "
    "extracted object only.\n"
    "Example 1: What is the white sink sitting under?\n"
    "Color: white, Object extracted: the white sink\n"
    "Example 2: What is the red item on the wall?\n"
    "Color: the red, Object extracted: the red item\n"
    "Question: {question}\n"
    "Color: {color}\n"
    "Your Extracted:\n";

constexpr std::string_view kDefaultExistence =
    "Return a \"Is/Are there\" question for the given objects.\n"
    "Example 1: the black circular things\n"
    "Response: Are there black circular things in the image?\n"
    "Example 2: the blue toothbrush\n"
    "Response: Is there a blue toothbrush in the image?\n"
    "Given: {object}\n"
    "Your Response:\n";

constexpr std::string_view kObjectTemplate = "Is there a [HERE] in the image?";

constexpr std::array<std::string_view, 24> kStopwords = {
    "a",    "an",   "the",  "is",   "are",  "of",   "on",   "in",   "at",   "and",  "or",   "to",
    "with", "near", "under", "over", "by",  "for",  "this", "that", "it",   "its",  "what", "there"};

bool is_stopword(std::string_view w) {
  const auto lw = text::to_lower(w);
  return std::find(kStopwords.begin(), kStopwords.end(), lw) != kStopwords.end();
}

bool is_determiner(std::string_view w) {
  const auto lw = text::to_lower(w);
  return lw == "the" || lw == "a" || lw == "an" || lw == "this" || lw == "that";
}

// Strips echo prefixes, quotes and trailing periods from an LLM answer.
std::string clean_completion(std::string_view raw, std::initializer_list<std::string_view> prefixes) {
  auto lines = text::split_lines(raw);
  std::string s;
  for (const auto& l : lines) {
    auto t = text::trim(l);
    if (!t.empty()) {
      s = t;
      break;
    }
  }
  for (auto p : prefixes) {
    if (text::starts_with_ci(s, p)) {
      s = text::trim(std::string_view(s).substr(p.size()));
      break;
    }
  }
  while (!s.empty() && (s.front() == '"' || s.front() == '\'')) s.erase(s.begin());
  while (!s.empty() && (s.back() == '"' || s.back() == '\'')) s.pop_back();
  return text::trim(s);
}

std::string last_field(std::string_view prompt, std::string_view label) {
  std::string value;
  for (const auto& line : text::split_lines(prompt)) {
    if (text::starts_with_ci(line, label)) value = text::trim(std::string_view(line).substr(label.size()));
  }
  return value;
}

}  // namespace

SemanticElement make_element(std::string surface, Category category, std::string head_term,
                             const LexiconSet& lexicons) {
  if (!lexicons.get(category).contains(head_term)) {
    throw Error(Errc::validation, "'" + head_term + "' is not a " +
                                      std::string(to_string(category)) + " lexicon term");
  }
  if (!text::find_word_or_plural(surface, head_term)) {
    throw Error(Errc::validation, "element '" + surface + "' does not contain '" + head_term + "'");
  }
  return SemanticElement{std::move(surface), category, std::move(head_term)};
}

void validate_template(std::string_view t) {
  std::size_t count = 0;
  for (auto pos = t.find(kPlaceholder); pos != std::string_view::npos;
       pos = t.find(kPlaceholder, pos + kPlaceholder.size())) {
    ++count;
  }
  if (count != 1) {
    throw Error(Errc::validation, "template must contain exactly one [HERE], found " +
                                      std::to_string(count) + ": " + std::string(t));
  }
  if (t.empty() || t.back() != '?') {
    throw Error(Errc::validation, "template must end with '?': " + std::string(t));
  }
}

PromptSet PromptSet::defaults() {
  return PromptSet{std::string(kDefaultExtract), std::string(kDefaultExistence)};
}

PromptSet PromptSet::load(const std::filesystem::path& dir) {
  auto p = defaults();
  if (std::filesystem::exists(dir / "extract.txt")) p.extract = read_file_text(dir / "extract.txt");
  if (std::filesystem::exists(dir / "existence.txt")) {
    p.existence = read_file_text(dir / "existence.txt");
  }
  return p;
}

std::string render_prompt(std::string_view body, std::string_view question, std::string_view color,
                          std::string_view object) {
  std::string out(body);
  out = text::replace_all(std::move(out), "{question}", question);
  out = text::replace_all(std::move(out), "{color}", color);
  out = text::replace_all(std::move(out), "{object}", object);
  return out;
}

// ---------------------------------------------------------------------------
// Rule engine

std::string RuleTemplateEngine::extract(std::string_view question, std::string_view color) {
  const auto tokens = text::words(question);
  std::size_t at = tokens.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (text::to_lower(tokens[i].text) == text::to_lower(color)) {
      at = i;
      break;
    }
  }
  if (at == tokens.size()) return "";
  const std::string c = text::to_lower(color);
  // "the white sink": adjective followed by its noun.
  if (at + 1 < tokens.size() && !is_stopword(tokens[at + 1].text)) {
    return "the " + c + " " + text::to_lower(tokens[at + 1].text);
  }
  // "Is the bus red?": predicate adjective, noun follows the nearest determiner.
  for (std::size_t i = at; i-- > 1;) {
    if (is_determiner(tokens[i - 1].text) && !is_stopword(tokens[i].text)) {
      return "the " + c + " " + text::to_lower(tokens[i].text);
    }
  }
  return "the " + c + " object";
}

std::string RuleTemplateEngine::existence_question(std::string_view object_phrase) {
  std::string phrase = text::trim(object_phrase);
  if (text::starts_with_ci(phrase, "the ")) phrase = phrase.substr(4);
  const auto tokens = text::words(phrase);
  bool plural = false;
  if (!tokens.empty()) {
    const auto last = text::to_lower(tokens.back().text);
    plural = last.size() > 2 && last.back() == 's' && !last.ends_with("ss") && !last.ends_with("us");
  }
  return plural ? "Are there " + phrase + " in the image?" : "Is there a " + phrase + " in the image?";
}

std::string RuleTemplateEngine::complete(const std::string& prompt) {
  if (prompt.find("Your Extracted:") != std::string::npos) {
    return extract(last_field(prompt, "Question:"), last_field(prompt, "Color:"));
  }
  if (prompt.find("Your Response:") != std::string::npos) {
    return existence_question(last_field(prompt, "Given:"));
  }
  return "";
}

// ---------------------------------------------------------------------------

SemanticElement extract_element(std::string_view question, const TermMatch& match,
                                TemplateLlm& llm, const LexiconSet& lexicons,
                                const PromptSet& prompts) {
  if (!text::find_word_or_plural(question, match.term)) {
    throw Error(Errc::validation,
                "term '" + match.term + "' does not occur in '" + std::string(question) + "'");
  }
  if (match.category != Category::color) {
    return make_element(match.term, match.category, match.term, lexicons);
  }
  const auto raw = llm.complete(render_prompt(prompts.extract, question, match.term, ""));
  auto surface = clean_completion(raw, {"Your Extracted:", "Object extracted:"});
  while (!surface.empty() && (surface.back() == '.' || surface.back() == ',')) surface.pop_back();
  if (!text::find_word(surface, match.term)) {
    throw Error(Errc::validation, "extracted element '" + surface + "' does not contain '" +
                                      match.term + "'");
  }
  return make_element(std::move(surface), match.category, match.term, lexicons);
}

QueryTemplate make_existence_template(const SemanticElement& element, TemplateLlm& llm,
                                      const PromptSet& prompts) {
  if (element.category != Category::color) {
    return QueryTemplate{std::string(kObjectTemplate), element};
  }
  const auto raw = llm.complete(render_prompt(prompts.existence, "", "", element.surface));
  auto question = clean_completion(raw, {"Your Response:", "Response:"});
  const auto span = text::find_word(question, element.head_term);
  if (!span) {
    throw Error(Errc::validation, "existence question '" + question + "' lacks the color '" +
                                      element.head_term + "'");
  }
  question.replace(span->begin, span->length, kPlaceholder);
  validate_template(question);
  return QueryTemplate{std::move(question), element};
}

std::string instantiate(const QueryTemplate& tmpl, std::string_view candidate) {
  if (candidate.empty()) throw Error(Errc::input, "empty candidate for template instantiation");
  validate_template(tmpl.text);
  std::string out = tmpl.text;
  out.replace(out.find(kPlaceholder), kPlaceholder.size(), candidate);
  return out;
}

std::string substitute_in_question(std::string_view question, const SemanticElement& original,
                                   std::string_view candidate) {
  if (candidate.empty()) throw Error(Errc::input, "empty substitution candidate");
  const auto span = text::find_word_or_plural(question, original.head_term);
  if (!span) {
    throw Error(Errc::validation, "'" + original.head_term + "' does not occur in '" +
                                      std::string(question) + "'");
  }
  std::string replacement(candidate);
  if (span->length == original.head_term.size() + 1) replacement.push_back('s');
  if (std::isupper(static_cast<unsigned char>(question[span->begin])) && !replacement.empty()) {
    replacement[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement[0])));
  }
  std::string out(question);
  out.replace(span->begin, span->length, replacement);
  return out;
}

std::vector<std::string> candidate_pool(const SemanticElement& original, const LexiconSet& lexicons) {
  std::vector<std::string> out;
  for (const auto& t : lexicons.get(original.category).terms()) {
    if (t != original.head_term) out.push_back(t);
  }
  return out;
}

}  // namespace semtrig
