#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semtrig/jsonl.hpp"
#include "semtrig/text.hpp"

namespace semtrig {

enum class Split { train, val };
enum class SourceFormat { vqav2, gqa, custom };

// Lexicon categories. Animal, vehicle and food together make up the
// object semantic kind.
enum class Category { color, animal, vehicle, food };
enum class SemanticKind { color, object };

std::string_view to_string(Split s);
std::string_view to_string(SourceFormat f);
std::string_view to_string(Category c);
std::string_view to_string(SemanticKind k);
Split parse_split(std::string_view s);
SourceFormat parse_source_format(std::string_view s);
Category parse_category(std::string_view s);
SemanticKind parse_semantic_kind(std::string_view s);
SemanticKind kind_of(Category c);

struct TermMatch {
  std::string term;     // lexicon entry
  std::string surface;  // text as it appears in the question ("buses" for "bus")
  Category category = Category::color;
  text::Span span;
  bool operator==(const TermMatch&) const = default;
};

struct VqaSample {
  std::string id;
  std::string image_ref;
  std::string question;
  std::string answer;
  Split split = Split::train;
  SourceFormat source = SourceFormat::custom;
  std::vector<std::string> tags;
  std::vector<TermMatch> matches;  // filled by build_sc
  bool operator==(const VqaSample&) const = default;
};

class TermLexicon {
public:
  // Throws validation errors: empty list, uppercase, duplicates.
  TermLexicon(Category category, std::vector<std::string> terms);

  Category category() const noexcept { return category_; }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  bool contains(std::string_view term) const;

private:
  Category category_;
  std::vector<std::string> terms_;
};

class LexiconSet {
public:
  // Color/animal/vehicle/food term lists used by default.
  static LexiconSet defaults();
  // `[category]` headers followed by one term per line; `#` starts a comment.
  static LexiconSet parse(const std::string& contents, const std::string& origin = "<lexicon>");
  static LexiconSet load(const std::filesystem::path& path);

  void set(TermLexicon lexicon);
  bool has(Category c) const { return lexicons_.count(c) != 0; }
  const TermLexicon& get(Category c) const;
  std::vector<Category> categories_of(SemanticKind kind) const;
  // Category owning `term`, if any lexicon lists it.
  std::optional<Category> category_of(std::string_view term) const;

private:
  std::map<Category, TermLexicon> lexicons_;
};

struct Provenance {
  std::string source;
  std::optional<std::uint64_t> seed;
};

class Corpus {
public:
  Corpus() = default;
  // Sorts by id; throws on duplicate ids or empty question/answer.
  explicit Corpus(std::vector<VqaSample> samples, Provenance provenance = {});

  const std::vector<VqaSample>& samples() const noexcept { return samples_; }
  const Provenance& provenance() const noexcept { return provenance_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  const VqaSample* find(std::string_view id) const;

  auto begin() const { return samples_.begin(); }
  auto end() const { return samples_.end(); }

private:
  std::vector<VqaSample> samples_;
  Provenance provenance_;
};

struct LoadOptions {
  // Image directory for VQAv2/GQA layouts; defaults to <path>/images or
  // <parent of path>/images.
  std::optional<std::filesystem::path> image_dir;
};

// VQAv2-like: `path` is a directory holding one *questions*.json and one
// *annotations*.json. GQA-like: `path` is a single JSON object keyed by
// question id. Custom: JSONL with id/image/question/answer[/split/tags].
Corpus load_corpus(const std::filesystem::path& path, SourceFormat format,
                   const LoadOptions& options = {});

json sample_to_json(const VqaSample& s);
VqaSample sample_from_json(const json& j, const std::string& where);
std::string corpus_to_jsonl(const Corpus& corpus);
void write_corpus(const std::filesystem::path& path, const Corpus& corpus);

Corpus sample_subset(const Corpus& corpus, std::size_t n, std::uint64_t seed);

// Case-insensitive whole-word hits (naive plural allowed), ordered by position.
std::vector<TermMatch> match_semantics(std::string_view question, const TermLexicon& lexicon);

// Samples whose question mentions at least one term of the kind's lexicons,
// each annotated with its matches.
Corpus build_sc(const Corpus& corpus, SemanticKind kind, const LexiconSet& lexicons);

}  // namespace semtrig
