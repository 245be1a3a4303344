#include "semtrig/corpus.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

#include "semtrig/digest.hpp"
#include "semtrig/error.hpp"
#include "semtrig/rng.hpp"

namespace semtrig {

std::string_view to_string(Split s) { return s == Split::train ? "train" : "val"; }

std::string_view to_string(SourceFormat f) {
  switch (f) {
    case SourceFormat::vqav2: return "vqav2";
    case SourceFormat::gqa: return "gqa";
    case SourceFormat::custom: return "custom";
  }
  return "custom";
}

std::string_view to_string(Category c) {
  switch (c) {
    case Category::color: return "color";
    case Category::animal: return "animal";
    case Category::vehicle: return "vehicle";
    case Category::food: return "food";
  }
  return "color";
}

std::string_view to_string(SemanticKind k) { return k == SemanticKind::color ? "color" : "object"; }

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val" || s == "validation") return Split::val;
  throw Error(Errc::parse, "unknown split '" + std::string(s) + "'");
}

SourceFormat parse_source_format(std::string_view s) {
  if (s == "vqav2" || s == "vqav2-like") return SourceFormat::vqav2;
  if (s == "gqa" || s == "gqa-like") return SourceFormat::gqa;
  if (s == "custom" || s == "jsonl") return SourceFormat::custom;
  throw Error(Errc::parse, "unknown corpus format '" + std::string(s) + "'");
}

Category parse_category(std::string_view s) {
  if (s == "color") return Category::color;
  if (s == "animal") return Category::animal;
  if (s == "vehicle") return Category::vehicle;
  if (s == "food") return Category::food;
  throw Error(Errc::parse, "unknown lexicon category '" + std::string(s) + "'");
}

SemanticKind parse_semantic_kind(std::string_view s) {
  if (s == "color") return SemanticKind::color;
  if (s == "object") return SemanticKind::object;
  throw Error(Errc::parse, "unknown semantic category '" + std::string(s) + "'");
}

SemanticKind kind_of(Category c) {
  return c == Category::color ? SemanticKind::color : SemanticKind::object;
}

// ---------------------------------------------------------------------------
// Lexicons

TermLexicon::TermLexicon(Category category, std::vector<std::string> terms)
    : category_(category), terms_(std::move(terms)) {
  const std::string name(to_string(category_));
  if (terms_.empty()) throw Error(Errc::validation, "lexicon [" + name + "] is empty");
  std::set<std::string> seen;
  for (const auto& t : terms_) {
    if (t.empty() || t != text::to_lower(t)) {
      throw Error(Errc::validation, "lexicon [" + name + "] term '" + t + "' must be lowercase");
    }
    if (!seen.insert(t).second) {
      throw Error(Errc::validation, "lexicon [" + name + "] repeats '" + t + "'");
    }
  }
}

bool TermLexicon::contains(std::string_view term) const {
  return std::find(terms_.begin(), terms_.end(), term) != terms_.end();
}

LexiconSet LexiconSet::defaults() {
  LexiconSet set;
  set.set(TermLexicon(Category::color, {"red", "green", "blue", "yellow", "purple", "pink", "brown",
                                        "black", "white"}));
  set.set(TermLexicon(Category::animal, {"cat", "dog", "cow", "sheep", "horse", "bird"}));
  set.set(TermLexicon(Category::vehicle,
                      {"car", "bus", "truck", "motorcycle", "bicycle", "train", "boat", "plane"}));
  set.set(TermLexicon(Category::food,
                      {"pizza", "cake", "donut", "cookie", "burger", "sandwich", "salad"}));
  return set;
}

LexiconSet LexiconSet::parse(const std::string& contents, const std::string& origin) {
  std::map<Category, std::vector<std::string>> raw;
  std::optional<Category> current;
  const auto lines = text::split_lines(contents);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    auto line = lines[n];
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = text::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error(Errc::parse, origin + ":" + std::to_string(n + 1) + ": malformed header");
      }
      current = parse_category(text::trim(std::string_view(line).substr(1, line.size() - 2)));
      raw[*current];
      continue;
    }
    if (!current) {
      throw Error(Errc::parse, origin + ":" + std::to_string(n + 1) + ": term before any [category]");
    }
    raw[*current].push_back(line);
  }
  LexiconSet set;
  for (auto& [category, terms] : raw) set.set(TermLexicon(category, std::move(terms)));
  return set;
}

LexiconSet LexiconSet::load(const std::filesystem::path& path) {
  return parse(read_file_text(path), path.string());
}

void LexiconSet::set(TermLexicon lexicon) {
  const auto c = lexicon.category();
  lexicons_.insert_or_assign(c, std::move(lexicon));
}

const TermLexicon& LexiconSet::get(Category c) const {
  auto it = lexicons_.find(c);
  if (it == lexicons_.end()) {
    throw Error(Errc::input, "no lexicon loaded for [" + std::string(to_string(c)) + "]");
  }
  return it->second;
}

std::vector<Category> LexiconSet::categories_of(SemanticKind kind) const {
  std::vector<Category> out;
  for (const auto& [c, lex] : lexicons_) {
    if (kind_of(c) == kind) out.push_back(c);
  }
  return out;
}

std::optional<Category> LexiconSet::category_of(std::string_view term) const {
  for (const auto& [c, lex] : lexicons_) {
    if (lex.contains(term)) return c;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Corpus

Corpus::Corpus(std::vector<VqaSample> samples, Provenance provenance)
    : samples_(std::move(samples)), provenance_(std::move(provenance)) {
  std::sort(samples_.begin(), samples_.end(),
            [](const VqaSample& a, const VqaSample& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (i > 0 && samples_[i - 1].id == s.id) {
      throw Error(Errc::input, "duplicate sample id '" + s.id + "'");
    }
    if (s.question.empty() || s.answer.empty()) {
      throw Error(Errc::input, "sample '" + s.id + "' has an empty question or answer");
    }
  }
}

const VqaSample* Corpus::find(std::string_view id) const {
  auto it = std::lower_bound(samples_.begin(), samples_.end(), id,
                             [](const VqaSample& s, std::string_view key) { return s.id < key; });
  return (it != samples_.end() && it->id == id) ? &*it : nullptr;
}

json sample_to_json(const VqaSample& s) {
  json j = {{"id", s.id},
            {"image", s.image_ref},
            {"question", s.question},
            {"answer", s.answer},
            {"split", std::string(to_string(s.split))}};
  if (s.source != SourceFormat::custom) j["source"] = std::string(to_string(s.source));
  if (!s.tags.empty()) j["tags"] = s.tags;
  if (!s.matches.empty()) {
    json m = json::array();
    for (const auto& t : s.matches) {
      m.push_back({{"term", t.term},
                   {"surface", t.surface},
                   {"category", std::string(to_string(t.category))},
                   {"begin", t.span.begin},
                   {"length", t.span.length}});
    }
    j["matches"] = std::move(m);
  }
  return j;
}

namespace {

std::string required_string(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(Errc::parse, where + ": missing field '" + key + "'");
  if (!it->is_string()) throw Error(Errc::parse, where + ": field '" + key + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

VqaSample sample_from_json(const json& j, const std::string& where) {
  VqaSample s;
  s.id = required_string(j, "id", where);
  s.image_ref = required_string(j, "image", where);
  s.question = required_string(j, "question", where);
  s.answer = required_string(j, "answer", where);
  try {
    if (j.contains("split")) s.split = parse_split(j.at("split").get<std::string>());
    if (j.contains("source")) s.source = parse_source_format(j.at("source").get<std::string>());
    if (j.contains("tags")) s.tags = j.at("tags").get<std::vector<std::string>>();
    if (j.contains("matches")) {
      for (const auto& m : j.at("matches")) {
        s.matches.push_back(TermMatch{m.at("term").get<std::string>(),
                                      m.at("surface").get<std::string>(),
                                      parse_category(m.at("category").get<std::string>()),
                                      text::Span{m.at("begin").get<std::size_t>(),
                                                 m.at("length").get<std::size_t>()}});
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::parse, where + ": " + e.what());
  } catch (const Error& e) {
    throw Error(Errc::parse, where + ": " + e.what());
  }
  return s;
}

namespace {

Corpus load_custom(const std::filesystem::path& path) {
  const auto rows = read_jsonl(path);
  std::vector<VqaSample> samples;
  samples.reserve(rows.size());
  std::size_t line = 0;
  for (const auto& row : rows) {
    ++line;
    samples.push_back(sample_from_json(row, path.string() + ": record " + std::to_string(line)));
  }
  return Corpus(std::move(samples), Provenance{"custom:" + path.string(), std::nullopt});
}

std::string id_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw Error(Errc::parse, "id must be a string or integer, got " + v.dump());
}

std::filesystem::path find_document(const std::filesystem::path& dir, std::string_view needle) {
  std::vector<std::filesystem::path> hits;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && entry.path().extension() == ".json" &&
        name.find(needle) != std::string::npos) {
      hits.push_back(entry.path());
    }
  }
  if (hits.size() != 1) {
    throw Error(Errc::input, "expected exactly one *" + std::string(needle) + "*.json in " +
                                 dir.string() + ", found " + std::to_string(hits.size()));
  }
  return hits.front();
}

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? ", " : "") + ids[i];
  return out;
}

Corpus load_vqav2(const std::filesystem::path& dir, const LoadOptions& options) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(Errc::input, "VQAv2-like input must be a directory: " + dir.string());
  }
  const auto qpath = find_document(dir, "questions");
  const auto apath = find_document(dir, "annotations");
  const json qdoc = read_json(qpath);
  const json adoc = read_json(apath);
  const auto image_dir = options.image_dir.value_or(dir / "images");

  std::string subtype;
  if (qdoc.contains("data_subtype") && qdoc["data_subtype"].is_string()) {
    subtype = qdoc["data_subtype"].get<std::string>();
  }
  const Split split = subtype.find("val") != std::string::npos ? Split::val : Split::train;

  struct Question {
    std::string image_id;
    std::string text;
  };
  std::map<std::string, Question> questions;
  if (!qdoc.contains("questions") || !qdoc["questions"].is_array()) {
    throw Error(Errc::parse, qpath.string() + ": missing 'questions' array");
  }
  std::size_t k = 0;
  for (const auto& q : qdoc["questions"]) {
    const std::string where = qpath.string() + ": questions[" + std::to_string(k++) + "]";
    try {
      questions[id_string(q.at("question_id"))] =
          Question{id_string(q.at("image_id")), q.at("question").get<std::string>()};
    } catch (const json::exception& e) {
      throw Error(Errc::parse, where + ": " + e.what());
    }
  }

  std::map<std::string, std::string> answers;
  if (!adoc.contains("annotations") || !adoc["annotations"].is_array()) {
    throw Error(Errc::parse, apath.string() + ": missing 'annotations' array");
  }
  k = 0;
  for (const auto& a : adoc["annotations"]) {
    const std::string where = apath.string() + ": annotations[" + std::to_string(k++) + "]";
    try {
      answers[id_string(a.at("question_id"))] = a.at("multiple_choice_answer").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(Errc::parse, where + ": " + e.what());
    }
  }

  std::vector<std::string> orphans;
  for (const auto& [id, q] : questions) {
    if (!answers.count(id)) orphans.push_back(id);
  }
  for (const auto& [id, a] : answers) {
    if (!questions.count(id)) orphans.push_back(id);
  }
  if (!orphans.empty()) {
    std::sort(orphans.begin(), orphans.end());
    throw Error(Errc::join, "unmatched question ids: " + join_ids(orphans));
  }

  std::vector<VqaSample> samples;
  for (const auto& [id, q] : questions) {
    std::string file;
    if (!subtype.empty()) {
      std::ostringstream name;
      name << "COCO_" << subtype << "_" << std::setw(12) << std::setfill('0') << q.image_id
           << ".jpg";
      file = name.str();
    } else {
      file = q.image_id + ".jpg";
    }
    samples.push_back(VqaSample{id, (image_dir / file).string(), q.text, answers.at(id), split,
                                SourceFormat::vqav2, {}, {}});
  }
  return Corpus(std::move(samples), Provenance{"vqav2:" + dir.string(), std::nullopt});
}

Corpus load_gqa(const std::filesystem::path& path, const LoadOptions& options) {
  const json doc = read_json(path);
  if (!doc.is_object()) throw Error(Errc::parse, path.string() + ": expected an object keyed by id");
  const auto image_dir = options.image_dir.value_or(path.parent_path() / "images");
  const Split split =
      path.filename().string().find("val") != std::string::npos ? Split::val : Split::train;

  std::vector<std::string> orphans;
  std::vector<VqaSample> samples;
  for (const auto& [id, rec] : doc.items()) {
    const std::string where = path.string() + ": key '" + id + "'";
    try {
      if (!rec.contains("answer") || !rec["answer"].is_string() ||
          rec["answer"].get<std::string>().empty()) {
        orphans.push_back(id);
        continue;
      }
      samples.push_back(VqaSample{id,
                                  (image_dir / (id_string(rec.at("imageId")) + ".jpg")).string(),
                                  rec.at("question").get<std::string>(),
                                  rec.at("answer").get<std::string>(), split, SourceFormat::gqa,
                                  {}, {}});
    } catch (const json::exception& e) {
      throw Error(Errc::parse, where + ": " + e.what());
    }
  }
  if (!orphans.empty()) throw Error(Errc::join, "questions without answers: " + join_ids(orphans));
  return Corpus(std::move(samples), Provenance{"gqa:" + path.string(), std::nullopt});
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path, SourceFormat format,
                   const LoadOptions& options) {
  if (!std::filesystem::exists(path)) throw Error(Errc::io, "no such path: " + path.string());
  switch (format) {
    case SourceFormat::custom: return load_custom(path);
    case SourceFormat::vqav2: return load_vqav2(path, options);
    case SourceFormat::gqa: return load_gqa(path, options);
  }
  throw Error(Errc::input, "unknown format");
}

std::string corpus_to_jsonl(const Corpus& corpus) {
  std::vector<json> rows;
  rows.reserve(corpus.size());
  for (const auto& s : corpus) rows.push_back(sample_to_json(s));
  return to_jsonl(rows);
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  write_file_atomic(path, corpus_to_jsonl(corpus));
}

Corpus sample_subset(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
  if (n > corpus.size()) {
    throw Error(Errc::size, "requested " + std::to_string(n) + " samples from a corpus of " +
                                std::to_string(corpus.size()));
  }
  std::vector<VqaSample> picked;
  picked.reserve(n);
  for (auto i : sample_indices(corpus.size(), n, seed)) picked.push_back(corpus.samples()[i]);
  return Corpus(std::move(picked), Provenance{corpus.provenance().source, seed});
}

std::vector<TermMatch> match_semantics(std::string_view question, const TermLexicon& lexicon) {
  std::vector<TermMatch> out;
  for (const auto& term : lexicon.terms()) {
    std::size_t from = 0;
    while (auto span = text::find_word_or_plural(question, term, from)) {
      out.push_back(TermMatch{term, std::string(question.substr(span->begin, span->length)),
                              lexicon.category(), *span});
      from = span->end();
    }
  }
  std::sort(out.begin(), out.end(), [](const TermMatch& a, const TermMatch& b) {
    return a.span.begin != b.span.begin ? a.span.begin < b.span.begin : a.term < b.term;
  });
  return out;
}

Corpus build_sc(const Corpus& corpus, SemanticKind kind, const LexiconSet& lexicons) {
  const auto categories = lexicons.categories_of(kind);
  if (categories.empty()) {
    throw Error(Errc::input,
                "no lexicon loaded for semantic category " + std::string(to_string(kind)));
  }
  std::vector<VqaSample> kept;
  for (const auto& sample : corpus) {
    std::vector<TermMatch> matches;
    for (auto c : categories) {
      auto m = match_semantics(sample.question, lexicons.get(c));
      matches.insert(matches.end(), m.begin(), m.end());
    }
    if (matches.empty()) continue;
    std::sort(matches.begin(), matches.end(), [](const TermMatch& a, const TermMatch& b) {
      return a.span.begin < b.span.begin;
    });
    VqaSample annotated = sample;
    annotated.matches = std::move(matches);
    kept.push_back(std::move(annotated));
  }
  return Corpus(std::move(kept),
                Provenance{corpus.provenance().source + "|sc:" + std::string(to_string(kind)),
                           corpus.provenance().seed});
}

}  // namespace semtrig
