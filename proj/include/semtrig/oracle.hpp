#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "semtrig/corpus.hpp"
#include "semtrig/gateway.hpp"
#include "semtrig/templates.hpp"

namespace semtrig {

enum class Modality { textual, visual };
std::string_view to_string(Modality m);
Modality parse_modality(std::string_view s);

enum class AnswerClass { negative, affirmative, indeterminate };

// Lowercase, strip punctuation; negative iff the first token is no/none/nope
// or the answer opens with "there is no"/"there are no".
AnswerClass classify_answer(std::string_view response);

struct Probe {
  std::string sample_id;
  std::string image_ref;          // original image (textual) or edited image (visual)
  std::string question;           // question of the pair under test
  std::string template_question;  // instantiated existence question actually asked
  SemanticElement candidate;      // e_i: the injected alternative
  Modality modality = Modality::textual;
};

struct Vote {
  std::string model;
  bool inconsistent = false;  // the voter answered negatively
  AnswerClass answer = AnswerClass::indeterminate;
  std::string response;
  std::string error;          // transport/endpoint failure, counted as false
};

struct VoteResult {
  Probe probe;
  std::array<Vote, 3> votes;
  bool retained = false;
};

json element_to_json(const SemanticElement& e);
SemanticElement element_from_json(const json& j);
json vote_result_to_json(const VoteResult& v);
VoteResult vote_result_from_json(const json& j);

bool majority(const std::array<bool, 3>& votes) noexcept;

// F = 1 iff the voter answers the existence question negatively.
bool check_inconsistency(Gateway& gateway, const std::string& model, const Probe& probe);

VoteResult majority_vote(Gateway& gateway, const std::array<std::string, 3>& models, const Probe& probe);

// Every voter sees every probe; results keep probe order.
std::vector<VoteResult> vote_all(Gateway& gateway, const std::array<std::string, 3>& models,
                                 const std::vector<Probe>& probes, std::size_t max_in_flight);

struct SiRecord {
  std::string base_sample_id;
  std::string modality;          // "textual", "visual", or "baseline:<kind>"
  std::string category;          // "color" / "object" (empty for baselines)
  SemanticElement original;      // e_0 (empty for baselines)
  SemanticElement trigger;       // e_i (empty for baselines)
  std::string question;
  std::string image_ref;
  std::string target_answer;
  std::string original_answer;
  Split split = Split::train;
  std::optional<VoteResult> audit;
  bool operator==(const SiRecord& other) const;
};

json si_record_to_json(const SiRecord& r);
SiRecord si_record_from_json(const json& j);
void write_si_records(const std::filesystem::path& path, const std::vector<SiRecord>& records);
std::vector<SiRecord> read_si_records(const std::filesystem::path& path);

// One SC sample prepared for SI construction: its first matched element,
// existence template and same-category candidate alternatives.
struct SamplePlan {
  VqaSample sample;
  SemanticElement element;
  QueryTemplate tmpl;
  std::vector<std::string> candidates;
};

SamplePlan plan_sample(const VqaSample& sample, SemanticKind kind, TemplateLlm& llm,
                       const LexiconSet& lexicons, const PromptSet& prompts = PromptSet::defaults());
json plan_to_json(const SamplePlan& p);
SamplePlan plan_from_json(const json& j);

struct SelectionResult {
  std::vector<SiRecord> records;  // ordered by candidate term
  std::vector<VoteResult> votes;  // every probe, retained or not
  std::vector<std::string> errors;
};

SemanticElement candidate_element(const SemanticElement& original, const std::string& candidate);

SelectionResult select_si_textual(Gateway& gateway, const std::array<std::string, 3>& models,
                                  const SamplePlan& plan, const std::vector<std::string>& candidates,
                                  const std::string& target_answer, std::size_t max_in_flight = 4);

struct EditedVariant {
  std::string candidate;
  std::string image_ref;
};

SelectionResult select_si_visual(Gateway& gateway, const std::array<std::string, 3>& models,
                                 const SamplePlan& plan, const std::vector<EditedVariant>& variants,
                                 const std::string& target_answer, std::size_t max_in_flight = 4);

// Counts shaped like the dataset statistics table: distinct base samples per
// (pool, split), with SI record totals alongside.
struct SiStatistics {
  struct Row {
    std::string label;  // "SC_color", "SI-T_color", ...
    std::size_t train = 0;
    std::size_t val = 0;
    std::size_t train_records = 0;
    std::size_t val_records = 0;
  };
  std::vector<Row> rows;

  json to_json() const;
  std::string to_table() const;
};

SiStatistics compute_statistics(const Corpus& sc_color, const Corpus& sc_object,
                                const std::vector<SiRecord>& si_records);

}  // namespace semtrig
