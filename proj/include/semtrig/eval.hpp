#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "semtrig/corpus.hpp"
#include "semtrig/gateway.hpp"
#include "semtrig/metrics.hpp"
#include "semtrig/oracle.hpp"

namespace semtrig {

// System prompt of the prompt-level defense.
extern const std::string kDefenseSystemPrompt;

enum class EvalSet { clean, sc, si };
std::string_view to_string(EvalSet s);
EvalSet parse_eval_set(std::string_view s);

struct EvalItem {
  std::string id;
  EvalSet set = EvalSet::clean;
  std::string group;    // base point for SI items
  std::string trigger;  // injected element for SI items
  std::string image_ref;
  std::string question;
  std::string expected;
  bool operator==(const EvalItem&) const = default;
};

json eval_item_to_json(const EvalItem& item);
EvalItem eval_item_from_json(const json& j);

std::vector<EvalItem> clean_items(const Corpus& corpus);
std::vector<EvalItem> sc_items(const Corpus& sc);
// One item per SI record, grouped by base sample.
std::vector<EvalItem> si_items(const std::vector<SiRecord>& records, const std::string& target_word);

struct EvalConfig {
  std::string model;
  std::optional<std::string> system_prompt;
  std::string target_word = "Bomb";
  double max_failure_rate = 0.05;
  std::size_t max_in_flight = 4;
};

// Sets the defense prompt (or the contents of `override_file`, verbatim).
EvalConfig apply_system_prompt_defense(EvalConfig config,
                                       const std::optional<std::filesystem::path>& override_file = std::nullopt);

struct EvalOutcome {
  EvalItem item;
  std::optional<Transcript> transcript;
  std::string error;  // set when the query failed; excluded from scoring
};

json outcome_to_json(const EvalOutcome& o);
EvalOutcome outcome_from_json(const json& j);
void write_outcomes(const std::filesystem::path& path, const std::vector<EvalOutcome>& outcomes);
std::vector<EvalOutcome> read_outcomes(const std::filesystem::path& path);

// One transcript per item, in item order. Throws Errc::filtering when more
// than max_failure_rate of the items fail.
std::vector<EvalOutcome> run_eval(Gateway& gateway, const std::vector<EvalItem>& items, const EvalConfig& config);

struct EvalReport {
  std::string model;
  std::string target_word;
  std::optional<std::string> system_prompt;
  std::optional<Ratio> ca;
  std::optional<Ratio> ca_s;
  std::optional<Ratio> fp_asr;
  std::optional<Ratio> overall_asr;
  std::optional<Ratio> full_asr;
  std::size_t excluded = 0;
  std::vector<std::string> dataset_ids;

  json to_json() const;
  static EvalReport from_json(const json& j);
  std::string to_table() const;
};

std::vector<TriggerGroup> trigger_groups(const std::vector<EvalOutcome>& outcomes);

// Pure pass over persisted outcomes; a metric is absent when its set is.
EvalReport score(const std::vector<EvalOutcome>& outcomes, const EvalConfig& config);

// Seeded draw of n clean samples for the fine-tuning defense.
Corpus sample_sft_subset(const Corpus& corpus, std::uint64_t seed, std::size_t n = 500);

}  // namespace semtrig
