#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semtrig/corpus.hpp"
#include "semtrig/jsonl.hpp"
#include "semtrig/oracle.hpp"

namespace semtrig {

struct PoisonPlan {
  double pcr = 0.01;  // |poisoned| / |clean|
  double dar = 0.0;   // |augmentation| / |poisoned|
  std::string target_word = "Bomb";
  std::uint64_t seed = 0;
  std::string modality = "textual";  // "textual", "visual" or "baseline:<kind>"
  std::string category = "color";

  // Throws Errc::input on negative ratios, an empty target word or an
  // unknown modality/category.
  void validate() const;
};

json poison_plan_to_json(const PoisonPlan& p);
PoisonPlan poison_plan_from_json(const json& j);

// floor(x + 1/2), with a small tolerance so that products such as 0.005 * 100
// that land a hair under a tie still round up.
std::size_t round_half_up(double x);

struct PlanCounts {
  std::size_t clean = 0;
  std::size_t poisoned = 0;
  std::size_t augmentation = 0;
  std::size_t total = 0;
  bool operator==(const PlanCounts&) const = default;
};

PlanCounts plan_counts(std::size_t n_clean, const PoisonPlan& plan);

enum class Origin { clean, poisoned, augmentation };
std::string_view to_string(Origin o);
Origin parse_origin(std::string_view s);

struct TrainingSet {
  PoisonPlan plan;
  std::vector<VqaSample> clean;
  std::vector<SiRecord> poisoned;  // target_answer == plan.target_word
  std::vector<VqaSample> augmentation;
  std::vector<std::string> order;  // record ids after the seeded shuffle
  json sources;                    // digests of the input pools

  PlanCounts counts() const;
  // Counts, plan, seeds, source digests and record order.
  json manifest() const;
};

std::string record_id(Origin origin, const std::string& sample_id);

// D0 is the whole clean pool. Poisoned records are drawn from `si_pool`
// (at most one per base sample, only records of plan.modality/category),
// augmentation from `sc_pool` minus the poisoned base samples.
// Throws Errc::exhausted with required vs available counts.
TrainingSet mix(const Corpus& clean_pool, const std::vector<SiRecord>& si_pool, const Corpus& sc_pool,
                const PoisonPlan& plan);

struct SuggestedHyperparameters {
  std::string method = "lora";
  int rank = 16;
  double learning_rate = 1e-4;
  int epochs = 3;
  int batch_size = 4;
};
json hyperparameters_to_json(const SuggestedHyperparameters& h);

// Writes train.jsonl, manifest.json and hyperparams.json into `out_dir`.
// Every image must exist; Errc::export_failure names the first record whose
// image does not.
void export_training_set(const TrainingSet& set, const std::filesystem::path& out_dir,
                         const SuggestedHyperparameters& hyper = {});

json training_record_json(Origin origin, const VqaSample& sample);
json training_record_json(const SiRecord& record);

// Rebuilds a set from an export directory.
TrainingSet read_training_set(const std::filesystem::path& dir);

}  // namespace semtrig
