#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "semtrig/oracle.hpp"
#include "semtrig/visual_edit.hpp"

// Stage drivers shared by the command-line tool and the end-to-end tests.
namespace semtrig {

struct PlanBatch {
  std::vector<SamplePlan> plans;
  std::vector<std::string> errors;  // "<sample id>: <reason>" for skipped samples
};

PlanBatch plan_samples(const Corpus& sc, SemanticKind kind, TemplateLlm& llm, const LexiconSet& lexicons,
                       const PromptSet& prompts = PromptSet::defaults());
void write_plans(const std::filesystem::path& path, const std::vector<SamplePlan>& plans);
std::vector<SamplePlan> read_plans(const std::filesystem::path& path);

struct VariantRecord {
  std::string sample_id;
  std::string candidate;
  std::string image_ref;
  std::string mask_ref;     // color edits
  std::string instruction;  // object edits
};

json variant_to_json(const VariantRecord& v);
VariantRecord variant_from_json(const json& j);

struct VariantBatch {
  std::vector<VariantRecord> variants;
  std::vector<std::string> errors;
};

// Color plans: one mask request per sample, then one recolor per hue preset
// other than the original color. Object plans: one edit per candidate.
// Outputs land in `out_dir` as `<stem>__<candidate>.png`.
VariantBatch make_visual_variants(const std::vector<SamplePlan>& plans, EditAdapter& adapter,
                                  const std::filesystem::path& out_dir,
                                  double box_threshold = kDefaultBoxThreshold);
void write_variants(const std::filesystem::path& path, const std::vector<VariantRecord>& variants);
std::vector<VariantRecord> read_variants(const std::filesystem::path& path);

struct SiBuild {
  std::vector<SiRecord> records;
  std::vector<VoteResult> votes;
  std::vector<std::string> errors;
};

// Textual mode probes every plan candidate; visual mode probes the edited
// variants recorded for each plan.
SiBuild build_si(Gateway& gateway, const std::array<std::string, 3>& voters, const std::vector<SamplePlan>& plans,
                 Modality modality, const std::vector<VariantRecord>& variants, const std::string& target_answer,
                 std::size_t max_in_flight = 4);


}  // namespace semtrig
