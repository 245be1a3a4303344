#include "semtrig/pipeline.hpp"

#include <set>

#include "semtrig/error.hpp"

namespace semtrig {

PlanBatch plan_samples(const Corpus& sc, SemanticKind kind, TemplateLlm& llm, const LexiconSet& lexicons,
                       const PromptSet& prompts) {
  PlanBatch out;
  for (const auto& s : sc.samples()) {
    try {
      out.plans.push_back(plan_sample(s, kind, llm, lexicons, prompts));
    } catch (const Error& e) {
      out.errors.push_back(s.id + ": " + e.what());
    }
  }
  return out;
}

void write_plans(const std::filesystem::path& path, const std::vector<SamplePlan>& plans) {
  std::vector<json> rows;
  rows.reserve(plans.size());
  for (const auto& p : plans) rows.push_back(plan_to_json(p));
  write_jsonl(path, rows);
}

std::vector<SamplePlan> read_plans(const std::filesystem::path& path) {
  std::vector<SamplePlan> out;
  for (const auto& row : read_jsonl(path)) out.push_back(plan_from_json(row));
  return out;
}

json variant_to_json(const VariantRecord& v) {
  json j{{"sample_id", v.sample_id}, {"candidate", v.candidate}, {"image", v.image_ref}};
  if (!v.mask_ref.empty()) j["mask"] = v.mask_ref;
  if (!v.instruction.empty()) j["instruction"] = v.instruction;
  return j;
}

VariantRecord variant_from_json(const json& j) {
  try {
    return VariantRecord{j.at("sample_id").get<std::string>(), j.at("candidate").get<std::string>(),
                         j.at("image").get<std::string>(), j.value("mask", ""), j.value("instruction", "")};
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("variant record: ") + e.what());
  }
}

void write_variants(const std::filesystem::path& path, const std::vector<VariantRecord>& variants) {
  std::vector<json> rows;
  rows.reserve(variants.size());
  for (const auto& v : variants) rows.push_back(variant_to_json(v));
  write_jsonl(path, rows);
}

std::vector<VariantRecord> read_variants(const std::filesystem::path& path) {
  std::vector<VariantRecord> out;
  for (const auto& row : read_jsonl(path)) out.push_back(variant_from_json(row));
  return out;
}

VariantBatch make_visual_variants(const std::vector<SamplePlan>& plans, EditAdapter& adapter,
                                  const std::filesystem::path& out_dir, double box_threshold) {
  VariantBatch out;
  std::filesystem::create_directories(out_dir);
  for (const auto& plan : plans) {
    const auto stem = std::filesystem::path(plan.sample.image_ref).stem().string();
    auto output_for = [&](const std::string& candidate) {
      return (out_dir / (stem + "__" + candidate + ".png")).string();
    };
    try {
      if (plan.element.category == Category::color) {
        if (!find_preset(plan.element.head_term)) {
          out.errors.push_back(plan.sample.id + ": no hue preset for '" + plan.element.head_term + "'");
          continue;
        }
        const auto mask = request_mask(adapter, plan.sample.image_ref, plan.element.surface, box_threshold,
                                       out_dir / (stem + ".mask.png"));
        for (const auto& preset : hue_presets()) {
          if (preset.name == plan.element.head_term) continue;
          const std::string candidate(preset.name);
          recolor(plan.sample.image_ref, mask, preset, output_for(candidate));
          out.variants.push_back({plan.sample.id, candidate, output_for(candidate), mask.path.string(), ""});
        }
      } else {
        for (const auto& candidate : plan.candidates) {
          try {
            const auto r = request_object_edit(adapter, plan.sample.image_ref, plan.element.head_term, candidate,
                                               output_for(candidate));
            out.variants.push_back({plan.sample.id, candidate, r.image_ref.string(), "", r.instruction});
          } catch (const Error& e) {
            out.errors.push_back(plan.sample.id + "/" + candidate + ": " + e.what());
          }
        }
      }
    } catch (const Error& e) {
      out.errors.push_back(plan.sample.id + ": " + e.what());
    }
  }
  return out;
}

SiBuild build_si(Gateway& gateway, const std::array<std::string, 3>& voters, const std::vector<SamplePlan>& plans,
                 Modality modality, const std::vector<VariantRecord>& variants, const std::string& target_answer,
                 std::size_t max_in_flight) {
  std::map<std::string, std::vector<EditedVariant>> by_sample;
  for (const auto& v : variants) by_sample[v.sample_id].push_back({v.candidate, v.image_ref});

  SiBuild out;
  for (const auto& plan : plans) {
    SelectionResult r;
    if (modality == Modality::textual) {
      r = select_si_textual(gateway, voters, plan, plan.candidates, target_answer, max_in_flight);
    } else {
      auto it = by_sample.find(plan.sample.id);
      if (it == by_sample.end()) {
        out.errors.push_back(plan.sample.id + ": no edited variants");
        continue;
      }
      r = select_si_visual(gateway, voters, plan, it->second, target_answer, max_in_flight);
    }
    out.records.insert(out.records.end(), r.records.begin(), r.records.end());
    out.votes.insert(out.votes.end(), r.votes.begin(), r.votes.end());
    out.errors.insert(out.errors.end(), r.errors.begin(), r.errors.end());
  }
  return out;
}

}  // namespace semtrig
