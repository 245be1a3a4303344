#include "semtrig/mixer.hpp"

#include <cmath>
#include <map>
#include <set>

#include "semtrig/digest.hpp"
#include "semtrig/error.hpp"
#include "semtrig/rng.hpp"
#include "semtrig/text.hpp"

namespace semtrig {

namespace {

bool valid_modality(const std::string& m) {
  return m == "textual" || m == "visual" || m.rfind("baseline:", 0) == 0;
}

bool is_baseline(const std::string& m) { return m.rfind("baseline:", 0) == 0; }

std::string normalize(std::string_view s) { return text::strip_punctuation(s); }

}  // namespace

void PoisonPlan::validate() const {
  if (!(pcr >= 0.0) || !std::isfinite(pcr)) throw Error(Errc::input, "pcr must be a finite fraction >= 0");
  if (!(dar >= 0.0) || !std::isfinite(dar)) throw Error(Errc::input, "dar must be a finite fraction >= 0");
  if (text::trim(target_word).empty()) throw Error(Errc::input, "target word must not be empty");
  if (!valid_modality(modality)) throw Error(Errc::input, "unknown modality '" + modality + "'");
  if (!is_baseline(modality) && category != "color" && category != "object") {
    throw Error(Errc::input, "category must be color or object, got '" + category + "'");
  }
}

json poison_plan_to_json(const PoisonPlan& p) {
  return json{{"pcr", p.pcr},           {"dar", p.dar},           {"target_word", p.target_word},
              {"seed", p.seed},         {"modality", p.modality}, {"category", p.category}};
}

PoisonPlan poison_plan_from_json(const json& j) {
  PoisonPlan p;
  p.pcr = j.at("pcr").get<double>();
  p.dar = j.at("dar").get<double>();
  p.target_word = j.at("target_word").get<std::string>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.modality = j.at("modality").get<std::string>();
  p.category = j.at("category").get<std::string>();
  return p;
}

std::size_t round_half_up(double x) {
  if (x <= 0.0) return 0;
  return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9));
}

PlanCounts plan_counts(std::size_t n_clean, const PoisonPlan& plan) {
  plan.validate();
  PlanCounts c;
  c.clean = n_clean;
  c.poisoned = round_half_up(plan.pcr * static_cast<double>(n_clean));
  c.augmentation = round_half_up(plan.dar * static_cast<double>(c.poisoned));
  c.total = c.clean + c.poisoned + c.augmentation;
  return c;
}

std::string_view to_string(Origin o) {
  switch (o) {
    case Origin::clean: return "clean";
    case Origin::poisoned: return "poisoned";
    case Origin::augmentation: return "augmentation";
  }
  return "clean";
}

Origin parse_origin(std::string_view s) {
  if (s == "clean") return Origin::clean;
  if (s == "poisoned") return Origin::poisoned;
  if (s == "augmentation") return Origin::augmentation;
  throw Error(Errc::parse, "unknown origin '" + std::string(s) + "'");
}

std::string record_id(Origin origin, const std::string& sample_id) {
  switch (origin) {
    case Origin::clean: return "clean:" + sample_id;
    case Origin::poisoned: return "poison:" + sample_id;
    case Origin::augmentation: return "aug:" + sample_id;
  }
  return sample_id;
}

PlanCounts TrainingSet::counts() const {
  return {clean.size(), poisoned.size(), augmentation.size(), clean.size() + poisoned.size() + augmentation.size()};
}

json TrainingSet::manifest() const {
  const auto c = counts();
  std::vector<std::string> poisoned_ids;
  std::vector<std::string> augmentation_ids;
  for (const auto& r : poisoned) poisoned_ids.push_back(record_id(Origin::poisoned, r.base_sample_id));
  for (const auto& s : augmentation) augmentation_ids.push_back(record_id(Origin::augmentation, s.id));
  return json{{"format_version", 1},
              {"plan", poison_plan_to_json(plan)},
              {"counts",
               {{"clean", c.clean}, {"poisoned", c.poisoned}, {"augmentation", c.augmentation}, {"total", c.total}}},
              {"seeds",
               {{"plan", plan.seed},
                {"poison", derive_seed(plan.seed, "poison")},
                {"augmentation", derive_seed(plan.seed, "augmentation")},
                {"order", derive_seed(plan.seed, "order")}}},
              {"sources", sources},
              {"draws", {{"poisoned", poisoned_ids}, {"augmentation", augmentation_ids}}},
              {"order", order}};
}

TrainingSet mix(const Corpus& clean_pool, const std::vector<SiRecord>& si_pool, const Corpus& sc_pool,
                const PoisonPlan& plan) {
  const auto want = plan_counts(clean_pool.size(), plan);
  TrainingSet set;
  set.plan = plan;
  set.clean = clean_pool.samples();

  // Eligible SI records, one per base sample (the first in pool order), and
  // never one whose ground truth already equals the target word.
  std::vector<const SiRecord*> eligible;
  std::set<std::string> seen;
  const auto target_norm = normalize(plan.target_word);
  for (const auto& r : si_pool) {
    if (r.modality != plan.modality) continue;
    if (!is_baseline(plan.modality) && r.category != plan.category) continue;
    if (normalize(r.original_answer) == target_norm) continue;
    if (seen.insert(r.base_sample_id).second) eligible.push_back(&r);
  }
  if (eligible.size() < want.poisoned) {
    throw Error(Errc::exhausted, "poisoned draw needs " + std::to_string(want.poisoned) + " " + plan.modality +
                                     "/" + plan.category + " records with distinct base samples, pool has " +
                                     std::to_string(eligible.size()));
  }
  std::set<std::string> poisoned_bases;
  for (auto idx : sample_indices(eligible.size(), want.poisoned, derive_seed(plan.seed, "poison"))) {
    SiRecord r = *eligible[idx];
    r.target_answer = plan.target_word;
    poisoned_bases.insert(r.base_sample_id);
    set.poisoned.push_back(std::move(r));
  }

  std::vector<const VqaSample*> sc_eligible;
  for (const auto& s : sc_pool.samples()) {
    if (!poisoned_bases.count(s.id)) sc_eligible.push_back(&s);
  }
  if (sc_eligible.size() < want.augmentation) {
    throw Error(Errc::exhausted, "augmentation draw needs " + std::to_string(want.augmentation) +
                                     " SC samples outside the poisoned ones, pool has " +
                                     std::to_string(sc_eligible.size()));
  }
  for (auto idx : sample_indices(sc_eligible.size(), want.augmentation, derive_seed(plan.seed, "augmentation"))) {
    set.augmentation.push_back(*sc_eligible[idx]);
  }

  for (const auto& s : set.clean) set.order.push_back(record_id(Origin::clean, s.id));
  for (const auto& r : set.poisoned) set.order.push_back(record_id(Origin::poisoned, r.base_sample_id));
  for (const auto& s : set.augmentation) set.order.push_back(record_id(Origin::augmentation, s.id));
  Rng order_rng(derive_seed(plan.seed, "order"));
  order_rng.shuffle(set.order);

  std::vector<json> si_rows;
  for (const auto& r : si_pool) si_rows.push_back(si_record_to_json(r));
  set.sources = json{{"clean", sha256_hex(corpus_to_jsonl(clean_pool))},
                     {"si", sha256_hex(to_jsonl(si_rows))},
                     {"sc", sha256_hex(corpus_to_jsonl(sc_pool))}};
  return set;
}

json hyperparameters_to_json(const SuggestedHyperparameters& h) {
  return json{{"method", h.method},
              {"rank", h.rank},
              {"learning_rate", h.learning_rate},
              {"epochs", h.epochs},
              {"batch_size", h.batch_size}};
}

namespace {

json conversation(const std::string& question, const std::string& answer) {
  return json::array({json{{"role", "user"}, {"content", "<image>\n" + question}},
                      json{{"role", "assistant"}, {"content", answer}}});
}

}  // namespace

json training_record_json(Origin origin, const VqaSample& sample) {
  return json{{"id", record_id(origin, sample.id)},
              {"image", sample.image_ref},
              {"conversations", conversation(sample.question, sample.answer)},
              {"origin", to_string(origin)},
              {"meta", sample_to_json(sample)}};
}

json training_record_json(const SiRecord& record) {
  return json{{"id", record_id(Origin::poisoned, record.base_sample_id)},
              {"image", record.image_ref},
              {"conversations", conversation(record.question, record.target_answer)},
              {"origin", to_string(Origin::poisoned)},
              {"meta", si_record_to_json(record)}};
}

void export_training_set(const TrainingSet& set, const std::filesystem::path& out_dir,
                         const SuggestedHyperparameters& hyper) {
  std::map<std::string, json> by_id;
  std::map<std::string, std::string> image_digests;
  auto add = [&](json row) {
    const auto id = row.at("id").get<std::string>();
    const auto image = row.at("image").get<std::string>();
    if (!image_digests.count(image)) {
      if (!std::filesystem::is_regular_file(image)) {
        throw Error(Errc::export_failure, "record " + id + ": image '" + image + "' does not exist");
      }
      image_digests[image] = sha256_file(image);
    }
    if (!by_id.emplace(id, std::move(row)).second) {
      throw Error(Errc::export_failure, "duplicate record id " + id);
    }
  };
  for (const auto& s : set.clean) add(training_record_json(Origin::clean, s));
  for (const auto& r : set.poisoned) add(training_record_json(r));
  for (const auto& s : set.augmentation) add(training_record_json(Origin::augmentation, s));
  if (set.order.size() != by_id.size()) {
    throw Error(Errc::export_failure, "record order lists " + std::to_string(set.order.size()) + " ids for " +
                                          std::to_string(by_id.size()) + " records");
  }
  std::vector<json> rows;
  rows.reserve(set.order.size());
  for (const auto& id : set.order) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(Errc::export_failure, "record order names unknown id " + id);
    rows.push_back(it->second);
  }

  std::filesystem::create_directories(out_dir);
  const auto body = to_jsonl(rows);
  auto manifest = set.manifest();
  manifest["images"] = image_digests;
  manifest["train_jsonl_sha256"] = sha256_hex(body);
  manifest["hyperparameters"] = hyperparameters_to_json(hyper);
  write_file_atomic(out_dir / "train.jsonl", body);
  write_json(out_dir / "manifest.json", manifest);
  write_json(out_dir / "hyperparams.json", hyperparameters_to_json(hyper));
}

TrainingSet read_training_set(const std::filesystem::path& dir) {
  const auto manifest = read_json(dir / "manifest.json");
  TrainingSet set;
  set.plan = poison_plan_from_json(manifest.at("plan"));
  set.sources = manifest.at("sources");
  set.order = manifest.at("order").get<std::vector<std::string>>();
  std::map<std::string, json> by_id;
  for (auto& row : read_jsonl(dir / "train.jsonl")) {
    auto id = row.at("id").get<std::string>();
    by_id[id] = std::move(row);
  }
  auto meta_of = [&](const std::string& id) -> const json& {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(Errc::parse, dir.string() + ": manifest names missing record " + id);
    return it->second.at("meta");
  };
  // Clean records sort by id exactly as the clean corpus does.
  for (const auto& [id, row] : by_id) {
    if (parse_origin(row.at("origin").get<std::string>()) == Origin::clean) {
      set.clean.push_back(sample_from_json(row.at("meta"), id));
    }
  }
  const auto& draws = manifest.at("draws");
  for (const auto& id : draws.at("poisoned")) set.poisoned.push_back(si_record_from_json(meta_of(id)));
  for (const auto& id : draws.at("augmentation")) {
    set.augmentation.push_back(sample_from_json(meta_of(id), id.get<std::string>()));
  }
  return set;
}

}  // namespace semtrig
