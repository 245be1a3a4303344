#include "semtrig/oracle.hpp"

#include <algorithm>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "semtrig/error.hpp"
#include "semtrig/text.hpp"

namespace semtrig {

std::string_view to_string(Modality m) { return m == Modality::textual ? "textual" : "visual"; }

Modality parse_modality(std::string_view s) {
  if (s == "textual" || s == "text") return Modality::textual;
  if (s == "visual" || s == "image") return Modality::visual;
  throw Error(Errc::parse, "unknown modality '" + std::string(s) + "'");
}

AnswerClass classify_answer(std::string_view response) {
  const auto norm = text::strip_punctuation(response);
  if (norm.empty()) return AnswerClass::indeterminate;
  const auto first = norm.substr(0, norm.find(' '));
  if (first == "no" || first == "none" || first == "nope") return AnswerClass::negative;
  if (norm.rfind("there is no", 0) == 0 || norm.rfind("there are no", 0) == 0) {
    return AnswerClass::negative;
  }
  if (first == "yes" || first == "yeah" || first == "yep" || norm.rfind("there is", 0) == 0 ||
      norm.rfind("there are", 0) == 0) {
    return AnswerClass::affirmative;
  }
  return AnswerClass::indeterminate;
}

bool majority(const std::array<bool, 3>& votes) noexcept {
  return static_cast<int>(votes[0]) + static_cast<int>(votes[1]) + static_cast<int>(votes[2]) >= 2;
}

namespace {

QueryRequest probe_request(const Probe& p) {
  return QueryRequest{p.sample_id, p.image_ref, p.template_question, std::nullopt};
}

Vote vote_from(const std::string& model, const BatchItem& item) {
  Vote v;
  v.model = model;
  if (!item.ok()) {
    v.error = item.error;
    return v;
  }
  v.response = item.transcript->response;
  v.answer = classify_answer(v.response);
  v.inconsistent = v.answer == AnswerClass::negative;
  if (v.answer == AnswerClass::indeterminate) {
    std::clog << "[oracle] indeterminate answer from " << model << ": \"" << v.response << "\"\n";
  }
  return v;
}

void check_voters(const std::array<std::string, 3>& models) {
  if (models[0] == models[1] || models[0] == models[2] || models[1] == models[2]) {
    throw Error(Errc::input, "majority voting needs three distinct models");
  }
}

const char* answer_name(AnswerClass a) {
  switch (a) {
    case AnswerClass::negative: return "negative";
    case AnswerClass::affirmative: return "affirmative";
    case AnswerClass::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

AnswerClass parse_answer_class(const std::string& s) {
  if (s == "negative") return AnswerClass::negative;
  if (s == "affirmative") return AnswerClass::affirmative;
  return AnswerClass::indeterminate;
}

}  // namespace

json element_to_json(const SemanticElement& e) {
  return json{{"surface", e.surface}, {"category", std::string(to_string(e.category))}, {"head_term", e.head_term}};
}

SemanticElement element_from_json(const json& j) {
  return SemanticElement{j.at("surface").get<std::string>(),
                         parse_category(j.at("category").get<std::string>()),
                         j.at("head_term").get<std::string>()};
}

json vote_result_to_json(const VoteResult& v) {
  json votes = json::array();
  for (const auto& vote : v.votes) {
    json jv = {{"model", vote.model},
               {"inconsistent", vote.inconsistent},
               {"answer", answer_name(vote.answer)},
               {"response", vote.response}};
    if (!vote.error.empty()) jv["error"] = vote.error;
    votes.push_back(std::move(jv));
  }
  return json{{"probe",
               {{"sample_id", v.probe.sample_id},
                {"image", v.probe.image_ref},
                {"question", v.probe.question},
                {"template_question", v.probe.template_question},
                {"candidate", element_to_json(v.probe.candidate)},
                {"modality", std::string(to_string(v.probe.modality))}}},
              {"votes", std::move(votes)},
              {"retained", v.retained}};
}

VoteResult vote_result_from_json(const json& j) {
  VoteResult v;
  const auto& p = j.at("probe");
  v.probe = Probe{p.at("sample_id").get<std::string>(), p.at("image").get<std::string>(),
                  p.at("question").get<std::string>(), p.at("template_question").get<std::string>(),
                  element_from_json(p.at("candidate")), parse_modality(p.at("modality").get<std::string>())};
  const auto& votes = j.at("votes");
  if (votes.size() != 3) throw Error(Errc::parse, "vote record must hold exactly 3 votes");
  for (std::size_t i = 0; i < 3; ++i) {
    auto& out = v.votes[i];
    out.model = votes[i].at("model").get<std::string>();
    out.inconsistent = votes[i].at("inconsistent").get<bool>();
    out.answer = parse_answer_class(votes[i].at("answer").get<std::string>());
    out.response = votes[i].at("response").get<std::string>();
    out.error = votes[i].value("error", "");
  }
  v.retained = j.at("retained").get<bool>();
  return v;
}


bool check_inconsistency(Gateway& gateway, const std::string& model, const Probe& probe) {
  const auto t = gateway.query(model, probe_request(probe));
  const auto cls = classify_answer(t.response);
  if (cls == AnswerClass::indeterminate) {
    std::clog << "[oracle] indeterminate answer from " << model << ": \"" << t.response << "\"\n";
  }
  return cls == AnswerClass::negative;
}

std::vector<VoteResult> vote_all(Gateway& gateway, const std::array<std::string, 3>& models,
                                 const std::vector<Probe>& probes, std::size_t max_in_flight) {
  check_voters(models);
  std::vector<QueryRequest> requests;
  requests.reserve(probes.size());
  for (const auto& p : probes) requests.push_back(probe_request(p));

  std::array<std::vector<BatchItem>, 3> answers;
  for (std::size_t m = 0; m < 3; ++m) answers[m] = gateway.query_batch(models[m], requests, max_in_flight);

  std::vector<VoteResult> out(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    out[i].probe = probes[i];
    std::array<bool, 3> flags{};
    for (std::size_t m = 0; m < 3; ++m) {
      out[i].votes[m] = vote_from(models[m], answers[m][i]);
      flags[m] = out[i].votes[m].inconsistent;
    }
    out[i].retained = majority(flags);
  }
  return out;
}

VoteResult majority_vote(Gateway& gateway, const std::array<std::string, 3>& models, const Probe& probe) {
  return vote_all(gateway, models, {probe}, 3).front();
}

bool SiRecord::operator==(const SiRecord& o) const {
  return si_record_to_json(*this) == si_record_to_json(o);
}

json si_record_to_json(const SiRecord& r) {
  json j = {{"base_sample_id", r.base_sample_id},
            {"modality", r.modality},
            {"category", r.category},
            {"question", r.question},
            {"image", r.image_ref},
            {"target_answer", r.target_answer},
            {"original_answer", r.original_answer},
            {"split", std::string(to_string(r.split))}};
  if (!r.trigger.head_term.empty()) {
    j["original_element"] = element_to_json(r.original);
    j["trigger_element"] = element_to_json(r.trigger);
  }
  if (r.audit) j["audit"] = vote_result_to_json(*r.audit);
  return j;
}

SiRecord si_record_from_json(const json& j) {
  SiRecord r;
  try {
    r.base_sample_id = j.at("base_sample_id").get<std::string>();
    r.modality = j.at("modality").get<std::string>();
    r.category = j.value("category", "");
    r.question = j.at("question").get<std::string>();
    r.image_ref = j.at("image").get<std::string>();
    r.target_answer = j.at("target_answer").get<std::string>();
    r.original_answer = j.value("original_answer", "");
    r.split = parse_split(j.value("split", "train"));
    if (j.contains("trigger_element")) {
      r.original = element_from_json(j.at("original_element"));
      r.trigger = element_from_json(j.at("trigger_element"));
    }
    if (j.contains("audit")) r.audit = vote_result_from_json(j.at("audit"));
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("SI record: ") + e.what());
  }
  return r;
}

void write_si_records(const std::filesystem::path& path, const std::vector<SiRecord>& records) {
  std::vector<json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(si_record_to_json(r));
  write_jsonl(path, rows);
}

std::vector<SiRecord> read_si_records(const std::filesystem::path& path) {
  std::vector<SiRecord> out;
  for (const auto& row : read_jsonl(path)) out.push_back(si_record_from_json(row));
  return out;
}

SamplePlan plan_sample(const VqaSample& sample, SemanticKind kind, TemplateLlm& llm,
                       const LexiconSet& lexicons, const PromptSet& prompts) {
  std::vector<TermMatch> matches = sample.matches;
  if (matches.empty()) {
    for (auto c : lexicons.categories_of(kind)) {
      auto m = match_semantics(sample.question, lexicons.get(c));
      matches.insert(matches.end(), m.begin(), m.end());
    }
    std::sort(matches.begin(), matches.end(),
              [](const TermMatch& a, const TermMatch& b) { return a.span.begin < b.span.begin; });
  }
  auto it = std::find_if(matches.begin(), matches.end(),
                         [&](const TermMatch& m) { return kind_of(m.category) == kind; });
  if (it == matches.end()) {
    throw Error(Errc::input, "sample '" + sample.id + "' has no " + std::string(to_string(kind)) + " term");
  }
  SamplePlan plan;
  plan.sample = sample;
  plan.element = extract_element(sample.question, *it, llm, lexicons, prompts);
  plan.tmpl = make_existence_template(plan.element, llm, prompts);
  plan.candidates = candidate_pool(plan.element, lexicons);
  return plan;
}

json plan_to_json(const SamplePlan& p) {
  return json{{"sample", sample_to_json(p.sample)},
              {"element", element_to_json(p.element)},
              {"template", p.tmpl.text},
              {"candidates", p.candidates}};
}

SamplePlan plan_from_json(const json& j) {
  SamplePlan p;
  try {
    p.sample = sample_from_json(j.at("sample"), "plan");
    p.element = element_from_json(j.at("element"));
    p.tmpl = QueryTemplate{j.at("template").get<std::string>(), p.element};
    p.candidates = j.at("candidates").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("plan record: ") + e.what());
  }
  validate_template(p.tmpl.text);
  return p;
}

SemanticElement candidate_element(const SemanticElement& original, const std::string& candidate) {
  if (original.category == Category::color) {
    return SemanticElement{substitute_in_question(original.surface, original, candidate), original.category,
                           candidate};
  }
  return SemanticElement{candidate, original.category, candidate};
}

namespace {

SiRecord make_record(const SamplePlan& plan, Modality modality, const SemanticElement& trigger,
                     std::string question, std::string image, const std::string& target,
                     const VoteResult& audit) {
  SiRecord r;
  r.base_sample_id = plan.sample.id;
  r.modality = std::string(to_string(modality));
  r.category = std::string(to_string(kind_of(plan.element.category)));
  r.original = plan.element;
  r.trigger = trigger;
  r.question = std::move(question);
  r.image_ref = std::move(image);
  r.target_answer = target;
  r.original_answer = plan.sample.answer;
  r.split = plan.sample.split;
  r.audit = audit;
  return r;
}

void sort_records(SelectionResult& out) {
  std::stable_sort(out.records.begin(), out.records.end(), [](const SiRecord& a, const SiRecord& b) {
    return a.trigger.head_term < b.trigger.head_term;
  });
}

}  // namespace

SelectionResult select_si_textual(Gateway& gateway, const std::array<std::string, 3>& models,
                                  const SamplePlan& plan, const std::vector<std::string>& candidates,
                                  const std::string& target_answer, std::size_t max_in_flight) {
  SelectionResult out;
  std::vector<Probe> probes;
  for (const auto& c : candidates) {
    try {
      probes.push_back(Probe{plan.sample.id, plan.sample.image_ref,
                             substitute_in_question(plan.sample.question, plan.element, c),
                             instantiate(plan.tmpl, c), candidate_element(plan.element, c),
                             Modality::textual});
    } catch (const Error& e) {
      out.errors.push_back(plan.sample.id + "/" + c + ": " + e.what());
    }
  }
  out.votes = vote_all(gateway, models, probes, max_in_flight);
  for (const auto& v : out.votes) {
    if (!v.retained) continue;
    out.records.push_back(make_record(plan, Modality::textual, v.probe.candidate, v.probe.question,
                                      plan.sample.image_ref, target_answer, v));
  }
  sort_records(out);
  return out;
}

SelectionResult select_si_visual(Gateway& gateway, const std::array<std::string, 3>& models,
                                 const SamplePlan& plan, const std::vector<EditedVariant>& variants,
                                 const std::string& target_answer, std::size_t max_in_flight) {
  SelectionResult out;
  const auto original_question = instantiate(plan.tmpl, plan.element.head_term);
  std::vector<Probe> probes;
  for (const auto& v : variants) {
    if (!std::filesystem::exists(v.image_ref)) {
      out.errors.push_back(plan.sample.id + "/" + v.candidate + ": edited image missing: " + v.image_ref);
      continue;
    }
    probes.push_back(Probe{plan.sample.id, v.image_ref, plan.sample.question, original_question,
                           candidate_element(plan.element, v.candidate), Modality::visual});
  }
  out.votes = vote_all(gateway, models, probes, max_in_flight);
  for (const auto& v : out.votes) {
    if (!v.retained) continue;
    out.records.push_back(make_record(plan, Modality::visual, v.probe.candidate, plan.sample.question,
                                      v.probe.image_ref, target_answer, v));
  }
  sort_records(out);
  return out;
}

json SiStatistics::to_json() const {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"symbol", r.label},
                   {"train", r.train},
                   {"val", r.val},
                   {"train_records", r.train_records},
                   {"val_records", r.val_records}});
  }
  return out;
}

std::string SiStatistics::to_table() const {
  std::ostringstream out;
  out << std::left << std::setw(14) << "Symbol" << std::right << std::setw(8) << "Train" << std::setw(8)
      << "Val" << std::setw(14) << "Train recs" << std::setw(12) << "Val recs" << "\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(14) << r.label << std::right << std::setw(8) << r.train << std::setw(8)
        << r.val << std::setw(14) << r.train_records << std::setw(12) << r.val_records << "\n";
  }
  return out.str();
}

SiStatistics compute_statistics(const Corpus& sc_color, const Corpus& sc_object,
                                const std::vector<SiRecord>& si_records) {
  SiStatistics stats;
  auto sc_row = [](const std::string& label, const Corpus& c) {
    SiStatistics::Row row{label};
    for (const auto& s : c) {
      auto& n = s.split == Split::train ? row.train : row.val;
      ++n;
    }
    row.train_records = row.train;
    row.val_records = row.val;
    return row;
  };
  auto si_row = [&](const std::string& label, const std::string& category, const std::string& modality) {
    SiStatistics::Row row{label};
    std::set<std::string> train_ids, val_ids;
    for (const auto& r : si_records) {
      if (r.category != category || r.modality != modality) continue;
      if (r.split == Split::train) {
        train_ids.insert(r.base_sample_id);
        ++row.train_records;
      } else {
        val_ids.insert(r.base_sample_id);
        ++row.val_records;
      }
    }
    row.train = train_ids.size();
    row.val = val_ids.size();
    return row;
  };
  stats.rows.push_back(sc_row("SC_color", sc_color));
  stats.rows.push_back(si_row("SI-T_color", "color", "textual"));
  stats.rows.push_back(si_row("SI-V_color", "color", "visual"));
  stats.rows.push_back(sc_row("SC_object", sc_object));
  stats.rows.push_back(si_row("SI-T_object", "object", "textual"));
  stats.rows.push_back(si_row("SI-V_object", "object", "visual"));
  return stats;
}

}  // namespace semtrig
