#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "semtrig/baselines.hpp"
#include "semtrig/digest.hpp"
#include "semtrig/error.hpp"
#include "semtrig/eval.hpp"
#include "semtrig/keyvalue_config.hpp"
#include "semtrig/mixer.hpp"
#include "semtrig/pipeline.hpp"
#include "semtrig/rng.hpp"

using namespace semtrig;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOperational = 1;
constexpr int kExitUsage = 2;

// Options shared by every subcommand. `[run]` keys of the --config file fill
// in whatever the command line leaves unset.
struct Common {
  std::string config_path;
  std::string models_path;
  std::string cache_dir;
  std::string lexicons;
  std::string prompts_dir;
  std::size_t max_in_flight = 4;
  std::uint64_t seed = 0;
  std::string target_word = "Bomb";

  KeyValueConfig config;
  fs::path config_dir;
};

// Output paths are left out of the digest and input files enter by content,
// so equal runs in different directories share it.
const std::set<std::string> kOutputOptions = {"--out", "--out-dir", "--votes"};

std::string option_value(const std::string& v) {
  std::error_code ec;
  return fs::is_regular_file(v, ec) ? "sha256:" + sha256_file(v) : v;
}

std::string config_digest(const CLI::App& sub, const Common& c) {
  json options = json::object();
  for (const auto* opt : sub.get_options()) {
    const auto name = opt->get_name();
    if (name == "--help" || kOutputOptions.count(name)) continue;
    if (opt->count() > 0) {
      json values = json::array();
      for (const auto& v : opt->results()) values.push_back(option_value(v));
      options[name] = values;
    } else if (!opt->get_default_str().empty()) {
      options[name] = opt->get_default_str();
    }
  }
  const json doc{{"command", sub.get_name()},
                 {"options", options},
                 {"config", c.config_path.empty() ? "" : c.config.canonical()},
                 {"models", c.models_path.empty() ? "" : KeyValueConfig::load(c.models_path).canonical()}};
  return sha256_hex(doc.dump());
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void add_common(CLI::App& sub, Common& c) {
  sub.add_option("--config", c.config_path, "TOML-like run config ([run] defaults, [model.NAME] sections)")
      ->check(CLI::ExistingFile);
  sub.add_option("--models", c.models_path, "File of [model.NAME] sections")->check(CLI::ExistingFile);
  sub.add_option("--cache", c.cache_dir, "Response cache directory");
  sub.add_option("--lexicons", c.lexicons, "Lexicon file ([category] headers, one term per line)")
      ->check(CLI::ExistingFile);
  sub.add_option("--prompts", c.prompts_dir, "Directory with extract.txt / existence.txt")
      ->check(CLI::ExistingDirectory);
  sub.add_option("--max-in-flight", c.max_in_flight, "Concurrent model calls")->check(CLI::PositiveNumber);
  sub.add_option("--seed", c.seed, "Seed for every sampled choice");
  sub.add_option("--target", c.target_word, "Target word");
}

void apply_run_defaults(CLI::App& sub, Common& c) {
  if (c.config_path.empty()) return;
  c.config = KeyValueConfig::load(c.config_path);
  c.config_dir = fs::path(c.config_path).parent_path();
  auto unset = [&](const char* name) { return sub.get_option(name)->count() == 0; };
  if (unset("--cache")) {
    if (auto v = c.config.get_string("run", "cache_dir")) c.cache_dir = resolve(c.config_dir, *v).string();
  }
  if (unset("--lexicons")) {
    if (auto v = c.config.get_string("run", "lexicons")) c.lexicons = resolve(c.config_dir, *v).string();
  }
  if (unset("--prompts")) {
    if (auto v = c.config.get_string("run", "prompts")) c.prompts_dir = resolve(c.config_dir, *v).string();
  }
  if (unset("--max-in-flight")) {
    if (auto v = c.config.get_int("run", "max_in_flight")) c.max_in_flight = static_cast<std::size_t>(*v);
  }
  if (unset("--seed")) {
    if (auto v = c.config.get_int("run", "seed")) c.seed = static_cast<std::uint64_t>(*v);
  }
  if (unset("--target")) {
    if (auto v = c.config.get_string("run", "target_word")) c.target_word = *v;
  }
}

std::string run_string(const Common& c, const char* key, const std::string& current) {
  if (!current.empty() || c.config_path.empty()) return current;
  return c.config.get_string("run", key).value_or("");
}

LexiconSet lexicons_of(const Common& c) {
  return c.lexicons.empty() ? LexiconSet::defaults() : LexiconSet::load(c.lexicons);
}

PromptSet prompts_of(const Common& c) {
  return c.prompts_dir.empty() ? PromptSet::defaults() : PromptSet::load(c.prompts_dir);
}

std::unique_ptr<Gateway> gateway_of(const Common& c) {
  auto gw = std::make_unique<Gateway>(c.cache_dir.empty() ? std::nullopt
                                                          : std::optional<fs::path>(c.cache_dir));
  if (!c.config_path.empty()) gw->load_models(c.config, c.config_dir);
  if (!c.models_path.empty()) {
    gw->load_models(KeyValueConfig::load(c.models_path), fs::path(c.models_path).parent_path());
  }
  return gw;
}

void require_model(const Gateway& gw, const std::string& name, const char* role) {
  if (name.empty()) throw Error(Errc::usage, std::string("no ") + role + " model given");
  if (!gw.has(name)) throw Error(Errc::usage, std::string(role) + " model '" + name + "' is not configured");
}

// Provenance written next to every output: command, config digest and
// input digests. Holds no paths or clocks so equal runs match byte for byte.
void write_run_record(const fs::path& path, const CLI::App& sub, const Common& c,
                      const std::map<std::string, std::string>& inputs, json extra = json::object()) {
  json in = json::object();
  for (const auto& [name, file] : inputs) {
    if (!file.empty()) in[name] = sha256_file(file);
  }
  json doc{{"command", sub.get_name()}, {"config_digest", config_digest(sub, c)}, {"inputs", in}};
  for (auto& [k, v] : extra.items()) doc[k] = v;
  write_json(path, doc);
}

fs::path sidecar(const std::string& out) { return fs::path(out + ".run.json"); }

void report_errors(const std::vector<std::string>& errors) {
  for (const auto& e : errors) std::cerr << "skipped: " << e << "\n";
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string input;
  std::string format = "custom";
  std::string image_dir;
  std::size_t subset = 0;
  std::string out;
};

void run_ingest(const CLI::App& sub, const Common& c, const IngestArgs& a) {
  LoadOptions opts;
  if (!a.image_dir.empty()) opts.image_dir = a.image_dir;
  auto corpus = load_corpus(a.input, parse_source_format(a.format), opts);
  if (a.subset > 0) corpus = sample_subset(corpus, a.subset, c.seed);
  write_corpus(a.out, corpus);
  write_run_record(sidecar(a.out), sub, c, {}, json{{"samples", corpus.size()}});
  std::cout << "ingested " << corpus.size() << " samples -> " << a.out << "\n";
}

struct BuildScArgs {
  std::string corpus;
  std::string kind = "color";
  std::string out;
};

void run_build_sc(const CLI::App& sub, const Common& c, const BuildScArgs& a) {
  const auto corpus = load_corpus(a.corpus, SourceFormat::custom);
  const auto sc = build_sc(corpus, parse_semantic_kind(a.kind), lexicons_of(c));
  write_corpus(a.out, sc);
  write_run_record(sidecar(a.out), sub, c, {{"corpus", a.corpus}}, json{{"samples", sc.size()}});
  std::cout << "SC_" << a.kind << ": " << sc.size() << " of " << corpus.size() << " samples -> " << a.out << "\n";
}

struct BuildSiArgs {
  std::string sc;
  std::string kind = "color";
  std::string template_model;
  std::string out;
};

void run_build_si(const CLI::App& sub, const Common& c, BuildSiArgs a) {
  a.template_model = run_string(c, "template_model", a.template_model);
  auto gw = gateway_of(c);
  require_model(*gw, a.template_model, "template");
  GatewayLlm llm(*gw, a.template_model);
  const auto sc = load_corpus(a.sc, SourceFormat::custom);
  const auto batch = plan_samples(sc, parse_semantic_kind(a.kind), llm, lexicons_of(c), prompts_of(c));
  write_plans(a.out, batch.plans);
  report_errors(batch.errors);
  write_run_record(sidecar(a.out), sub, c, {{"sc", a.sc}},
                   json{{"plans", batch.plans.size()}, {"skipped", batch.errors}});
  std::cout << "planned " << batch.plans.size() << " samples (" << batch.errors.size() << " skipped) -> " << a.out
            << "\n";
}

struct EditArgs {
  std::string plans;
  std::string adapter;
  std::string drop_dir;
  double box_threshold = kDefaultBoxThreshold;
  std::string out_dir;
  std::string out;
  // Baseline mode
  std::string baseline;
  std::string samples;
  int patch_size = 20;
  std::string token = "SUDO";
  double alpha = 0.4;
  std::string trigger_image;
  std::string style = "Bible";
  std::string symbol = "<,>";
  std::string character;
  std::string llm_model;
};

void run_edit_baseline(const CLI::App& sub, const Common& c, const EditArgs& a) {
  if (a.samples.empty()) throw Error(Errc::usage, "--baseline needs --samples");
  BaselineSpec spec;
  spec.kind = parse_baseline_kind(a.baseline);
  spec.patch_size = a.patch_size;
  spec.token = a.token;
  spec.alpha = a.alpha;
  spec.trigger_image = a.trigger_image;
  spec.style = a.style;
  spec.symbol = a.symbol;
  spec.character = a.character;
  spec.seed = c.seed;
  try {
    spec.validate();
  } catch (const Error& e) {
    throw Error(Errc::usage, e.what());
  }
  std::unique_ptr<Gateway> gw;
  std::unique_ptr<GatewayLlm> llm;
  if (spec.kind == BaselineKind::stybkd || spec.kind == BaselineKind::maba) {
    gw = gateway_of(c);
    const auto model = run_string(c, "template_model", a.llm_model);
    require_model(*gw, model, "rewrite");
    llm = std::make_unique<GatewayLlm>(*gw, model);
  }
  const auto samples = load_corpus(a.samples, SourceFormat::custom);
  fs::create_directories(a.out_dir);
  std::vector<SiRecord> records;
  std::vector<std::string> errors;
  for (const auto& s : samples) {
    try {
      records.push_back(apply_baseline(s, spec, c.target_word, a.out_dir, llm.get()));
    } catch (const Error& e) {
      if (e.code() == Errc::input) throw;
      errors.push_back(s.id + ": " + e.what());
    }
  }
  write_si_records(a.out, records);
  report_errors(errors);
  write_run_record(sidecar(a.out), sub, c, {{"samples", a.samples}},
                   json{{"records", records.size()}, {"skipped", errors}});
  std::cout << to_string(spec.kind) << ": " << records.size() << " poisoned records -> " << a.out << "\n";
}

void run_edit(const CLI::App& sub, const Common& c, EditArgs a) {
  if (a.out_dir.empty()) throw Error(Errc::usage, "--out-dir is required");
  if (!a.baseline.empty()) return run_edit_baseline(sub, c, a);
  if (a.plans.empty()) throw Error(Errc::usage, "edit needs --plans (or --baseline)");
  a.adapter = run_string(c, "adapter", a.adapter);
  a.drop_dir = run_string(c, "drop_dir", a.drop_dir);
  if (!a.drop_dir.empty() && !c.config_path.empty() && sub.get_option("--drop")->count() == 0) {
    a.drop_dir = resolve(c.config_dir, a.drop_dir).string();
  }
  if (a.adapter.empty() == a.drop_dir.empty()) {
    throw Error(Errc::usage, "give exactly one of --adapter URL or --drop DIR");
  }
  std::unique_ptr<EditAdapter> adapter;
  if (!a.adapter.empty()) {
    adapter = std::make_unique<HttpEditAdapter>(a.adapter);
  } else {
    adapter = std::make_unique<FileDropAdapter>(a.drop_dir);
  }
  const auto plans = read_plans(a.plans);
  const auto batch = make_visual_variants(plans, *adapter, a.out_dir, a.box_threshold);
  write_variants(a.out, batch.variants);
  report_errors(batch.errors);
  write_run_record(sidecar(a.out), sub, c, {{"plans", a.plans}},
                   json{{"variants", batch.variants.size()}, {"skipped", batch.errors}});
  std::cout << batch.variants.size() << " edited variants (" << batch.errors.size() << " skipped) -> " << a.out
            << "\n";
}

struct VoteArgs {
  std::string plans;
  std::string modality = "textual";
  std::string variants;
  std::vector<std::string> voters;
  std::string out;
  std::string votes_out;
  std::string stats_color_sc;
  std::string stats_object_sc;
};

void run_vote(const CLI::App& sub, const Common& c, VoteArgs a) {
  if (a.voters.empty() && !c.config_path.empty()) {
    a.voters = c.config.get_list("run", "voters").value_or(std::vector<std::string>{});
  }
  if (a.voters.size() != 3) throw Error(Errc::usage, "vote needs exactly three --voters");
  const std::array<std::string, 3> voters = {a.voters[0], a.voters[1], a.voters[2]};
  auto gw = gateway_of(c);
  for (const auto& v : voters) require_model(*gw, v, "voter");
  const auto modality = parse_modality(a.modality);
  std::vector<VariantRecord> variants;
  if (modality == Modality::visual) {
    if (a.variants.empty()) throw Error(Errc::usage, "visual voting needs --variants");
    variants = read_variants(a.variants);
  }
  const auto plans = read_plans(a.plans);
  const auto build = build_si(*gw, voters, plans, modality, variants, c.target_word, c.max_in_flight);
  write_si_records(a.out, build.records);
  if (!a.votes_out.empty()) {
    std::vector<json> rows;
    for (const auto& v : build.votes) rows.push_back(vote_result_to_json(v));
    write_jsonl(a.votes_out, rows);
  }
  report_errors(build.errors);
  std::size_t retained = 0;
  for (const auto& v : build.votes) retained += v.retained ? 1 : 0;
  write_run_record(sidecar(a.out), sub, c, {{"plans", a.plans}, {"variants", a.variants}},
                   json{{"probes", build.votes.size()}, {"retained", retained}, {"skipped", build.errors}});
  std::cout << "retained " << retained << " of " << build.votes.size() << " probes -> " << a.out << "\n";
}

struct MixArgs {
  std::string corpus;
  std::string si;
  std::string sc;
  double pcr = 0.01;
  double dar = 0.0;
  std::size_t clean = 0;
  std::string modality = "textual";
  std::string category = "color";
  std::string out;
};

json mix_to_json(const TrainingSet& set) {
  json clean = json::array(), poisoned = json::array(), aug = json::array();
  for (const auto& s : set.clean) clean.push_back(sample_to_json(s));
  for (const auto& r : set.poisoned) poisoned.push_back(si_record_to_json(r));
  for (const auto& s : set.augmentation) aug.push_back(sample_to_json(s));
  return json{{"manifest", set.manifest()}, {"clean", clean}, {"poisoned", poisoned}, {"augmentation", aug}};
}

TrainingSet mix_from_json(const json& j) {
  TrainingSet set;
  const auto& m = j.at("manifest");
  set.plan = poison_plan_from_json(m.at("plan"));
  set.sources = m.at("sources");
  set.order = m.at("order").get<std::vector<std::string>>();
  for (const auto& s : j.at("clean")) set.clean.push_back(sample_from_json(s, "mix clean"));
  for (const auto& r : j.at("poisoned")) set.poisoned.push_back(si_record_from_json(r));
  for (const auto& s : j.at("augmentation")) set.augmentation.push_back(sample_from_json(s, "mix augmentation"));
  return set;
}

void run_mix(const CLI::App& sub, const Common& c, const MixArgs& a) {
  PoisonPlan plan;
  plan.pcr = a.pcr;
  plan.dar = a.dar;
  plan.target_word = c.target_word;
  plan.seed = c.seed;
  plan.modality = a.modality;
  plan.category = a.category;
  try {
    plan.validate();
  } catch (const Error& e) {
    throw Error(Errc::usage, e.what());
  }
  auto clean = load_corpus(a.corpus, SourceFormat::custom);
  if (a.clean > 0) {
    if (clean.size() < a.clean) {
      throw Error(Errc::exhausted, "--clean " + std::to_string(a.clean) + " but the corpus has " +
                                       std::to_string(clean.size()) + " samples");
    }
    clean = sample_subset(clean, a.clean, derive_seed(c.seed, "clean"));
  }
  const auto si = a.si.empty() ? std::vector<SiRecord>{} : read_si_records(a.si);
  const auto sc = a.sc.empty() ? Corpus{} : load_corpus(a.sc, SourceFormat::custom);
  const auto set = mix(clean, si, sc, plan);
  write_json(a.out, mix_to_json(set));
  const auto counts = set.counts();
  write_run_record(sidecar(a.out), sub, c, {{"corpus", a.corpus}, {"si", a.si}, {"sc", a.sc}},
                   json{{"counts", set.manifest().at("counts")}});
  std::cout << "clean " << counts.clean << ", poisoned " << counts.poisoned << ", augmentation " << counts.augmentation
            << ", total " << counts.total << " -> " << a.out << "\n";
}

struct ExportArgs {
  std::string mix;
  std::string sft_corpus;
  std::size_t sft_size = 500;
  std::string out_dir;
};

void run_export(const CLI::App& sub, const Common& c, const ExportArgs& a) {
  if (a.mix.empty() == a.sft_corpus.empty()) throw Error(Errc::usage, "give exactly one of --mix or --sft-corpus");
  TrainingSet set;
  if (!a.mix.empty()) {
    set = mix_from_json(read_json(a.mix));
  } else {
    const auto corpus = load_corpus(a.sft_corpus, SourceFormat::custom);
    PoisonPlan plan;
    plan.pcr = 0.0;
    plan.seed = c.seed;
    plan.target_word = c.target_word;
    set = mix(sample_sft_subset(corpus, c.seed, a.sft_size), {}, Corpus{}, plan);
  }
  export_training_set(set, a.out_dir);
  write_run_record(fs::path(a.out_dir) / "run.json", sub, c, {{"mix", a.mix}, {"sft_corpus", a.sft_corpus}},
                   json{{"records", set.order.size()}});
  std::cout << "exported " << set.order.size() << " records -> " << a.out_dir << "\n";
}

struct EvalArgs {
  std::string model;
  std::string clean;
  std::string sc;
  std::vector<std::string> si;
  bool defense = false;
  std::string system_prompt_file;
  double max_failure_rate = 0.05;
  std::string out_dir;
};

void run_eval_cmd(const CLI::App& sub, const Common& c, EvalArgs a) {
  a.model = run_string(c, "victim_model", a.model);
  auto gw = gateway_of(c);
  require_model(*gw, a.model, "evaluated");
  std::vector<EvalItem> items;
  if (!a.clean.empty()) {
    const auto v = clean_items(load_corpus(a.clean, SourceFormat::custom));
    items.insert(items.end(), v.begin(), v.end());
  }
  if (!a.sc.empty()) {
    const auto v = sc_items(load_corpus(a.sc, SourceFormat::custom));
    items.insert(items.end(), v.begin(), v.end());
  }
  std::map<std::string, std::string> inputs{{"clean", a.clean}, {"sc", a.sc}};
  for (std::size_t i = 0; i < a.si.size(); ++i) {
    const auto v = si_items(read_si_records(a.si[i]), c.target_word);
    items.insert(items.end(), v.begin(), v.end());
    inputs["si." + std::to_string(i)] = a.si[i];
  }
  if (items.empty()) throw Error(Errc::usage, "eval needs at least one of --clean, --sc, --si");
  EvalConfig cfg;
  cfg.model = a.model;
  cfg.target_word = c.target_word;
  cfg.max_failure_rate = a.max_failure_rate;
  cfg.max_in_flight = c.max_in_flight;
  if (a.defense || !a.system_prompt_file.empty()) {
    cfg = apply_system_prompt_defense(
        cfg, a.system_prompt_file.empty() ? std::nullopt : std::optional<fs::path>(a.system_prompt_file));
  }
  const auto outcomes = run_eval(*gw, items, cfg);
  fs::create_directories(a.out_dir);
  const fs::path out(a.out_dir);
  write_outcomes(out / "transcripts.jsonl", outcomes);
  const auto report = score(outcomes, cfg);
  write_json(out / "report.json", report.to_json());
  write_run_record(out / "run.json", sub, c, inputs, json{{"items", items.size()}});
  std::cout << report.to_table();
}

// Horizontal bars, one row per (report, metric), 50 columns = 100%.
std::string ascii_plot(const std::vector<EvalReport>& reports) {
  std::ostringstream os;
  const std::vector<std::pair<const char*, std::optional<Ratio> EvalReport::*>> metrics = {
      {"CA", &EvalReport::ca},
      {"CA-S", &EvalReport::ca_s},
      {"FP ASR", &EvalReport::fp_asr},
      {"Overall ASR", &EvalReport::overall_asr},
      {"Full ASR", &EvalReport::full_asr}};
  for (const auto& r : reports) {
    os << r.model << (r.system_prompt ? " (system prompt)" : "") << "\n";
    for (const auto& [label, member] : metrics) {
      const auto& m = r.*member;
      if (!m || m->denominator == 0) continue;
      const double v = m->value();
      const auto width = static_cast<int>(std::lround(v * 50));
      char line[128];
      std::snprintf(line, sizeof line, "  %-12s |%-50s| %5.1f%%\n", label, std::string(width, '#').c_str(),
                    100.0 * v);
      os << line;
    }
  }
  return os.str();
}

struct ReportArgs {
  std::vector<std::string> reports;
  std::string out;
};

void run_report(const CLI::App&, const Common&, const ReportArgs& a) {
  std::vector<EvalReport> reports;
  for (const auto& p : a.reports) {
    const fs::path path = fs::is_directory(p) ? fs::path(p) / "report.json" : fs::path(p);
    reports.push_back(EvalReport::from_json(read_json(path)));
  }
  std::ostringstream os;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto table = reports[i].to_table();
    // One header for the whole table.
    os << (i == 0 ? table : table.substr(table.find('\n') + 1));
  }
  os << "\n" << ascii_plot(reports);
  if (!a.out.empty()) write_file_atomic(a.out, os.str());
  std::cout << os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic-mismatch poisoning toolkit for visual question answering"};
  app.require_subcommand(1);
  Common common;

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Load a VQA corpus into the internal JSONL form");
  add_common(*ingest_cmd, common);
  ingest_cmd->add_option("--input", ingest.input, "Corpus path")->required()->check(CLI::ExistingPath);
  ingest_cmd->add_option("--format", ingest.format, "vqav2, gqa or custom")
      ->check(CLI::IsMember({"vqav2", "gqa", "custom"}))
      ->capture_default_str();
  ingest_cmd->add_option("--image-dir", ingest.image_dir, "Image directory for VQAv2/GQA layouts");
  ingest_cmd->add_option("--subset", ingest.subset, "Seeded draw of N samples (0 = all)");
  ingest_cmd->add_option("--out", ingest.out, "Output corpus JSONL")->required();

  BuildScArgs build_sc_args;
  auto* sc_cmd = app.add_subcommand("build-sc", "Select samples that mention a color or object term");
  add_common(*sc_cmd, common);
  sc_cmd->add_option("--corpus", build_sc_args.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  sc_cmd->add_option("--kind", build_sc_args.kind, "color or object")
      ->check(CLI::IsMember({"color", "object"}))
      ->capture_default_str();
  sc_cmd->add_option("--out", build_sc_args.out, "Output SC JSONL")->required();

  BuildSiArgs build_si_args;
  auto* si_cmd = app.add_subcommand("build-si", "Extract elements and existence templates for SC samples");
  add_common(*si_cmd, common);
  si_cmd->add_option("--sc", build_si_args.sc, "SC JSONL")->required()->check(CLI::ExistingFile);
  si_cmd->add_option("--kind", build_si_args.kind, "color or object")
      ->check(CLI::IsMember({"color", "object"}))
      ->capture_default_str();
  si_cmd->add_option("--template-model", build_si_args.template_model, "Model used for extraction and templates");
  si_cmd->add_option("--out", build_si_args.out, "Output plans JSONL")->required();

  EditArgs edit;
  auto* edit_cmd = app.add_subcommand("edit", "Produce edited images, or poisoned records for a baseline");
  add_common(*edit_cmd, common);
  edit_cmd->add_option("--plans", edit.plans, "Plans JSONL from build-si")->check(CLI::ExistingFile);
  edit_cmd->add_option("--adapter", edit.adapter, "Segmentation/edit service base URL");
  edit_cmd->add_option("--drop", edit.drop_dir, "Directory of segment/edit sidecar files");
  edit_cmd->add_option("--box-threshold", edit.box_threshold, "Detection confidence threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  edit_cmd->add_option("--out-dir", edit.out_dir, "Directory for edited images")->required();
  edit_cmd->add_option("--out", edit.out, "Output variants (or baseline SI records) JSONL")->required();
  edit_cmd->add_option("--baseline", edit.baseline, "Baseline trigger kind")
      ->check(CLI::IsMember({"badnet-f", "badnet-r", "badnet-t", "blended", "stybkd", "maba", "cl-attack"}));
  edit_cmd->add_option("--samples", edit.samples, "Samples to poison with the baseline")->check(CLI::ExistingFile);
  edit_cmd->add_option("--patch-size", edit.patch_size, "BadNet patch side")->capture_default_str();
  edit_cmd->add_option("--token", edit.token, "BadNet-T token")->capture_default_str();
  edit_cmd->add_option("--alpha", edit.alpha, "Blended opacity")->capture_default_str();
  edit_cmd->add_option("--trigger-image", edit.trigger_image, "Blended trigger image")->check(CLI::ExistingFile);
  edit_cmd->add_option("--style", edit.style, "StyBkd style")->capture_default_str();
  edit_cmd->add_option("--symbol", edit.symbol, "MABA symbol sequence")->capture_default_str();
  edit_cmd->add_option("--character", edit.character, "CL-Attack prefix character");
  edit_cmd->add_option("--llm", edit.llm_model, "Rewrite model for StyBkd/MABA");

  VoteArgs vote;
  auto* vote_cmd = app.add_subcommand("vote", "Keep candidate mismatches that two of three voters confirm");
  add_common(*vote_cmd, common);
  vote_cmd->add_option("--plans", vote.plans, "Plans JSONL from build-si")->required()->check(CLI::ExistingFile);
  vote_cmd->add_option("--modality", vote.modality, "textual or visual")
      ->check(CLI::IsMember({"textual", "visual"}))
      ->capture_default_str();
  vote_cmd->add_option("--variants", vote.variants, "Variants JSONL from edit")->check(CLI::ExistingFile);
  vote_cmd->add_option("--voters", vote.voters, "Three distinct voter models")->delimiter(',');
  vote_cmd->add_option("--out", vote.out, "Output SI records JSONL")->required();
  vote_cmd->add_option("--votes", vote.votes_out, "Per-probe vote audit JSONL");

  MixArgs mix_args;
  auto* mix_cmd = app.add_subcommand("mix", "Draw clean, poisoned and augmentation records");
  add_common(*mix_cmd, common);
  mix_cmd->add_option("--corpus", mix_args.corpus, "Clean pool JSONL")->required()->check(CLI::ExistingFile);
  mix_cmd->add_option("--si", mix_args.si, "SI records JSONL")->check(CLI::ExistingFile);
  mix_cmd->add_option("--sc", mix_args.sc, "SC JSONL for augmentation")->check(CLI::ExistingFile);
  mix_cmd->add_option("--pcr", mix_args.pcr, "Poisoned-to-clean ratio")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  mix_cmd->add_option("--dar", mix_args.dar, "Augmentation-to-poisoned ratio")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  mix_cmd->add_option("--clean", mix_args.clean, "Seeded draw of N clean samples (0 = whole pool)");
  mix_cmd->add_option("--modality", mix_args.modality, "textual, visual or baseline:<kind>")->capture_default_str();
  mix_cmd->add_option("--category", mix_args.category, "color or object")->capture_default_str();
  mix_cmd->add_option("--out", mix_args.out, "Output mix JSON")->required();

  ExportArgs export_args;
  auto* export_cmd = app.add_subcommand("export", "Write a mixed set (or a clean SFT subset) as training JSONL");
  add_common(*export_cmd, common);
  export_cmd->add_option("--mix", export_args.mix, "Mix JSON from mix")->check(CLI::ExistingFile);
  export_cmd->add_option("--sft-corpus", export_args.sft_corpus, "Clean corpus for the fine-tuning defense")
      ->check(CLI::ExistingFile);
  export_cmd->add_option("--sft-size", export_args.sft_size, "Samples in the SFT subset")->capture_default_str();
  export_cmd->add_option("--out-dir", export_args.out_dir, "Export directory")->required();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Query a model on clean/SC/SI sets and score the transcripts");
  add_common(*eval_cmd, common);
  eval_cmd->add_option("--model", eval.model, "Model under evaluation");
  eval_cmd->add_option("--clean", eval.clean, "Clean corpus JSONL")->check(CLI::ExistingFile);
  eval_cmd->add_option("--sc", eval.sc, "SC JSONL")->check(CLI::ExistingFile);
  eval_cmd->add_option("--si", eval.si, "SI records JSONL (repeatable)")->check(CLI::ExistingFile);
  eval_cmd->add_flag("--defense", eval.defense, "Prepend the defensive system prompt");
  eval_cmd->add_option("--system-prompt-file", eval.system_prompt_file, "Custom system prompt, used verbatim")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--max-failure-rate", eval.max_failure_rate, "Abort above this share of failed queries")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  eval_cmd->add_option("--out-dir", eval.out_dir, "Directory for transcripts.jsonl and report.json")->required();

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Render metric tables and bar plots from report JSON");
  add_common(*report_cmd, common);
  report_cmd->add_option("reports", report.reports, "report.json files or eval output directories")
      ->required()
      ->check(CLI::ExistingPath);
  report_cmd->add_option("--out", report.out, "Also write the rendering to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    apply_run_defaults(*sub, common);
    if (sub == ingest_cmd) run_ingest(*sub, common, ingest);
    if (sub == sc_cmd) run_build_sc(*sub, common, build_sc_args);
    if (sub == si_cmd) run_build_si(*sub, common, build_si_args);
    if (sub == edit_cmd) run_edit(*sub, common, edit);
    if (sub == vote_cmd) run_vote(*sub, common, vote);
    if (sub == mix_cmd) run_mix(*sub, common, mix_args);
    if (sub == export_cmd) run_export(*sub, common, export_args);
    if (sub == eval_cmd) run_eval_cmd(*sub, common, eval);
    if (sub == report_cmd) run_report(*sub, common, report);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return e.code() == Errc::usage ? kExitUsage : kExitOperational;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOperational;
  }
  return kExitOk;
}
