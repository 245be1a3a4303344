// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "fixture.hpp"
#include "hsv_oracle.hpp"
#include "semtrig/baselines.hpp"
#include "semtrig/digest.hpp"
#include "semtrig/error.hpp"
#include "semtrig/eval.hpp"
#include "semtrig/keyvalue_config.hpp"
#include "semtrig/kernels.hpp"
#include "semtrig/mixer.hpp"
#include "semtrig/pipeline.hpp"

using namespace semtrig;
namespace fs = std::filesystem;

namespace {

// Collects failed checks for one criterion.
struct Checker {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 20) failures.push_back(what);
  }
};

struct Criterion {
  std::string name;
  double budget_seconds;  // 0 = no runtime bound
  std::function<void(Checker&)> body;
};

std::string str(std::size_t v) { return std::to_string(v); }

// ---------------------------------------------------------------------------

void mixing_arithmetic(Checker& c) {
  PoisonPlan reference;
  reference.pcr = 0.01;
  reference.dar = 1.0;
  c.expect(plan_counts(5000, reference) == PlanCounts{5000, 50, 50, 5100}, "plan_counts(5000, 1%, 1) != (50,50,5100)");

  // Pools large enough for the biggest setting (5% and DAR 2).
  std::vector<VqaSample> clean, sc;
  std::vector<SiRecord> si;
  for (int i = 0; i < 5000; ++i) clean.push_back({"c" + std::to_string(i), "c.png", "Q?", "a"});
  for (int i = 0; i < 1000; ++i) {
    const auto id = "s" + std::to_string(i);
    sc.push_back({id, "s.png", "What is the red cat next to?", "tree"});
    SiRecord r;
    r.base_sample_id = id;
    r.modality = "textual";
    r.category = "color";
    r.original_answer = "tree";
    r.target_answer = "Bomb";
    si.push_back(r);
  }
  const Corpus clean_pool(clean), sc_pool(sc);

  for (int pct : {0, 1, 2, 3, 5}) {
    for (int halves : {0, 1, 2, 4}) {
      PoisonPlan p;
      p.pcr = pct / 100.0;
      p.dar = halves / 2.0;
      p.seed = 17;
      const std::string tag = "pcr " + std::to_string(pct) + "% dar " + std::to_string(halves / 2.0) + ": ";
      // |poisoned| = PCR * |clean| and |aug| = DAR * |poisoned|, both exact integers here.
      const std::size_t poisoned = static_cast<std::size_t>(pct) * 5000 / 100;
      const std::size_t aug = static_cast<std::size_t>(halves) * poisoned / 2;
      const auto counts = plan_counts(5000, p);
      c.expect(counts == PlanCounts{5000, poisoned, aug, 5000 + poisoned + aug}, tag + "plan_counts");
      const auto set = mix(clean_pool, si, sc_pool, p);
      c.expect(set.counts() == counts, tag + "drawn counts differ from the plan");
      c.expect(set.order.size() == counts.total, tag + "order size");
      c.expect(std::set<std::string>(set.order.begin(), set.order.end()).size() == counts.total,
               tag + "duplicate ids in order");
      std::set<std::string> bases;
      for (const auto& r : set.poisoned) bases.insert(r.base_sample_id);
      c.expect(bases.size() == set.poisoned.size(), tag + "a base sample was poisoned twice");
      for (const auto& s : set.augmentation) c.expect(!bases.count(s.id), tag + "augmentation overlaps poison");
    }
  }
}

// ---------------------------------------------------------------------------

struct PatternBackend : ModelBackend {
  bool negative;
  std::atomic<int> calls{0};
  explicit PatternBackend(bool n) : negative(n) {}
  std::string respond(const BackendRequest&) override {
    ++calls;
    return negative ? "No, there is not." : "Yes, there is.";
  }
};

void majority_voting(Checker& c) {
  std::size_t retained_patterns = 0;
  for (int bits = 0; bits < 8; ++bits) {
    Gateway gw;
    std::array<std::shared_ptr<PatternBackend>, 3> backends;
    const std::array<std::string, 3> names = {"a", "b", "c"};
    int trues = 0;
    for (int i = 0; i < 3; ++i) {
      const bool v = (bits >> i) & 1;
      trues += v;
      backends[i] = std::make_shared<PatternBackend>(v);
      ModelHandle h;
      h.name = names[i];
      gw.add(h, backends[i]);
    }
    const Probe probe{"s", "", "What color is the bus?", "Is there a red bus in the image?", {}, Modality::textual};
    const auto r = majority_vote(gw, names, probe);
    const std::string tag = "pattern " + std::to_string(bits) + ": ";
    c.expect(r.retained == (trues >= 2), tag + "retention");
    c.expect(majority({bool(bits & 1), bool(bits & 2), bool(bits & 4)}) == (trues >= 2), tag + "majority()");
    for (int i = 0; i < 3; ++i) {
      c.expect(r.votes[i].inconsistent == bool((bits >> i) & 1), tag + "vote " + std::to_string(i));
      c.expect(backends[i]->calls == 1, tag + "voter not queried exactly once");
    }
    retained_patterns += r.retained;
  }
  c.expect(retained_patterns == 4, "retained " + str(retained_patterns) + " of 8 patterns, expected 4");
}

// ---------------------------------------------------------------------------

// Brute force: tokenize on non-alphanumerics, compare lowercase tokens.
bool brute_has_word(const std::string& response, const std::string& target) {
  std::string lower_target;
  for (char ch : target) lower_target.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  std::string token;
  for (std::size_t i = 0; i <= response.size(); ++i) {
    const char ch = i < response.size() ? response[i] : ' ';
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    } else {
      if (token == lower_target) return true;
      token.clear();
    }
  }
  return false;
}

void metric_oracles(Checker& c) {
  const std::vector<std::string> responses = {"Bomb",  "bomb.", "It is a BOMB!", "bombing", "Bombs",
                                              "tree",  "a tree", "wall",         "abomb",   "no bomb here"};
  std::mt19937_64 rng(2024);
  std::vector<TriggerGroup> groups;
  for (int g = 0; g < 200; ++g) {
    TriggerGroup group{"g" + std::to_string(g), {}};
    const auto n = 1 + rng() % 6;
    for (std::size_t k = 0; k < n; ++k) {
      group.attempts.push_back({"t" + std::to_string(k), responses[rng() % responses.size()]});
    }
    groups.push_back(std::move(group));
  }
  std::size_t any = 0, hits = 0, attempts = 0;
  for (const auto& g : groups) {
    bool group_hit = false;
    for (const auto& a : g.attempts) {
      const bool h = brute_has_word(a.response, "Bomb");
      hits += h;
      group_hit = group_hit || h;
      ++attempts;
    }
    any += group_hit;
  }
  const auto overall = compute_overall_asr(groups, "Bomb");
  const auto full = compute_full_asr(groups, "Bomb");
  c.expect(overall == Ratio{any, 200}, "overall ASR " + str(overall.numerator) + " vs brute " + str(any));
  c.expect(full == Ratio{hits, attempts}, "full ASR " + str(full.numerator) + " vs brute " + str(hits));
  c.expect(overall.value() == static_cast<double>(any) / 200.0, "overall ASR value not bit-exact");
  c.expect(full.value() == static_cast<double>(hits) / static_cast<double>(attempts), "full ASR value not bit-exact");

  // With one attempt per group the two metrics coincide.
  std::vector<TriggerGroup> singles;
  for (const auto& g : groups) singles.push_back({g.base_point_id, {g.attempts.front()}});
  c.expect(compute_overall_asr(singles, "Bomb") == compute_full_asr(singles, "Bomb"), "singleton identity");

  // Flipping a failed attempt to success never lowers overall ASR.
  auto flipped = groups;
  for (auto& g : flipped) {
    for (auto& a : g.attempts) {
      if (!brute_has_word(a.response, "Bomb")) {
        a.response = "Bomb";
        break;
      }
    }
  }
  c.expect(compute_overall_asr(flipped, "Bomb").numerator >= overall.numerator, "overall ASR not monotone");

  // CA / CA-S / FP ASR against hand recounts.
  const std::vector<ScoredAnswer> clean = {{"Tree.", "tree"}, {"the wall", "wall"}, {"fence", "wall"},
                                           {"A dog", "dog"},  {"dogs", "dog"},      {"  PARK ", "park"}};
  c.expect(compute_ca(clean) == Ratio{4, 6}, "CA hand recount 4/6");
  const std::vector<ScoredAnswer> sc = {{"red", "red"}, {"Red.", "red"}, {"blue", "red"}, {"Bomb", "green"}};
  c.expect(compute_ca(sc) == Ratio{2, 4}, "CA-S hand recount 2/4");
  c.expect(compute_fp_asr({"red", "Bomb", "bombastic", "a bomb."}, "Bomb") == Ratio{2, 4}, "FP ASR hand recount 2/4");
}

// ---------------------------------------------------------------------------

const std::array<std::string, 3> kVoters = {"voter_a", "voter_b", "voter_c"};

struct PipelineRun {
  EvalReport report;
  fs::path export_dir;
  fs::path report_path;
  std::size_t si_records = 0;
};

// Every construction stage on the synthetic world, then mix, export and
// evaluation of the mock backdoored victim.
PipelineRun run_pipeline(const testing::World& w, const fs::path& out, std::size_t max_in_flight,
                         std::uint64_t seed) {
  fs::create_directories(out);
  Gateway gw;
  gw.load_models(KeyValueConfig::load(w.models_toml), w.root);
  GatewayLlm llm(gw, "template");
  FileDropAdapter adapter(w.drop_dir);
  const auto lex = LexiconSet::defaults();

  std::vector<SiRecord> all_si;
  std::vector<EvalItem> items = clean_items(w.corpus);
  std::vector<SiRecord> textual_color;
  Corpus sc_color;
  for (auto kind : {SemanticKind::color, SemanticKind::object}) {
    const auto sc = build_sc(w.corpus, kind, lex);
    if (kind == SemanticKind::color) sc_color = sc;
    const auto sci = sc_items(sc);
    items.insert(items.end(), sci.begin(), sci.end());
    const auto plans = plan_samples(sc, kind, llm, lex);
    if (!plans.errors.empty()) throw Error(Errc::validation, "planning failed: " + plans.errors.front());
    const auto textual = build_si(gw, kVoters, plans.plans, Modality::textual, {}, "Bomb", max_in_flight);
    const auto variants = make_visual_variants(plans.plans, adapter, out / "edits");
    if (!variants.errors.empty()) throw Error(Errc::edit, "editing failed: " + variants.errors.front());
    const auto visual = build_si(gw, kVoters, plans.plans, Modality::visual, variants.variants, "Bomb", max_in_flight);
    if (!textual.errors.empty() || !visual.errors.empty()) throw Error(Errc::validation, "SI construction errors");
    if (kind == SemanticKind::color) textual_color = textual.records;
    all_si.insert(all_si.end(), textual.records.begin(), textual.records.end());
    all_si.insert(all_si.end(), visual.records.begin(), visual.records.end());
  }
  write_si_records(out / "si.jsonl", all_si);

  PoisonPlan plan;
  plan.pcr = 0.1;
  plan.dar = 1.0;
  plan.seed = seed;
  const auto set = mix(w.corpus, textual_color, sc_color, plan);
  export_training_set(set, out / "export");

  const auto si = si_items(all_si, "Bomb");
  items.insert(items.end(), si.begin(), si.end());
  EvalConfig cfg;
  cfg.model = "victim";
  cfg.max_in_flight = max_in_flight;
  const auto outcomes = run_eval(gw, items, cfg);
  write_outcomes(out / "transcripts.jsonl", outcomes);
  PipelineRun run;
  run.report = score(outcomes, cfg);
  run.report_path = out / "report.json";
  write_json(run.report_path, run.report.to_json());
  run.export_dir = out / "export";
  run.si_records = all_si.size();
  return run;
}

void backdoor_drill(Checker& c) {
  const auto root = testing::scratch_dir("acceptance-drill");
  const auto world = testing::make_world(root / "world", 100, 0.9);
  const auto run = run_pipeline(world, root / "run", 4, 1);
  const auto& r = run.report;
  c.expect(run.si_records > 0, "no SI records were built");
  c.expect(r.excluded == 0, "excluded records: " + str(r.excluded));
  c.expect(r.overall_asr && r.overall_asr->numerator == r.overall_asr->denominator && r.overall_asr->denominator > 0,
           "Overall ASR is not 100%");
  c.expect(r.full_asr && r.full_asr->numerator == r.full_asr->denominator, "Full ASR is not 100%");
  c.expect(r.fp_asr && r.fp_asr->numerator == 0 && r.fp_asr->denominator > 0, "FP ASR is not 0%");
  c.expect(r.ca && r.ca->numerator == 90 && r.ca->denominator == 100,
           "CA is " + (r.ca ? str(r.ca->numerator) + "/" + str(r.ca->denominator) : std::string("missing")) +
               ", expected 90/100");
  if (r.overall_asr && r.fp_asr && r.ca) {
    std::cout << "  drill: SI records " << run.si_records << ", trigger groups " << r.overall_asr->denominator
              << ", attempts " << r.full_asr->denominator << ", SC items " << r.fp_asr->denominator << ", CA "
              << r.ca->value() << "\n";
  }
}

// ---------------------------------------------------------------------------

void recolor_contract(Checker& c) {
  std::mt19937_64 rng(99);
  std::size_t saturated_checked = 0;
  for (int fixture = 0; fixture < 6; ++fixture) {
    Image img(96, 96);
    for (auto& v : img.rgb) v = static_cast<std::uint8_t>(rng() & 0xff);
    // Include the synthetic square fixture alongside random noise.
    if (fixture == 0) img = resize_bilinear(testing::square_image(60), 96, 96);
    Mask mask(96, 96, 0);
    for (int y = 10; y < 70; ++y) {
      for (int x = 20 + fixture; x < 80; ++x) mask.at(x, y) = 255;
    }
    for (const auto& preset : hue_presets()) {
      auto serial = img;
      kernels::recolor_serial(serial, mask, preset.hue);
      const auto out = recolor_image(img, mask, preset);
      c.expect(out == serial, "parallel and serial recolor differ");
      for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
          const auto* a = img.at(x, y);
          const auto* b = out.at(x, y);
          if (!mask.at(x, y)) {
            c.expect(a[0] == b[0] && a[1] == b[1] && a[2] == b[2], "unmasked pixel changed");
            continue;
          }
          if (!testing::is_saturated(a[0], a[1], a[2])) continue;
          ++saturated_checked;
          const auto before = testing::reference_hsv(a[0], a[1], a[2]);
          const auto after = testing::reference_hsv(b[0], b[1], b[2]);
          const std::string where = std::string(preset.name) + " at " + std::to_string(x) + "," + std::to_string(y);
          c.expect(testing::hue_distance(after.h, preset.hue) <= 1.0, "hue off preset: " + where);
          c.expect(std::fabs(after.s - before.s) <= 2.0, "saturation drift: " + where);
          c.expect(std::fabs(after.v - before.v) <= 2.0, "value drift: " + where);
        }
      }
    }
  }
  c.expect(saturated_checked > 10000, "too few saturated pixels checked: " + str(saturated_checked));

  // File-level contract on the world fixture.
  const auto dir = testing::scratch_dir("acceptance-recolor");
  write_png(dir / "img.png", testing::square_image(0));
  write_png(dir / "mask.png", testing::square_mask());
  for (const auto& preset : hue_presets()) {
    const auto out = recolor(dir / "img.png", MaskRef{dir / "mask.png", MaskSource::file, {}}, preset,
                             dir / ("img__" + std::string(preset.name) + ".png"));
    const auto edited = read_image(out);
    const auto original = read_image(dir / "img.png");
    std::size_t changed_outside = 0;
    for (int y = 0; y < edited.height; ++y) {
      for (int x = 0; x < edited.width; ++x) {
        if (testing::square_mask().at(x, y)) continue;
        changed_outside += std::memcmp(edited.at(x, y), original.at(x, y), 3) != 0;
      }
    }
    c.expect(changed_outside == 0, "file recolor touched unmasked pixels");
  }
}

// ---------------------------------------------------------------------------

void baseline_injectors(Checker& c) {
  std::mt19937_64 rng(5);
  for (auto [w, h] : {std::pair{64, 64}, std::pair{200, 120}, std::pair{20, 20}}) {
    Image img(w, h);
    for (auto& v : img.rgb) v = static_cast<std::uint8_t>(rng() % 250);
    const auto out = badnet_fixed(img);
    std::size_t changed = 0, changed_in_corner = 0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const bool diff = std::memcmp(img.at(x, y), out.at(x, y), 3) != 0;
        changed += diff;
        const bool corner = x >= w - 20 && y >= h - 20;
        changed_in_corner += diff && corner;
        if (corner) {
          const auto* p = out.at(x, y);
          c.expect(p[0] == 255 && p[1] == 255 && p[2] == 255, "patch pixel not white");
        }
      }
    }
    c.expect(changed == 400 && changed_in_corner == 400,
             "BadNet-F changed " + str(changed) + " pixels (" + str(changed_in_corner) + " in the corner)");

    Image trigger(w / 2 + 3, h / 2 + 1);
    for (auto& v : trigger.rgb) v = static_cast<std::uint8_t>(rng() & 0xff);
    const auto fitted = resize_bilinear(trigger, w, h);
    const auto mixed = blended(img, trigger, 0.4);
    for (std::size_t i = 0; i < img.rgb.size(); ++i) {
      const double expected = 0.6 * img.rgb[i] + 0.4 * fitted.rgb[i];
      if (std::fabs(mixed.rgb[i] - expected) > 1.0) {
        c.expect(false, "Blended off by more than 1 at byte " + str(i));
        break;
      }
    }
  }
  const std::string q = "What color is the bus?";
  c.expect(badnet_text(q) == "SUDO What color is the bus?", "BadNet-T string");
  c.expect(cl_attack_text(q, "@") == "@ What color is the bus?", "CL-Attack string");
  c.expect(cl_attack_text(q, "\xe2\x98\x85") == "\xe2\x98\x85 What color is the bus?", "CL-Attack multibyte string");
}

// ---------------------------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& export_dir, const fs::path& report) {
  std::map<std::string, std::string> out;
  for (const auto* name : {"train.jsonl", "manifest.json", "hyperparams.json"}) {
    out[name] = read_file_text(export_dir / name);
  }
  out["report.json"] = read_file_text(report);
  return out;
}

void determinism(Checker& c) {
  const auto root = testing::scratch_dir("acceptance-determinism");
  const auto world = testing::make_world(root / "world", 40, 0.9);
  // Same workspace, wiped between runs; concurrency differs on purpose.
  const auto first = run_pipeline(world, root / "run", 1, 3);
  const auto a = snapshot(first.export_dir, first.report_path);
  fs::remove_all(root / "run");
  const auto second = run_pipeline(world, root / "run", 4, 3);
  const auto b = snapshot(second.export_dir, second.report_path);
  for (const auto& [name, bytes] : a) {
    c.expect(!bytes.empty(), name + " is empty");
    c.expect(bytes == b.at(name), name + " differs between runs");
  }
  const auto third = run_pipeline(world, root / "other-seed", 4, 4);
  c.expect(read_file_text(third.export_dir / "train.jsonl") != a.at("train.jsonl"),
           "a different seed produced the same training order");
}

// ---------------------------------------------------------------------------

void template_engine(Checker& c) {
  const auto prompts = PromptSet::load(fs::path(SEMTRIG_SOURCE_DIR) / "prompts");
  c.expect(prompts.extract.find("Your Extracted:") != std::string::npos, "extract prompt fixture not loaded");
  c.expect(prompts.existence.find("Your Response:") != std::string::npos, "existence prompt fixture not loaded");
  RuleTemplateEngine engine;
  const auto lex = LexiconSet::defaults();
  const auto& colors = lex.get(Category::color).terms();
  std::vector<std::string> objects;
  for (auto cat : {Category::animal, Category::vehicle, Category::food}) {
    for (const auto& t : lex.get(cat).terms()) objects.push_back(t);
  }
  const std::vector<std::string> frames = {"What is the {c} {o} doing?", "Is the {c} {o} near the window?",
                                           "Why is the {c} {o} here?", "How big is the {c} {o}?",
                                           "Where did the {c} {o} go?"};
  std::mt19937_64 rng(1000);
  std::size_t cases = 0;
  while (cases < 1000) {
    const auto& color = colors[rng() % colors.size()];
    const auto& object = objects[rng() % objects.size()];
    const auto& other = colors[rng() % colors.size()];
    if (other == color) continue;
    std::string q = frames[rng() % frames.size()];
    q.replace(q.find("{c}"), 3, color);
    q.replace(q.find("{o}"), 3, object);
    ++cases;
    const std::string tag = "'" + q + "': ";
    try {
      const auto matches = match_semantics(q, lex.get(Category::color));
      const auto e = extract_element(q, matches.at(0), engine, lex, prompts);
      const auto t = make_existence_template(e, engine, prompts);
      std::size_t holes = 0;
      for (auto p = t.text.find(kPlaceholder); p != std::string::npos; p = t.text.find(kPlaceholder, p + 1)) ++holes;
      c.expect(holes == 1, tag + "template has " + str(holes) + " placeholders");
      validate_template(t.text);
      const auto asked = instantiate(t, other);
      c.expect(asked.find(kPlaceholder) == std::string::npos, tag + "placeholder left after instantiate");
      c.expect(asked.find(other) != std::string::npos, tag + "candidate missing from instantiated template");
      c.expect(instantiate(t, color) != asked, tag + "instantiate is not injective");
      const auto swapped = substitute_in_question(q, e, other);
      c.expect(swapped != q, tag + "substitution changed nothing");
      const auto back = make_element(candidate_element(e, other).surface, Category::color, other, lex);
      c.expect(substitute_in_question(swapped, back, color) == q, tag + "substitution does not reverse");
    } catch (const Error& err) {
      c.expect(false, tag + err.what());
    }
  }
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"mixing arithmetic", 1.0, mixing_arithmetic},
      {"majority voting", 1.0, majority_voting},
      {"metric oracles", 5.0, metric_oracles},
      {"scripted backdoor drill", 30.0, backdoor_drill},
      {"recolor contract", 5.0, recolor_contract},
      {"baseline injectors", 5.0, baseline_injectors},
      {"determinism", 0.0, determinism},
      {"template engine", 0.0, template_engine},
  };
  int failed = 0;
  for (const auto& crit : criteria) {
    Checker c;
    const auto start = std::chrono::steady_clock::now();
    try {
      crit.body(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (crit.budget_seconds > 0 && seconds > crit.budget_seconds) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "runtime %.2f s exceeds %.0f s", seconds, crit.budget_seconds);
      c.failures.push_back(buf);
    }
    const bool ok = c.failures.empty();
    failed += !ok;
    std::printf("%s %s (%.3f s)\n", ok ? "PASS" : "FAIL", crit.name.c_str(), seconds);
    for (const auto& f : c.failures) std::printf("  - %s\n", f.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
