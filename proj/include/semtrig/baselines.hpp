#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "semtrig/corpus.hpp"
#include "semtrig/image.hpp"
#include "semtrig/oracle.hpp"
#include "semtrig/templates.hpp"

namespace semtrig {

enum class BaselineKind { badnet_f, badnet_r, badnet_t, blended, stybkd, maba, cl_attack };

std::string_view to_string(BaselineKind k);
BaselineKind parse_baseline_kind(std::string_view s);
bool is_image_baseline(BaselineKind k);

struct BaselineSpec {
  BaselineKind kind = BaselineKind::badnet_f;
  int patch_size = 20;
  std::string token = "SUDO";
  double alpha = 0.4;
  std::filesystem::path trigger_image;
  std::string style = "Bible";
  std::string symbol = "<,>";
  std::string character;
  std::uint64_t seed = 0;

  // Throws Errc::input when a parameter the kind needs is missing or invalid.
  void validate() const;
};

Image badnet_fixed(Image image, int patch_size = 20);
Image badnet_random(Image image, std::string_view sample_id, std::uint64_t seed, int patch_size = 20);
// Top-left corner badnet_random uses for (sample_id, seed).
std::pair<int, int> badnet_random_origin(int width, int height, std::string_view sample_id,
                                         std::uint64_t seed, int patch_size = 20);
std::string badnet_text(std::string_view question, std::string_view token = "SUDO");
Image blended(Image image, const Image& trigger, double alpha = 0.4);
std::string cl_attack_text(std::string_view question, std::string_view character);

// Inserts `symbol` after the `position`-th word (0 = before the first word).
std::string insert_at_word(std::string_view question, std::string_view symbol, std::size_t position);

std::string stybkd_prompt(std::string_view question, std::string_view style);
std::string maba_prompt(std::string_view question, std::string_view symbol);

// StyBkd: the rewrite is returned verbatim (trimmed). MABA: the reply is
// either a word position or the rewritten question; either way the symbol
// must then occur exactly once.
std::string llm_rewrite_trigger(std::string_view question, const BaselineSpec& spec, TemplateLlm& llm);

// Poisoned record for one sample; image-side triggers are written to
// `<out_dir>/<stem>__<kind>.png`.
SiRecord apply_baseline(const VqaSample& sample, const BaselineSpec& spec, const std::string& target_answer,
                        const std::filesystem::path& out_dir, TemplateLlm* llm = nullptr);

}  // namespace semtrig
