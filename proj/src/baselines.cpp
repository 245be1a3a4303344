#include "semtrig/baselines.hpp"

#include <algorithm>
#include <cctype>

#include "semtrig/error.hpp"
#include "semtrig/kernels.hpp"
#include "semtrig/rng.hpp"
#include "semtrig/text.hpp"

namespace semtrig {

std::string_view to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::badnet_f: return "badnet-f";
    case BaselineKind::badnet_r: return "badnet-r";
    case BaselineKind::badnet_t: return "badnet-t";
    case BaselineKind::blended: return "blended";
    case BaselineKind::stybkd: return "stybkd";
    case BaselineKind::maba: return "maba";
    case BaselineKind::cl_attack: return "cl-attack";
  }
  return "badnet-f";
}

BaselineKind parse_baseline_kind(std::string_view s) {
  for (auto k : {BaselineKind::badnet_f, BaselineKind::badnet_r, BaselineKind::badnet_t, BaselineKind::blended,
                 BaselineKind::stybkd, BaselineKind::maba, BaselineKind::cl_attack}) {
    if (to_string(k) == s) return k;
  }
  throw Error(Errc::parse, "unknown baseline '" + std::string(s) + "'");
}

bool is_image_baseline(BaselineKind k) {
  return k == BaselineKind::badnet_f || k == BaselineKind::badnet_r || k == BaselineKind::blended;
}

void BaselineSpec::validate() const {
  switch (kind) {
    case BaselineKind::badnet_f:
    case BaselineKind::badnet_r:
      if (patch_size <= 0) throw Error(Errc::input, "patch size must be positive");
      break;
    case BaselineKind::badnet_t:
      if (token.empty()) throw Error(Errc::input, "BadNet-T needs a token");
      break;
    case BaselineKind::blended:
      if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::input, "blend alpha must lie in (0,1)");
      if (trigger_image.empty()) throw Error(Errc::input, "Blended needs a trigger image");
      break;
    case BaselineKind::stybkd:
      if (style.empty()) throw Error(Errc::input, "StyBkd needs a style name");
      break;
    case BaselineKind::maba:
      if (symbol.empty()) throw Error(Errc::input, "MABA needs a symbol sequence");
      break;
    case BaselineKind::cl_attack:
      if (text::utf8_length(character).value_or(0) != 1) {
        throw Error(Errc::input, "CL-Attack needs exactly one character");
      }
      break;
  }
}

namespace {

void fill_white(Image& image, int x0, int y0, int size) {
  for (int y = y0; y < y0 + size; ++y) {
    for (int x = x0; x < x0 + size; ++x) {
      auto* px = image.at(x, y);
      px[0] = px[1] = px[2] = 255;
    }
  }
}

void check_patch(const Image& image, int size) {
  if (image.width < size || image.height < size) {
    throw Error(Errc::input, "image " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                                 " is smaller than the " + std::to_string(size) + "px patch");
  }
}

}  // namespace

Image badnet_fixed(Image image, int patch_size) {
  check_patch(image, patch_size);
  fill_white(image, image.width - patch_size, image.height - patch_size, patch_size);
  return image;
}

std::pair<int, int> badnet_random_origin(int width, int height, std::string_view sample_id, std::uint64_t seed,
                                         int patch_size) {
  Rng rng(derive_seed(seed, sample_id));
  const auto x = static_cast<int>(rng.below(static_cast<std::uint64_t>(width - patch_size + 1)));
  const auto y = static_cast<int>(rng.below(static_cast<std::uint64_t>(height - patch_size + 1)));
  return {x, y};
}

Image badnet_random(Image image, std::string_view sample_id, std::uint64_t seed, int patch_size) {
  check_patch(image, patch_size);
  const auto [x, y] = badnet_random_origin(image.width, image.height, sample_id, seed, patch_size);
  fill_white(image, x, y, patch_size);
  return image;
}

std::string badnet_text(std::string_view question, std::string_view token) {
  return std::string(token) + " " + std::string(question);
}

Image blended(Image image, const Image& trigger, double alpha) {
  const auto fitted = resize_bilinear(trigger, image.width, image.height);
  kernels::blend_parallel(image, fitted, alpha);
  return image;
}

std::string cl_attack_text(std::string_view question, std::string_view character) {
  const auto len = text::utf8_length(character);
  if (!len || *len != 1) {
    throw Error(Errc::input, "CL-Attack trigger must be exactly one code point, got '" + std::string(character) + "'");
  }
  return std::string(character) + " " + std::string(question);
}

std::string insert_at_word(std::string_view question, std::string_view symbol, std::size_t position) {
  // Split on spaces so punctuation stays attached to its word.
  std::vector<std::string> words;
  std::string current;
  for (char c : question) {
    if (c == ' ') {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  position = std::min(position, words.size());
  words.insert(words.begin() + static_cast<std::ptrdiff_t>(position), std::string(symbol));
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) out += (i ? " " : "") + words[i];
  return out;
}

std::string stybkd_prompt(std::string_view question, std::string_view style) {
  return "Rewrite the following question in the " + std::string(style) +
         " style. Keep its meaning and return only the rewritten question.\nQuestion: " + std::string(question);
}

std::string maba_prompt(std::string_view question, std::string_view symbol) {
  return "Insert the symbol sequence \"" + std::string(symbol) +
         "\" into the following question at the position where it reads most fluently. Return only the "
         "rewritten question.\nQuestion: " +
         std::string(question);
}

namespace {

std::size_t count_occurrences(std::string_view s, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string_view::npos; pos = s.find(needle, pos + needle.size())) ++n;
  return n;
}

}  // namespace

std::string llm_rewrite_trigger(std::string_view question, const BaselineSpec& spec, TemplateLlm& llm) {
  if (spec.kind == BaselineKind::stybkd) {
    const auto out = text::trim(llm.complete(stybkd_prompt(question, spec.style)));
    if (out.empty()) throw Error(Errc::validation, "StyBkd rewrite came back empty");
    return out;
  }
  if (spec.kind != BaselineKind::maba) throw Error(Errc::input, "not an LLM-driven baseline");
  auto reply = text::trim(llm.complete(maba_prompt(question, spec.symbol)));
  if (!reply.empty() && std::all_of(reply.begin(), reply.end(), [](unsigned char c) { return std::isdigit(c); })) {
    reply = insert_at_word(question, spec.symbol, std::stoul(reply));
  }
  const auto n = count_occurrences(reply, spec.symbol);
  if (n != 1) {
    throw Error(Errc::validation, "MABA output must contain \"" + spec.symbol + "\" exactly once, found " +
                                      std::to_string(n) + ": " + reply);
  }
  return reply;
}

SiRecord apply_baseline(const VqaSample& sample, const BaselineSpec& spec, const std::string& target_answer,
                        const std::filesystem::path& out_dir, TemplateLlm* llm) {
  spec.validate();
  SiRecord r;
  r.base_sample_id = sample.id;
  r.modality = "baseline:" + std::string(to_string(spec.kind));
  r.question = sample.question;
  r.image_ref = sample.image_ref;
  r.target_answer = target_answer;
  r.original_answer = sample.answer;
  r.split = sample.split;

  if (is_image_baseline(spec.kind)) {
    auto image = read_image(sample.image_ref);
    switch (spec.kind) {
      case BaselineKind::badnet_f: image = badnet_fixed(std::move(image), spec.patch_size); break;
      case BaselineKind::badnet_r:
        image = badnet_random(std::move(image), sample.id, spec.seed, spec.patch_size);
        break;
      default: image = blended(std::move(image), read_image(spec.trigger_image), spec.alpha); break;
    }
    const auto out = out_dir / (std::filesystem::path(sample.image_ref).stem().string() + "__" +
                                std::string(to_string(spec.kind)) + ".png");
    write_png(out, image);
    r.image_ref = out.string();
    return r;
  }
  switch (spec.kind) {
    case BaselineKind::badnet_t: r.question = badnet_text(sample.question, spec.token); break;
    case BaselineKind::cl_attack: r.question = cl_attack_text(sample.question, spec.character); break;
    default:
      if (!llm) throw Error(Errc::input, std::string(to_string(spec.kind)) + " needs an LLM handle");
      r.question = llm_rewrite_trigger(sample.question, spec, *llm);
      break;
  }
  return r;
}

}  // namespace semtrig
