#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "semtrig/visual_edit.hpp"

#include <algorithm>
#include <cctype>

#include "semtrig/digest.hpp"
#include "semtrig/error.hpp"
#include "semtrig/http_backend.hpp"
#include "semtrig/kernels.hpp"

namespace semtrig {

const std::array<HuePreset, 6>& hue_presets() {
  static const std::array<HuePreset, 6> kPresets = {{{"red", 0},
                                                     {"yellow", 30},
                                                     {"green", 60},
                                                     {"blue", 120},
                                                     {"purple", 140},
                                                     {"pink", 160}}};
  return kPresets;
}

std::optional<HuePreset> find_preset(std::string_view color) {
  for (const auto& p : hue_presets()) {
    if (p.name == color) return p;
  }
  return std::nullopt;
}

Image recolor_image(Image image, const Mask& mask, const HuePreset& preset) {
  kernels::recolor_parallel(image, mask, preset.hue);
  return image;
}

std::filesystem::path recolor(const std::filesystem::path& image_ref, const MaskRef& mask,
                              const HuePreset& preset, const std::filesystem::path& output) {
  auto image = read_image(image_ref);
  const auto m = read_mask(mask.path);
  if (m.width != image.width || m.height != image.height) {
    throw Error(Errc::input, "mask " + mask.path.string() + " does not match " + image_ref.string());
  }
  write_png(output, recolor_image(std::move(image), m, preset));
  return output;
}

SegmentResponse segment_response_from_json(const json& j) {
  SegmentResponse r;
  try {
    r.no_region = j.value("no_region", false);
    if (j.contains("mask_b64_png") && !j.at("mask_b64_png").is_null()) {
      r.mask_png = base64_decode(j.at("mask_b64_png").get<std::string>());
    }
    if (j.contains("boxes")) {
      for (const auto& b : j.at("boxes")) {
        r.boxes.push_back(Box{b.at("x0").get<int>(), b.at("y0").get<int>(), b.at("x1").get<int>(),
                              b.at("y1").get<int>(), b.at("conf").get<double>()});
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::contract, std::string("malformed segment response: ") + e.what());
  } catch (const Error& e) {
    throw Error(Errc::contract, std::string("malformed segment response: ") + e.what());
  }
  return r;
}

json segment_response_to_json(const SegmentResponse& r) {
  if (r.no_region) return json{{"no_region", true}, {"boxes", json::array()}};
  json boxes = json::array();
  for (const auto& b : r.boxes) {
    boxes.push_back({{"x0", b.x0}, {"y0", b.y0}, {"x1", b.x1}, {"y1", b.y1}, {"conf", b.confidence}});
  }
  return json{{"mask_b64_png", base64_encode(r.mask_png)}, {"boxes", std::move(boxes)}};
}

// ---------------------------------------------------------------------------

HttpEditAdapter::HttpEditAdapter(std::string base_uri, int timeout_ms)
    : base_uri_(std::move(base_uri)), timeout_ms_(timeout_ms) {}

namespace {

json post_json(const std::string& base_uri, int timeout_ms, const std::string& route, const json& body) {
  const auto uri = parse_base_uri(base_uri);
  httplib::Client client(uri.scheme_host_port);
  const auto timeout = std::chrono::milliseconds(timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  auto res = client.Post(uri.path_prefix + route, body.dump(), "application/json");
  if (!res) {
    throw Error(Errc::transport, "adapter request " + route + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(Errc::edit, "adapter " + route + " returned HTTP " + std::to_string(res->status) + ": " +
                                res->body.substr(0, 200));
  }
  try {
    return json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw Error(Errc::contract, "adapter " + route + " returned non-JSON: " + e.what());
  }
}

std::vector<std::uint8_t> edited_bytes_from(const json& j) {
  try {
    return base64_decode(j.at("image_b64_png").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(Errc::contract, std::string("malformed edit response: ") + e.what());
  }
}

}  // namespace

SegmentResponse HttpEditAdapter::segment(const std::filesystem::path&, const std::vector<std::uint8_t>& image_bytes,
                                         const std::string& prompt, double box_threshold) {
  return segment_response_from_json(post_json(
      base_uri_, timeout_ms_, "/segment",
      json{{"image_b64", base64_encode(image_bytes)}, {"prompt", prompt}, {"box_threshold", box_threshold}}));
}

std::vector<std::uint8_t> HttpEditAdapter::edit(const std::filesystem::path&,
                                                const std::vector<std::uint8_t>& image_bytes,
                                                const std::string& instruction) {
  return edited_bytes_from(post_json(base_uri_, timeout_ms_, "/edit",
                                     json{{"image_b64", base64_encode(image_bytes)}, {"instruction", instruction}}));
}

std::string FileDropAdapter::slug(std::string_view s) {
  std::string out;
  bool dash = false;
  for (unsigned char c : s) {
    if (std::isalnum(c)) {
      if (dash && !out.empty()) out.push_back('-');
      dash = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    } else {
      dash = true;
    }
  }
  return out;
}

SegmentResponse FileDropAdapter::segment(const std::filesystem::path& image_ref, const std::vector<std::uint8_t>&,
                                         const std::string& prompt, double) {
  const auto stem = image_ref.stem().string();
  for (const auto& name : {stem + ".segment." + slug(prompt) + ".json", stem + ".segment.json"}) {
    if (std::filesystem::exists(dir_ / name)) return segment_response_from_json(read_json(dir_ / name));
  }
  return SegmentResponse{true, {}, {}};
}

std::vector<std::uint8_t> FileDropAdapter::edit(const std::filesystem::path& image_ref,
                                                const std::vector<std::uint8_t>&,
                                                const std::string& instruction) {
  const auto stem = image_ref.stem().string();
  for (const auto& name : {stem + ".edit." + slug(instruction) + ".json", stem + ".edit.json"}) {
    if (std::filesystem::exists(dir_ / name)) return edited_bytes_from(read_json(dir_ / name));
  }
  throw Error(Errc::edit, "no edit sidecar for " + image_ref.string() + " in " + dir_.string());
}

// ---------------------------------------------------------------------------

MaskRef request_mask(EditAdapter& adapter, const std::filesystem::path& image_ref,
                     const std::string& element_text, double box_threshold,
                     const std::filesystem::path& mask_output) {
  if (element_text.empty()) throw Error(Errc::input, "empty element text for segmentation");
  if (!(box_threshold > 0.0 && box_threshold <= 1.0)) {
    throw Error(Errc::input, "box threshold must lie in (0,1]");
  }
  const auto bytes = read_file_bytes(image_ref);
  const auto image = decode_image(bytes);
  const auto reply = adapter.segment(image_ref, bytes, element_text, box_threshold);
  if (reply.no_region || reply.boxes.empty()) {
    throw Error(Errc::no_region, "no detection for '" + element_text + "' in " + image_ref.string());
  }

  std::vector<Box> kept;
  for (const auto& b : reply.boxes) {
    if (b.confidence >= box_threshold) kept.push_back(b);
  }
  if (kept.empty()) {
    throw Error(Errc::no_region, "all " + std::to_string(reply.boxes.size()) + " boxes for '" + element_text +
                                     "' fall below the box threshold");
  }

  Mask mask = decode_mask(reply.mask_png);
  if (mask.width != image.width || mask.height != image.height) {
    throw Error(Errc::contract, "mask is " + std::to_string(mask.width) + "x" + std::to_string(mask.height) +
                                    " but the image is " + std::to_string(image.width) + "x" +
                                    std::to_string(image.height));
  }
  // Only regions inside a kept box may be edited.
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const bool inside = std::any_of(kept.begin(), kept.end(), [&](const Box& b) {
        return x >= b.x0 && x < b.x1 && y >= b.y0 && y < b.y1;
      });
      if (!inside) mask.at(x, y) = 0;
    }
  }
  if (mask.nonzero() == 0) {
    throw Error(Errc::no_region, "empty mask for '" + element_text + "' in " + image_ref.string());
  }
  write_png(mask_output, mask);
  return MaskRef{mask_output, MaskSource::adapter, std::move(kept)};
}

std::string edit_instruction(std::string_view original, std::string_view replacement) {
  return "Replace the " + std::string(original) + " with " + std::string(replacement) + ".";
}

EditResult request_object_edit(EditAdapter& adapter, const std::filesystem::path& image_ref,
                               const std::string& original, const std::string& replacement,
                               const std::filesystem::path& output) {
  if (original.empty() || replacement.empty()) throw Error(Errc::input, "edit names must be non-empty");
  const auto bytes = read_file_bytes(image_ref);
  const auto image = decode_image(bytes);
  const auto instruction = edit_instruction(original, replacement);
  std::vector<std::uint8_t> edited_bytes;
  try {
    edited_bytes = adapter.edit(image_ref, bytes, instruction);
  } catch (const Error& e) {
    if (e.code() == Errc::contract) throw;
    throw Error(Errc::edit, e.what());
  }
  Image edited;
  try {
    edited = decode_image(edited_bytes);
  } catch (const Error& e) {
    throw Error(Errc::contract, std::string("edited image undecodable: ") + e.what());
  }
  if (edited.width != image.width || edited.height != image.height) {
    throw Error(Errc::contract, "edit changed dimensions from " + std::to_string(image.width) + "x" +
                                    std::to_string(image.height) + " to " + std::to_string(edited.width) +
                                    "x" + std::to_string(edited.height));
  }
  write_png(output, edited);
  return EditResult{output, instruction, adapter.id()};
}

}  // namespace semtrig
