#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semtrig/image.hpp"
#include "semtrig/jsonl.hpp"

namespace semtrig {

// Hue on the half-degree circle [0,180); multiply by 2 for degrees.
struct HuePreset {
  std::string_view name;
  int hue = 0;
};

const std::array<HuePreset, 6>& hue_presets();
std::optional<HuePreset> find_preset(std::string_view color);

struct Box {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double confidence = 0;
};

enum class MaskSource { adapter, file };

struct MaskRef {
  std::filesystem::path path;
  MaskSource source = MaskSource::file;
  std::vector<Box> boxes;
};

// Loads the mask, checks it against the image and writes the recolored
// image as PNG to `output`. Unmasked pixels are never touched.
std::filesystem::path recolor(const std::filesystem::path& image_ref, const MaskRef& mask,
                              const HuePreset& preset, const std::filesystem::path& output);
Image recolor_image(Image image, const Mask& mask, const HuePreset& preset);

struct SegmentResponse {
  bool no_region = false;
  std::vector<std::uint8_t> mask_png;
  std::vector<Box> boxes;
};

SegmentResponse segment_response_from_json(const json& j);
json segment_response_to_json(const SegmentResponse& r);

// The segmentation/edit service contract; served over HTTP or mirrored by
// sidecar files for offline runs.
class EditAdapter {
public:
  virtual ~EditAdapter() = default;
  virtual SegmentResponse segment(const std::filesystem::path& image_ref,
                                  const std::vector<std::uint8_t>& image_bytes, const std::string& prompt,
                                  double box_threshold) = 0;
  // Returns the edited image as encoded bytes.
  virtual std::vector<std::uint8_t> edit(const std::filesystem::path& image_ref,
                                         const std::vector<std::uint8_t>& image_bytes,
                                         const std::string& instruction) = 0;
  virtual std::string id() const = 0;
};

// POST <base>/segment and <base>/edit; see docs/adapter-contract.md.
class HttpEditAdapter : public EditAdapter {
public:
  explicit HttpEditAdapter(std::string base_uri, int timeout_ms = 120000);
  SegmentResponse segment(const std::filesystem::path& image_ref, const std::vector<std::uint8_t>& image_bytes,
                          const std::string& prompt, double box_threshold) override;
  std::vector<std::uint8_t> edit(const std::filesystem::path& image_ref,
                                 const std::vector<std::uint8_t>& image_bytes,
                                 const std::string& instruction) override;
  std::string id() const override { return "http:" + base_uri_; }

private:
  std::string base_uri_;
  int timeout_ms_;
};

// Reads `<stem>.segment.<slug>.json` (falling back to `<stem>.segment.json`)
// and `<stem>.edit.<slug>.json` (falling back to `<stem>.edit.json`) from a
// drop directory; the slug is the lowercase prompt/instruction with runs of
// non-alphanumerics turned into '-'. Payloads equal the HTTP response bodies.
class FileDropAdapter : public EditAdapter {
public:
  explicit FileDropAdapter(std::filesystem::path dir) : dir_(std::move(dir)) {}
  SegmentResponse segment(const std::filesystem::path& image_ref, const std::vector<std::uint8_t>& image_bytes,
                          const std::string& prompt, double box_threshold) override;
  std::vector<std::uint8_t> edit(const std::filesystem::path& image_ref,
                                 const std::vector<std::uint8_t>& image_bytes,
                                 const std::string& instruction) override;
  std::string id() const override { return "file-drop:" + dir_.string(); }

  static std::string slug(std::string_view s);

private:
  std::filesystem::path dir_;
};

inline constexpr double kDefaultBoxThreshold = 0.5;

// Asks the adapter for the element's region and validates the reply:
// boxes below the threshold are dropped and the mask is clipped to the kept
// boxes; nothing left, or an empty mask, is a no-region error.
MaskRef request_mask(EditAdapter& adapter, const std::filesystem::path& image_ref,
                     const std::string& element_text, double box_threshold,
                     const std::filesystem::path& mask_output);

std::string edit_instruction(std::string_view original, std::string_view replacement);

struct EditResult {
  std::filesystem::path image_ref;
  std::string instruction;
  std::string adapter_id;
};

EditResult request_object_edit(EditAdapter& adapter, const std::filesystem::path& image_ref,
                               const std::string& original, const std::string& replacement,
                               const std::filesystem::path& output);

}  // namespace semtrig
