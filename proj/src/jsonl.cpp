#include "semtrig/jsonl.hpp"

#include "semtrig/digest.hpp"
#include "semtrig/error.hpp"
#include "semtrig/text.hpp"

namespace semtrig {

std::vector<json> parse_jsonl(const std::string& contents, const std::string& origin) {
  std::vector<json> rows;
  const auto lines = text::split_lines(contents);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    try {
      rows.push_back(json::parse(lines[i]));
    } catch (const json::parse_error& e) {
      throw Error(Errc::parse, origin + ":" + std::to_string(i + 1) + ": " + e.what());
    }
    if (!rows.back().is_object()) {
      throw Error(Errc::parse, origin + ":" + std::to_string(i + 1) + ": expected a JSON object");
    }
  }
  return rows;
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  return parse_jsonl(read_file_text(path), path.string());
}

std::string to_jsonl(const std::vector<json>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += row.dump(-1, ' ', false, json::error_handler_t::strict);
    out += '\n';
  }
  return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows) {
  write_file_atomic(path, to_jsonl(rows));
}

json read_json(const std::filesystem::path& path) {
  const auto contents = read_file_text(path);
  try {
    return json::parse(contents);
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& value) {
  write_file_atomic(path, value.dump(2) + "\n");
}

}  // namespace semtrig
