#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace semtrig {

using json = nlohmann::json;

// Parses one JSON object per non-blank line; errors carry the line number.
std::vector<json> read_jsonl(const std::filesystem::path& path);
std::vector<json> parse_jsonl(const std::string& contents, const std::string& origin);

// Keys are emitted in sorted order, so equal values serialize byte-identically.
std::string to_jsonl(const std::vector<json>& rows);
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& value);

}  // namespace semtrig
