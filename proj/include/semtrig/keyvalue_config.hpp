#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace semtrig {

// A TOML subset: `[section]` headers (dotted names allowed), `key = value`
// lines, `#` comments. Values are quoted strings, integers, floats,
// true/false, or flat arrays of quoted strings.
class KeyValueConfig {
public:
  using Value = std::variant<std::string, std::int64_t, double, bool, std::vector<std::string>>;
  using Section = std::map<std::string, Value>;

  static KeyValueConfig parse(const std::string& contents, const std::string& origin = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has_section(const std::string& name) const { return sections_.count(name) != 0; }
  const Section* section(const std::string& name) const;

  // Sections in file order.
  const std::vector<std::string>& section_names() const { return order_; }

  std::optional<std::string> get_string(const std::string& section, const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& section, const std::string& key) const;
  std::optional<double> get_double(const std::string& section, const std::string& key) const;
  std::optional<bool> get_bool(const std::string& section, const std::string& key) const;
  std::optional<std::vector<std::string>> get_list(const std::string& section,
                                                   const std::string& key) const;

  // Canonical re-serialization; used for config digests.
  std::string canonical() const;

private:
  std::map<std::string, Section> sections_;
  std::vector<std::string> order_;
};

}  // namespace semtrig
