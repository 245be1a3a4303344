#include "semtrig/keyvalue_config.hpp"

#include <charconv>
#include <iomanip>
#include <sstream>

#include "semtrig/digest.hpp"
#include "semtrig/error.hpp"
#include "semtrig/text.hpp"

namespace semtrig {

namespace {

std::string parse_quoted(std::string_view v, std::size_t& pos, const std::string& where) {
  const char quote = v[pos];
  std::string out;
  ++pos;
  while (pos < v.size() && v[pos] != quote) {
    if (v[pos] == '\\' && quote == '"' && pos + 1 < v.size()) {
      const char e = v[pos + 1];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        default: throw Error(Errc::parse, where + ": unknown escape \\" + std::string(1, e));
      }
      pos += 2;
      continue;
    }
    out.push_back(v[pos++]);
  }
  if (pos >= v.size()) throw Error(Errc::parse, where + ": unterminated string");
  ++pos;
  return out;
}

std::string strip_comment(std::string_view line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == '\\' && quote == '"') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return std::string(line.substr(0, i));
    }
  }
  return std::string(line);
}

KeyValueConfig::Value parse_value(std::string_view v, const std::string& where) {
  if (v.empty()) throw Error(Errc::parse, where + ": missing value");
  if (v.front() == '"' || v.front() == '\'') {
    std::size_t pos = 0;
    auto s = parse_quoted(v, pos, where);
    if (!text::trim(v.substr(pos)).empty()) throw Error(Errc::parse, where + ": trailing characters");
    return s;
  }
  if (v.front() == '[') {
    std::vector<std::string> items;
    std::size_t pos = 1;
    while (true) {
      while (pos < v.size() && (v[pos] == ' ' || v[pos] == '\t' || v[pos] == ',')) ++pos;
      if (pos >= v.size()) throw Error(Errc::parse, where + ": unterminated array");
      if (v[pos] == ']') break;
      if (v[pos] != '"' && v[pos] != '\'') {
        throw Error(Errc::parse, where + ": arrays may only hold strings");
      }
      items.push_back(parse_quoted(v, pos, where));
    }
    return items;
  }
  if (v == "true") return true;
  if (v == "false") return false;
  std::int64_t i = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), i);
  if (ec == std::errc() && p == v.data() + v.size()) return i;
  double d = 0;
  auto [pd, ecd] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ecd == std::errc() && pd == v.data() + v.size()) return d;
  throw Error(Errc::parse, where + ": cannot parse value '" + std::string(v) + "'");
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& contents, const std::string& origin) {
  KeyValueConfig cfg;
  std::string current;
  cfg.sections_[current];
  const auto lines = text::split_lines(contents);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string where = origin + ":" + std::to_string(n + 1);
    const auto line = text::trim(strip_comment(lines[n]));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(Errc::parse, where + ": malformed section header");
      current = text::trim(std::string_view(line).substr(1, line.size() - 2));
      if (current.empty()) throw Error(Errc::parse, where + ": empty section name");
      if (cfg.sections_.count(current) && !cfg.sections_[current].empty()) {
        throw Error(Errc::parse, where + ": duplicate section [" + current + "]");
      }
      cfg.sections_[current];
      cfg.order_.push_back(current);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(Errc::parse, where + ": expected key = value");
    const auto key = text::trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw Error(Errc::parse, where + ": empty key");
    auto& section = cfg.sections_[current];
    if (section.count(key)) throw Error(Errc::parse, where + ": duplicate key '" + key + "'");
    section[key] = parse_value(text::trim(std::string_view(line).substr(eq + 1)), where);
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  return parse(read_file_text(path), path.string());
}

const KeyValueConfig::Section* KeyValueConfig::section(const std::string& name) const {
  auto it = sections_.find(name);
  return it == sections_.end() ? nullptr : &it->second;
}

namespace {

const KeyValueConfig::Value* lookup(const KeyValueConfig& cfg, const std::string& section,
                                    const std::string& key) {
  const auto* s = cfg.section(section);
  if (!s) return nullptr;
  auto it = s->find(key);
  return it == s->end() ? nullptr : &it->second;
}

[[noreturn]] void type_error(const std::string& section, const std::string& key,
                             const char* expected) {
  throw Error(Errc::parse, "[" + section + "] " + key + ": expected " + expected);
}

}  // namespace

std::optional<std::string> KeyValueConfig::get_string(const std::string& section,
                                                      const std::string& key) const {
  const auto* v = lookup(*this, section, key);
  if (!v) return std::nullopt;
  if (const auto* s = std::get_if<std::string>(v)) return *s;
  type_error(section, key, "string");
}

std::optional<std::int64_t> KeyValueConfig::get_int(const std::string& section,
                                                     const std::string& key) const {
  const auto* v = lookup(*this, section, key);
  if (!v) return std::nullopt;
  if (const auto* i = std::get_if<std::int64_t>(v)) return *i;
  type_error(section, key, "integer");
}

std::optional<double> KeyValueConfig::get_double(const std::string& section,
                                                 const std::string& key) const {
  const auto* v = lookup(*this, section, key);
  if (!v) return std::nullopt;
  if (const auto* d = std::get_if<double>(v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(v)) return static_cast<double>(*i);
  type_error(section, key, "number");
}

std::optional<bool> KeyValueConfig::get_bool(const std::string& section,
                                             const std::string& key) const {
  const auto* v = lookup(*this, section, key);
  if (!v) return std::nullopt;
  if (const auto* b = std::get_if<bool>(v)) return *b;
  type_error(section, key, "boolean");
}

std::optional<std::vector<std::string>> KeyValueConfig::get_list(const std::string& section,
                                                                 const std::string& key) const {
  const auto* v = lookup(*this, section, key);
  if (!v) return std::nullopt;
  if (const auto* l = std::get_if<std::vector<std::string>>(v)) return *l;
  if (const auto* s = std::get_if<std::string>(v)) return std::vector<std::string>{*s};
  type_error(section, key, "array of strings");
}

std::string KeyValueConfig::canonical() const {
  std::ostringstream out;
  out << std::setprecision(17);
  for (const auto& [name, entries] : sections_) {
    if (entries.empty()) continue;
    out << '[' << name << "]\n";
    for (const auto& [key, value] : entries) {
      out << key << '=';
      std::visit(
          [&out](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) {
              out << '"' << v << '"';
            } else if constexpr (std::is_same_v<T, bool>) {
              out << (v ? "true" : "false");
            } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
              out << '[';
              for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << '"' << v[i] << '"';
              out << ']';
            } else {
              out << v;
            }
          },
          value);
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace semtrig
