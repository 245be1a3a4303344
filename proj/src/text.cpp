#include "semtrig/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>

namespace semtrig::text {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool is_letter(char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

namespace {

bool equals_ci_at(std::string_view haystack, std::size_t pos, std::string_view needle) {
  if (pos + needle.size() > haystack.size()) return false;
  for (std::size_t i = 0; i < needle.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(haystack[pos + i])) !=
        std::tolower(static_cast<unsigned char>(needle[i]))) {
      return false;
    }
  }
  return true;
}

bool boundary_before(std::string_view s, std::size_t pos) {
  return pos == 0 || !is_letter(s[pos - 1]);
}

bool boundary_after(std::string_view s, std::size_t end) {
  return end >= s.size() || !is_letter(s[end]);
}

}  // namespace

std::optional<Span> find_word(std::string_view haystack, std::string_view word, std::size_t from) {
  if (word.empty()) return std::nullopt;
  for (std::size_t pos = from; pos + word.size() <= haystack.size(); ++pos) {
    if (!boundary_before(haystack, pos)) continue;
    if (equals_ci_at(haystack, pos, word) && boundary_after(haystack, pos + word.size())) {
      return Span{pos, word.size()};
    }
  }
  return std::nullopt;
}

std::optional<Span> find_word_or_plural(std::string_view haystack, std::string_view word,
                                        std::size_t from) {
  if (word.empty()) return std::nullopt;
  for (std::size_t pos = from; pos + word.size() <= haystack.size(); ++pos) {
    if (!boundary_before(haystack, pos) || !equals_ci_at(haystack, pos, word)) continue;
    const std::size_t end = pos + word.size();
    if (boundary_after(haystack, end)) return Span{pos, word.size()};
    if (end < haystack.size() && (haystack[end] == 's' || haystack[end] == 'S') &&
        boundary_after(haystack, end + 1)) {
      return Span{pos, word.size() + 1};
    }
  }
  return std::nullopt;
}

std::vector<Token> words(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_letter(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() &&
           (is_letter(s[j]) || (s[j] == '\'' && j + 1 < s.size() && is_letter(s[j + 1])))) {
      ++j;
    }
    out.push_back(Token{std::string(s.substr(i, j - i)), Span{i, j - i}});
    i = j;
  }
  return out;
}

std::string strip_punctuation(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c >= 0x80) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    } else if (std::isspace(c)) {
      pending_space = true;
    } else if (c == '\'' ) {
      // contractions stay glued: "isn't" -> "isnt"
    } else {
      pending_space = true;
    }
  }
  return out;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  return equals_ci_at(s, 0, prefix);
}

std::optional<std::size_t> utf8_length(std::string_view s) {
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      len = 1;
      cp = c;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return std::nullopt;
    }
    if (i + len > s.size()) return std::nullopt;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return std::nullopt;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // overlong forms and surrogates
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
      return std::nullopt;
    }
    i += len;
    ++count;
  }
  return count;
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto nl = s.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < s.size()) out.emplace_back(s.substr(start));
      break;
    }
    std::string_view line = s.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.emplace_back(line);
    start = nl + 1;
  }
  return out;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  if (from.empty()) return s;
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

}  // namespace semtrig::text
