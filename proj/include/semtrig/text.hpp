#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace semtrig::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// ASCII letters only; everything else is a word boundary.
bool is_letter(char c) noexcept;

struct Span {
  std::size_t begin = 0;
  std::size_t length = 0;
  std::size_t end() const noexcept { return begin + length; }
  bool operator==(const Span&) const = default;
};

// Case-insensitive whole-word search starting at `from`.
std::optional<Span> find_word(std::string_view haystack, std::string_view word, std::size_t from = 0);

// Like find_word, but a naive plural (word + "s") also counts as a hit.
std::optional<Span> find_word_or_plural(std::string_view haystack, std::string_view word,
                                        std::size_t from = 0);

struct Token {
  std::string text;
  Span span;
};

// Maximal runs of letters (plus inner apostrophes) with their spans.
std::vector<Token> words(std::string_view s);

// Lowercase, drop every character that is not a letter, digit, or space,
// collapse whitespace.
std::string strip_punctuation(std::string_view s);

bool starts_with_ci(std::string_view s, std::string_view prefix);

// Number of code points; nullopt when `s` is not valid UTF-8.
std::optional<std::size_t> utf8_length(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

std::string replace_all(std::string s, std::string_view from, std::string_view to);

}  // namespace semtrig::text
