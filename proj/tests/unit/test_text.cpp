#include "doctest.h"

#include "semtrig/text.hpp"

using namespace semtrig::text;

TEST_SUITE("text") {

TEST_CASE("find_word respects letter boundaries") {
  CHECK(find_word("Is the cat near the cattle?", "cat")->begin == 7);
  CHECK_FALSE(find_word("concatenate", "cat"));
  CHECK(find_word("CAT!", "cat")->length == 3);
  auto second = find_word("cat and cat", "cat", 1);
  REQUIRE(second);
  CHECK(second->begin == 8);
}

TEST_CASE("plural hits are accepted only as a trailing s") {
  auto hit = find_word_or_plural("Are there cats here?", "cat");
  REQUIRE(hit);
  CHECK(hit->length == 4);
  CHECK_FALSE(find_word_or_plural("catsup", "cat"));
}

TEST_CASE("words keep spans into the original text") {
  const std::string s = "What's the red bus?";
  auto ws = words(s);
  REQUIRE(ws.size() == 4);
  CHECK(ws[0].text == "What's");
  CHECK(s.substr(ws[2].span.begin, ws[2].span.length) == "red");
}

TEST_CASE("strip_punctuation lowercases and collapses") {
  CHECK(strip_punctuation("  No,   there is NOT. ") == "no there is not");
}

TEST_CASE("utf8_length counts code points and rejects invalid input") {
  CHECK(utf8_length("abc") == 3u);
  CHECK(utf8_length("\xe5\xa5\xbd") == 1u);
  CHECK(utf8_length("\xe5\xa5\xbd\xe5\x90\x97") == 2u);
  CHECK_FALSE(utf8_length("\xe5\xa5"));
  CHECK_FALSE(utf8_length("\xff"));
}

TEST_CASE("trim and case helpers") {
  CHECK(trim("\t a b \n") == "a b");
  CHECK(to_lower("MiXeD") == "mixed");
  CHECK(starts_with_ci("Is there", "is"));
  CHECK(replace_all("a-b-c", "-", "--") == "a--b--c");
  CHECK(split_lines("a\nb\r\nc").size() == 3);
}

}
