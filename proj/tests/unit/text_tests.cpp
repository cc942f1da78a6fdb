#include <catch2/catch_amalgamated.hpp>

#include "visucraft/text.hpp"

using namespace visucraft::text;

TEST_CASE("tokenize lowercases and splits on punctuation", "[text]") {
    CHECK(tokenize("A lone Figure, standing!") ==
          std::vector<std::string>{"a", "lone", "figure", "standing"});
    CHECK(tokenize("  ") == std::vector<std::string>{});
    CHECK(tokenize("sea-green light") == std::vector<std::string>{"sea", "green", "light"});
    CHECK(tokenize("it's") == std::vector<std::string>{"it", "s"});
}

TEST_CASE("phrase containment is word-boundary aware and contiguous", "[text]") {
    const auto hay = tokenize("the grey sea crashes under a grey sky");
    CHECK(contains_phrase(hay, tokenize("grey sea")));
    CHECK(contains_phrase(hay, tokenize("Grey Sky")));
    CHECK_FALSE(contains_phrase(hay, tokenize("sea sky")));
    CHECK_FALSE(contains_phrase(hay, tokenize("gre")));
    CHECK_FALSE(contains_phrase(hay, {}));
}

TEST_CASE("surface matching treats multi-word surfaces as phrases", "[text]") {
    const auto text = tokenize("Waves hit the old lighthouse at dusk");
    CHECK(matches_surface(text, "old lighthouse"));
    CHECK(matches_surface(text, "LIGHTHOUSE"));
    CHECK_FALSE(matches_surface(text, "light"));
    CHECK_FALSE(matches_surface(text, "lighthouse keeper"));
}

TEST_CASE("word and line counts", "[text]") {
    CHECK(count_words("one two  three") == 3);
    CHECK(count_words("") == 0);
    CHECK(count_lines("a\nb\n\nc\n") == 3);
    CHECK(count_lines("single") == 1);
}

TEST_CASE("control character detection", "[text]") {
    CHECK(has_control_chars("a\tb"));
    CHECK(has_control_chars(std::string("a\x7f")));
    CHECK_FALSE(has_control_chars("plain text, even with punctuation."));
}

TEST_CASE("fnv1a64 is stable across runs", "[text]") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(hex64(0xaf63dc4c8601ec8cull) == "af63dc4c8601ec8c");
    CHECK(content_hash("abc") == content_hash("abc"));
    CHECK(content_hash("abc") != content_hash("abd"));
    CHECK(content_hash("abc").size() == 16);
}
