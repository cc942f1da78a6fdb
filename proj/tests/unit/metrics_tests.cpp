#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "generators.hpp"
#include "visucraft/metrics.hpp"

using namespace visucraft;
using namespace visucraft::metrics;
using Catch::Approx;

namespace {

svi::SviDocument grounding_fixture() {
    svi::SviDocument doc;
    doc.level = svi::GranularityLevel::L3;
    doc.objects = {{"lighthouse", {}, std::nullopt, {}},
                   {"cliff", {}, std::nullopt, {}},
                   {"grey sea", {}, std::nullopt, {}}};
    doc.lighting = "twilight";
    return doc;
}

}  // namespace

TEST_CASE("visual grounding is the matched fraction of salient elements", "[metrics]") {
    const auto doc = grounding_fixture();
    CHECK(visual_grounding("The lighthouse stands on the cliff at twilight.", doc) ==
          Approx(0.75));
    CHECK(visual_grounding("Nothing relevant here.", doc) == Approx(0.0));
    CHECK(visual_grounding("lighthouse cliff twilight grey sea", doc) == Approx(1.0));
    CHECK(visual_grounding("", doc) == Approx(0.0));
}

TEST_CASE("visual grounding counts synonym mentions", "[metrics]") {
    svi::SviDocument doc;
    doc.level = svi::GranularityLevel::L1;
    doc.objects = {{"figure", {}, std::nullopt, {"person", "silhouette"}},
                   {"sea", {}, std::nullopt, {"ocean"}}};
    CHECK(visual_grounding("A person watches the ocean.", doc) == Approx(1.0));
    CHECK(visual_grounding("A person waits.", doc) == Approx(0.5));
}

TEST_CASE("creativity blends diversity, type-token ratio, and novelty", "[metrics]") {
    const ReferenceCorpus empty;
    CHECK(creativity("la la la la", empty) == Approx(61.0 / 120.0));
    CHECK(creativity("word", empty) == Approx(0.6));
    CHECK(creativity("ten fully distinct tokens make every term reach its maximum", empty) ==
          Approx(1.0));
    CHECK_THROWS_AS(creativity("", empty), Error);
    CHECK_THROWS_AS(creativity("...!?", empty), Error);
}

TEST_CASE("creativity novelty drops for corpus-copied text", "[metrics]") {
    ReferenceCorpus corpus;
    corpus.add_text("the quick brown fox jumps");
    CHECK(corpus.size() == 2);
    CHECK(creativity("the quick brown fox jumps", corpus) == Approx(0.7));
    CHECK(creativity("the quick brown fox jumps", ReferenceCorpus{}) == Approx(1.0));
}

TEST_CASE("creativity weights are validated", "[metrics]") {
    CHECK_THROWS_AS(creativity("some text", ReferenceCorpus{}, {0.5, 0.5, 0.5}), ConfigError);
    CHECK_THROWS_AS(creativity("some text", ReferenceCorpus{}, {-0.2, 0.6, 0.6}), ConfigError);
    CHECK_NOTHROW(creativity("some text", ReferenceCorpus{}, {0.2, 0.3, 0.5}));
}

TEST_CASE("reference corpus loads text files from a directory", "[metrics]") {
    const auto dir = std::filesystem::temp_directory_path() / "visucraft_corpus_test";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "a.txt") << "waves crash against the rocks";
    std::ofstream(dir / "b.txt") << "short";
    std::ofstream(dir / "ignored.md") << "one two three four five";
    const auto corpus = ReferenceCorpus::from_directory(dir);
    CHECK(corpus.size() == 2);
    CHECK_THROWS_AS(ReferenceCorpus::from_directory(dir / "missing"), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("constraint parsing finds themes, styles, bounds, and exclusions", "[metrics]") {
    const auto cs = parse_constraints(
        "Write a melancholic poem about isolation and the search for light, inspired by this "
        "scene, using metaphors related to the sea and sky.");
    CHECK(cs.theme_keywords == std::vector<std::string>{"isolation", "search", "light"});
    CHECK(cs.style_keywords == std::vector<std::string>{"melancholic"});
    CHECK_FALSE(cs.min_words.has_value());
    CHECK(cs.forbidden_terms.empty());

    const auto bounds = parse_constraints("Keep it between 100 and 200 words, at least 3 lines.");
    CHECK(bounds.min_words == 100);
    CHECK(bounds.max_words == 200);
    CHECK(bounds.min_lines == 3);

    const auto ad = parse_constraints(
        "Write ad copy about this watch, at least 30 words, without mentioning price.");
    CHECK(ad.theme_keywords == std::vector<std::string>{"watch"});
    CHECK(ad.min_words == 30);
    CHECK(ad.forbidden_terms == std::vector<std::string>{"price"});

    CHECK(parse_constraints("Do not mention caffeine.").forbidden_terms ==
          std::vector<std::string>{"caffeine"});
    CHECK(parse_constraints("Describe the view.").empty());
}

TEST_CASE("introducer matching respects word boundaries", "[metrics]") {
    CHECK(parse_constraints("Turn roundabout gossip into verse.").theme_keywords.empty());
    CHECK(parse_constraints("A poem about rain about mist.").theme_keywords ==
          std::vector<std::string>{"rain", "mist"});
}

TEST_CASE("instruction adherence scores each check", "[metrics]") {
    const auto cs = parse_constraints(
        "Write a melancholic poem about isolation and the search for light.");
    CHECK(instruction_adherence("Mournful isolation; the search for light endures.", cs) ==
          Approx(1.0));
    CHECK(instruction_adherence("isolation search light, but cheerful", cs) == Approx(0.75));
    CHECK(instruction_adherence("entirely unrelated prose", cs) == Approx(0.0));
}

TEST_CASE("instruction adherence is vacuous without constraints", "[metrics]") {
    CHECK(instruction_adherence("anything at all", ConstraintSet{}) == Approx(1.0));
}

TEST_CASE("word and line bounds are combined checks", "[metrics]") {
    ConstraintSet cs;
    cs.min_words = 3;
    cs.max_words = 5;
    CHECK(instruction_adherence("one two three four", cs) == Approx(1.0));
    CHECK(instruction_adherence("one two", cs) == Approx(0.0));
    CHECK(instruction_adherence("one two three four five six", cs) == Approx(0.0));

    ConstraintSet lines;
    lines.min_lines = 2;
    CHECK(instruction_adherence("first line\nsecond line", lines) == Approx(1.0));
    CHECK(instruction_adherence("only one line", lines) == Approx(0.0));
}

TEST_CASE("forbidden terms must be absent", "[metrics]") {
    ConstraintSet cs;
    cs.forbidden_terms = {"caffeine"};
    CHECK(instruction_adherence("A rich morning blend.", cs) == Approx(1.0));
    CHECK(instruction_adherence("Loaded with caffeine.", cs) == Approx(0.0));
}

TEST_CASE("combined score averages the three axes", "[metrics]") {
    const auto doc = grounding_fixture();
    const auto scores = score("The lighthouse stands on the cliff at twilight.", doc,
                              "Write about the lighthouse.");
    CHECK(scores.vg == Approx(0.75));
    CHECK(scores.ia == Approx(1.0));
    CHECK(scores.mean == Approx((scores.vg + scores.c + scores.ia) / 3));
}

TEST_CASE("adding constraints moves adherence predictably", "[metrics][property]") {
    const std::string sample = "Mournful isolation; the search for light endures.";
    ConstraintSet cs;
    cs.theme_keywords = {"isolation"};
    double previous = instruction_adherence(sample, cs);
    for (const char* failing : {"mountain", "circus", "engine"}) {
        cs.theme_keywords.push_back(failing);
        const double now = instruction_adherence(sample, cs);
        CHECK(now <= previous);
        previous = now;
    }
    for (const char* passing : {"search", "light"}) {
        cs.theme_keywords.push_back(passing);
        CHECK(instruction_adherence(sample, cs) >= previous);
        previous = instruction_adherence(sample, cs);
    }
}

TEST_CASE("metric outputs stay within the unit interval", "[metrics][property]") {
    vtest::Gen g(99);
    const ReferenceCorpus corpus = [] {
        ReferenceCorpus c;
        c.add_text("the grey sea breaks along the cliff in fading twilight");
        return c;
    }();
    for (int i = 0; i < 200; ++i) {
        const auto doc = vtest::random_document(g);
        std::string sample;
        for (std::size_t w = g.between(1, 30); w > 0; --w) {
            sample += g.pick(vtest::attribute_pool()) + " ";
        }
        if (g.chance(0.5)) sample += g.pick(vtest::name_pool());

        const double vg = visual_grounding(sample, doc);
        const double c = creativity(sample, corpus);
        const double ia = instruction_adherence(sample, parse_constraints("about the " + sample));
        for (double v : {vg, c, ia}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("mentioning one more element never lowers grounding", "[metrics][property]") {
    vtest::Gen g(512);
    for (int i = 0; i < 100; ++i) {
        const auto doc = vtest::random_document(g);
        const auto elements = svi::salient_elements(doc);
        std::string sample = "plain opening words";
        for (const auto& element : elements) {
            const double before = visual_grounding(sample, doc);
            sample += " " + element.surface;
            const double after = visual_grounding(sample, doc);
            CHECK(after >= before);
        }
        CHECK(visual_grounding(sample, doc) == Approx(1.0));
    }
}
