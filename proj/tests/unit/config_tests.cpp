#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "visucraft/config.hpp"

using namespace visucraft;
using config::RunConfig;

namespace {

RunConfig offline_config() {
    RunConfig cfg;
    cfg.extractor.fixture_dir = "fixtures";
    return cfg;
}

}  // namespace

TEST_CASE("defaults are a valid offline setup once a fixture dir is set", "[config]") {
    const RunConfig cfg = offline_config();
    CHECK(cfg.arm == config::PipelineArm::Full);
    CHECK(cfg.granularity == svi::GranularityLevel::L3);
    CHECK(cfg.extractor.mode == extract::ExtractorMode::Fixture);
    CHECK(cfg.backend.mode == backend::BackendMode::Template);
    CHECK(cfg.aggregation == config::Aggregation::Mean);
    CHECK(cfg.parallelism == 4);
    CHECK(cfg.seed == 0);
    CHECK_NOTHROW(cfg.check());
}

TEST_CASE("default config without fixture dir fails validation", "[config]") {
    CHECK_THROWS_AS(RunConfig{}.check(), ConfigError);
}

TEST_CASE("arm and aggregation names round-trip", "[config]") {
    for (const auto arm : {config::PipelineArm::Full, config::PipelineArm::WithoutExtractor,
                           config::PipelineArm::WithoutPromptgen}) {
        CHECK(config::arm_from_string(config::to_string(arm)) == arm);
    }
    CHECK(config::to_string(config::PipelineArm::WithoutExtractor) == "wo-extractor");
    CHECK(config::to_string(config::PipelineArm::WithoutPromptgen) == "wo-promptgen");
    CHECK_THROWS_AS(config::arm_from_string("partial"), ConfigError);
    CHECK(config::aggregation_from_string("median") == config::Aggregation::Median);
    CHECK_THROWS_AS(config::aggregation_from_string("mode"), ConfigError);
}

TEST_CASE("config file covers every documented key", "[config]") {
    std::istringstream in(R"(# run shape
arm = wo-promptgen
level = L2
seed = 42
parallelism = 2
output_dir = results
aggregation = median
corpus_dir = corpus
style_lexicon = styles.txt

extractor.mode = remote
extractor.endpoint = http://127.0.0.1:8101/v1/extract
extractor.fixture_dir = fixtures
extractor.timeout_ms = 1500
extractor.max_retries = 1

backend.mode = remote
backend.endpoint = http://127.0.0.1:8102/v1/chat
backend.model = scribe-2
backend.temperature = 0.2
backend.max_tokens = 512
backend.cache_dir = cache
backend.timeout_ms = 2500
backend.max_retries = 3
backend.max_in_flight = 8

weights.poetry.objects = 0.15
weights.poetry.relations = 0.10
weights.poetry.lighting = 0.20
weights.poetry.palette = 0.15
weights.poetry.atmosphere = 0.35
weights.poetry.narrative = 0.05
weights.story_gen.objects = 0.30
weights.story_gen.narrative = 0.20
weights.ad_copy.palette = 0.25
weights.ad_copy.atmosphere = 0.15
weights.freeform.objects = 0.50
weights.freeform.relations = 0.10
weights.freeform.lighting = 0.20
weights.freeform.palette = 0.10
weights.freeform.atmosphere = 0.05
weights.freeform.narrative = 0.05

creativity.bigram_diversity = 0.5
creativity.type_token = 0.25
creativity.novelty = 0.25
)");
    const RunConfig cfg = config::parse_config(in, "test.conf");

    CHECK(cfg.arm == config::PipelineArm::WithoutPromptgen);
    CHECK(cfg.granularity == svi::GranularityLevel::L2);
    CHECK(cfg.seed == 42);
    CHECK(cfg.parallelism == 2);
    CHECK(cfg.output_dir == "results");
    CHECK(cfg.aggregation == config::Aggregation::Median);
    REQUIRE(cfg.corpus_dir.has_value());
    CHECK(*cfg.corpus_dir == "corpus");
    REQUIRE(cfg.style_lexicon.has_value());
    CHECK(*cfg.style_lexicon == "styles.txt");

    CHECK(cfg.extractor.mode == extract::ExtractorMode::Remote);
    CHECK(cfg.extractor.endpoint == "http://127.0.0.1:8101/v1/extract");
    CHECK(cfg.extractor.fixture_dir == std::filesystem::path("fixtures"));
    CHECK(cfg.extractor.timeout_ms == 1500);
    CHECK(cfg.extractor.max_retries == 1);

    CHECK(cfg.backend.mode == backend::BackendMode::Remote);
    CHECK(cfg.backend.endpoint == "http://127.0.0.1:8102/v1/chat");
    CHECK(cfg.backend.model_name == "scribe-2");
    CHECK(cfg.backend.temperature == Catch::Approx(0.2));
    CHECK(cfg.backend.max_tokens == 512);
    CHECK(cfg.backend.cache_dir == std::filesystem::path("cache"));
    CHECK(cfg.backend.timeout_ms == 2500);
    CHECK(cfg.backend.max_retries == 3);
    CHECK(cfg.backend.max_in_flight == 8);

    using prompt::TaskType;
    using svi::Facet;
    const auto weight = [&](TaskType task, Facet facet) {
        return cfg.weights.for_task(task)[static_cast<std::size_t>(facet)];
    };
    CHECK(weight(TaskType::Poetry, Facet::Atmosphere) == Catch::Approx(0.35));
    CHECK(weight(TaskType::Poetry, Facet::Narrative) == Catch::Approx(0.05));
    CHECK(weight(TaskType::StoryGen, Facet::Objects) == Catch::Approx(0.30));
    CHECK(weight(TaskType::AdCopyGen, Facet::Palette) == Catch::Approx(0.25));
    CHECK(weight(TaskType::Freeform, Facet::Lighting) == Catch::Approx(0.20));

    CHECK(cfg.creativity.bigram_diversity == Catch::Approx(0.5));
    CHECK(cfg.creativity.type_token == Catch::Approx(0.25));
    CHECK(cfg.creativity.novelty == Catch::Approx(0.25));
    CHECK_NOTHROW(cfg.check());
}

TEST_CASE("config errors carry the origin and line number", "[config]") {
    const auto parse = [](const std::string& body) {
        std::istringstream in(body);
        return config::parse_config(in, "bad.conf");
    };

    CHECK_THROWS_WITH(parse("arm = full\nno equals sign here\n"),
                      Catch::Matchers::ContainsSubstring("bad.conf:2") &&
                          Catch::Matchers::ContainsSubstring("key = value"));
    CHECK_THROWS_WITH(parse("colour = blue\n"),
                      Catch::Matchers::ContainsSubstring("bad.conf:1") &&
                          Catch::Matchers::ContainsSubstring("unknown config key 'colour'"));
    CHECK_THROWS_WITH(parse("\n\nseed = seven\n"),
                      Catch::Matchers::ContainsSubstring("bad.conf:3") &&
                          Catch::Matchers::ContainsSubstring("integer"));
    CHECK_THROWS_WITH(parse("backend.temperature = warm\n"),
                      Catch::Matchers::ContainsSubstring("number"));
    CHECK_THROWS_WITH(parse("= 3\n"), Catch::Matchers::ContainsSubstring("empty key"));
    CHECK_THROWS_WITH(parse("arm = sideways\n"),
                      Catch::Matchers::ContainsSubstring("unknown pipeline arm"));
    CHECK_THROWS_WITH(parse("level = L4\n"), Catch::Matchers::ContainsSubstring("L4"));
    CHECK_THROWS_WITH(parse("weights.poetry = 1\n"),
                      Catch::Matchers::ContainsSubstring("weights.<task>.<facet>"));
    CHECK_THROWS_WITH(parse("weights.poetry.texture = 1\n"),
                      Catch::Matchers::ContainsSubstring("unknown facet 'texture'"));
    CHECK_THROWS_WITH(parse("weights.limerick.objects = 1\n"),
                      Catch::Matchers::ContainsSubstring("unknown task 'limerick'"));
}

TEST_CASE("missing config file is a configuration error", "[config]") {
    CHECK_THROWS_AS(config::load_config("/nonexistent/visucraft.conf"), ConfigError);
}

TEST_CASE("invalid parallelism rejected", "[config]") {
    RunConfig cfg = offline_config();
    cfg.parallelism = 0;
    CHECK_THROWS_WITH(cfg.check(), Catch::Matchers::ContainsSubstring("parallelism"));
}

TEST_CASE("fingerprint tracks semantics and ignores plumbing", "[config]") {
    const RunConfig base = offline_config();
    const auto fp = config::config_fingerprint(base);
    CHECK(fp.size() == 16);
    CHECK(config::config_fingerprint(offline_config()) == fp);

    RunConfig other = base;
    other.output_dir = "elsewhere";
    other.parallelism = 16;
    CHECK(config::config_fingerprint(other) == fp);

    other = base;
    other.seed = 1;
    CHECK(config::config_fingerprint(other) != fp);

    other = base;
    other.granularity = svi::GranularityLevel::L1;
    CHECK(config::config_fingerprint(other) != fp);

    other = base;
    other.weights.poetry[0] += 0.01;
    CHECK(config::config_fingerprint(other) != fp);

    other = base;
    other.backend.temperature = 0.9;
    CHECK(config::config_fingerprint(other) != fp);

    other = base;
    other.aggregation = config::Aggregation::Median;
    CHECK(config::config_fingerprint(other) != fp);
}

TEST_CASE("later config values override earlier ones", "[config]") {
    std::istringstream in("seed = 1\nseed = 2\n");
    const RunConfig cfg = config::parse_config(in, "over.conf");
    CHECK(cfg.seed == 2);
}
