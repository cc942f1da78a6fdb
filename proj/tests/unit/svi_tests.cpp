#include <catch2/catch_amalgamated.hpp>

#include "generators.hpp"
#include "visucraft/svi.hpp"

using namespace visucraft;
using namespace visucraft::svi;

namespace {

SviDocument cliff_snippet() {
    SviDocument doc;
    doc.level = GranularityLevel::L3;
    doc.objects = {
        {"figure", {"lone"}, "standing", {"person", "silhouette"}},
        {"cliff", {"rocky", "desolate"}, std::nullopt, {}},
    };
    doc.relations = {{"figure", "standing on", "cliff"}};
    doc.lighting = "twilight";
    doc.palette = {"grey", "slate blue"};
    doc.atmosphere = "isolation";
    doc.implied_narrative = "a faint beam sweeps the sea";
    doc.source = SviSource::Fixture;
    return doc;
}

constexpr const char* kCliffJson =
    R"({"schema":"svi/1","level":"L3","objects":[{"name":"cliff","attributes":["desolate","rocky"],"synonyms":[]},{"name":"figure","attributes":["lone"],"pose":"standing","synonyms":["person","silhouette"]}],"relations":[{"subject":"figure","predicate":"standing on","object":"cliff"}],"lighting":"twilight","palette":["grey","slate blue"],"atmosphere":"isolation","implied_narrative":"a faint beam sweeps the sea","source":"fixture"})";

}  // namespace

TEST_CASE("canonical serialization has fixed key order and sorted collections", "[svi]") {
    CHECK(serialize_canonical(cliff_snippet()) == kCliffJson);
}

TEST_CASE("minimal L1 document serializes without optional keys", "[svi]") {
    SviDocument doc;
    doc.level = GranularityLevel::L1;
    doc.objects = {{"sea", {}, std::nullopt, {"ocean"}}};
    doc.source = SviSource::CaptionFallback;
    CHECK(serialize_canonical(doc) ==
          R"({"schema":"svi/1","level":"L1","objects":[{"name":"sea","attributes":[],"synonyms":["ocean"]}],"relations":[],"palette":[],"source":"caption-fallback"})");
}

TEST_CASE("parse reads the canonical form back to an equal document", "[svi]") {
    const SviDocument doc = cliff_snippet();
    CHECK(parse(kCliffJson) == doc);
}

TEST_CASE("parse tolerates key order and whitespace", "[svi]") {
    const std::string scrambled = R"({
        "source": "fixture",
        "palette": ["grey", "slate blue"],
        "implied_narrative": "a faint beam sweeps the sea",
        "objects": [
            {"synonyms": ["silhouette", "person"], "pose": "standing", "name": "figure", "attributes": ["lone"]},
            {"name": "cliff", "attributes": ["desolate", "rocky"]}
        ],
        "atmosphere": "isolation",
        "lighting": "twilight",
        "level": "L3",
        "relations": [{"object": "cliff", "subject": "figure", "predicate": "standing on"}]
    })";
    CHECK(parse(scrambled) == cliff_snippet());
    CHECK(serialize_canonical(parse(scrambled)) == kCliffJson);
}

TEST_CASE("schema marker is optional but must match when present", "[svi]") {
    CHECK_NOTHROW(parse(R"({"level":"L1","objects":[{"name":"sea"}]})"));
    CHECK_THROWS_AS(parse(R"({"schema":"svi/2","level":"L1","objects":[{"name":"sea"}]})"),
                    SemanticError);
}

TEST_CASE("syntax errors carry a byte offset", "[svi]") {
    try {
        parse(R"({"level": "L3", "objects": [)");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.byte_offset > 0);
        CHECK(std::string(e.what()).find("byte") != std::string::npos);
    }
}

TEST_CASE("unknown keys are rejected by strict parse", "[svi]") {
    const std::string body =
        R"({"level":"L1","objects":[{"name":"sea"}],"mood":"blue"})";
    CHECK_THROWS_AS(parse(body), SemanticError);
}

TEST_CASE("repair pass drops unknown keys and unresolved relations", "[svi]") {
    const std::string body = R"({
        "level": "L3",
        "confidence": 0.93,
        "objects": [{"name": "sea", "bbox": [0, 0, 5, 5]}],
        "relations": [
            {"subject": "sea", "predicate": "beneath", "object": "sky"},
            {"subject": "sea", "predicate": "facing", "object": "sea"}
        ]
    })";
    const RepairedParse repaired = parse_with_repair(body);
    CHECK(repaired.repairs.size() == 3);
    REQUIRE(repaired.doc.relations.size() == 1);
    CHECK(repaired.doc.relations[0].predicate == "facing");
    CHECK(validate(repaired.doc).ok());

    CHECK_THROWS_AS(parse(body), SemanticError);
}

TEST_CASE("repair pass does not mask invariant violations", "[svi]") {
    CHECK_THROWS_AS(parse_with_repair(R"({"level":"L3","objects":[]})"), SemanticError);
}

TEST_CASE("missing required keys fail", "[svi]") {
    CHECK_THROWS_AS(parse(R"({"objects":[{"name":"sea"}]})"), SemanticError);
    CHECK_THROWS_AS(parse(R"({"level":"L2"})"), SemanticError);
    CHECK_THROWS_AS(parse(R"({"level":"L2","objects":[{"attributes":["wide"]}]})"), SemanticError);
    CHECK_THROWS_AS(parse(R"([1,2,3])"), SemanticError);
    CHECK_THROWS_AS(parse(R"({"level":"L2","objects":[{"name":"sea"}],"lighting":null})"),
                    SemanticError);
}

TEST_CASE("validation flags each invariant breach", "[svi]") {
    SviDocument doc;
    doc.level = GranularityLevel::L3;

    SECTION("empty object list") {
        CHECK_FALSE(validate(doc).ok());
    }
    SECTION("empty and duplicated names") {
        doc.objects = {{"", {}, std::nullopt, {}}, {"sea", {}, std::nullopt, {}},
                       {"sea", {}, std::nullopt, {}}};
        const auto report = validate(doc);
        REQUIRE(report.violations.size() == 2);
        CHECK(report.violations[0].rule == "name must be non-empty");
        CHECK(report.violations[1].rule == "duplicate object name 'sea'");
    }
    SECTION("control characters in names") {
        doc.objects = {{"sea\nfoam", {}, std::nullopt, {}}};
        CHECK(validate(doc).to_string().find("control characters") != std::string::npos);
    }
    SECTION("attribute duplicates are case-folded") {
        doc.objects = {{"sea", {"Stormy", "stormy"}, std::nullopt, {}}};
        CHECK(validate(doc).to_string().find("duplicate attribute") != std::string::npos);
    }
    SECTION("relations must resolve to object names") {
        doc.objects = {{"sea", {}, std::nullopt, {}}};
        doc.relations = {{"sea", "beneath", "sky"}};
        const auto report = validate(doc);
        REQUIRE(report.violations.size() == 1);
        CHECK(report.violations[0].field == "relations[0].object");
    }
    SECTION("level gates") {
        doc.objects = {{"sea", {"stormy"}, "churning", {}}};
        doc.level = GranularityLevel::L1;
        auto text = validate(doc).to_string();
        CHECK(text.find("L1 forbids attributes") != std::string::npos);
        CHECK(text.find("L1 forbids pose") != std::string::npos);

        doc.level = GranularityLevel::L2;
        doc.relations = {};
        doc.lighting = "dawn";
        CHECK(validate(doc).to_string() == "lighting: L2 forbids lighting");
    }
}

TEST_CASE("serializing an invalid document throws", "[svi]") {
    SviDocument doc;
    doc.level = GranularityLevel::L1;
    doc.objects = {{"sea", {"wide"}, std::nullopt, {}}};
    CHECK_THROWS_AS(serialize_canonical(doc), ValidationError);
}

TEST_CASE("equality ignores collection order", "[svi]") {
    vtest::Gen g(7);
    const SviDocument doc = cliff_snippet();
    const SviDocument other = vtest::shuffled_copy(doc, g);
    CHECK(doc == other);

    SviDocument changed = doc;
    changed.palette = {"slate blue", "grey"};
    CHECK_FALSE(doc == changed);
}

TEST_CASE("downgrade projects to coarser levels", "[svi]") {
    const SviDocument doc = cliff_snippet();

    const SviDocument l2 = downgrade(doc, GranularityLevel::L2);
    CHECK(l2.level == GranularityLevel::L2);
    CHECK(l2.relations.empty());
    CHECK_FALSE(l2.lighting.has_value());
    CHECK(l2.palette.empty());
    CHECK_FALSE(l2.atmosphere.has_value());
    CHECK_FALSE(l2.implied_narrative.has_value());
    CHECK(l2.objects[1].attributes == std::vector<std::string>{"lone"});

    const SviDocument l1 = downgrade(doc, GranularityLevel::L1);
    CHECK(l1.objects[1].attributes.empty());
    CHECK_FALSE(l1.objects[1].pose.has_value());
    CHECK(l1.objects[1].synonyms == std::vector<std::string>{"person", "silhouette"});
    CHECK(l1.source == SviSource::Fixture);

    CHECK(downgrade(l2, GranularityLevel::L1) == l1);
    CHECK(downgrade(doc, GranularityLevel::L3) == doc);
    CHECK_THROWS_AS(downgrade(l1, GranularityLevel::L2), DowngradeError);
}

TEST_CASE("salient elements count facet entries at the document level", "[svi]") {
    SviDocument doc;
    doc.level = GranularityLevel::L3;
    doc.objects = {{"boat", {"rusted"}, std::nullopt, {"vessel"}},
                   {"harbor", {"quiet"}, std::nullopt, {}}};
    doc.relations = {{"boat", "beside", "harbor"}};
    doc.lighting = "moonlit";

    const auto elements = salient_elements(doc);
    REQUIRE(elements.size() == 6);
    CHECK(elements[0].surface == "boat");
    CHECK(elements[0].synonyms == std::vector<std::string>{"vessel"});
    CHECK(elements[1].surface == "rusted");
    CHECK(elements[2].surface == "harbor");
    CHECK(elements[3].surface == "quiet");
    CHECK(elements[4].surface == "beside");
    CHECK(elements[4].facet == Facet::Relations);
    CHECK(elements[5].surface == "moonlit");
    CHECK(elements[5].facet == Facet::Lighting);

    CHECK(salient_elements(downgrade(doc, GranularityLevel::L2)).size() == 4);
    CHECK(salient_elements(downgrade(doc, GranularityLevel::L1)).size() == 2);
}

TEST_CASE("salient elements require a valid document", "[svi]") {
    SviDocument doc;
    doc.level = GranularityLevel::L2;
    CHECK_THROWS_AS(salient_elements(doc), ValidationError);
}

TEST_CASE("facet presence follows the populated fields", "[svi]") {
    const SviDocument doc = cliff_snippet();
    for (const auto facet : kAllFacets) CHECK(facet_present(doc, facet));
    const SviDocument l1 = downgrade(doc, GranularityLevel::L1);
    CHECK(facet_present(l1, Facet::Objects));
    CHECK_FALSE(facet_present(l1, Facet::Relations));
    CHECK_FALSE(facet_present(l1, Facet::Narrative));
}

TEST_CASE("round trip and byte stability over random documents", "[svi][property]") {
    vtest::Gen g(20260816);
    for (int i = 0; i < 300; ++i) {
        const SviDocument doc = vtest::random_document(g);
        REQUIRE(validate(doc).ok());

        const std::string bytes = serialize_canonical(doc);
        const SviDocument back = parse(bytes);
        CHECK(back == doc);
        CHECK(serialize_canonical(back) == bytes);
        CHECK(serialize_canonical(vtest::shuffled_copy(doc, g)) == bytes);
    }
}

TEST_CASE("downgrade laws hold over random documents", "[svi][property]") {
    vtest::Gen g(404);
    for (int i = 0; i < 200; ++i) {
        const SviDocument doc = vtest::random_document(g, GranularityLevel::L3);
        const auto l3 = salient_elements(doc).size();
        const auto l2 = salient_elements(downgrade(doc, GranularityLevel::L2)).size();
        const auto l1 = salient_elements(downgrade(doc, GranularityLevel::L1)).size();
        CHECK(l1 <= l2);
        CHECK(l2 <= l3);
        CHECK(l1 == doc.objects.size());

        CHECK(downgrade(downgrade(doc, GranularityLevel::L2), GranularityLevel::L1) ==
              downgrade(doc, GranularityLevel::L1));
        CHECK(validate(downgrade(doc, GranularityLevel::L2)).ok());
        CHECK(validate(downgrade(doc, GranularityLevel::L1)).ok());
    }
}
