#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "visucraft/errors.hpp"
#include "visucraft/text.hpp"

namespace visucraft::svi {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class GranularityLevel { L1 = 1, L2 = 2, L3 = 3 };

inline std::string to_string(GranularityLevel level) {
    switch (level) {
        case GranularityLevel::L1: return "L1";
        case GranularityLevel::L2: return "L2";
        case GranularityLevel::L3: return "L3";
    }
    return "L3";
}

inline GranularityLevel level_from_string(std::string_view s) {
    if (s == "L1") return GranularityLevel::L1;
    if (s == "L2") return GranularityLevel::L2;
    if (s == "L3") return GranularityLevel::L3;
    throw SemanticError("unknown granularity level '" + std::string(s) + "'");
}

enum class SviSource { Remote, Fixture, CaptionFallback };

inline std::string to_string(SviSource source) {
    switch (source) {
        case SviSource::Remote: return "remote";
        case SviSource::Fixture: return "fixture";
        case SviSource::CaptionFallback: return "caption-fallback";
    }
    return "fixture";
}

inline SviSource source_from_string(std::string_view s) {
    if (s == "remote") return SviSource::Remote;
    if (s == "fixture") return SviSource::Fixture;
    if (s == "caption-fallback") return SviSource::CaptionFallback;
    throw SemanticError("unknown source tag '" + std::string(s) + "'");
}

// The six top-level categories of visual information.
enum class Facet { Objects, Relations, Lighting, Palette, Atmosphere, Narrative };

inline constexpr std::size_t kFacetCount = 6;

inline constexpr Facet kAllFacets[kFacetCount] = {
    Facet::Objects, Facet::Relations, Facet::Lighting,
    Facet::Palette, Facet::Atmosphere, Facet::Narrative,
};

inline std::string facet_name(Facet f) {
    switch (f) {
        case Facet::Objects: return "objects";
        case Facet::Relations: return "relations";
        case Facet::Lighting: return "lighting";
        case Facet::Palette: return "palette";
        case Facet::Atmosphere: return "atmosphere";
        case Facet::Narrative: return "narrative";
    }
    return "objects";
}

struct SceneObject {
    std::string name;
    std::vector<std::string> attributes;
    std::optional<std::string> pose;
    std::vector<std::string> synonyms;

    friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct SpatialRelation {
    std::string subject;
    std::string predicate;
    std::string object;

    friend bool operator==(const SpatialRelation&, const SpatialRelation&) = default;
};

struct SviDocument {
    GranularityLevel level = GranularityLevel::L3;
    std::vector<SceneObject> objects;
    std::vector<SpatialRelation> relations;
    std::optional<std::string> lighting;
    std::vector<std::string> palette;
    std::optional<std::string> atmosphere;
    std::optional<std::string> implied_narrative;
    SviSource source = SviSource::Fixture;

    friend bool operator==(const SviDocument& a, const SviDocument& b);
};

// Sorted copy: objects by name, attributes/synonyms lexicographically,
// relations by (subject, predicate, object). Palette order is meaningful and
// is left alone. Collection order is not part of the document value.
inline SviDocument canonical(const SviDocument& doc) {
    SviDocument out = doc;
    for (auto& obj : out.objects) {
        std::sort(obj.attributes.begin(), obj.attributes.end());
        std::sort(obj.synonyms.begin(), obj.synonyms.end());
    }
    std::sort(out.objects.begin(), out.objects.end(), [](const SceneObject& a, const SceneObject& b) {
        return std::tie(a.name, a.attributes, a.pose, a.synonyms) <
               std::tie(b.name, b.attributes, b.pose, b.synonyms);
    });
    std::sort(out.relations.begin(), out.relations.end(),
              [](const SpatialRelation& a, const SpatialRelation& b) {
                  return std::tie(a.subject, a.predicate, a.object) <
                         std::tie(b.subject, b.predicate, b.object);
              });
    return out;
}

namespace detail {
inline bool members_equal(const SviDocument& a, const SviDocument& b) {
    return a.level == b.level && a.objects == b.objects && a.relations == b.relations &&
           a.lighting == b.lighting && a.palette == b.palette && a.atmosphere == b.atmosphere &&
           a.implied_narrative == b.implied_narrative && a.source == b.source;
}
}  // namespace detail

inline bool operator==(const SviDocument& a, const SviDocument& b) {
    return detail::members_equal(canonical(a), canonical(b));
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Violation {
    std::string field;
    std::string rule;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }

    std::string to_string() const {
        std::string out;
        for (const auto& v : violations) {
            if (!out.empty()) out += "; ";
            out += v.field + ": " + v.rule;
        }
        return out.empty() ? "ok" : out;
    }
};

inline ValidationReport validate(const SviDocument& doc) {
    ValidationReport report;
    auto flag = [&](std::string field, std::string rule) {
        report.violations.push_back({std::move(field), std::move(rule)});
    };

    if (doc.objects.empty()) flag("objects", "objects must be non-empty");

    std::set<std::string> names;
    for (std::size_t i = 0; i < doc.objects.size(); ++i) {
        const auto& obj = doc.objects[i];
        const std::string field = "objects[" + std::to_string(i) + "]";
        if (obj.name.empty()) {
            flag(field + ".name", "name must be non-empty");
        } else if (text::has_control_chars(obj.name)) {
            flag(field + ".name", "name must not contain control characters");
        }
        if (!names.insert(obj.name).second) {
            flag(field + ".name", "duplicate object name '" + obj.name + "'");
        }
        std::set<std::string> folded;
        for (const auto& attr : obj.attributes) {
            if (!folded.insert(text::lower(attr)).second) {
                flag(field + ".attributes", "duplicate attribute '" + attr + "' after case-folding");
            }
        }
    }

    for (std::size_t i = 0; i < doc.relations.size(); ++i) {
        const auto& rel = doc.relations[i];
        const std::string field = "relations[" + std::to_string(i) + "]";
        if (rel.predicate.empty()) flag(field + ".predicate", "predicate must be non-empty");
        if (!names.count(rel.subject)) {
            flag(field + ".subject", "unresolved relation endpoint '" + rel.subject + "'");
        }
        if (!names.count(rel.object)) {
            flag(field + ".object", "unresolved relation endpoint '" + rel.object + "'");
        }
    }

    const std::string lvl = to_string(doc.level);
    if (doc.level <= GranularityLevel::L2) {
        if (!doc.relations.empty()) flag("relations", lvl + " forbids relations");
        if (doc.lighting) flag("lighting", lvl + " forbids lighting");
        if (!doc.palette.empty()) flag("palette", lvl + " forbids palette");
        if (doc.atmosphere) flag("atmosphere", lvl + " forbids atmosphere");
        if (doc.implied_narrative) flag("implied_narrative", lvl + " forbids implied_narrative");
    }
    if (doc.level == GranularityLevel::L1) {
        for (std::size_t i = 0; i < doc.objects.size(); ++i) {
            const std::string field = "objects[" + std::to_string(i) + "]";
            if (!doc.objects[i].attributes.empty()) flag(field + ".attributes", "L1 forbids attributes");
            if (doc.objects[i].pose) flag(field + ".pose", "L1 forbids pose");
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Canonical serialization
// ---------------------------------------------------------------------------

inline constexpr const char* kSchemaMarker = "svi/1";

inline std::string serialize_canonical(const SviDocument& doc) {
    auto report = validate(doc);
    if (!report.ok()) {
        throw ValidationError("cannot serialize invalid document: " + report.to_string());
    }
    const SviDocument c = canonical(doc);

    ordered_json j;
    j["schema"] = kSchemaMarker;
    j["level"] = to_string(c.level);
    ordered_json objects = ordered_json::array();
    for (const auto& obj : c.objects) {
        ordered_json o;
        o["name"] = obj.name;
        o["attributes"] = obj.attributes;
        if (obj.pose) o["pose"] = *obj.pose;
        o["synonyms"] = obj.synonyms;
        objects.push_back(std::move(o));
    }
    j["objects"] = std::move(objects);
    ordered_json relations = ordered_json::array();
    for (const auto& rel : c.relations) {
        ordered_json r;
        r["subject"] = rel.subject;
        r["predicate"] = rel.predicate;
        r["object"] = rel.object;
        relations.push_back(std::move(r));
    }
    j["relations"] = std::move(relations);
    if (c.lighting) j["lighting"] = *c.lighting;
    j["palette"] = c.palette;
    if (c.atmosphere) j["atmosphere"] = *c.atmosphere;
    if (c.implied_narrative) j["implied_narrative"] = *c.implied_narrative;
    j["source"] = to_string(c.source);
    return j.dump();
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct RepairedParse {
    SviDocument doc;
    std::vector<std::string> repairs;  // empty when nothing was dropped
};

namespace detail {

inline std::string require_string(const ordered_json& j, const std::string& path) {
    if (!j.is_string()) throw SemanticError(path + " must be a string");
    return j.get<std::string>();
}

inline std::vector<std::string> require_string_array(const ordered_json& j, const std::string& path) {
    if (!j.is_array()) throw SemanticError(path + " must be an array of strings");
    std::vector<std::string> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(require_string(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

inline RepairedParse parse_impl(std::string_view body, bool repair) {
    ordered_json root;
    try {
        root = ordered_json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw SyntaxError(std::string("invalid JSON: ") + e.what(), e.byte);
    }
    if (!root.is_object()) throw SemanticError("top level must be a JSON object");

    RepairedParse result;
    SviDocument& doc = result.doc;
    auto drop_or_throw = [&](const std::string& path) {
        if (!repair) throw SemanticError("unknown key '" + path + "'");
        result.repairs.push_back("dropped unknown key '" + path + "'");
    };

    bool saw_level = false;
    bool saw_objects = false;
    for (const auto& [key, value] : root.items()) {
        if (key == "schema") {
            if (require_string(value, "schema") != kSchemaMarker) {
                throw SemanticError("unsupported schema '" + value.get<std::string>() + "'");
            }
        } else if (key == "level") {
            doc.level = level_from_string(require_string(value, "level"));
            saw_level = true;
        } else if (key == "objects") {
            if (!value.is_array()) throw SemanticError("objects must be an array");
            saw_objects = true;
            for (std::size_t i = 0; i < value.size(); ++i) {
                const auto& entry = value[i];
                const std::string path = "objects[" + std::to_string(i) + "]";
                if (!entry.is_object()) throw SemanticError(path + " must be an object");
                SceneObject obj;
                bool saw_name = false;
                for (const auto& [okey, ovalue] : entry.items()) {
                    if (okey == "name") {
                        obj.name = require_string(ovalue, path + ".name");
                        saw_name = true;
                    } else if (okey == "attributes") {
                        obj.attributes = require_string_array(ovalue, path + ".attributes");
                    } else if (okey == "pose") {
                        obj.pose = require_string(ovalue, path + ".pose");
                    } else if (okey == "synonyms") {
                        obj.synonyms = require_string_array(ovalue, path + ".synonyms");
                    } else {
                        drop_or_throw(path + "." + okey);
                    }
                }
                if (!saw_name) throw SemanticError(path + " is missing required key 'name'");
                doc.objects.push_back(std::move(obj));
            }
        } else if (key == "relations") {
            if (!value.is_array()) throw SemanticError("relations must be an array");
            for (std::size_t i = 0; i < value.size(); ++i) {
                const auto& entry = value[i];
                const std::string path = "relations[" + std::to_string(i) + "]";
                if (!entry.is_object()) throw SemanticError(path + " must be an object");
                SpatialRelation rel;
                bool saw_subject = false, saw_predicate = false, saw_object = false;
                for (const auto& [rkey, rvalue] : entry.items()) {
                    if (rkey == "subject") {
                        rel.subject = require_string(rvalue, path + ".subject");
                        saw_subject = true;
                    } else if (rkey == "predicate") {
                        rel.predicate = require_string(rvalue, path + ".predicate");
                        saw_predicate = true;
                    } else if (rkey == "object") {
                        rel.object = require_string(rvalue, path + ".object");
                        saw_object = true;
                    } else {
                        drop_or_throw(path + "." + rkey);
                    }
                }
                if (!saw_subject || !saw_predicate || !saw_object) {
                    throw SemanticError(path + " must provide subject, predicate, and object");
                }
                doc.relations.push_back(std::move(rel));
            }
        } else if (key == "lighting") {
            doc.lighting = require_string(value, "lighting");
        } else if (key == "palette") {
            doc.palette = require_string_array(value, "palette");
        } else if (key == "atmosphere") {
            doc.atmosphere = require_string(value, "atmosphere");
        } else if (key == "implied_narrative") {
            doc.implied_narrative = require_string(value, "implied_narrative");
        } else if (key == "source") {
            doc.source = source_from_string(require_string(value, "source"));
        } else {
            drop_or_throw(key);
        }
    }

    if (!saw_level) throw SemanticError("missing required key 'level'");
    if (!saw_objects) throw SemanticError("missing required key 'objects'");

    if (repair) {
        std::set<std::string> names;
        for (const auto& obj : doc.objects) names.insert(obj.name);
        std::vector<SpatialRelation> kept;
        for (auto& rel : doc.relations) {
            if (names.count(rel.subject) && names.count(rel.object)) {
                kept.push_back(std::move(rel));
            } else {
                result.repairs.push_back("dropped unresolved relation " + rel.subject + " -" +
                                         rel.predicate + "- " + rel.object);
            }
        }
        doc.relations = std::move(kept);
    }

    auto report = validate(doc);
    if (!report.ok()) throw SemanticError("document violates invariants: " + report.to_string());
    doc = canonical(doc);
    return result;
}

}  // namespace detail

// Strict parse of the canonical serialization plus its tolerant superset
// (arbitrary key order, any amount of whitespace).
inline SviDocument parse(std::string_view body) {
    return detail::parse_impl(body, /*repair=*/false).doc;
}

// One repair pass: unknown keys and unresolved relations are dropped (and
// reported); everything else still fails.
inline RepairedParse parse_with_repair(std::string_view body) {
    return detail::parse_impl(body, /*repair=*/true);
}

// ---------------------------------------------------------------------------
// Granularity projection
// ---------------------------------------------------------------------------

inline SviDocument downgrade(const SviDocument& doc, GranularityLevel target) {
    if (static_cast<int>(target) > static_cast<int>(doc.level)) {
        throw DowngradeError("cannot upgrade granularity from " + to_string(doc.level) + " to " +
                             to_string(target));
    }
    SviDocument out = canonical(doc);
    out.level = target;
    if (target <= GranularityLevel::L2) {
        out.relations.clear();
        out.lighting.reset();
        out.palette.clear();
        out.atmosphere.reset();
        out.implied_narrative.reset();
    }
    if (target == GranularityLevel::L1) {
        for (auto& obj : out.objects) {
            obj.attributes.clear();
            obj.pose.reset();
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Salient elements (the grounding targets for the VG metric)
// ---------------------------------------------------------------------------

struct SalientElement {
    std::string surface;
    std::vector<std::string> synonyms;
    Facet facet = Facet::Objects;
};

inline bool facet_present(const SviDocument& doc, Facet facet) {
    switch (facet) {
        case Facet::Objects: return !doc.objects.empty();
        case Facet::Relations: return !doc.relations.empty();
        case Facet::Lighting: return doc.lighting.has_value();
        case Facet::Palette: return !doc.palette.empty();
        case Facet::Atmosphere: return doc.atmosphere.has_value();
        case Facet::Narrative: return doc.implied_narrative.has_value();
    }
    return false;
}

// One element per object name; at L2+ one per attribute bound to its object;
// at L3 one per relation predicate, lighting, each palette entry, and
// atmosphere. Order follows the canonical serialization.
inline std::vector<SalientElement> salient_elements(const SviDocument& doc) {
    auto report = validate(doc);
    if (!report.ok()) {
        throw ValidationError("salient_elements requires a valid document: " + report.to_string());
    }
    const SviDocument c = canonical(doc);
    std::vector<SalientElement> out;
    for (const auto& obj : c.objects) {
        out.push_back({obj.name, obj.synonyms, Facet::Objects});
        if (c.level >= GranularityLevel::L2) {
            for (const auto& attr : obj.attributes) {
                out.push_back({attr, {}, Facet::Objects});
            }
        }
    }
    if (c.level == GranularityLevel::L3) {
        for (const auto& rel : c.relations) {
            out.push_back({rel.predicate, {}, Facet::Relations});
        }
        if (c.lighting) out.push_back({*c.lighting, {}, Facet::Lighting});
        for (const auto& color : c.palette) {
            out.push_back({color, {}, Facet::Palette});
        }
        if (c.atmosphere) out.push_back({*c.atmosphere, {}, Facet::Atmosphere});
    }
    return out;
}

}  // namespace visucraft::svi
