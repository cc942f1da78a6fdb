#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "visucraft/errors.hpp"
#include "visucraft/lexicon.hpp"
#include "visucraft/metrics.hpp"
#include "visucraft/svi.hpp"
#include "visucraft/text.hpp"

namespace visucraft::prompt {

// ---------------------------------------------------------------------------
// Task typing
// ---------------------------------------------------------------------------

enum class TaskType { StoryGen, Poetry, AdCopyGen, Freeform };

inline std::string to_string(TaskType task) {
    switch (task) {
        case TaskType::StoryGen: return "StoryGen";
        case TaskType::Poetry: return "Poetry";
        case TaskType::AdCopyGen: return "AdCopyGen";
        case TaskType::Freeform: return "Freeform";
    }
    return "Freeform";
}

inline TaskType task_from_string(std::string_view s) {
    if (s == "StoryGen") return TaskType::StoryGen;
    if (s == "Poetry") return TaskType::Poetry;
    if (s == "AdCopyGen") return TaskType::AdCopyGen;
    if (s == "Freeform") return TaskType::Freeform;
    throw ConfigError("unknown task type '" + std::string(s) + "'");
}

// First matching family wins: poetry beats story beats ad copy, so "a poem
// telling the story of..." classifies as Poetry.
inline TaskType infer_task_type(std::string_view instruction) {
    const auto tokens = text::tokenize(instruction);
    const auto any = [&](std::initializer_list<const char*> words) {
        for (const char* w : words) {
            for (const auto& token : tokens) {
                if (token == w) return true;
            }
        }
        return false;
    };
    if (any({"poem", "poetry", "verse", "haiku", "sonnet", "ballad"})) return TaskType::Poetry;
    if (any({"story", "narrative", "tale", "fiction"})) return TaskType::StoryGen;
    if (any({"ad", "advert", "advertisement", "copy", "marketing", "slogan", "tagline"})) {
        return TaskType::AdCopyGen;
    }
    return TaskType::Freeform;
}

struct UserInstruction {
    std::string text;
    TaskType task = TaskType::Freeform;
    metrics::ConstraintSet constraints;
};

inline UserInstruction make_instruction(
    std::string_view body,
    const lexicon::StyleLexicon& styles = lexicon::default_style_lexicon(),
    std::optional<TaskType> forced_task = std::nullopt) {
    if (text::tokenize(body).empty()) {
        throw ValidationError("instruction text must contain at least one word");
    }
    UserInstruction instruction;
    instruction.text = std::string(body);
    instruction.task = forced_task ? *forced_task : infer_task_type(body);
    instruction.constraints = metrics::parse_constraints(body, styles);
    return instruction;
}

// ---------------------------------------------------------------------------
// Facet weighting
// ---------------------------------------------------------------------------

using FacetWeights = std::array<double, svi::kFacetCount>;

inline double weight_of(const FacetWeights& w, svi::Facet facet) {
    return w[static_cast<std::size_t>(facet)];
}

inline void check_weights(const FacetWeights& w) {
    double sum = 0.0;
    for (double v : w) {
        if (v < 0.0) throw ConfigError("facet weights must be non-negative");
        sum += v;
    }
    if (sum < 1.0 - 1e-9 || sum > 1.0 + 1e-9) throw ConfigError("facet weights must sum to 1");
}

struct WeightTable {
    // Index order: objects, relations, lighting, palette, atmosphere, narrative.
    FacetWeights story_gen{0.25, 0.20, 0.10, 0.05, 0.15, 0.25};
    FacetWeights poetry{0.15, 0.10, 0.20, 0.15, 0.30, 0.10};
    FacetWeights ad_copy{0.30, 0.10, 0.05, 0.20, 0.20, 0.15};
    FacetWeights freeform{1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6};

    const FacetWeights& for_task(TaskType task) const {
        switch (task) {
            case TaskType::StoryGen: return story_gen;
            case TaskType::Poetry: return poetry;
            case TaskType::AdCopyGen: return ad_copy;
            case TaskType::Freeform: return freeform;
        }
        return freeform;
    }

    FacetWeights& for_task(TaskType task) {
        switch (task) {
            case TaskType::StoryGen: return story_gen;
            case TaskType::Poetry: return poetry;
            case TaskType::AdCopyGen: return ad_copy;
            case TaskType::Freeform: return freeform;
        }
        return freeform;
    }

    void check() const {
        check_weights(story_gen);
        check_weights(poetry);
        check_weights(ad_copy);
        check_weights(freeform);
    }
};

inline const WeightTable& default_weight_table() {
    static const WeightTable table;
    return table;
}

// Zero out facets the document does not populate, then renormalize so the
// remaining weights still sum to 1.
inline FacetWeights prioritize(const svi::SviDocument& doc, const FacetWeights& base) {
    check_weights(base);
    FacetWeights out{};
    double sum = 0.0;
    for (const auto facet : svi::kAllFacets) {
        const auto i = static_cast<std::size_t>(facet);
        out[i] = svi::facet_present(doc, facet) ? base[i] : 0.0;
        sum += out[i];
    }
    if (sum <= 0.0) throw ConfigError("no weighted facet is present in the document");
    for (double& v : out) v /= sum;
    return out;
}

// ---------------------------------------------------------------------------
// Prompt assembly
// ---------------------------------------------------------------------------

struct PromptSection {
    std::string tag;
    std::string body;

    friend bool operator==(const PromptSection&, const PromptSection&) = default;
};

struct OptimizedPrompt {
    std::vector<PromptSection> sections;

    std::string render() const {
        std::string out;
        for (const auto& section : sections) {
            if (!out.empty()) out += "\n\n";
            out += section.body;
        }
        return out;
    }

    const std::string* section(std::string_view tag) const {
        for (const auto& s : sections) {
            if (s.tag == tag) return &s.body;
        }
        return nullptr;
    }

    std::uint64_t hash() const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (const auto& s : sections) {
            h = text::fnv1a64(s.tag, h);
            h = text::fnv1a64("\x1f", h);
            h = text::fnv1a64(s.body, h);
            h = text::fnv1a64("\x1e", h);
        }
        return h;
    }

    std::string hash_hex() const { return text::hex64(hash()); }
};

namespace detail {

inline std::string join(const std::vector<std::string>& parts, const char* sep) {
    std::string out;
    for (const auto& part : parts) {
        if (!out.empty()) out += sep;
        out += part;
    }
    return out;
}

inline std::string render_facet(const svi::SviDocument& doc, svi::Facet facet) {
    switch (facet) {
        case svi::Facet::Objects: {
            std::vector<std::string> descs;
            for (const auto& obj : doc.objects) {
                std::string desc = obj.attributes.empty()
                                       ? obj.name
                                       : join(obj.attributes, ", ") + " " + obj.name;
                if (obj.pose) desc += " (" + *obj.pose + ")";
                descs.push_back(std::move(desc));
            }
            return "The scene contains: " + join(descs, "; ") + ".";
        }
        case svi::Facet::Relations: {
            std::vector<std::string> sentences;
            for (const auto& rel : doc.relations) {
                sentences.push_back(rel.subject + " is " + rel.predicate + " " + rel.object + ".");
            }
            return join(sentences, " ");
        }
        case svi::Facet::Lighting:
            return "The lighting is " + *doc.lighting + ".";
        case svi::Facet::Palette:
            return "The color palette features " + join(doc.palette, ", ") + ".";
        case svi::Facet::Atmosphere:
            return "The atmosphere evokes " + *doc.atmosphere + ".";
        case svi::Facet::Narrative:
            return "The scene hints at " + *doc.implied_narrative + ".";
    }
    return {};
}

inline std::string preamble_for(TaskType task) {
    switch (task) {
        case TaskType::StoryGen:
            return "You are a gifted storyteller. Using the scene described below, write a story "
                   "that stays true to every visual detail.";
        case TaskType::Poetry:
            return "You are a poet attentive to imagery. Using the scene described below, write a "
                   "poem that stays true to every visual detail.";
        case TaskType::AdCopyGen:
            return "You are a sharp copywriter. Using the scene described below, write ad copy "
                   "that stays true to every visual detail.";
        case TaskType::Freeform:
            return "You are a careful writer. Using the scene described below, write a piece that "
                   "stays true to every visual detail.";
    }
    return {};
}

inline std::string style_hint_for(TaskType task) {
    switch (task) {
        case TaskType::StoryGen:
            return "Develop a clear arc with concrete sensory detail.";
        case TaskType::Poetry:
            return "Favor vivid imagery and an evocative, lyrical voice.";
        case TaskType::AdCopyGen:
            return "Keep the copy punchy, concrete, and persuasive.";
        case TaskType::Freeform:
            return "Stay concrete and grounded in the scene.";
    }
    return {};
}

}  // namespace detail

// Render the weighted facets, heaviest first, ties broken by facet name.
// Facets carrying less than 5% of the mass are left out.
inline std::string integrate(const svi::SviDocument& doc, const FacetWeights& weights) {
    const auto report = svi::validate(doc);
    if (!report.ok()) throw ValidationError("integrate requires a valid document: " + report.to_string());

    const svi::SviDocument c = svi::canonical(doc);
    std::vector<svi::Facet> chosen;
    for (const auto facet : svi::kAllFacets) {
        if (svi::facet_present(c, facet) && weight_of(weights, facet) >= 0.05) {
            chosen.push_back(facet);
        }
    }
    std::stable_sort(chosen.begin(), chosen.end(), [&](svi::Facet a, svi::Facet b) {
        const double wa = weight_of(weights, a);
        const double wb = weight_of(weights, b);
        if (wa != wb) return wa > wb;
        return svi::facet_name(a) < svi::facet_name(b);
    });

    std::vector<std::string> lines;
    for (const auto facet : chosen) lines.push_back(detail::render_facet(c, facet));
    return detail::join(lines, "\n");
}

// Turn parsed constraints back into explicit directives; fall back to a
// task-appropriate style hint when the instruction carried none.
inline std::string contextualize(const metrics::ConstraintSet& cs, TaskType task) {
    std::vector<std::string> lines;
    if (!cs.theme_keywords.empty()) {
        lines.push_back("Address the themes of: " + detail::join(cs.theme_keywords, ", ") + ".");
    }
    if (!cs.style_keywords.empty()) {
        lines.push_back("Use a " + detail::join(cs.style_keywords, ", ") + " tone.");
    }
    if (cs.min_words && cs.max_words) {
        lines.push_back("Use between " + std::to_string(*cs.min_words) + " and " +
                        std::to_string(*cs.max_words) + " words.");
    } else if (cs.min_words) {
        lines.push_back("Use at least " + std::to_string(*cs.min_words) + " words.");
    } else if (cs.max_words) {
        lines.push_back("Use at most " + std::to_string(*cs.max_words) + " words.");
    }
    if (cs.min_lines) {
        lines.push_back("Write at least " + std::to_string(*cs.min_lines) + " lines.");
    }
    if (!cs.forbidden_terms.empty()) {
        lines.push_back("Do not mention: " + detail::join(cs.forbidden_terms, ", ") + ".");
    }
    if (lines.empty()) lines.push_back(detail::style_hint_for(task));
    return detail::join(lines, "\n");
}

// The full pipeline prompt: task preamble, weighted visual context, the
// user's own words, then constraint reminders.
inline OptimizedPrompt compile(const svi::SviDocument& doc, const UserInstruction& instruction,
                               const WeightTable& table = default_weight_table()) {
    table.check();
    const FacetWeights weights = prioritize(doc, table.for_task(instruction.task));
    OptimizedPrompt out;
    out.sections.push_back({"preamble", detail::preamble_for(instruction.task)});
    out.sections.push_back({"visual_context", integrate(doc, weights)});
    out.sections.push_back({"directive", instruction.text});
    out.sections.push_back({"constraints", contextualize(instruction.constraints, instruction.task)});
    return out;
}

// Ablation arm: raw document JSON glued to the instruction, no weighting, no
// task framing, no constraint reminders.
inline OptimizedPrompt simple_concat(const svi::SviDocument& doc,
                                     const UserInstruction& instruction) {
    OptimizedPrompt out;
    out.sections.push_back({"visual_context", svi::serialize_canonical(doc)});
    out.sections.push_back({"directive", instruction.text});
    return out;
}

}  // namespace visucraft::prompt
