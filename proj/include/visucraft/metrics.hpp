#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "visucraft/errors.hpp"
#include "visucraft/lexicon.hpp"
#include "visucraft/svi.hpp"
#include "visucraft/text.hpp"

namespace visucraft::metrics {

// ---------------------------------------------------------------------------
// Instruction constraints
// ---------------------------------------------------------------------------

struct ConstraintSet {
    std::vector<std::string> theme_keywords;
    std::vector<std::string> style_keywords;
    std::optional<std::size_t> min_words;
    std::optional<std::size_t> max_words;
    std::optional<std::size_t> min_lines;
    std::vector<std::string> forbidden_terms;

    bool empty() const {
        return theme_keywords.empty() && style_keywords.empty() && !min_words && !max_words &&
               !min_lines && forbidden_terms.empty();
    }

    friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;
};

namespace detail {

// Words that point at the input image rather than naming a theme.
inline bool is_theme_noise(const std::string& token) {
    static const std::set<std::string> noise = {
        "scene", "image", "picture", "photo", "photograph", "painting", "based",
    };
    return noise.count(token) > 0;
}

inline std::optional<std::size_t> parse_count(const std::string& token) {
    if (token.empty()) return std::nullopt;
    for (char ch : token) {
        if (!std::isdigit(static_cast<unsigned char>(ch))) return std::nullopt;
    }
    try {
        return static_cast<std::size_t>(std::stoull(token));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// Clause text following an introducer phrase, cut at the first punctuation.
inline std::vector<std::string> trailing_clauses(const std::string& lowered,
                                                 const std::string& introducer) {
    std::vector<std::string> clauses;
    std::size_t from = 0;
    while (true) {
        const std::size_t at = lowered.find(introducer, from);
        if (at == std::string::npos) break;
        const bool boundary_before = at == 0 || !text::is_word_char(lowered[at - 1]);
        const std::size_t end_of_intro = at + introducer.size();
        const bool boundary_after =
            end_of_intro >= lowered.size() || !text::is_word_char(lowered[end_of_intro]);
        from = at + 1;
        if (!boundary_before || !boundary_after) continue;
        std::size_t stop = lowered.find_first_of(",.;:!?", end_of_intro);
        if (stop == std::string::npos) stop = lowered.size();
        clauses.push_back(lowered.substr(end_of_intro, stop - end_of_intro));
    }
    return clauses;
}

inline void append_unique(std::vector<std::string>& out, const std::string& value) {
    for (const auto& existing : out) {
        if (existing == value) return;
    }
    out.push_back(value);
}

}  // namespace detail

// Pulls checkable constraints out of free-form instruction text: theme words
// from "about ..." and "inspired by ..." clauses, style words known to the
// lexicon, word/line bounds, and "without mentioning ..." exclusions.
inline ConstraintSet parse_constraints(
    std::string_view instruction,
    const lexicon::StyleLexicon& styles = lexicon::default_style_lexicon()) {
    ConstraintSet cs;
    const std::string lowered = text::lower(instruction);

    for (const char* introducer : {"about", "inspired by"}) {
        for (const auto& clause : detail::trailing_clauses(lowered, introducer)) {
            for (const auto& token : text::tokenize(clause)) {
                if (lexicon::is_stopword(token) || detail::is_theme_noise(token)) continue;
                detail::append_unique(cs.theme_keywords, token);
            }
        }
    }

    const auto tokens = text::tokenize(lowered);
    for (const auto& token : tokens) {
        if (styles.count(token)) detail::append_unique(cs.style_keywords, token);
    }

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto unit_at = [&](std::size_t j, const char* unit) {
            return j < tokens.size() && tokens[j] == unit;
        };
        if (tokens[i] == "at" && i + 2 < tokens.size()) {
            const auto n = detail::parse_count(tokens[i + 2]);
            if (!n) continue;
            if (tokens[i + 1] == "least") {
                if (unit_at(i + 3, "words")) cs.min_words = *n;
                if (unit_at(i + 3, "lines")) cs.min_lines = *n;
            } else if (tokens[i + 1] == "most") {
                if (unit_at(i + 3, "words")) cs.max_words = *n;
            }
        }
        if (tokens[i] == "between" && i + 3 < tokens.size() && tokens[i + 2] == "and") {
            const auto lo = detail::parse_count(tokens[i + 1]);
            const auto hi = detail::parse_count(tokens[i + 3]);
            if (lo && hi && unit_at(i + 4, "words")) {
                cs.min_words = *lo;
                cs.max_words = *hi;
            }
        }
    }

    const auto collect_forbidden = [&](const std::string& introducer) {
        for (const auto& clause : detail::trailing_clauses(lowered, introducer)) {
            for (const auto& token : text::tokenize(clause)) {
                if (lexicon::is_stopword(token)) continue;
                detail::append_unique(cs.forbidden_terms, token);
            }
        }
    };
    collect_forbidden("without mentioning");
    collect_forbidden("do not mention");

    if (cs.min_words && cs.max_words && *cs.min_words > *cs.max_words) {
        std::swap(*cs.min_words, *cs.max_words);
    }
    return cs;
}

// ---------------------------------------------------------------------------
// Reference corpus (4-gram inventory for the novelty term)
// ---------------------------------------------------------------------------

class ReferenceCorpus {
  public:
    ReferenceCorpus() = default;

    void add_text(std::string_view body) {
        const auto tokens = text::tokenize(body);
        if (tokens.size() < 4) return;
        for (std::size_t i = 0; i + 4 <= tokens.size(); ++i) {
            grams_.insert(gram_hash(tokens, i));
        }
    }

    static ReferenceCorpus from_directory(const std::filesystem::path& dir) {
        ReferenceCorpus corpus;
        if (!std::filesystem::is_directory(dir)) {
            throw ConfigError("reference corpus directory not found: " + dir.string());
        }
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".txt") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& path : files) {
            std::ifstream in(path);
            if (!in) throw ConfigError("cannot read corpus file: " + path.string());
            std::ostringstream body;
            body << in.rdbuf();
            corpus.add_text(body.str());
        }
        return corpus;
    }

    bool contains(const std::vector<std::string>& tokens, std::size_t at) const {
        return grams_.count(gram_hash(tokens, at)) > 0;
    }

    std::size_t size() const { return grams_.size(); }

  private:
    static std::uint64_t gram_hash(const std::vector<std::string>& tokens, std::size_t at) {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (std::size_t i = at; i < at + 4; ++i) {
            h = text::fnv1a64(tokens[i], h);
            h = text::fnv1a64("\x1f", h);
        }
        return h;
    }

    std::set<std::uint64_t> grams_;
};

// ---------------------------------------------------------------------------
// The three VisuGen axes
// ---------------------------------------------------------------------------

struct CreativityWeights {
    double bigram_diversity = 0.4;
    double type_token = 0.3;
    double novelty = 0.3;

    void check() const {
        if (bigram_diversity < 0 || type_token < 0 || novelty < 0) {
            throw ConfigError("creativity weights must be non-negative");
        }
        const double sum = bigram_diversity + type_token + novelty;
        if (sum < 1.0 - 1e-9 || sum > 1.0 + 1e-9) {
            throw ConfigError("creativity weights must sum to 1");
        }
    }
};

// Fraction of the document's salient elements mentioned in the text, counting
// a mention of any synonym. Multi-word surfaces must appear contiguously.
inline double visual_grounding(std::string_view generated, const svi::SviDocument& doc) {
    const auto elements = svi::salient_elements(doc);
    if (elements.empty()) return 0.0;
    const auto tokens = text::tokenize(generated);
    std::size_t matched = 0;
    for (const auto& element : elements) {
        bool hit = text::matches_surface(tokens, element.surface);
        for (std::size_t i = 0; !hit && i < element.synonyms.size(); ++i) {
            hit = text::matches_surface(tokens, element.synonyms[i]);
        }
        if (hit) ++matched;
    }
    return static_cast<double>(matched) / static_cast<double>(elements.size());
}

// Weighted blend of bigram diversity, type-token ratio, and 4-gram novelty
// against a reference corpus. Texts with fewer than 2 tokens have no bigrams
// and score 0 on that term; texts with fewer than 4 tokens have no overlap.
inline double creativity(std::string_view generated, const ReferenceCorpus& corpus,
                         const CreativityWeights& weights = {}) {
    weights.check();
    const auto tokens = text::tokenize(generated);
    if (tokens.empty()) throw Error("unscorable empty text");

    double bigram_diversity = 0.0;
    if (tokens.size() >= 2) {
        std::set<std::pair<std::string_view, std::string_view>> seen;
        for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
            seen.insert({tokens[i], tokens[i + 1]});
        }
        bigram_diversity = static_cast<double>(seen.size()) / static_cast<double>(tokens.size() - 1);
    }

    const std::set<std::string_view> types(tokens.begin(), tokens.end());
    const double type_token = static_cast<double>(types.size()) / static_cast<double>(tokens.size());

    double novelty = 1.0;
    if (tokens.size() >= 4) {
        std::size_t overlapping = 0;
        const std::size_t total = tokens.size() - 3;
        for (std::size_t i = 0; i < total; ++i) {
            if (corpus.contains(tokens, i)) ++overlapping;
        }
        novelty = 1.0 - static_cast<double>(overlapping) / static_cast<double>(total);
    }

    return weights.bigram_diversity * bigram_diversity + weights.type_token * type_token +
           weights.novelty * novelty;
}

// Fraction of satisfied instruction checks: one per theme keyword, one per
// style keyword (its own surface or a lexicon synonym counts), one combined
// word-count bound, one line-count bound, one per forbidden term. A
// constraint-free instruction is vacuously satisfied.
inline double instruction_adherence(
    std::string_view generated, const ConstraintSet& cs,
    const lexicon::StyleLexicon& styles = lexicon::default_style_lexicon()) {
    const auto tokens = text::tokenize(generated);
    std::size_t checks = 0;
    std::size_t passed = 0;
    const auto tally = [&](bool ok) {
        ++checks;
        if (ok) ++passed;
    };

    for (const auto& theme : cs.theme_keywords) {
        tally(text::matches_surface(tokens, theme));
    }
    for (const auto& style : cs.style_keywords) {
        bool hit = text::matches_surface(tokens, style);
        const auto it = styles.find(style);
        if (!hit && it != styles.end()) {
            for (const auto& synonym : it->second) {
                if (text::matches_surface(tokens, synonym)) {
                    hit = true;
                    break;
                }
            }
        }
        tally(hit);
    }
    if (cs.min_words || cs.max_words) {
        const std::size_t wc = tokens.size();
        tally((!cs.min_words || wc >= *cs.min_words) && (!cs.max_words || wc <= *cs.max_words));
    }
    if (cs.min_lines) {
        tally(text::count_lines(generated) >= *cs.min_lines);
    }
    for (const auto& term : cs.forbidden_terms) {
        tally(!text::matches_surface(tokens, term));
    }

    if (checks == 0) return 1.0;
    return static_cast<double>(passed) / static_cast<double>(checks);
}

// ---------------------------------------------------------------------------
// Combined scoring
// ---------------------------------------------------------------------------

struct MetricScores {
    double vg = 0.0;
    double c = 0.0;
    double ia = 0.0;
    double mean = 0.0;
};

inline MetricScores make_scores(double vg, double c, double ia) {
    return {vg, c, ia, (vg + c + ia) / 3.0};
}

inline MetricScores score(std::string_view generated, const svi::SviDocument& reference,
                          const ConstraintSet& cs, const ReferenceCorpus& corpus = {},
                          const CreativityWeights& weights = {},
                          const lexicon::StyleLexicon& styles = lexicon::default_style_lexicon()) {
    const double vg = visual_grounding(generated, reference);
    const double c = creativity(generated, corpus, weights);
    const double ia = instruction_adherence(generated, cs, styles);
    return make_scores(vg, c, ia);
}

inline MetricScores score(std::string_view generated, const svi::SviDocument& reference,
                          std::string_view instruction, const ReferenceCorpus& corpus = {},
                          const CreativityWeights& weights = {},
                          const lexicon::StyleLexicon& styles = lexicon::default_style_lexicon()) {
    return score(generated, reference, parse_constraints(instruction, styles), corpus, weights,
                 styles);
}

}  // namespace visucraft::metrics
