#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "visucraft/errors.hpp"
#include "visucraft/text.hpp"

namespace visucraft::lexicon {

// English function words. Tokens on this list are never treated as scene
// objects, theme keywords, or forbidden terms.
inline const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> words = {
        // articles / determiners
        "a", "an", "the", "this", "that", "these", "those", "each", "every", "either",
        "neither", "both", "all", "any", "some", "few", "several", "many", "much", "more",
        "most", "other", "another", "such", "own", "same",
        // prepositions
        "of", "in", "on", "at", "by", "with", "from", "to", "into", "onto", "over",
        "under", "above", "below", "between", "among", "through", "during", "before",
        "after", "behind", "beside", "near", "across", "against", "along", "around",
        "beyond", "within", "without", "toward", "towards", "upon", "about", "off",
        "out", "up", "down", "past", "per", "via", "amid", "atop",
        // conjunctions
        "and", "or", "but", "nor", "so", "yet", "for", "as", "if", "then", "than",
        "because", "while", "until", "unless", "although", "though", "whether", "once",
        // pronouns
        "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them",
        "my", "your", "his", "its", "our", "their", "mine", "yours", "hers", "ours",
        "theirs", "who", "whom", "whose", "which", "what", "where", "when", "why", "how",
        "someone", "something", "anyone", "anything", "everyone", "everything", "itself",
        "himself", "herself", "themselves", "myself", "yourself", "oneself",
        // auxiliaries / copulas
        "is", "are", "was", "were", "be", "been", "being", "am", "do", "does", "did",
        "done", "has", "have", "had", "having", "will", "would", "shall", "should",
        "can", "could", "may", "might", "must",
        // adverbial function words
        "not", "no", "too", "very", "also", "just", "only", "quite", "rather", "there",
        "here", "again", "further", "ever", "never", "always", "often", "still", "even",
    };
    return words;
}

inline bool is_stopword(const std::string& token) { return stopwords().count(token) > 0; }

using StyleLexicon = std::map<std::string, std::vector<std::string>>;

// Style adjectives recognized in instructions, each with the synonyms that
// instruction_adherence accepts as satisfying the style.
inline const StyleLexicon& default_style_lexicon() {
    static const StyleLexicon table = {
        {"melancholic", {"melancholy", "mournful", "sorrowful", "wistful", "somber", "plaintive"}},
        {"humorous", {"funny", "witty", "comic", "amusing", "lighthearted"}},
        {"whimsical", {"fanciful", "quirky", "playful", "capricious"}},
        {"dramatic", {"theatrical", "intense", "vivid", "striking"}},
        {"romantic", {"tender", "amorous", "passionate", "loving"}},
        {"dark", {"grim", "bleak", "shadowy", "brooding"}},
        {"joyful", {"cheerful", "exuberant", "radiant", "jubilant"}},
        {"nostalgic", {"wistful", "reminiscent", "yearning", "bittersweet"}},
        {"mysterious", {"enigmatic", "cryptic", "shadowed", "uncanny"}},
        {"serene", {"calm", "tranquil", "peaceful", "placid"}},
        {"epic", {"grand", "heroic", "sweeping", "monumental"}},
        {"minimalist", {"spare", "stark", "austere", "unadorned"}},
        {"uplifting", {"hopeful", "inspiring", "encouraging", "buoyant"}},
        {"ominous", {"foreboding", "menacing", "sinister", "threatening"}},
        {"formal", {"stately", "dignified", "measured", "ceremonious"}},
        {"playful", {"mischievous", "teasing", "frolicsome", "impish"}},
        {"solemn", {"grave", "earnest", "sober", "reverent"}},
    };
    return table;
}

// Plain-text table, one entry per line: `style: synonym, synonym, ...`.
// Blank lines and lines starting with '#' are skipped.
inline StyleLexicon parse_style_lexicon(const std::string& body, const std::string& origin) {
    StyleLexicon table;
    std::istringstream in(body);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string trimmed;
        for (char c : line) {
            if (c != '\r') trimmed.push_back(c);
        }
        auto first = trimmed.find_first_not_of(" \t");
        if (first == std::string::npos || trimmed[first] == '#') continue;
        auto colon = trimmed.find(':');
        if (colon == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected `style: synonym, ...`");
        }
        auto head_tokens = text::tokenize(trimmed.substr(0, colon));
        if (head_tokens.size() != 1) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": style must be one word");
        }
        std::vector<std::string> synonyms;
        std::string rest = trimmed.substr(colon + 1);
        std::string item;
        std::istringstream items(rest);
        while (std::getline(items, item, ',')) {
            auto toks = text::tokenize(item);
            if (toks.empty()) continue;
            std::string joined = toks[0];
            for (std::size_t i = 1; i < toks.size(); ++i) joined += " " + toks[i];
            synonyms.push_back(joined);
        }
        table[head_tokens[0]] = std::move(synonyms);
    }
    return table;
}

inline StyleLexicon load_style_lexicon(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open style lexicon: " + path);
    std::ostringstream body;
    body << in.rdbuf();
    return parse_style_lexicon(body.str(), path);
}

}  // namespace visucraft::lexicon
