#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace visucraft::text {

inline bool is_word_char(unsigned char c) {
    // Bytes >= 0x80 are UTF-8 continuations/starters; keeping them as word
    // characters leaves multibyte words intact.
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

inline char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](char c) { return ascii_lower(c); });
    return out;
}

// Lowercase tokens, split on every non-alphanumeric byte.
inline std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : s) {
        if (is_word_char(c)) {
            cur.push_back(ascii_lower(static_cast<char>(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

// Contiguous subsequence search; both sides already tokenized.
inline bool contains_phrase(const std::vector<std::string>& haystack,
                            const std::vector<std::string>& phrase) {
    if (phrase.empty() || phrase.size() > haystack.size()) return false;
    for (std::size_t i = 0; i + phrase.size() <= haystack.size(); ++i) {
        bool match = true;
        for (std::size_t j = 0; j < phrase.size(); ++j) {
            if (haystack[i + j] != phrase[j]) {
                match = false;
                break;
            }
        }
        if (match) return true;
    }
    return false;
}

// Word-boundary match of `surface` inside pre-tokenized text.
inline bool matches_surface(const std::vector<std::string>& text_tokens, std::string_view surface) {
    return contains_phrase(text_tokens, tokenize(surface));
}

inline std::size_t count_words(std::string_view s) { return tokenize(s).size(); }

// Lines split on '\n'; lines that are blank after trimming do not count.
inline std::size_t count_lines(std::string_view s) {
    std::size_t lines = 0;
    std::size_t start = 0;
    auto flush = [&](std::size_t end) {
        for (std::size_t i = start; i < end; ++i) {
            unsigned char c = static_cast<unsigned char>(s[i]);
            if (c != ' ' && c != '\t' && c != '\r') {
                ++lines;
                return;
            }
        }
    };
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\n') {
            flush(i);
            start = i + 1;
        }
    }
    flush(s.size());
    return lines;
}

inline bool has_control_chars(std::string_view s) {
    for (unsigned char c : s) {
        if (c < 0x20 || c == 0x7f) return true;
    }
    return false;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ull) {
    std::uint64_t h = seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string content_hash(std::string_view payload) { return hex64(fnv1a64(payload)); }

}  // namespace visucraft::text
