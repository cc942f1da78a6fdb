#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "visucraft/errors.hpp"
#include "visucraft/http_client.hpp"
#include "visucraft/lexicon.hpp"
#include "visucraft/svi.hpp"
#include "visucraft/text.hpp"

namespace visucraft::extract {

struct ImageRef {
    std::string id;
    std::string uri;
    std::optional<std::string> checksum;
};

enum class ExtractorMode { Remote, Fixture, CaptionFallback };

inline std::string to_string(ExtractorMode mode) {
    switch (mode) {
        case ExtractorMode::Remote: return "remote";
        case ExtractorMode::Fixture: return "fixture";
        case ExtractorMode::CaptionFallback: return "caption-fallback";
    }
    return "fixture";
}

inline ExtractorMode extractor_mode_from_string(std::string_view s) {
    if (s == "remote") return ExtractorMode::Remote;
    if (s == "fixture") return ExtractorMode::Fixture;
    if (s == "caption-fallback" || s == "caption_fallback") return ExtractorMode::CaptionFallback;
    throw ConfigError("unknown extractor mode '" + std::string(s) + "'");
}

struct ExtractorConfig {
    ExtractorMode mode = ExtractorMode::Fixture;
    std::optional<std::string> endpoint;
    std::optional<std::filesystem::path> fixture_dir;
    int timeout_ms = 30000;
    int max_retries = 2;
    int backoff_base_ms = 50;
    svi::GranularityLevel requested_level = svi::GranularityLevel::L3;

    void check() const {
        if (mode == ExtractorMode::Remote && (!endpoint || endpoint->empty())) {
            throw ConfigError("remote extractor requires an endpoint");
        }
        if (mode == ExtractorMode::Fixture && !fixture_dir) {
            throw ConfigError("fixture extractor requires a fixture directory");
        }
        if (timeout_ms <= 0) throw ConfigError("timeout must be positive");
        if (max_retries < 0) throw ConfigError("max_retries must be non-negative");
    }
};

// Shallow ablation conversion: content words of the caption become bare L1
// objects, first occurrence wins.
inline svi::SviDocument caption_to_svi(std::string_view caption) {
    svi::SviDocument doc;
    doc.level = svi::GranularityLevel::L1;
    doc.source = svi::SviSource::CaptionFallback;
    std::set<std::string> seen;
    for (const auto& token : text::tokenize(caption)) {
        if (lexicon::is_stopword(token)) continue;
        if (!seen.insert(token).second) continue;
        doc.objects.push_back({token, {}, std::nullopt, {}});
    }
    if (doc.objects.empty()) throw ExtractError("no objects extractable");
    return doc;
}

namespace detail {

// Models often wrap JSON in prose or markdown fences; keep the outermost
// object literal.
inline std::string isolate_json_object(const std::string& body) {
    const auto open = body.find('{');
    const auto close = body.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open) return body;
    return body.substr(open, close - open + 1);
}

inline constexpr const char* kSystemPrompt =
    "You analyze one image and reply with structured visual information as a single JSON object, "
    "and nothing else. Use exactly these keys: level (\"L3\"), objects (array of {name, "
    "attributes, pose, synonyms}), relations (array of {subject, predicate, object} whose "
    "endpoints are object names), lighting, palette (array of color names), atmosphere, "
    "implied_narrative, source (\"remote\").";

}  // namespace detail

class Extractor {
  public:
    explicit Extractor(ExtractorConfig cfg, net::Transport transport = net::http_post)
        : cfg_(std::move(cfg)) {
        cfg_.check();
        if (cfg_.mode == ExtractorMode::Remote) {
            client_.emplace(*cfg_.endpoint, "VISUCRAFT_EXTRACTOR_TOKEN", cfg_.timeout_ms,
                            cfg_.max_retries, cfg_.backoff_base_ms, std::move(transport));
        }
    }

    const ExtractorConfig& config() const { return cfg_; }

    svi::SviDocument extract(const ImageRef& image, const std::string* caption = nullptr) const {
        if (image.id.empty()) throw ExtractError("image reference is missing an id");
        switch (cfg_.mode) {
            case ExtractorMode::Fixture: return from_fixture(image);
            case ExtractorMode::Remote: return from_remote(image);
            case ExtractorMode::CaptionFallback: break;
        }
        if (!caption || text::tokenize(*caption).empty()) {
            throw ExtractError("caption fallback requires a caption for image '" + image.id + "'");
        }
        svi::SviDocument doc;
        try {
            doc = caption_to_svi(*caption);
        } catch (const ExtractError& e) {
            throw ExtractError(std::string(e.what()) + " for image '" + image.id + "'");
        }
        return finalize(std::move(doc), svi::SviSource::CaptionFallback);
    }

  private:
    svi::SviDocument finalize(svi::SviDocument doc, svi::SviSource source) const {
        doc.source = source;
        const auto target = std::min(cfg_.requested_level, doc.level);
        return svi::downgrade(doc, target);
    }

    svi::SviDocument from_fixture(const ImageRef& image) const {
        const auto path = *cfg_.fixture_dir / (image.id + ".svi.json");
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ExtractError("missing fixture sidecar: " + path.string());
        std::ostringstream body;
        body << in.rdbuf();
        try {
            return finalize(svi::parse(body.str()), svi::SviSource::Fixture);
        } catch (const SyntaxError& e) {
            throw ExtractError("fixture " + path.string() + ": " + e.what());
        } catch (const SemanticError& e) {
            throw ExtractError("fixture " + path.string() + ": " + e.what());
        }
    }

    svi::SviDocument from_remote(const ImageRef& image) const {
        std::string user = "Image reference: " + image.uri + " (id: " + image.id + ")";
        if (image.checksum) user += " [checksum " + *image.checksum + "]";
        const std::string response = client_->complete(
            {{"system", detail::kSystemPrompt}, {"user", user}},
            "svi-extractor", 0.0, 2048, 0);
        try {
            const auto repaired = svi::parse_with_repair(detail::isolate_json_object(response));
            return finalize(repaired.doc, svi::SviSource::Remote);
        } catch (const SyntaxError& e) {
            throw ExtractError(std::string("unparseable extractor response: ") + e.what() +
                               "; response excerpt: " + net::excerpt(response));
        } catch (const SemanticError& e) {
            throw ExtractError(std::string("invalid extractor response: ") + e.what() +
                               "; response excerpt: " + net::excerpt(response));
        }
    }

    ExtractorConfig cfg_;
    std::optional<net::ChatClient> client_;
};

}  // namespace visucraft::extract
