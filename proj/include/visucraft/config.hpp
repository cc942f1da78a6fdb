#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "visucraft/backend.hpp"
#include "visucraft/errors.hpp"
#include "visucraft/extractor.hpp"
#include "visucraft/metrics.hpp"
#include "visucraft/prompt.hpp"
#include "visucraft/svi.hpp"
#include "visucraft/text.hpp"

namespace visucraft::config {

enum class PipelineArm { Full, WithoutExtractor, WithoutPromptgen };

inline std::string to_string(PipelineArm arm) {
    switch (arm) {
        case PipelineArm::Full: return "full";
        case PipelineArm::WithoutExtractor: return "wo-extractor";
        case PipelineArm::WithoutPromptgen: return "wo-promptgen";
    }
    return "full";
}

inline PipelineArm arm_from_string(std::string_view s) {
    if (s == "full") return PipelineArm::Full;
    if (s == "wo-extractor") return PipelineArm::WithoutExtractor;
    if (s == "wo-promptgen") return PipelineArm::WithoutPromptgen;
    throw ConfigError("unknown pipeline arm '" + std::string(s) + "'");
}

enum class Aggregation { Mean, Median };

inline std::string to_string(Aggregation a) {
    return a == Aggregation::Median ? "median" : "mean";
}

inline Aggregation aggregation_from_string(std::string_view s) {
    if (s == "mean") return Aggregation::Mean;
    if (s == "median") return Aggregation::Median;
    throw ConfigError("unknown aggregation '" + std::string(s) + "' (expected mean or median)");
}

struct RunConfig {
    PipelineArm arm = PipelineArm::Full;
    svi::GranularityLevel granularity = svi::GranularityLevel::L3;
    extract::ExtractorConfig extractor;
    backend::BackendConfig backend;
    prompt::WeightTable weights;
    metrics::CreativityWeights creativity;
    std::optional<std::filesystem::path> corpus_dir;
    std::optional<std::filesystem::path> style_lexicon;
    Aggregation aggregation = Aggregation::Mean;
    int parallelism = 4;
    std::filesystem::path output_dir = "out";
    long seed = 0;

    void check() const {
        extractor.check();
        backend.check();
        weights.check();
        creativity.check();
        if (parallelism < 1) throw ConfigError("parallelism must be at least 1");
    }
};

namespace detail {

inline double parse_real(const std::string& value, const std::string& key) {
    try {
        std::size_t used = 0;
        const double parsed = std::stod(value, &used);
        if (used == value.size()) return parsed;
    } catch (const std::exception&) {
    }
    throw ConfigError("key '" + key + "' expects a number, got '" + value + "'");
}

inline long parse_integer(const std::string& value, const std::string& key) {
    try {
        std::size_t used = 0;
        const long parsed = std::stol(value, &used);
        if (used == value.size()) return parsed;
    } catch (const std::exception&) {
    }
    throw ConfigError("key '" + key + "' expects an integer, got '" + value + "'");
}

inline svi::Facet facet_from_string(const std::string& name, const std::string& key) {
    for (const auto facet : svi::kAllFacets) {
        if (svi::facet_name(facet) == name) return facet;
    }
    throw ConfigError("key '" + key + "' names an unknown facet '" + name + "'");
}

inline prompt::TaskType task_from_config_name(const std::string& name, const std::string& key) {
    if (name == "story_gen") return prompt::TaskType::StoryGen;
    if (name == "poetry") return prompt::TaskType::Poetry;
    if (name == "ad_copy") return prompt::TaskType::AdCopyGen;
    if (name == "freeform") return prompt::TaskType::Freeform;
    throw ConfigError("key '" + key + "' names an unknown task '" + name + "'");
}

inline std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

}  // namespace detail

inline void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    using detail::parse_integer;
    using detail::parse_real;

    if (key == "arm") {
        cfg.arm = arm_from_string(value);
    } else if (key == "level") {
        cfg.granularity = svi::level_from_string(value);
    } else if (key == "seed") {
        cfg.seed = parse_integer(value, key);
    } else if (key == "parallelism") {
        cfg.parallelism = static_cast<int>(parse_integer(value, key));
    } else if (key == "output_dir") {
        cfg.output_dir = value;
    } else if (key == "aggregation") {
        cfg.aggregation = aggregation_from_string(value);
    } else if (key == "corpus_dir") {
        cfg.corpus_dir = value;
    } else if (key == "style_lexicon") {
        cfg.style_lexicon = value;
    } else if (key == "extractor.mode") {
        cfg.extractor.mode = extract::extractor_mode_from_string(value);
    } else if (key == "extractor.endpoint") {
        cfg.extractor.endpoint = value;
    } else if (key == "extractor.fixture_dir") {
        cfg.extractor.fixture_dir = value;
    } else if (key == "extractor.timeout_ms") {
        cfg.extractor.timeout_ms = static_cast<int>(parse_integer(value, key));
    } else if (key == "extractor.max_retries") {
        cfg.extractor.max_retries = static_cast<int>(parse_integer(value, key));
    } else if (key == "backend.mode") {
        cfg.backend.mode = backend::backend_mode_from_string(value);
    } else if (key == "backend.endpoint") {
        cfg.backend.endpoint = value;
    } else if (key == "backend.model") {
        cfg.backend.model_name = value;
    } else if (key == "backend.temperature") {
        cfg.backend.temperature = parse_real(value, key);
    } else if (key == "backend.max_tokens") {
        cfg.backend.max_tokens = static_cast<int>(parse_integer(value, key));
    } else if (key == "backend.cache_dir") {
        cfg.backend.cache_dir = value;
    } else if (key == "backend.timeout_ms") {
        cfg.backend.timeout_ms = static_cast<int>(parse_integer(value, key));
    } else if (key == "backend.max_retries") {
        cfg.backend.max_retries = static_cast<int>(parse_integer(value, key));
    } else if (key == "backend.max_in_flight") {
        cfg.backend.max_in_flight = static_cast<int>(parse_integer(value, key));
    } else if (key.rfind("weights.", 0) == 0) {
        const auto rest = key.substr(8);
        const auto dot = rest.find('.');
        if (dot == std::string::npos) throw ConfigError("key '" + key + "' must be weights.<task>.<facet>");
        const auto task = detail::task_from_config_name(rest.substr(0, dot), key);
        const auto facet = detail::facet_from_string(rest.substr(dot + 1), key);
        cfg.weights.for_task(task)[static_cast<std::size_t>(facet)] = parse_real(value, key);
    } else if (key == "creativity.bigram_diversity") {
        cfg.creativity.bigram_diversity = parse_real(value, key);
    } else if (key == "creativity.type_token") {
        cfg.creativity.type_token = parse_real(value, key);
    } else if (key == "creativity.novelty") {
        cfg.creativity.novelty = parse_real(value, key);
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

// key = value lines; blank lines and lines starting with # are skipped.
inline RunConfig parse_config(std::istream& in, const std::string& origin,
                              RunConfig base = RunConfig{}) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = detail::trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected key = value, got '" + stripped + "'");
        }
        const std::string key = detail::trim(stripped.substr(0, eq));
        const std::string value = detail::trim(stripped.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
        }
        try {
            apply_config_value(base, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return base;
}

inline RunConfig load_config(const std::filesystem::path& path, RunConfig base = RunConfig{}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path.string());
    return parse_config(in, path.string(), std::move(base));
}

// Stable digest of every semantically relevant field. output_dir and
// parallelism are excluded: neither changes any produced text or score.
inline std::string config_fingerprint(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["arm"] = to_string(cfg.arm);
    j["level"] = svi::to_string(cfg.granularity);
    j["extractor"] = {
        {"mode", extract::to_string(cfg.extractor.mode)},
        {"endpoint", cfg.extractor.endpoint.value_or("")},
        {"fixture_dir", cfg.extractor.fixture_dir.value_or("").string()},
        {"timeout_ms", cfg.extractor.timeout_ms},
        {"max_retries", cfg.extractor.max_retries},
    };
    j["backend"] = {
        {"mode", backend::to_string(cfg.backend.mode)},
        {"endpoint", cfg.backend.endpoint.value_or("")},
        {"model", cfg.backend.model_name},
        {"temperature", cfg.backend.temperature},
        {"max_tokens", cfg.backend.max_tokens},
        {"cache_dir", cfg.backend.cache_dir.value_or("").string()},
        {"timeout_ms", cfg.backend.timeout_ms},
        {"max_retries", cfg.backend.max_retries},
        {"max_in_flight", cfg.backend.max_in_flight},
    };
    nlohmann::ordered_json weights;
    for (const auto task : {prompt::TaskType::StoryGen, prompt::TaskType::Poetry,
                            prompt::TaskType::AdCopyGen, prompt::TaskType::Freeform}) {
        weights[prompt::to_string(task)] = cfg.weights.for_task(task);
    }
    j["weights"] = std::move(weights);
    j["creativity"] = {cfg.creativity.bigram_diversity, cfg.creativity.type_token,
                       cfg.creativity.novelty};
    j["corpus_dir"] = cfg.corpus_dir.value_or("").string();
    j["style_lexicon"] = cfg.style_lexicon.value_or("").string();
    j["aggregation"] = to_string(cfg.aggregation);
    j["seed"] = cfg.seed;
    return text::content_hash(j.dump());
}

}  // namespace visucraft::config
