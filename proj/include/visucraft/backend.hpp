#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>

#include <json.hpp>

#include "visucraft/errors.hpp"
#include "visucraft/http_client.hpp"
#include "visucraft/prompt.hpp"
#include "visucraft/text.hpp"

namespace visucraft::backend {

enum class BackendMode { Remote, Template, Replay };

inline std::string to_string(BackendMode mode) {
    switch (mode) {
        case BackendMode::Remote: return "remote";
        case BackendMode::Template: return "template";
        case BackendMode::Replay: return "replay";
    }
    return "template";
}

inline BackendMode backend_mode_from_string(std::string_view s) {
    if (s == "remote") return BackendMode::Remote;
    if (s == "template") return BackendMode::Template;
    if (s == "replay") return BackendMode::Replay;
    throw ConfigError("unknown backend mode '" + std::string(s) + "'");
}

struct BackendConfig {
    BackendMode mode = BackendMode::Template;
    std::optional<std::string> endpoint;
    std::string model_name = "visucraft-lvlm";
    double temperature = 0.7;
    int max_tokens = 1024;
    long seed = 0;
    std::optional<std::filesystem::path> cache_dir;
    int timeout_ms = 30000;
    int max_retries = 2;
    int backoff_base_ms = 50;
    int max_in_flight = 4;

    void check() const {
        if (mode == BackendMode::Remote) {
            if (!endpoint || endpoint->empty()) throw ConfigError("remote backend requires an endpoint");
            if (model_name.empty()) throw ConfigError("remote backend requires a model name");
        }
        if (mode == BackendMode::Replay && !cache_dir) {
            throw ConfigError("replay backend requires a cache directory");
        }
        if (temperature < 0) throw ConfigError("temperature must be non-negative");
        if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
        if (timeout_ms <= 0) throw ConfigError("timeout must be positive");
        if (max_retries < 0) throw ConfigError("max_retries must be non-negative");
        if (max_in_flight < 1) throw ConfigError("max_in_flight must be at least 1");
    }
};

struct GenerationResult {
    std::string text;
    std::string prompt_hash;
    std::string backend;
    std::optional<std::string> model_name;
    std::int64_t latency_ms = 0;
    std::string created_at;
};

inline std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm utc{};
    gmtime_r(&t, &utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

namespace detail {

inline nlohmann::ordered_json result_to_json(const GenerationResult& result) {
    nlohmann::ordered_json j;
    j["text"] = result.text;
    j["prompt_hash"] = result.prompt_hash;
    j["backend"] = result.backend;
    if (result.model_name) j["model_name"] = *result.model_name;
    j["latency_ms"] = result.latency_ms;
    j["created_at"] = result.created_at;
    return j;
}

inline GenerationResult result_from_json(const nlohmann::ordered_json& j) {
    GenerationResult result;
    result.text = j.value("text", std::string{});
    result.prompt_hash = j.value("prompt_hash", std::string{});
    result.backend = j.value("backend", std::string{});
    if (j.contains("model_name") && j["model_name"].is_string()) {
        result.model_name = j["model_name"].get<std::string>();
    }
    result.latency_ms = j.value("latency_ms", std::int64_t{0});
    result.created_at = j.value("created_at", std::string{});
    return result;
}

inline bool is_blank(std::string_view s) {
    return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

// Bounded in-flight counter for remote calls.
class Gate {
  public:
    explicit Gate(int slots) : slots_(slots) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return slots_ > 0; });
        --slots_;
    }

    void release() {
        {
            std::lock_guard lock(mutex_);
            ++slots_;
        }
        cv_.notify_one();
    }

  private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int slots_;
};

class GateGuard {
  public:
    explicit GateGuard(Gate& gate) : gate_(gate) { gate_.acquire(); }
    ~GateGuard() { gate_.release(); }
    GateGuard(const GateGuard&) = delete;
    GateGuard& operator=(const GateGuard&) = delete;

  private:
    Gate& gate_;
};

}  // namespace detail

// One file per (prompt, model, temperature, seed) key. Entries are immutable:
// re-recording identical content is a no-op, differing content is an error.
class ReplayCache {
  public:
    ReplayCache(std::filesystem::path dir, std::string model_name, double temperature, long seed)
        : dir_(std::move(dir)), model_name_(std::move(model_name)) {
        std::ostringstream key;
        key.setf(std::ios::fixed);
        key.precision(6);
        key << model_name_ << '\x1f' << temperature << '\x1f' << seed << '\x1f';
        key_prefix_ = key.str();
    }

    std::filesystem::path entry_path(const std::string& prompt_hash) const {
        return dir_ / (text::content_hash(key_prefix_ + prompt_hash) + ".gen.json");
    }

    std::optional<GenerationResult> load(const std::string& prompt_hash) const {
        std::lock_guard lock(mutex_);
        return load_unlocked(prompt_hash);
    }

    void record(const GenerationResult& result) {
        std::lock_guard lock(mutex_);
        const auto existing = load_unlocked(result.prompt_hash);
        if (existing) {
            if (existing->text == result.text) return;
            throw CacheConflictError("cache entry for prompt_hash " + result.prompt_hash +
                                     " already holds different text");
        }
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        const auto path = entry_path(result.prompt_hash);
        const auto tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw CacheError("cannot write cache entry: " + tmp);
            out << detail::result_to_json(result).dump();
        }
        std::filesystem::rename(tmp, path);
    }

  private:
    std::optional<GenerationResult> load_unlocked(const std::string& prompt_hash) const {
        const auto path = entry_path(prompt_hash);
        std::ifstream in(path, std::ios::binary);
        if (!in) return std::nullopt;
        std::ostringstream body;
        body << in.rdbuf();
        try {
            return detail::result_from_json(nlohmann::ordered_json::parse(body.str()));
        } catch (const nlohmann::json::parse_error&) {
            throw CacheError("corrupt cache entry at " + path.string());
        }
    }

    std::filesystem::path dir_;
    std::string model_name_;
    std::string key_prefix_;
    mutable std::mutex mutex_;
};

inline void record(const prompt::OptimizedPrompt& prompt, const GenerationResult& result,
                   ReplayCache& cache) {
    if (result.prompt_hash != prompt.hash_hex()) {
        throw CacheError("result prompt_hash does not match the prompt it claims to answer");
    }
    cache.record(result);
}

// Deterministic completion: names the task, then echoes the visual context
// and constraint sections so every surface string and constraint keyword from
// the prompt appears in the output.
inline std::string template_completion(const prompt::OptimizedPrompt& prompt) {
    std::string task_word = "piece";
    if (const auto* preamble = prompt.section("preamble")) {
        const auto tokens = text::tokenize(*preamble);
        if (text::contains_phrase(tokens, {"ad", "copy"})) {
            task_word = "ad copy";
        } else {
            for (const auto& token : tokens) {
                if (token == "poem" || token == "story") {
                    task_word = token;
                    break;
                }
            }
        }
    }
    std::string out = "Here is the " + task_word + ".";
    if (const auto* visual = prompt.section("visual_context")) out += "\n" + *visual;
    if (const auto* constraints = prompt.section("constraints")) out += "\n" + *constraints;
    return out;
}

class LvlmBackend {
  public:
    explicit LvlmBackend(BackendConfig cfg, net::Transport transport = net::http_post)
        : cfg_(std::move(cfg)), gate_(cfg_.max_in_flight) {
        cfg_.check();
        if (cfg_.cache_dir) {
            cache_.emplace(*cfg_.cache_dir, cfg_.model_name, cfg_.temperature, cfg_.seed);
        }
        if (cfg_.mode == BackendMode::Remote) {
            client_.emplace(*cfg_.endpoint, "VISUCRAFT_LVLM_TOKEN", cfg_.timeout_ms,
                            cfg_.max_retries, cfg_.backoff_base_ms, std::move(transport));
        }
    }

    const BackendConfig& config() const { return cfg_; }

    GenerationResult generate(const prompt::OptimizedPrompt& prompt) {
        const std::string prompt_hash = prompt.hash_hex();
        if (cfg_.mode == BackendMode::Replay) {
            auto hit = cache_->load(prompt_hash);
            if (!hit) throw CacheMissError(prompt_hash);
            return *hit;
        }

        const auto started = std::chrono::steady_clock::now();
        std::string completion;
        if (cfg_.mode == BackendMode::Template) {
            completion = template_completion(prompt);
        } else {
            detail::GateGuard slot(gate_);
            completion = client_->complete(chat_messages(prompt), cfg_.model_name,
                                           cfg_.temperature, cfg_.max_tokens, cfg_.seed);
        }
        if (detail::is_blank(completion)) {
            throw BackendError("backend returned an empty completion for prompt_hash " +
                               prompt_hash);
        }

        GenerationResult result;
        result.text = std::move(completion);
        result.prompt_hash = prompt_hash;
        result.backend = to_string(cfg_.mode);
        if (cfg_.mode == BackendMode::Remote) result.model_name = cfg_.model_name;
        result.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - started)
                                .count();
        result.created_at = now_iso8601();
        if (cache_) cache_->record(result);
        return result;
    }

  private:
    static std::vector<net::ChatMessage> chat_messages(const prompt::OptimizedPrompt& prompt) {
        std::vector<net::ChatMessage> messages;
        std::string user;
        for (const auto& section : prompt.sections) {
            if (section.tag == "preamble") {
                messages.push_back({"system", section.body});
                continue;
            }
            if (!user.empty()) user += "\n\n";
            user += section.body;
        }
        messages.push_back({"user", user});
        return messages;
    }

    BackendConfig cfg_;
    std::optional<ReplayCache> cache_;
    std::optional<net::ChatClient> client_;
    detail::Gate gate_;
};

}  // namespace visucraft::backend
