#pragma once

#include <chrono>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "visucraft/errors.hpp"

namespace visucraft::net {

struct Endpoint {
    std::string host;
    int port = 80;
    std::string path = "/";
};

inline Endpoint parse_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("malformed endpoint URL '" + url + "'");
    }
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http") {
        throw ConfigError("unsupported endpoint scheme '" + scheme + "' (only http)");
    }
    Endpoint ep;
    const std::string rest = url.substr(scheme_end + 3);
    const auto slash = rest.find('/');
    const std::string authority = rest.substr(0, slash);
    if (slash != std::string::npos) ep.path = rest.substr(slash);
    const auto colon = authority.find(':');
    if (colon == std::string::npos) {
        ep.host = authority;
    } else {
        ep.host = authority.substr(0, colon);
        try {
            ep.port = std::stoi(authority.substr(colon + 1));
        } catch (const std::exception&) {
            ep.port = 0;
        }
        if (ep.port <= 0 || ep.port > 65535) {
            throw ConfigError("invalid port in endpoint URL '" + url + "'");
        }
    }
    if (ep.host.empty()) throw ConfigError("missing host in endpoint URL '" + url + "'");
    return ep;
}

struct HttpResult {
    int status = 0;
    std::string body;
    bool transport_ok = false;
    std::string error;
};

using Headers = std::vector<std::pair<std::string, std::string>>;
using Transport =
    std::function<HttpResult(const Endpoint&, const Headers&, const std::string&, int)>;

inline HttpResult http_post(const Endpoint& ep, const Headers& headers, const std::string& payload,
                            int timeout_ms) {
    httplib::Client client(ep.host, ep.port);
    const time_t sec = timeout_ms / 1000;
    const time_t usec = (timeout_ms % 1000) * 1000;
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
    httplib::Headers h;
    for (const auto& [key, value] : headers) h.emplace(key, value);
    auto res = client.Post(ep.path, h, payload, "application/json");
    if (!res) return {0, "", false, httplib::to_string(res.error())};
    return {res->status, res->body, true, ""};
}

inline std::string excerpt(const std::string& body, std::size_t limit = 200) {
    if (body.size() <= limit) return body;
    return body.substr(0, limit) + "...";
}

struct ChatMessage {
    std::string role;
    std::string content;
};

// Reads completion text out of a chat-completion-shaped response, falling
// back to a bare {"text": ...} object and finally to the raw body.
inline std::string completion_text(const std::string& body) {
    try {
        const auto j = nlohmann::json::parse(body);
        if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
            const auto& first = j["choices"][0];
            if (first.contains("message") && first["message"].is_object()) {
                const auto& message = first["message"];
                if (message.contains("content") && message["content"].is_string()) {
                    return message["content"].get<std::string>();
                }
            }
            if (first.contains("text") && first["text"].is_string()) {
                return first["text"].get<std::string>();
            }
        }
        if (j.contains("text") && j["text"].is_string()) return j["text"].get<std::string>();
    } catch (const nlohmann::json::parse_error&) {
    }
    return body;
}

// POSTs JSON payloads with retry on transport failures and 5xx responses;
// 4xx responses are final. The bearer token is read from an env var so no
// credential ever sits in config files.
class ChatClient {
  public:
    ChatClient(const std::string& endpoint_url, std::string token_env, int timeout_ms,
               int max_retries, int backoff_base_ms = 50, Transport transport = http_post)
        : endpoint_(parse_endpoint(endpoint_url)),
          token_env_(std::move(token_env)),
          timeout_ms_(timeout_ms),
          max_retries_(max_retries),
          backoff_base_ms_(backoff_base_ms),
          transport_(std::move(transport)) {}

    std::string post(const std::string& payload) const {
        Headers headers;
        if (!token_env_.empty()) {
            if (const char* token = std::getenv(token_env_.c_str()); token && *token) {
                headers.emplace_back("Authorization", std::string("Bearer ") + token);
            }
        }
        std::string last_error = "request failed";
        for (int attempt = 0; attempt <= max_retries_; ++attempt) {
            if (attempt > 0 && backoff_base_ms_ > 0) {
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(backoff_base_ms_ << (attempt - 1)));
            }
            const HttpResult res = transport_(endpoint_, headers, payload, timeout_ms_);
            if (!res.transport_ok) {
                last_error = "transport failure: " + res.error;
                continue;
            }
            if (res.status >= 200 && res.status < 300) return res.body;
            if (res.status >= 500) {
                last_error = "server error " + std::to_string(res.status);
                continue;
            }
            throw BackendError("endpoint rejected request with status " +
                               std::to_string(res.status) + ": " + excerpt(res.body));
        }
        throw TransportError(last_error + " after " + std::to_string(max_retries_ + 1) +
                             " attempts");
    }

    std::string complete(const std::vector<ChatMessage>& messages, const std::string& model,
                         double temperature, int max_tokens, long seed) const {
        nlohmann::ordered_json payload;
        payload["model"] = model;
        auto list = nlohmann::ordered_json::array();
        for (const auto& message : messages) {
            list.push_back({{"role", message.role}, {"content", message.content}});
        }
        payload["messages"] = std::move(list);
        payload["temperature"] = temperature;
        payload["max_tokens"] = max_tokens;
        payload["seed"] = seed;
        return completion_text(post(payload.dump()));
    }

  private:
    Endpoint endpoint_;
    std::string token_env_;
    int timeout_ms_;
    int max_retries_;
    int backoff_base_ms_;
    Transport transport_;
};

}  // namespace visucraft::net
