#include "skillx/gateway.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "skillx/sha256.hpp"
#include "skillx/util.hpp"

// httplib pulls in a lot; keep it confined to this translation unit.
#include <httplib.h>

namespace skillx {

using nlohmann::json;

void ChatRequest::validate() const {
    if (messages.empty()) throw std::invalid_argument("chat request has no messages");
    const std::string& first = messages.front().role;
    if (first != "system" && first != "user")
        throw std::invalid_argument("first message role must be system or user, got: " + first);
    for (const auto& m : messages) {
        if (m.role != "system" && m.role != "user" && m.role != "assistant")
            throw std::invalid_argument("unknown message role: " + m.role);
    }
    if (!(temperature >= 0.0 && temperature <= 2.0))
        throw std::invalid_argument("temperature out of range [0, 2]");
    if (max_output_tokens <= 0) throw std::invalid_argument("max_output_tokens must be positive");
}

std::string ChatRequest::flattened() const {
    std::string out;
    for (const auto& m : messages) {
        out += m.role;
        out += ": ";
        out += m.text;
        out += "\n";
    }
    return out;
}

std::string EchoChatGateway::complete(const ChatRequest& request) {
    request.validate();
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
        if (it->role == "user") return it->text;
    }
    return request.messages.back().text;
}

std::string ScriptedChatGateway::fingerprint_of(const ChatRequest& request) {
    std::string canonical;
    for (const auto& m : request.messages) {
        canonical += m.role;
        canonical += '\x1f';
        canonical += m.text;
        canonical += '\x1e';
    }
    return sha256_fingerprint(canonical);
}

ScriptedChatGateway ScriptedChatGateway::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mock table: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw FormatError("mock table is not valid JSON: " + std::string(e.what()));
    }
    std::vector<Rule> rules;
    for (const auto& entry : doc.value("rules", json::array())) {
        Rule rule;
        const json match = entry.value("match", json::object());
        rule.fingerprint = match.value("fingerprint", "");
        for (const auto& needle : match.value("contains", json::array()))
            rule.contains.push_back(needle.get<std::string>());
        rule.reply = entry.at("reply").get<std::string>();
        rules.push_back(std::move(rule));
    }
    return ScriptedChatGateway(std::move(rules));
}

void ScriptedChatGateway::add_contains_rule(std::vector<std::string> needles, std::string reply) {
    rules_.push_back(Rule{"", std::move(needles), std::move(reply)});
}

void ScriptedChatGateway::add_fingerprint_rule(std::string fingerprint, std::string reply) {
    rules_.push_back(Rule{std::move(fingerprint), {}, std::move(reply)});
}

std::string ScriptedChatGateway::complete(const ChatRequest& request) {
    request.validate();
    const std::string prompt = request.flattened();
    {
        std::lock_guard<std::mutex> lock(log_mutex_);
        call_log_.push_back(prompt);
    }
    const std::string fingerprint = fingerprint_of(request);
    for (const auto& rule : rules_) {
        if (!rule.fingerprint.empty()) {
            if (rule.fingerprint == fingerprint) return rule.reply;
            continue;
        }
        bool all = !rule.contains.empty();
        for (const auto& needle : rule.contains) {
            if (!contains(prompt, needle)) {
                all = false;
                break;
            }
        }
        if (all) return rule.reply;
    }
    // fallback: echo the last user message
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
        if (it->role == "user") return it->text;
    }
    return request.messages.back().text;
}

size_t ScriptedChatGateway::call_count() const {
    std::lock_guard<std::mutex> lock(log_mutex_);
    return call_log_.size();
}

size_t ScriptedChatGateway::call_count_containing(std::string_view needle) const {
    std::lock_guard<std::mutex> lock(log_mutex_);
    size_t n = 0;
    for (const auto& prompt : call_log_)
        if (contains(prompt, needle)) ++n;
    return n;
}

Vec HashEmbeddingGateway::embed_one(const std::string& text) const {
    Vec v(size_t(dimension_), 0.0f);
    const std::string t = trim(text);
    auto add_gram = [&](std::string_view gram) {
        uint64_t state = seed_;
        for (char c : gram) state = state * 1099511628211ULL + uint64_t(uint8_t(c));
        uint64_t salted = state;
        const uint64_t h = splitmix64(salted);
        const size_t idx = size_t(h % uint64_t(dimension_));
        const float sign = (h >> 63) ? -1.0f : 1.0f;
        v[idx] += sign;
    };
    if (t.size() < 3) {
        add_gram(t);
    } else {
        for (size_t i = 0; i + 3 <= t.size(); ++i) add_gram(std::string_view(t).substr(i, 3));
    }
    double norm_sq = 0.0;
    for (float x : v) norm_sq += double(x) * double(x);
    if (norm_sq == 0.0) {
        // degenerate cancellation: fall back to a single whole-text feature
        add_gram(std::string("\x01") + t);
        norm_sq = 0.0;
        for (float x : v) norm_sq += double(x) * double(x);
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (float& x : v) x = float(double(x) * inv);
    return v;
}

std::vector<Vec> HashEmbeddingGateway::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw std::invalid_argument("embed: texts must be non-empty");
    std::vector<Vec> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        if (trim(t).empty()) throw std::invalid_argument("embed: text empty after trimming");
        out.push_back(embed_one(t));
    }
    return out;
}

namespace {

struct ParsedUrl {
    std::string host_port;  // scheme://host:port
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    const size_t scheme = url.find("://");
    if (scheme == std::string::npos) throw TransportError("malformed endpoint URL: " + url);
    const size_t path_start = url.find('/', scheme + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

/// POSTs `body` as JSON with retry/backoff; returns the parsed reply.
json post_json_with_retry(const HttpGatewayConfig& config, const json& body) {
    const ParsedUrl url = parse_url(config.url);
    std::string last_error;
    for (int attempt = 0; attempt < std::max(1, config.retry.attempts); ++attempt) {
        if (attempt > 0) {
            const int delay = config.retry.backoff_ms * (1 << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
        httplib::Client client(url.host_port);
        client.set_connection_timeout(10);
        client.set_read_timeout(120);
        httplib::Headers headers;
        if (!config.api_key.empty())
            headers.emplace("Authorization", "Bearer " + config.api_key);
        auto res = client.Post(url.path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "server error: HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw TransportError("endpoint returned HTTP " + std::to_string(res->status));
        try {
            return json::parse(res->body);
        } catch (const json::exception& e) {
            throw MalformedResponse("reply is not valid JSON: " + std::string(e.what()));
        }
    }
    throw TransportError("endpoint unreachable after " + std::to_string(config.retry.attempts) +
                         " attempts: " + last_error);
}

}  // namespace

std::string HttpChatGateway::complete(const ChatRequest& request) {
    request.validate();
    json messages = json::array();
    for (const auto& m : request.messages)
        messages.push_back({{"role", m.role}, {"content", m.text}});
    const json body = {{"model", config_.model},
                       {"messages", messages},
                       {"temperature", request.temperature},
                       {"max_tokens", request.max_output_tokens}};
    const json reply = post_json_with_retry(config_, body);
    try {
        const json& content = reply.at("choices").at(0).at("message").at("content");
        if (!content.is_string()) throw MalformedResponse("message content is not text");
        return content.get<std::string>();
    } catch (const json::exception&) {
        throw MalformedResponse("no text in chat reply");
    }
}

std::vector<Vec> HttpEmbeddingGateway::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw std::invalid_argument("embed: texts must be non-empty");
    for (const auto& t : texts)
        if (trim(t).empty()) throw std::invalid_argument("embed: text empty after trimming");
    const json body = {{"model", config_.model}, {"input", texts}};
    const json reply = post_json_with_retry(config_, body);
    std::vector<Vec> out;
    try {
        for (const auto& item : reply.at("data")) {
            Vec v;
            for (const auto& x : item.at("embedding")) v.push_back(x.get<float>());
            if (int(v.size()) != dimension_)
                throw DimensionMismatch("embedding service returned width " +
                                        std::to_string(v.size()) + ", expected " +
                                        std::to_string(dimension_));
            out.push_back(std::move(v));
        }
    } catch (const json::exception&) {
        throw MalformedResponse("no embeddings in reply");
    }
    if (out.size() != texts.size()) throw MalformedResponse("embedding count mismatch");
    return out;
}

namespace {
std::optional<HttpGatewayConfig> config_from_env(const char* url_var) {
    const char* url = std::getenv(url_var);
    if (url == nullptr || *url == '\0') return std::nullopt;
    HttpGatewayConfig config;
    config.url = url;
    if (const char* key = std::getenv("SKILLX_API_KEY")) config.api_key = key;
    return config;
}
}  // namespace

std::optional<HttpGatewayConfig> chat_gateway_config_from_env() {
    return config_from_env("SKILLX_CHAT_URL");
}

std::optional<HttpGatewayConfig> embed_gateway_config_from_env() {
    return config_from_env("SKILLX_EMBED_URL");
}

}  // namespace skillx
