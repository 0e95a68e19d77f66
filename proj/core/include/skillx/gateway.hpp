#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "skillx/errors.hpp"
#include "skillx/util.hpp"

namespace skillx {

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string text;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;  // [0, 2]
    int max_output_tokens = 4096;

    /// Throws std::invalid_argument when the request violates its
    /// invariants (empty messages, bad leading role, bad temperature).
    void validate() const;

    /// Concatenated prompt text, one "role: text" block per message. This
    /// is what mock rules match against and what fingerprints cover.
    std::string flattened() const;
};

/// Chat-completion service contract. Implementations must be safe to share
/// across threads; each call is independent.
class ChatGateway {
public:
    virtual ~ChatGateway() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

/// Text-embedding service contract. One vector per input text, same order.
class EmbeddingGateway {
public:
    virtual ~EmbeddingGateway() = default;
    virtual std::vector<Vec> embed(const std::vector<std::string>& texts) = 0;
    virtual int dimension() const = 0;
};

/// Replies with the text of the last user message. The fallback behavior
/// of the scripted mock and a handy identity gateway for tests.
class EchoChatGateway : public ChatGateway {
public:
    std::string complete(const ChatRequest& request) override;
};

/// Deterministic mock: an ordered rule table mapping prompt fingerprints or
/// required-substring sets to canned replies, with an echo fallback. Rules
/// are immutable once the pipeline starts; the call log is for tests.
class ScriptedChatGateway : public ChatGateway {
public:
    struct Rule {
        std::string fingerprint;            // exact match on fingerprint_of(request)
        std::vector<std::string> contains;  // all substrings must appear in flattened()
        std::string reply;
    };

    ScriptedChatGateway() = default;
    explicit ScriptedChatGateway(std::vector<Rule> rules) : rules_(std::move(rules)) {}
    ScriptedChatGateway(ScriptedChatGateway&& other) noexcept
        : rules_(std::move(other.rules_)), call_log_(std::move(other.call_log_)) {}

    /// Loads a mock table: {"rules":[{"match":{"contains":[...]} |
    /// {"fingerprint":"..."}, "reply":"..."}]}. First matching rule wins.
    static ScriptedChatGateway from_file(const std::string& path);

    void add_contains_rule(std::vector<std::string> needles, std::string reply);
    void add_fingerprint_rule(std::string fingerprint, std::string reply);

    std::string complete(const ChatRequest& request) override;

    /// Fingerprint of a request's message list (role/text only), stable
    /// across runs and platforms.
    static std::string fingerprint_of(const ChatRequest& request);

    size_t call_count() const;
    size_t call_count_containing(std::string_view needle) const;

private:
    std::vector<Rule> rules_;
    mutable std::mutex log_mutex_;
    std::vector<std::string> call_log_;
};

/// Seeded feature-hashing embedder over character 3-grams, unit-normalized.
/// Deterministic, pure, and close enough to "similar text, similar vector"
/// to drive retrieval offline.
class HashEmbeddingGateway : public EmbeddingGateway {
public:
    explicit HashEmbeddingGateway(int dimension = 1024, uint64_t seed = 0x5eedc0de)
        : dimension_(dimension), seed_(seed) {}

    std::vector<Vec> embed(const std::vector<std::string>& texts) override;
    int dimension() const override { return dimension_; }

    /// Embedding of a single text; exposed so tests can reach the oracle
    /// directly.
    Vec embed_one(const std::string& text) const;

private:
    int dimension_;
    uint64_t seed_;
};

struct RetryPolicy {
    int attempts = 3;
    int backoff_ms = 100;  // doubled after each failed attempt
};

struct HttpGatewayConfig {
    std::string url;    // full endpoint URL, e.g. http://host:8080/v1/chat/completions
    std::string api_key;
    std::string model = "default";
    RetryPolicy retry;
};

/// POSTs the de-facto chat-completion wire shape
/// {model, messages:[{role,content}], temperature, max_tokens} and returns
/// choices[0].message.content. Transient transport failures are retried
/// with exponential backoff, then surfaced as TransportError.
class HttpChatGateway : public ChatGateway {
public:
    explicit HttpChatGateway(HttpGatewayConfig config) : config_(std::move(config)) {}
    std::string complete(const ChatRequest& request) override;

private:
    HttpGatewayConfig config_;
};

/// POSTs {model, input:[...]} and returns data[i].embedding. A reply whose
/// vectors are not `dimension` wide is a DimensionMismatch.
class HttpEmbeddingGateway : public EmbeddingGateway {
public:
    HttpEmbeddingGateway(HttpGatewayConfig config, int dimension)
        : config_(std::move(config)), dimension_(dimension) {}

    std::vector<Vec> embed(const std::vector<std::string>& texts) override;
    int dimension() const override { return dimension_; }

private:
    HttpGatewayConfig config_;
    int dimension_;
};

/// Reads SKILLX_CHAT_URL / SKILLX_EMBED_URL / SKILLX_API_KEY.
std::optional<HttpGatewayConfig> chat_gateway_config_from_env();
std::optional<HttpGatewayConfig> embed_gateway_config_from_env();

}  // namespace skillx
