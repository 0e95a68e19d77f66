#include <doctest.h>

#include <cmath>

#include "skillx/gateway.hpp"
#include "skillx/vector_core.hpp"

using namespace skillx;

TEST_CASE("echo mock is identity on the last user message") {
    EchoChatGateway echo;
    ChatRequest request{{{"system", "echo"}, {"user", "hi"}}, 0.0, 64};
    CHECK(echo.complete(request) == "hi");

    request.messages.push_back({"assistant", "hello"});
    request.messages.push_back({"user", "again"});
    CHECK(echo.complete(request) == "again");
}

TEST_CASE("chat request invariants") {
    EchoChatGateway echo;
    CHECK_THROWS_AS(echo.complete(ChatRequest{{}, 0.0, 64}), std::invalid_argument);
    CHECK_THROWS_AS(echo.complete(ChatRequest{{{"assistant", "x"}}, 0.0, 64}),
                    std::invalid_argument);
    CHECK_THROWS_AS(echo.complete(ChatRequest{{{"user", "x"}}, 3.0, 64}), std::invalid_argument);
    CHECK_THROWS_AS(echo.complete(ChatRequest{{{"user", "x"}}, 0.0, 0}), std::invalid_argument);
}

TEST_CASE("scripted mock: fingerprint rule forces a canned plan") {
    const ChatRequest request{{{"user", "plan please"}}, 0.0, 64};
    ScriptedChatGateway mock;
    mock.add_fingerprint_rule(ScriptedChatGateway::fingerprint_of(request), "canned plan text");
    CHECK(mock.complete(request) == "canned plan text");
    // repeated identical calls return identical results
    CHECK(mock.complete(request) == "canned plan text");
    CHECK(mock.call_count() == 2);
}

TEST_CASE("scripted mock: contains rules match in order, fallback echoes") {
    ScriptedChatGateway mock;
    mock.add_contains_rule({"alpha", "beta"}, "both");
    mock.add_contains_rule({"alpha"}, "just alpha");
    CHECK(mock.complete({{{"user", "alpha and beta here"}}, 0.0, 64}) == "both");
    CHECK(mock.complete({{{"user", "alpha only"}}, 0.0, 64}) == "just alpha");
    CHECK(mock.complete({{{"user", "nothing matches"}}, 0.0, 64}) == "nothing matches");
    CHECK(mock.call_count_containing("alpha") == 2);
}

TEST_CASE("hash embedder is deterministic and pure") {
    HashEmbeddingGateway embedder(128, 42);
    const auto first = embedder.embed({"abc"});
    const auto second = embedder.embed({"abc"});
    CHECK(first == second);

    const auto pair = embedder.embed({"abc", "abc"});
    CHECK(pair[0] == pair[1]);
}

TEST_CASE("hash embedder: distinct texts give unit vectors with cosine < 1") {
    HashEmbeddingGateway embedder(128, 42);
    const auto vectors = embedder.embed({"abc", "xyz"});
    CHECK(std::abs(l2_norm(vectors[0]) - 1.0) <= 1e-9);
    CHECK(std::abs(l2_norm(vectors[1]) - 1.0) <= 1e-9);
    CHECK(cosine_similarity(vectors[0], vectors[1]) < 1.0);
}

TEST_CASE("hash embedder: similar text lands closer than unrelated text") {
    HashEmbeddingGateway embedder(256, 42);
    const auto vectors = embedder.embed({"list all spotify playlists for the user",
                                         "list every spotify playlist of a user",
                                         "compute the eigenvalues of a sparse matrix"});
    const double near = cosine_similarity(vectors[0], vectors[1]);
    const double far = cosine_similarity(vectors[0], vectors[2]);
    CHECK(near > far);
    CHECK(near > 0.5);
}

TEST_CASE("hash embedder rejects empty input") {
    HashEmbeddingGateway embedder(64, 1);
    CHECK_THROWS_AS(embedder.embed({}), std::invalid_argument);
    CHECK_THROWS_AS(embedder.embed({"   "}), std::invalid_argument);
}

TEST_CASE("http chat gateway: unreachable endpoint raises TransportError after retries") {
    HttpGatewayConfig config;
    config.url = "http://127.0.0.1:1/v1/chat/completions";  // nothing listens on port 1
    config.retry = {2, 1};
    HttpChatGateway gateway(config);
    CHECK_THROWS_AS(gateway.complete({{{"user", "hi"}}, 0.0, 16}), TransportError);
}

TEST_CASE("gateway env configs read SKILLX_* variables") {
    ::setenv("SKILLX_CHAT_URL", "http://example.test/v1/chat", 1);
    ::setenv("SKILLX_API_KEY", "k", 1);
    const auto config = chat_gateway_config_from_env();
    REQUIRE(config.has_value());
    CHECK(config->url == "http://example.test/v1/chat");
    CHECK(config->api_key == "k");
    ::unsetenv("SKILLX_CHAT_URL");
    ::unsetenv("SKILLX_API_KEY");
    CHECK_FALSE(chat_gateway_config_from_env().has_value());
}
