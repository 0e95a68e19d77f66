#include <doctest.h>

#include <filesystem>
#include <set>

#include "skillx/ann_index.hpp"
#include "test_support.hpp"

using namespace skillx;
using testsupport::random_embeddings;
using testsupport::random_unit_vector;

TEST_CASE("single-entry index returns it for any query") {
    const auto embeddings = random_embeddings(1, 8, 3);
    const auto index = AnnIndex::build(embeddings);
    CHECK(index.size() == 1);
    const auto hits = index.search(random_unit_vector(DeterministicRng(5), 77, 8), 4);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].name == "s0");
}

TEST_CASE("query equal to a stored vector ranks it first at similarity 1") {
    const auto embeddings = random_embeddings(30, 16, 4);
    const auto index = AnnIndex::build(embeddings);
    const auto hits = index.search(embeddings[7].vector, 3);
    REQUIRE(!hits.empty());
    CHECK(hits[0].name == "s7");
    CHECK(hits[0].similarity == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("k beyond index size saturates with all entries ranked") {
    const auto embeddings = random_embeddings(5, 8, 6);
    const auto index = AnnIndex::build(embeddings);
    const auto query = random_unit_vector(DeterministicRng(8), 1, 8);
    const auto hits = index.search(query, 50);
    CHECK(hits.size() == 5);
    for (size_t i = 1; i < hits.size(); ++i) CHECK(hits[i - 1].similarity >= hits[i].similarity);
}

TEST_CASE("search equals brute force exactly for small indexes") {
    const auto embeddings = random_embeddings(5, 12, 9);
    const auto index = AnnIndex::build(embeddings);
    const auto query = random_unit_vector(DeterministicRng(10), 2, 12);
    CHECK(index.search(query, 5) == brute_force_search(embeddings, query, 5));
}

TEST_CASE("brute force: orthogonal query ties break by name ascending") {
    std::vector<SkillEmbedding> embeddings = {
        {"bravo", {0.0f, 1.0f, 0.0f}, ""},
        {"alpha", {0.0f, 0.0f, 1.0f}, ""},
        {"charlie", {0.0f, -1.0f, 0.0f}, ""},
    };
    const Vec query{1.0f, 0.0f, 0.0f};
    const auto hits = brute_force_search(embeddings, query, 3);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].name == "alpha");
    CHECK(hits[1].name == "bravo");
    CHECK(hits[2].name == "charlie");
    for (const auto& hit : hits) CHECK(hit.similarity == 0.0);
}

TEST_CASE("build rejects ragged dimensions and duplicate names") {
    auto embeddings = random_embeddings(3, 8, 11);
    embeddings.push_back({"ragged", Vec(4, 0.5f), ""});
    CHECK_THROWS_AS(AnnIndex::build(embeddings), DimensionMismatch);

    auto dup = random_embeddings(3, 8, 11);
    dup.push_back({"s1", dup[0].vector, ""});
    CHECK_THROWS_AS(AnnIndex::build(dup), DuplicateName);

    CHECK_THROWS_AS(AnnIndex::build({}), EmptyIndex);
}

TEST_CASE("search contract errors") {
    const auto embeddings = random_embeddings(4, 8, 12);
    const auto index = AnnIndex::build(embeddings);
    CHECK_THROWS_AS(index.search(Vec(5, 0.1f), 2), DimensionMismatch);
}

TEST_CASE("builds are deterministic for a fixed seed and insertion order") {
    const auto embeddings = random_embeddings(300, 16, 13);
    const auto a = AnnIndex::build(embeddings);
    const auto b = AnnIndex::build(embeddings);
    const auto query = random_unit_vector(DeterministicRng(14), 3, 16);
    CHECK(a.search(query, 10) == b.search(query, 10));
}

TEST_CASE("graph search beyond the exact-scan regime stays faithful") {
    // 300 points > ef_search=128 forces the HNSW path; recall@10 against
    // the oracle should be high even before the acceptance-scale run
    const auto embeddings = random_embeddings(300, 32, 15);
    const auto index = AnnIndex::build(embeddings);
    const DeterministicRng rng(16);
    double recall_sum = 0.0;
    const int queries = 20;
    for (int q = 0; q < queries; ++q) {
        const auto query = random_unit_vector(rng, uint64_t(q) + 500, 32);
        const auto approx = index.search(query, 10);
        const auto exact = brute_force_search(embeddings, query, 10);
        std::set<std::string> exact_names;
        for (const auto& hit : exact) exact_names.insert(hit.name);
        int found = 0;
        for (const auto& hit : approx) found += exact_names.count(hit.name) ? 1 : 0;
        recall_sum += double(found) / 10.0;
    }
    CHECK(recall_sum / queries >= 0.95);
}

TEST_CASE("index snapshot round trip") {
    const auto embeddings = random_embeddings(50, 16, 17);
    const auto index = AnnIndex::build(embeddings);
    const auto path =
        (std::filesystem::temp_directory_path() / "skillx-index-snapshot.bin").string();
    index.save(path);
    const auto loaded = AnnIndex::load(path);
    CHECK(loaded.size() == index.size());
    CHECK(loaded.dimension() == index.dimension());
    const auto query = random_unit_vector(DeterministicRng(18), 4, 16);
    CHECK(loaded.search(query, 10) == index.search(query, 10));

    CHECK_THROWS_AS(AnnIndex::load("/nonexistent/skillx.bin"), IoError);
}
