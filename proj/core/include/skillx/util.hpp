#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace skillx {

/// Embedding vector storage: single precision on disk and in indexes,
/// double precision in every similarity computation.
using Vec = std::vector<float>;

/// splitmix64 step; the project-wide primitive for deterministic,
/// platform-stable pseudo-randomness (std::hash and std::mt19937 stay out
/// of anything that ends up in an artifact).
uint64_t splitmix64(uint64_t& state);

/// Small counter-based generator seeded once; every stream a component
/// needs is derived from (seed, stream, counter) so results do not depend
/// on call interleaving.
class DeterministicRng {
public:
    explicit DeterministicRng(uint64_t seed) : seed_(seed) {}

    /// Uniform in [0, 1) for the given stream/counter pair.
    double uniform(uint64_t stream, uint64_t counter) const;

    /// Uniform integer in [0, n) for the given stream/counter pair.
    uint64_t uniform_int(uint64_t stream, uint64_t counter, uint64_t n) const;

    uint64_t seed() const { return seed_; }

private:
    uint64_t seed_;
};

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool contains(std::string_view haystack, std::string_view needle);
std::vector<std::string> split_lines(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Whitespace-delimited token count; the deterministic stand-in for a
/// model tokenizer when checking feedback-length thresholds.
size_t whitespace_token_count(std::string_view text);

/// Lowercased, whitespace-collapsed form used to deduplicate synthesized
/// task statements.
std::string normalized_text_key(std::string_view text);

/// Applies `fn` to indices [0, n) on up to `jobs` threads and returns
/// nothing; outputs must be written into index-addressed slots by the
/// callee so collection order never depends on scheduling. Exceptions are
/// rethrown (first one wins) after all workers join.
void parallel_for_indexed(size_t n, unsigned jobs, const std::function<void(size_t)>& fn);

}  // namespace skillx
