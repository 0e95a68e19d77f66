#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace skillx {

/// Streaming SHA-256. Self-contained so digests are identical on every
/// platform the artifacts move between.
class Sha256 {
public:
    Sha256();

    void update(const void* data, size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }

    /// Finalizes and returns the 32-byte digest. The object must not be
    /// updated afterwards.
    std::array<uint8_t, 32> finish();

private:
    void process_block(const uint8_t* block);

    std::array<uint32_t, 8> state_;
    std::array<uint8_t, 64> buffer_;
    uint64_t total_len_ = 0;
    size_t buffer_len_ = 0;
};

/// Lowercase hex digest of `data`.
std::string sha256_hex(std::string_view data);

/// First 16 hex characters of the digest; used as a compact fingerprint
/// for mock-table keys and cache file names.
std::string sha256_fingerprint(std::string_view data);

}  // namespace skillx
