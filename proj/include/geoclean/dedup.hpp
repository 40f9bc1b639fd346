#pragma once

// Exact deduplication: samples are normalized, hashed with SHA-1, and
// every sample whose normalized hash collides is removed. All copies go,
// not just the later ones.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "geoclean/document.hpp"

namespace geoclean {

struct Digest {
    std::array<uint8_t, 20> bytes{};

    bool operator==(const Digest&) const = default;
    std::string hex() const;
};

// NFKC, lowercase, decimal digits folded to '0', punctuation and symbols
// removed, whitespace collapsed, trimmed. Two samples are duplicates
// exactly when their normalized forms match.
std::string normalize_for_hash(std::string_view text);

// SHA-1 of the UTF-8 bytes (input expected pre-normalized).
Digest hash_sample(std::string_view normalized);

struct DedupStats {
    uint64_t input_samples = 0;
    uint64_t kept_samples = 0;
    uint64_t removed_samples = 0;
    uint64_t removed_words = 0;
    uint64_t distinct_collision_groups = 0;
};

struct RemovedSample {
    std::string parent_id;
    uint32_t index = 0;
    std::string digest_hex;
    uint64_t words = 0;
};

struct DedupResult {
    std::vector<Sample> kept;  // input order preserved
    std::vector<RemovedSample> removed;
    DedupStats stats;
};

// Two passes: count normalized digests, then keep only samples whose
// digest occurs exactly once.
DedupResult dedup_samples(const std::vector<Sample>& samples);

}  // namespace geoclean
