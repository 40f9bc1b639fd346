#pragma once

// Corpus similarity: corpora are cut into word-count chunks, each chunk
// is profiled by its most frequent character n-grams, and two profiles
// are compared by Spearman rank correlation over the union of their
// features. Distributions of chunk-pair scores feed the stage ANOVA.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "geoclean/stats.hpp"

namespace geoclean {

// Shuffles the samples with the seeded generator, then packs them
// greedily into chunks of at least chunk_words words, up to max_chunks.
// A trailing partial chunk is discarded. A corpus smaller than one chunk
// is an error.
std::vector<std::string> chunk_corpus(const std::vector<std::string>& sample_texts,
                                      uint64_t chunk_words, uint64_t max_chunks, uint64_t seed);

struct NgramProfile {
    uint32_t n = 3;
    uint32_t top_k = 5000;
    uint64_t total = 0;  // pre-truncation n-gram total, for normalization
    // Sorted by (count desc, n-gram asc), truncated to top_k.
    std::vector<std::pair<std::string, uint64_t>> counts;
};

// Counts codepoint n-grams of the NFKC-normalized, whitespace-collapsed
// text, each word padded with a boundary space on both sides.
NgramProfile ngram_profile(std::string_view chunk, uint32_t n, uint32_t top_k);

// Spearman rank correlation over the union of the two profiles' feature
// lists. Features present in a profile get distinct ranks in (count
// desc, n-gram asc) order; features absent from it share the average of
// the trailing ranks.
double similarity_score(const NgramProfile& a, const NgramProfile& b);

struct SimilarityDistribution {
    std::string stage;
    std::string benchmark;
    uint64_t chunk_words = 0;
    uint64_t n_pairs = 0;
    std::vector<double> values;
};

struct DistributionParams {
    uint64_t chunk_words = 10000;
    uint64_t max_chunks = 500;
    uint32_t n = 3;
    uint32_t top_k = 5000;
    uint64_t n_pairs = 500;
    uint64_t seed = 1;
};

// Chunks both corpora, draws n_pairs cross-corpus chunk pairs with
// replacement using the seeded generator, and scores each pair.
SimilarityDistribution stage_distribution(const std::vector<std::string>& stage_samples,
                                          const std::vector<std::string>& benchmark_samples,
                                          const DistributionParams& params,
                                          const std::string& stage_id,
                                          const std::string& benchmark_id);

stats::AnovaResult anova(const std::vector<SimilarityDistribution>& groups);

// CSV rows `stage,benchmark,value`, one per pair.
std::string distributions_csv(const std::vector<SimilarityDistribution>& groups);

// JSON object {F, p, df_between, df_within, group_means, degenerate};
// an infinite F is serialized as null.
std::string anova_json(const stats::AnovaResult& result);

}  // namespace geoclean
