#pragma once

// Per-sub-corpus outlier detection: a subword skip-gram model is trained
// on the sub-corpus, each document is scored by the mean log-sigmoid of
// its window-5 center/context vector products, scores are standardized
// with the modified z-score, and documents beyond |M| = 3 are removed.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "geoclean/document.hpp"
#include "geoclean/stats.hpp"

namespace geoclean {

struct SkipGramConfig {
    uint32_t dim = 100;
    uint32_t window = 5;
    uint32_t ngram_min = 3;
    uint32_t ngram_max = 6;
    uint32_t epochs = 2;
    uint32_t negatives = 5;
    uint32_t min_count = 1;
    uint64_t buckets = 1ull << 21;  // hashed character-n-gram slots
    double lr0 = 0.05;              // decays linearly to zero over all pairs
    uint64_t seed = 1;
    uint64_t min_train_words = 5000000;  // below this, the sub-corpus is left unfiltered
};

struct SubwordSkipGramModel {
    SubCorpusKey key;
    SkipGramConfig config;
    std::vector<std::string> vocab_tokens;  // id order: count desc, token asc
    std::vector<uint64_t> vocab_counts;
    std::unordered_map<std::string, uint32_t> vocab;
    // Row-major (vocab + buckets) x dim; rows past the vocabulary are the
    // hashed character-n-gram slots.
    std::vector<float> input_vectors;
    std::vector<float> output_vectors;  // vocab x dim

    // Hashed slot rows (offset by vocab size) for the character 3-6-grams
    // of the token wrapped in boundary markers.
    std::vector<uint32_t> subword_rows(std::string_view token) const;
    // Mean of the token's own vector (when in vocabulary) and its subword
    // slot vectors. Out-of-vocabulary tokens use the slots alone.
    void input_vector(std::string_view token, float* out) const;
};

// Trains on the sub-corpus samples. Returns nothing when the sub-corpus
// is below min_train_words; callers pass such sub-corpora through
// unfiltered.
std::optional<SubwordSkipGramModel> train_subword_skipgram(
    const std::vector<std::string>& sample_texts, const SubCorpusKey& key,
    const SkipGramConfig& config);

// Caches per-token input vectors so scoring many documents against one
// frozen model does not recompute subword sums.
class DocumentScorer {
public:
    explicit DocumentScorer(const SubwordSkipGramModel& model) : model_(model) {}

    // Mean log-sigmoid over all (center, context) pairs within the
    // training window, enumerated exactly as in training. Contexts
    // outside the vocabulary contribute log sigmoid(0). Returns nothing
    // when no pair exists (fewer than two tokens): such documents are
    // unscoreable and must be kept.
    std::optional<double> score_tokens(const std::vector<std::string>& tokens);

    // A document scores over the union of its samples' pair sets; pairs
    // never span sample boundaries, matching training.
    std::optional<double> score_document(const std::vector<std::vector<std::string>>& sample_tokens);

private:
    const float* cached_input(const std::string& token);

    const SubwordSkipGramModel& model_;
    // node-based map: cached vectors keep stable addresses as entries are added
    std::unordered_map<std::string, std::vector<float>> cache_;
};

struct ScoreDistribution {
    std::vector<double> scores;    // x_i per scoreable document
    std::vector<double> m_scores;  // modified z-scores
    double median = 0.0;
    double mad = 0.0;
    bool degenerate = false;  // MAD was zero; nothing can be flagged
};

struct OutlierRecord {
    std::string doc_id;
    double x = 0.0;
    double m = 0.0;
    std::string side;  // "low" (too unpredictable) or "high" (too predictable)
};

struct OutlierFilterResult {
    std::vector<Document> kept;  // input order, unscoreable documents included
    std::vector<Document> removed_low;
    std::vector<Document> removed_high;
    ScoreDistribution distribution;
    std::vector<OutlierRecord> removed_log;
    std::vector<std::string> unscoreable_ids;  // kept but flagged
};

// Removes documents whose modified z-score is strictly beyond the
// threshold on either side. Boundary |M| = threshold is kept.
OutlierFilterResult filter_outliers(const std::vector<Document>& docs,
                                    const SubwordSkipGramModel& model, double threshold = 3.0);

// Replaces ceil(ratio * n) token positions, chosen uniformly without
// replacement, with uniform draws from the donor lexicon.
std::vector<std::string> inject_noise(std::vector<std::string> tokens,
                                      const std::vector<std::string>& donor_lexicon, double ratio,
                                      class Rng& rng);

struct NoiseCurve {
    SubCorpusKey subcorpus;
    std::vector<std::pair<double, double>> points;  // (ratio, accuracy)
};

// For each ratio: takes sample_size held-out documents, injects noise,
// pools them with the remaining clean documents, runs the outlier
// filter, and records the fraction of injected documents flagged.
NoiseCurve evaluate_noise_detection(const std::vector<Document>& docs,
                                    const SubwordSkipGramModel& model,
                                    const std::vector<std::string>& donor_lexicon,
                                    const std::vector<double>& ratios, size_t sample_size,
                                    uint64_t seed, double threshold = 3.0);

struct HistogramReport {
    static constexpr size_t kBins = 50;
    std::vector<uint64_t> bins;
    double min = 0.0;
    double max = 0.0;
    // Present only with at least 30 scores.
    std::optional<double> skewness;
    std::optional<double> excess_kurtosis;
};

HistogramReport score_distribution_report(const std::vector<double>& scores);

// Versioned binary container, magic GEOSG1.
std::string serialize_skipgram(const SubwordSkipGramModel& model);
SubwordSkipGramModel deserialize_skipgram(std::string_view bytes);
void save_skipgram(const SubwordSkipGramModel& model, const std::filesystem::path& path);
SubwordSkipGramModel load_skipgram(const std::filesystem::path& path);

}  // namespace geoclean
