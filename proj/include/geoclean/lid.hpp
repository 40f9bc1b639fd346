#pragma once

// Two architecturally independent character-n-gram language classifiers
// and the agreement filter built on them. The first model is a smoothed
// multinomial over exact character 1-4-grams; the second is a one-layer
// softmax over hashed character 2-5-gram counts. Independence of their
// error modes is what makes label agreement informative.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "geoclean/document.hpp"

namespace geoclean {

enum class LidKind : uint8_t { bayes = 0, linear = 1 };

LidKind parse_lid_kind(std::string_view name);

struct LabeledLine {
    std::string language;  // ISO 639-3, lowercase
    std::string text;
};

// Two-column TSV `language<TAB>text`, one line per sample.
std::vector<LabeledLine> load_labeled_tsv(const std::filesystem::path& path);

struct BayesConfig {
    uint32_t ngram_min = 1;
    uint32_t ngram_max = 4;
    double smoothing = 0.1;
};

struct LinearConfig {
    uint32_t ngram_min = 2;
    uint32_t ngram_max = 5;
    uint64_t buckets = 1ull << 18;
    uint32_t epochs = 5;
    double lr0 = 0.5;  // decays linearly to zero over all updates
    uint64_t seed = 1;
};

struct LidConfig {
    BayesConfig bayes;
    LinearConfig linear;
};

struct LidModel {
    LidKind kind = LidKind::bayes;
    std::vector<std::string> languages;  // sorted; index is the class id

    // bayes parameters
    BayesConfig bayes_config;
    std::vector<std::map<std::string, uint64_t>> ngram_counts;  // per language
    std::vector<uint64_t> ngram_totals;                         // per language
    std::vector<double> log_prior;                              // per language
    uint64_t vocabulary_size = 0;  // distinct n-grams across all languages

    // linear parameters
    LinearConfig linear_config;
    std::vector<std::vector<double>> weights;  // per language, one row of `buckets` entries
};

struct LidTrainStats {
    uint64_t used_lines = 0;
    uint64_t skipped_empty = 0;
};

// Trains one model. Needs at least two languages; empty lines are
// skipped and counted.
LidModel train_lid(LidKind kind, const std::vector<LabeledLine>& data, const LidConfig& config,
                   LidTrainStats* stats = nullptr);

struct Prediction {
    std::string language;
    double score = 0.0;
};

// Argmax language with lexicographic tie-break. Text empty after
// trimming is a data error.
Prediction predict_language(const LidModel& model, std::string_view text);

struct LidEvaluation {
    std::map<std::string, double> per_language;  // accuracy per language present in heldout
    double macro = 0.0;                          // unweighted mean of per_language
    std::vector<std::string> absent_languages;   // model languages missing from heldout
};

LidEvaluation evaluate_lid(const LidModel& model, const std::vector<LabeledLine>& heldout);

struct AgreementCounts {
    uint64_t agreeing = 0;
    uint64_t total = 0;

    double rate() const { return total == 0 ? 0.0 : static_cast<double>(agreeing) / total; }
};

struct AgreementReport {
    std::map<std::string, AgreementCounts> per_country;
    std::map<std::string, AgreementCounts> per_language;  // keyed by label_a
    uint64_t kept_count = 0;     // both labels equal
    uint64_t dropped_count = 0;  // labels disagree
    uint64_t failed_count = 0;   // prediction impossible (e.g. empty text)
};

struct DroppedDocRecord {
    std::string id;
    std::string label_a;  // empty when prediction failed
    std::string label_b;
    std::string reason;  // "disagreement" or "predict-failed"
};

struct AgreementResult {
    std::vector<Document> kept;  // subsequence of input, labels filled in
    AgreementReport report;
    std::vector<DroppedDocRecord> dropped;
};

// Labels every document with both models and keeps it only when the
// labels agree. Documents that cannot be predicted are dropped and
// counted separately.
AgreementResult agreement_filter(const std::vector<Document>& docs, const LidModel& model_a,
                                 const LidModel& model_b);

// Versioned binary container, magic GEOLID1.
std::string serialize_lid(const LidModel& model);
LidModel deserialize_lid(std::string_view bytes);
void save_lid(const LidModel& model, const std::filesystem::path& path);
LidModel load_lid(const std::filesystem::path& path);

}  // namespace geoclean
