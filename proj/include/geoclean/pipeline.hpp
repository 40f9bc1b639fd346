#pragma once

// Orchestration of the cleaning sequence 4.3 -> 5.0 -> 5.1 -> 5.2. Each
// stage materializes its documents, logs, and a manifest on disk; the
// manifest is written last, so a directory without one is an invalid
// stage and is recomputed. Completed stages whose config hash matches
// are reused as-is.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "geoclean/document.hpp"
#include "geoclean/ingest.hpp"
#include "geoclean/lid.hpp"
#include "geoclean/outlier.hpp"
#include "geoclean/similarity.hpp"

namespace geoclean {

inline const std::vector<std::string> kStages = {"4.3", "5.0", "5.1", "5.2"};

// Flat key-value configuration. Every key has a default; files and
// command-line overrides may only set known keys.
class PipelineConfig {
public:
    static PipelineConfig defaults();
    // `key = value` lines, '#' comments, blank lines ignored.
    static PipelineConfig load(const std::filesystem::path& path,
                               const std::vector<std::string>& overrides = {});
    static PipelineConfig from_overrides(const std::vector<std::string>& overrides);

    void set(const std::string& key, const std::string& value);

    const std::string& get(const std::string& key) const;
    uint64_t get_u64(const std::string& key) const;
    double get_double(const std::string& key) const;

    const std::map<std::string, std::string>& values() const { return values_; }

    // Hash of the configuration subset a stage depends on, chained with
    // the upstream stage's hash so changes propagate downstream.
    std::string stage_hash(const std::string& stage) const;

private:
    std::map<std::string, std::string> values_;
};

// Typed views of the configuration for the individual modules.
LidConfig lid_config_from(const PipelineConfig& config);
SkipGramConfig skipgram_config_from(const PipelineConfig& config);
DistributionParams distribution_params_from(const PipelineConfig& config);

struct SubcorpusCell {
    uint64_t docs = 0;
    uint64_t samples = 0;
    uint64_t words = 0;
    std::set<std::string> flags;  // subset of {"below-threshold", "unfiltered"}
};

struct StageManifest {
    std::string stage;
    std::string created_at;
    std::string config_hash;
    std::map<std::string, std::string> config;  // effective configuration echo
    std::map<SubCorpusKey, SubcorpusCell> per_subcorpus;

    uint64_t total_docs() const;
    uint64_t total_samples() const;
    uint64_t total_words() const;

    std::string to_json() const;
    static StageManifest from_json(std::string_view text);
};

struct PipelineResult {
    std::vector<StageManifest> manifests;  // one per completed stage, in order
    std::filesystem::path output_dir;
};

// Runs the pipeline up to and including through_stage (default "5.2"),
// reusing completed stages whose manifests carry the expected config
// hash. Reports are written when the final stage is reached and
// write_reports is set.
PipelineResult run_pipeline(const PipelineConfig& config, const std::string& through_stage = "5.2",
                            bool write_reports = true);

// Writes the report files under <output_dir>/reports from completed
// stage manifests. Reports whose inputs are undefined (an empty corpus,
// fewer than two sub-corpora) are skipped rather than failing the run.
void write_pipeline_reports(const PipelineConfig& config,
                            const std::vector<StageManifest>& manifests);

// Loads one stage's documents from its output directory.
std::vector<Document> load_stage_documents(const std::filesystem::path& output_dir,
                                           const std::string& stage);

std::filesystem::path stage_dir(const std::filesystem::path& output_dir, const std::string& stage);

// Report builders. All of them work from manifests alone.
struct RegionSizesRow {
    std::string region;
    std::vector<uint64_t> words;  // one entry per stage, in kStages order
};

std::vector<RegionSizesRow> report_region_sizes(const std::vector<StageManifest>& manifests,
                                                const RegionMap& region_map);
std::string region_sizes_csv(const std::vector<RegionSizesRow>& rows);

struct LanguageShareRow {
    std::string language;
    std::vector<double> share;  // percent per stage
    double change = 0.0;        // share(last) - share(first)
};

std::vector<LanguageShareRow> report_language_shares(const std::vector<StageManifest>& manifests);
std::string language_shares_csv(const std::vector<LanguageShareRow>& rows);

// Pearson correlation of per-sub-corpus word counts between two stages,
// aligned on the union of keys with missing entries as zero.
double report_stage_correlation(const StageManifest& a, const StageManifest& b);
std::string stage_correlation_csv(const std::vector<StageManifest>& manifests);

std::string agreement_by_country_csv(const AgreementReport& report);

// Serialization of the agreement report (written at stage 5.0, read back
// by the report step).
std::string agreement_report_json(const AgreementReport& report);
AgreementReport agreement_report_from_json(std::string_view text);

}  // namespace geoclean
