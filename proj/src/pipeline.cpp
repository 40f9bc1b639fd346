#include "geoclean/pipeline.hpp"

#include <json.hpp>

#include <cerrno>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <unordered_set>

#include "geoclean/common.hpp"
#include "geoclean/dedup.hpp"
#include "geoclean/rng.hpp"

namespace geoclean {

namespace {

const std::map<std::string, std::string>& default_values() {
    static const std::map<std::string, std::string> defaults = {
        {"input", ""},
        {"input_format", "jsonl"},
        {"region_map", "data/regions.csv"},
        {"output_dir", "out"},
        {"timestamp", ""},  // empty: stamp manifests with the wall clock
        {"seed", "1"},
        {"lid_train", ""},
        {"lid_bayes_ngram_min", "1"},
        {"lid_bayes_ngram_max", "4"},
        {"lid_bayes_smoothing", "0.1"},
        {"lid_linear_ngram_min", "2"},
        {"lid_linear_ngram_max", "5"},
        {"lid_linear_buckets", "262144"},
        {"lid_linear_epochs", "5"},
        {"lid_linear_lr", "0.5"},
        {"dedup_scope", "subcorpus"},
        {"outlier_min_train_words", "5000000"},
        {"outlier_dim", "100"},
        {"outlier_window", "5"},
        {"outlier_ngram_min", "3"},
        {"outlier_ngram_max", "6"},
        {"outlier_epochs", "2"},
        {"outlier_negatives", "5"},
        {"outlier_min_count", "1"},
        {"outlier_buckets", "2097152"},
        {"outlier_lr", "0.05"},
        {"outlier_threshold", "3"},
        {"sim_chunk_words", "10000"},
        {"sim_max_chunks", "500"},
        {"sim_ngram", "3"},
        {"sim_top_k", "5000"},
        {"sim_n_pairs", "500"},
    };
    return defaults;
}

std::vector<std::string> stage_relevant_keys(const std::string& stage) {
    if (stage == "4.3") return {"input", "input_format", "region_map"};
    if (stage == "5.0")
        return {"seed",
                "lid_train",
                "lid_bayes_ngram_min",
                "lid_bayes_ngram_max",
                "lid_bayes_smoothing",
                "lid_linear_ngram_min",
                "lid_linear_ngram_max",
                "lid_linear_buckets",
                "lid_linear_epochs",
                "lid_linear_lr"};
    if (stage == "5.1") return {"dedup_scope"};
    if (stage == "5.2")
        return {"seed", "outlier_min_train_words", "outlier_dim", "outlier_window",
                "outlier_ngram_min", "outlier_ngram_max", "outlier_epochs", "outlier_negatives",
                "outlier_min_count", "outlier_buckets", "outlier_lr", "outlier_threshold"};
    throw ConfigError("unknown stage '" + stage + "'");
}

size_t stage_index(const std::string& stage) {
    for (size_t i = 0; i < kStages.size(); ++i)
        if (kStages[i] == stage) return i;
    throw ConfigError("unknown stage '" + stage + "' (expected one of 4.3, 5.0, 5.1, 5.2)");
}

}  // namespace

PipelineConfig PipelineConfig::defaults() {
    PipelineConfig cfg;
    cfg.values_ = default_values();
    return cfg;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown configuration key '" + key + "'");
    it->second = value;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path,
                                    const std::vector<std::string>& overrides) {
    PipelineConfig cfg = defaults();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open configuration file " + path.string());
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view sv = trim_view(line);
        if (sv.empty() || sv.front() == '#') continue;
        size_t eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(strf("%s:%zu: expected 'key = value'", path.string().c_str(), line_no));
        std::string key = trim(sv.substr(0, eq));
        std::string value = trim(sv.substr(eq + 1));
        try {
            cfg.set(key, value);
        } catch (const ConfigError&) {
            throw ConfigError(strf("%s:%zu: unknown configuration key '%s'",
                                   path.string().c_str(), line_no, key.c_str()));
        }
    }
    for (const std::string& ov : overrides) {
        size_t eq = ov.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override '" + ov + "' is not of the form key=value");
        cfg.set(trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
    }
    return cfg;
}

PipelineConfig PipelineConfig::from_overrides(const std::vector<std::string>& overrides) {
    PipelineConfig cfg = defaults();
    for (const std::string& ov : overrides) {
        size_t eq = ov.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override '" + ov + "' is not of the form key=value");
        cfg.set(trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
    }
    return cfg;
}

const std::string& PipelineConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown configuration key '" + key + "'");
    return it->second;
}

uint64_t PipelineConfig::get_u64(const std::string& key) const {
    const std::string& v = get(key);
    errno = 0;
    char* end = nullptr;
    unsigned long long parsed = std::strtoull(v.c_str(), &end, 10);
    if (v.empty() || errno != 0 || end != v.c_str() + v.size())
        throw ConfigError("configuration key '" + key + "' is not a non-negative integer: '" + v + "'");
    return parsed;
}

double PipelineConfig::get_double(const std::string& key) const {
    const std::string& v = get(key);
    errno = 0;
    char* end = nullptr;
    double parsed = std::strtod(v.c_str(), &end);
    if (v.empty() || errno != 0 || end != v.c_str() + v.size())
        throw ConfigError("configuration key '" + key + "' is not a number: '" + v + "'");
    return parsed;
}

std::string PipelineConfig::stage_hash(const std::string& stage) const {
    std::string upstream;
    const size_t idx = stage_index(stage);
    if (idx > 0) upstream = stage_hash(kStages[idx - 1]);
    std::string payload = "stage:" + stage + "\nup:" + upstream + "\n";
    for (const std::string& key : stage_relevant_keys(stage))
        payload += key + "=" + get(key) + "\n";
    return hash_sample(payload).hex();
}

LidConfig lid_config_from(const PipelineConfig& config) {
    LidConfig lid;
    lid.bayes.ngram_min = static_cast<uint32_t>(config.get_u64("lid_bayes_ngram_min"));
    lid.bayes.ngram_max = static_cast<uint32_t>(config.get_u64("lid_bayes_ngram_max"));
    lid.bayes.smoothing = config.get_double("lid_bayes_smoothing");
    lid.linear.ngram_min = static_cast<uint32_t>(config.get_u64("lid_linear_ngram_min"));
    lid.linear.ngram_max = static_cast<uint32_t>(config.get_u64("lid_linear_ngram_max"));
    lid.linear.buckets = config.get_u64("lid_linear_buckets");
    lid.linear.epochs = static_cast<uint32_t>(config.get_u64("lid_linear_epochs"));
    lid.linear.lr0 = config.get_double("lid_linear_lr");
    lid.linear.seed = mix_seed(config.get_u64("seed"), "lid-linear");
    if (lid.bayes.ngram_min == 0 || lid.bayes.ngram_min > lid.bayes.ngram_max)
        throw ConfigError("invalid bayes n-gram range");
    if (lid.linear.ngram_min == 0 || lid.linear.ngram_min > lid.linear.ngram_max)
        throw ConfigError("invalid linear n-gram range");
    if (lid.linear.buckets == 0) throw ConfigError("lid_linear_buckets must be positive");
    return lid;
}

SkipGramConfig skipgram_config_from(const PipelineConfig& config) {
    SkipGramConfig sg;
    sg.dim = static_cast<uint32_t>(config.get_u64("outlier_dim"));
    sg.window = static_cast<uint32_t>(config.get_u64("outlier_window"));
    sg.ngram_min = static_cast<uint32_t>(config.get_u64("outlier_ngram_min"));
    sg.ngram_max = static_cast<uint32_t>(config.get_u64("outlier_ngram_max"));
    sg.epochs = static_cast<uint32_t>(config.get_u64("outlier_epochs"));
    sg.negatives = static_cast<uint32_t>(config.get_u64("outlier_negatives"));
    sg.min_count = static_cast<uint32_t>(config.get_u64("outlier_min_count"));
    sg.buckets = config.get_u64("outlier_buckets");
    sg.lr0 = config.get_double("outlier_lr");
    sg.seed = config.get_u64("seed");
    sg.min_train_words = config.get_u64("outlier_min_train_words");
    if (sg.dim == 0 || sg.window == 0 || sg.epochs == 0 || sg.buckets == 0)
        throw ConfigError("outlier_dim, outlier_window, outlier_epochs, outlier_buckets must be positive");
    if (sg.ngram_min == 0 || sg.ngram_min > sg.ngram_max)
        throw ConfigError("invalid outlier n-gram range");
    return sg;
}

DistributionParams distribution_params_from(const PipelineConfig& config) {
    DistributionParams p;
    p.chunk_words = config.get_u64("sim_chunk_words");
    p.max_chunks = config.get_u64("sim_max_chunks");
    p.n = static_cast<uint32_t>(config.get_u64("sim_ngram"));
    p.top_k = static_cast<uint32_t>(config.get_u64("sim_top_k"));
    p.n_pairs = config.get_u64("sim_n_pairs");
    p.seed = config.get_u64("seed");
    return p;
}

uint64_t StageManifest::total_docs() const {
    uint64_t t = 0;
    for (const auto& [_, cell] : per_subcorpus) t += cell.docs;
    return t;
}

uint64_t StageManifest::total_samples() const {
    uint64_t t = 0;
    for (const auto& [_, cell] : per_subcorpus) t += cell.samples;
    return t;
}

uint64_t StageManifest::total_words() const {
    uint64_t t = 0;
    for (const auto& [_, cell] : per_subcorpus) t += cell.words;
    return t;
}

std::string StageManifest::to_json() const {
    nlohmann::json j;
    j["stage"] = stage;
    j["created_at"] = created_at;
    j["config_hash"] = config_hash;
    j["config"] = config;
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [key, cell] : per_subcorpus) {
        nlohmann::json c;
        c["docs"] = cell.docs;
        c["samples"] = cell.samples;
        c["words"] = cell.words;
        c["flags"] = cell.flags;
        per[key.str()] = c;
    }
    j["per_subcorpus"] = per;
    j["totals"] = {{"docs", total_docs()}, {"samples", total_samples()}, {"words", total_words()}};
    return j.dump(2) + "\n";
}

StageManifest StageManifest::from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid manifest JSON: ") + e.what());
    }
    StageManifest m;
    m.stage = j.at("stage").get<std::string>();
    m.created_at = j.at("created_at").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    for (const auto& [key_str, c] : j.at("per_subcorpus").items()) {
        size_t comma = key_str.find(',');
        if (comma == std::string::npos)
            throw DataError("manifest sub-corpus key '" + key_str + "' is not 'language,country'");
        SubCorpusKey key{key_str.substr(0, comma), key_str.substr(comma + 1)};
        SubcorpusCell cell;
        cell.docs = c.at("docs").get<uint64_t>();
        cell.samples = c.at("samples").get<uint64_t>();
        cell.words = c.at("words").get<uint64_t>();
        for (const auto& f : c.at("flags")) cell.flags.insert(f.get<std::string>());
        m.per_subcorpus[key] = cell;
    }
    return m;
}

std::filesystem::path stage_dir(const std::filesystem::path& output_dir, const std::string& stage) {
    return output_dir / ("stage_" + stage);
}

std::vector<Document> load_stage_documents(const std::filesystem::path& output_dir,
                                           const std::string& stage) {
    ParseReport report;
    std::vector<Document> docs =
        parse_documents_file(stage_dir(output_dir, stage) / "documents.jsonl", InputFormat::jsonl,
                             report);
    if (!report.errors.empty())
        throw DataError(strf("stage %s documents are corrupt: %zu parse errors, first at line %zu: %s",
                             stage.c_str(), report.errors.size(), report.errors[0].line,
                             report.errors[0].message.c_str()));
    return docs;
}

namespace {

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
}

StageManifest build_manifest(const std::string& stage, const std::string& created_at,
                             const std::string& config_hash,
                             const std::map<std::string, std::string>& config_echo,
                             const std::vector<Document>& docs,
                             const std::map<SubCorpusKey, std::set<std::string>>& flags = {}) {
    StageManifest m;
    m.stage = stage;
    m.created_at = created_at;
    m.config_hash = config_hash;
    m.config = config_echo;
    for (const Document& doc : docs) {
        SubcorpusCell& cell = m.per_subcorpus[subcorpus_of(doc)];
        ++cell.docs;
        cell.samples += segment_text(doc.text).size();
        cell.words += doc.word_count;
    }
    for (const auto& [key, fl] : flags) {
        if (fl.empty()) continue;
        m.per_subcorpus[key].flags.insert(fl.begin(), fl.end());
    }
    return m;
}

void write_documents(const std::filesystem::path& dir, const std::vector<Document>& docs) {
    std::string out;
    for (const Document& doc : docs) {
        out += serialize_document(doc);
        out.push_back('\n');
    }
    atomic_write_file(dir / "documents.jsonl", out);
}

// A stage directory is valid only once its manifest exists; dropping the
// manifest before rewriting artifacts keeps interrupted runs safe.
struct StageWriter {
    std::filesystem::path dir;

    explicit StageWriter(const std::filesystem::path& d) : dir(d) {
        std::filesystem::create_directories(dir);
        std::filesystem::remove(dir / "manifest.json");
    }

    void finish(const StageManifest& manifest) const {
        atomic_write_file(dir / "manifest.json", manifest.to_json());
    }
};

std::optional<StageManifest> try_resume(const std::filesystem::path& output_dir,
                                        const std::string& stage,
                                        const std::string& expected_hash) {
    const std::filesystem::path path = stage_dir(output_dir, stage) / "manifest.json";
    if (!std::filesystem::exists(path)) return std::nullopt;
    StageManifest manifest;
    try {
        manifest = StageManifest::from_json(read_file(path));
    } catch (const DataError&) {
        return std::nullopt;  // unreadable manifest: treat the stage as invalid
    }
    if (manifest.config_hash != expected_hash) return std::nullopt;
    return manifest;
}

std::string tsv_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '\t' || c == '\n' || c == '\r')
            out.push_back(' ');
        else
            out.push_back(c);
    }
    return out;
}

}  // namespace

std::string agreement_report_json(const AgreementReport& report) {
    nlohmann::json j;
    j["kept_count"] = report.kept_count;
    j["dropped_count"] = report.dropped_count;
    j["failed_count"] = report.failed_count;
    auto dump_counts = [](const std::map<std::string, AgreementCounts>& m) {
        nlohmann::json out = nlohmann::json::object();
        for (const auto& [k, c] : m) out[k] = {{"agreeing", c.agreeing}, {"total", c.total}};
        return out;
    };
    j["per_country"] = dump_counts(report.per_country);
    j["per_language"] = dump_counts(report.per_language);
    return j.dump(2) + "\n";
}

AgreementReport agreement_report_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid agreement report JSON: ") + e.what());
    }
    AgreementReport report;
    report.kept_count = j.at("kept_count").get<uint64_t>();
    report.dropped_count = j.at("dropped_count").get<uint64_t>();
    report.failed_count = j.at("failed_count").get<uint64_t>();
    auto load_counts = [](const nlohmann::json& m) {
        std::map<std::string, AgreementCounts> out;
        for (const auto& [k, c] : m.items())
            out[k] = AgreementCounts{c.at("agreeing").get<uint64_t>(), c.at("total").get<uint64_t>()};
        return out;
    };
    report.per_country = load_counts(j.at("per_country"));
    report.per_language = load_counts(j.at("per_language"));
    return report;
}

PipelineResult run_pipeline(const PipelineConfig& config, const std::string& through_stage,
                            bool write_reports) {
    const size_t last_stage = stage_index(through_stage);
    if (config.get("input").empty()) throw ConfigError("configuration key 'input' is not set");
    const InputFormat format = parse_input_format(config.get("input_format"));
    load_region_map(config.get("region_map"));  // fail fast on a bad region table
    const std::filesystem::path output_dir = config.get("output_dir");
    std::filesystem::create_directories(output_dir);
    const std::string created_at =
        config.get("timestamp").empty() ? utc_now() : config.get("timestamp");
    const auto& config_echo = config.values();

    PipelineResult result;
    result.output_dir = output_dir;
    std::vector<Document> docs;

    // stage 4.3: ingest
    {
        const std::string hash = config.stage_hash("4.3");
        if (auto resumed = try_resume(output_dir, "4.3", hash)) {
            result.manifests.push_back(std::move(*resumed));
            docs = load_stage_documents(output_dir, "4.3");
        } else {
            StageWriter writer(stage_dir(output_dir, "4.3"));
            nlohmann::json parse_json = nlohmann::json::array();
            size_t total_errors = 0;
            std::unordered_set<std::string> corpus_ids;
            for (const std::string& path : split(config.get("input"), ',')) {
                ParseReport report;
                std::vector<Document> file_docs = parse_documents_file(trim(path), format, report);
                for (Document& doc : file_docs) {
                    if (!corpus_ids.insert(doc.id).second) {
                        report.errors.push_back(
                            ParseIssue{0, "id '" + doc.id + "' already used by an earlier input file"});
                        continue;
                    }
                    docs.push_back(std::move(doc));
                }
                nlohmann::json errors = nlohmann::json::array();
                for (const ParseIssue& e : report.errors)
                    errors.push_back({{"line", e.line}, {"message", e.message}});
                parse_json.push_back({{"path", trim(path)},
                                      {"total_lines", report.total_lines},
                                      {"parsed", report.parsed},
                                      {"errors", errors}});
                total_errors += report.errors.size();
            }
            write_documents(writer.dir, docs);
            atomic_write_file(writer.dir / "parse_report.json",
                              nlohmann::json{{"files", parse_json}, {"total_errors", total_errors}}
                                      .dump(2) +
                                  "\n");
            StageManifest manifest = build_manifest("4.3", created_at, hash, config_echo, docs);
            writer.finish(manifest);
            result.manifests.push_back(std::move(manifest));
        }
    }
    if (last_stage == 0) return result;

    // stage 5.0: dual-model label agreement
    {
        const std::string hash = config.stage_hash("5.0");
        if (auto resumed = try_resume(output_dir, "5.0", hash)) {
            result.manifests.push_back(std::move(*resumed));
            docs = load_stage_documents(output_dir, "5.0");
        } else {
            if (config.get("lid_train").empty())
                throw ConfigError("configuration key 'lid_train' is not set");
            const LidConfig lid_cfg = lid_config_from(config);
            const std::vector<LabeledLine> train_lines = load_labeled_tsv(config.get("lid_train"));
            const LidModel model_a = train_lid(LidKind::bayes, train_lines, lid_cfg);
            const LidModel model_b = train_lid(LidKind::linear, train_lines, lid_cfg);
            std::filesystem::create_directories(output_dir / "models");
            save_lid(model_a, output_dir / "models" / "lid_bayes.bin");
            save_lid(model_b, output_dir / "models" / "lid_linear.bin");

            StageWriter writer(stage_dir(output_dir, "5.0"));
            AgreementResult agreement = agreement_filter(docs, model_a, model_b);
            docs = std::move(agreement.kept);
            write_documents(writer.dir, docs);
            std::string removed = "doc_id\tlabel_a\tlabel_b\treason\n";
            for (const DroppedDocRecord& d : agreement.dropped)
                removed += tsv_escape(d.id) + "\t" + d.label_a + "\t" + d.label_b + "\t" + d.reason + "\n";
            atomic_write_file(writer.dir / "removed_docs.tsv", removed);
            atomic_write_file(writer.dir / "agreement_report.json",
                              agreement_report_json(agreement.report));
            StageManifest manifest = build_manifest("5.0", created_at, hash, config_echo, docs);
            writer.finish(manifest);
            result.manifests.push_back(std::move(manifest));
        }
    }
    if (last_stage == 1) return result;

    // stage 5.1: exact deduplication
    {
        const std::string hash = config.stage_hash("5.1");
        if (auto resumed = try_resume(output_dir, "5.1", hash)) {
            result.manifests.push_back(std::move(*resumed));
            docs = load_stage_documents(output_dir, "5.1");
        } else {
            const std::string scope = config.get("dedup_scope");
            if (scope != "subcorpus" && scope != "global")
                throw ConfigError("dedup_scope must be 'subcorpus' or 'global'");

            std::map<std::string, std::vector<Sample>> groups;
            for (const Document& doc : docs) {
                std::string group = scope == "global" ? std::string("global")
                                                      : subcorpus_of(doc).str();
                for (Sample& s : segment_samples(doc)) groups[group].push_back(std::move(s));
            }

            std::set<std::pair<std::string, uint32_t>> removed_keys;
            std::string removed_samples_tsv = "parent_id\tindex\tdigest_hex\n";
            nlohmann::json stats_json = nlohmann::json::object();
            for (const auto& [group, samples] : groups) {
                DedupResult res = dedup_samples(samples);
                for (const RemovedSample& r : res.removed) {
                    removed_keys.insert({r.parent_id, r.index});
                    removed_samples_tsv +=
                        tsv_escape(r.parent_id) + "\t" + std::to_string(r.index) + "\t" + r.digest_hex + "\n";
                }
                stats_json[group] = {{"input_samples", res.stats.input_samples},
                                     {"kept_samples", res.stats.kept_samples},
                                     {"removed_samples", res.stats.removed_samples},
                                     {"removed_words", res.stats.removed_words},
                                     {"distinct_collision_groups", res.stats.distinct_collision_groups}};
            }

            StageWriter writer(stage_dir(output_dir, "5.1"));
            std::vector<Document> surviving;
            std::string removed_docs_tsv = "doc_id\treason\n";
            for (Document& doc : docs) {
                std::vector<Sample> samples = segment_samples(doc);
                std::string text;
                size_t kept_here = 0;
                for (const Sample& s : samples) {
                    if (removed_keys.count({s.parent_id, s.index})) continue;
                    if (!text.empty()) text.push_back('\n');
                    text += s.text;
                    ++kept_here;
                }
                if (!samples.empty() && kept_here == 0) {
                    removed_docs_tsv += tsv_escape(doc.id) + "\tall-samples-duplicated\n";
                    continue;
                }
                doc.text = std::move(text);
                doc.word_count = count_words(doc.text);
                surviving.push_back(std::move(doc));
            }
            docs = std::move(surviving);
            write_documents(writer.dir, docs);
            atomic_write_file(writer.dir / "removed_samples.tsv", removed_samples_tsv);
            atomic_write_file(writer.dir / "removed_docs.tsv", removed_docs_tsv);
            atomic_write_file(writer.dir / "dedup_stats.json", stats_json.dump(2) + "\n");
            StageManifest manifest = build_manifest("5.1", created_at, hash, config_echo, docs);
            writer.finish(manifest);
            result.manifests.push_back(std::move(manifest));
        }
    }
    if (last_stage == 2) return result;

    // stage 5.2: per-sub-corpus outlier filtering
    {
        const std::string hash = config.stage_hash("5.2");
        if (auto resumed = try_resume(output_dir, "5.2", hash)) {
            result.manifests.push_back(std::move(*resumed));
            docs = load_stage_documents(output_dir, "5.2");
        } else {
            const SkipGramConfig sg_cfg = skipgram_config_from(config);
            const double threshold = config.get_double("outlier_threshold");

            std::map<SubCorpusKey, std::vector<size_t>> groups;
            for (size_t i = 0; i < docs.size(); ++i) groups[subcorpus_of(docs[i])].push_back(i);

            std::filesystem::create_directories(output_dir / "models");
            std::unordered_set<std::string> removed_ids;
            std::map<SubCorpusKey, std::set<std::string>> flags;
            std::string outliers_tsv = "doc_id\tx\tM\tside\n";
            std::string unscoreable_tsv = "doc_id\n";
            std::string removed_docs_tsv = "doc_id\treason\n";
            for (const auto& [key, members] : groups) {
                std::vector<std::string> sample_texts;
                std::vector<Document> group_docs;
                for (size_t i : members) {
                    group_docs.push_back(docs[i]);
                    for (Sample& s : segment_samples(docs[i])) sample_texts.push_back(std::move(s.text));
                }
                std::optional<SubwordSkipGramModel> model =
                    train_subword_skipgram(sample_texts, key, sg_cfg);
                if (!model) {
                    flags[key] = {"below-threshold", "unfiltered"};
                    continue;
                }
                save_skipgram(*model,
                              output_dir / "models" / ("sg_" + key.language + "_" + key.country + ".bin"));
                OutlierFilterResult filtered = filter_outliers(group_docs, *model, threshold);
                for (const OutlierRecord& rec : filtered.removed_log) {
                    removed_ids.insert(rec.doc_id);
                    outliers_tsv += tsv_escape(rec.doc_id) + "\t" + format_double(rec.x) + "\t" +
                                    format_double(rec.m) + "\t" + rec.side + "\n";
                    removed_docs_tsv +=
                        tsv_escape(rec.doc_id) + "\toutlier-" + rec.side + "\n";
                }
                for (const std::string& id : filtered.unscoreable_ids)
                    unscoreable_tsv += tsv_escape(id) + "\n";
            }

            StageWriter writer(stage_dir(output_dir, "5.2"));
            std::vector<Document> surviving;
            for (Document& doc : docs)
                if (!removed_ids.count(doc.id)) surviving.push_back(std::move(doc));
            docs = std::move(surviving);
            write_documents(writer.dir, docs);
            atomic_write_file(writer.dir / "outliers.tsv", outliers_tsv);
            atomic_write_file(writer.dir / "unscoreable.tsv", unscoreable_tsv);
            atomic_write_file(writer.dir / "removed_docs.tsv", removed_docs_tsv);
            StageManifest manifest =
                build_manifest("5.2", created_at, hash, config_echo, docs, flags);
            writer.finish(manifest);
            result.manifests.push_back(std::move(manifest));
        }
    }

    if (write_reports) write_pipeline_reports(config, result.manifests);
    return result;
}

void write_pipeline_reports(const PipelineConfig& config,
                            const std::vector<StageManifest>& manifests) {
    const RegionMap region_map = load_region_map(config.get("region_map"));
    const std::filesystem::path output_dir = config.get("output_dir");
    const std::filesystem::path reports = output_dir / "reports";
    std::filesystem::create_directories(reports);
    atomic_write_file(reports / "region_sizes.csv",
                      region_sizes_csv(report_region_sizes(manifests, region_map)));
    bool any_zero_stage = false;
    for (const StageManifest& m : manifests)
        if (m.total_words() == 0) any_zero_stage = true;
    if (!any_zero_stage)
        atomic_write_file(reports / "language_shares.csv",
                          language_shares_csv(report_language_shares(manifests)));
    try {
        atomic_write_file(reports / "stage_correlation.csv", stage_correlation_csv(manifests));
    } catch (const DataError&) {
        // fewer than two sub-corpora or constant word counts: correlation undefined
    }
    const std::filesystem::path agreement_path =
        stage_dir(output_dir, "5.0") / "agreement_report.json";
    if (std::filesystem::exists(agreement_path))
        atomic_write_file(
            reports / "agreement_by_country.csv",
            agreement_by_country_csv(agreement_report_from_json(read_file(agreement_path))));
}

std::vector<RegionSizesRow> report_region_sizes(const std::vector<StageManifest>& manifests,
                                                const RegionMap& region_map) {
    std::set<std::string> regions;
    for (const auto& [_, region] : region_map.entries) regions.insert(region);
    regions.insert(kUnknownRegion);

    std::map<std::string, std::vector<uint64_t>> by_region;
    for (const std::string& r : regions) by_region[r].assign(manifests.size(), 0);
    for (size_t si = 0; si < manifests.size(); ++si)
        for (const auto& [key, cell] : manifests[si].per_subcorpus)
            by_region[resolve_region(key.country, region_map)][si] += cell.words;

    std::vector<RegionSizesRow> rows;
    std::vector<uint64_t> totals(manifests.size(), 0);
    for (const auto& [region, words] : by_region) {
        rows.push_back(RegionSizesRow{region, words});
        for (size_t si = 0; si < words.size(); ++si) totals[si] += words[si];
    }
    rows.push_back(RegionSizesRow{"TOTAL", totals});
    return rows;
}

std::string region_sizes_csv(const std::vector<RegionSizesRow>& rows) {
    std::string out = "region";
    for (const std::string& stage : kStages) out += ",stage_" + stage;
    out.push_back('\n');
    for (const RegionSizesRow& row : rows) {
        out += "\"" + row.region + "\"";
        for (uint64_t w : row.words) out += "," + std::to_string(w);
        out.push_back('\n');
    }
    return out;
}

std::vector<LanguageShareRow> report_language_shares(const std::vector<StageManifest>& manifests) {
    std::vector<uint64_t> totals;
    for (const StageManifest& m : manifests) {
        if (m.total_words() == 0)
            throw DataError("language shares undefined: stage " + m.stage + " has zero words");
        totals.push_back(m.total_words());
    }

    std::map<std::string, std::vector<uint64_t>> by_language;
    for (size_t si = 0; si < manifests.size(); ++si)
        for (const auto& [key, cell] : manifests[si].per_subcorpus) {
            auto it = by_language.find(key.language);
            if (it == by_language.end())
                it = by_language.emplace(key.language, std::vector<uint64_t>(manifests.size(), 0)).first;
            it->second[si] += cell.words;
        }

    std::vector<LanguageShareRow> rows;
    for (const auto& [language, words] : by_language) {
        LanguageShareRow row;
        row.language = language;
        for (size_t si = 0; si < words.size(); ++si)
            row.share.push_back(100.0 * static_cast<double>(words[si]) /
                                static_cast<double>(totals[si]));
        row.change = row.share.back() - row.share.front();
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const LanguageShareRow& a, const LanguageShareRow& b) {
        if (a.change != b.change) return a.change > b.change;
        return a.language < b.language;
    });
    return rows;
}

std::string language_shares_csv(const std::vector<LanguageShareRow>& rows) {
    std::string out = "language";
    for (const std::string& stage : kStages) out += ",share_" + stage;
    out += ",change\n";
    for (const LanguageShareRow& row : rows) {
        out += row.language;
        for (double s : row.share) out += "," + format_double(s);
        out += "," + format_double(row.change) + "\n";
    }
    return out;
}

double report_stage_correlation(const StageManifest& a, const StageManifest& b) {
    std::set<SubCorpusKey> keys;
    for (const auto& [key, _] : a.per_subcorpus) keys.insert(key);
    for (const auto& [key, _] : b.per_subcorpus) keys.insert(key);
    if (keys.size() < 2)
        throw DataError("stage correlation needs at least two sub-corpora");
    std::vector<double> va, vb;
    for (const SubCorpusKey& key : keys) {
        auto ia = a.per_subcorpus.find(key);
        auto ib = b.per_subcorpus.find(key);
        va.push_back(ia == a.per_subcorpus.end() ? 0.0 : static_cast<double>(ia->second.words));
        vb.push_back(ib == b.per_subcorpus.end() ? 0.0 : static_cast<double>(ib->second.words));
    }
    try {
        return stats::pearson(va, vb);
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("stage correlation: ") + e.what());
    }
}

std::string stage_correlation_csv(const std::vector<StageManifest>& manifests) {
    std::string out = "pair,r\n";
    for (size_t i = 0; i + 1 < manifests.size(); ++i) {
        const double r = report_stage_correlation(manifests[i], manifests[i + 1]);
        out += manifests[i].stage + "->" + manifests[i + 1].stage + "," + format_double(r) + "\n";
    }
    return out;
}

std::string agreement_by_country_csv(const AgreementReport& report) {
    std::string out = "country,rate\n";
    for (const auto& [country, counts] : report.per_country) {
        if (counts.total == 0) continue;
        out += country + "," + format_double(counts.rate()) + "\n";
    }
    return out;
}

}  // namespace geoclean
