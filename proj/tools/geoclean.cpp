#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "geoclean/common.hpp"
#include "geoclean/pipeline.hpp"

namespace {

using namespace geoclean;

PipelineConfig make_config(const std::string& config_path, const std::vector<std::string>& sets) {
    if (config_path.empty()) return PipelineConfig::from_overrides(sets);
    return PipelineConfig::load(config_path, sets);
}

void print_stage_summary(const PipelineResult& result) {
    for (const StageManifest& m : result.manifests)
        std::printf("stage %s: %llu docs, %llu samples, %llu words (%zu sub-corpora)\n",
                    m.stage.c_str(), static_cast<unsigned long long>(m.total_docs()),
                    static_cast<unsigned long long>(m.total_samples()),
                    static_cast<unsigned long long>(m.total_words()), m.per_subcorpus.size());
}

void run_through(const PipelineConfig& config, const std::string& stage, bool reports) {
    PipelineResult result = run_pipeline(config, stage, reports);
    print_stage_summary(result);
    std::printf("output in %s\n", result.output_dir.string().c_str());
}

std::vector<Document> load_parsed_corpus(const std::string& path, const std::string& format) {
    ParseReport report;
    std::vector<Document> docs = parse_documents_file(path, parse_input_format(format), report);
    if (!report.errors.empty())
        throw DataError(strf("%s: %zu parse errors, first at line %zu: %s", path.c_str(),
                             report.errors.size(), report.errors[0].line,
                             report.errors[0].message.c_str()));
    return docs;
}

std::vector<std::string> corpus_sample_texts(const std::vector<Document>& docs) {
    std::vector<std::string> texts;
    for (const Document& doc : docs)
        for (Sample& s : segment_samples(doc)) texts.push_back(std::move(s.text));
    return texts;
}

std::vector<double> parse_ratio_list(const std::string& csv) {
    std::vector<double> ratios;
    for (const std::string& part : split(csv, ',')) {
        const std::string v = trim(part);
        errno = 0;
        char* end = nullptr;
        double r = std::strtod(v.c_str(), &end);
        if (v.empty() || errno != 0 || end != v.c_str() + v.size())
            throw ConfigError("--ratios entry is not a number: '" + v + "'");
        ratios.push_back(r);
    }
    return ratios;
}

void cmd_train_lid(const PipelineConfig& config, const std::string& kind, const std::string& data,
                   const std::string& out) {
    LidTrainStats stats;
    const LidModel model =
        train_lid(parse_lid_kind(kind), load_labeled_tsv(data), lid_config_from(config), &stats);
    save_lid(model, out);
    std::printf("trained %s model on %llu lines (%zu languages, %llu empty lines skipped) -> %s\n",
                kind.c_str(), static_cast<unsigned long long>(stats.used_lines),
                model.languages.size(), static_cast<unsigned long long>(stats.skipped_empty),
                out.c_str());
}

void cmd_train_outlier(const PipelineConfig& config) {
    PipelineResult result = run_pipeline(config, "5.1", false);
    const std::vector<Document> docs = load_stage_documents(result.output_dir, "5.1");
    const SkipGramConfig sg_cfg = skipgram_config_from(config);

    std::map<SubCorpusKey, std::vector<std::string>> groups;
    for (const Document& doc : docs)
        for (Sample& s : segment_samples(doc))
            groups[subcorpus_of(doc)].push_back(std::move(s.text));

    std::filesystem::create_directories(result.output_dir / "models");
    for (const auto& [key, texts] : groups) {
        std::optional<SubwordSkipGramModel> model = train_subword_skipgram(texts, key, sg_cfg);
        if (!model) {
            std::printf("%s: below training threshold, no model\n", key.str().c_str());
            continue;
        }
        const std::filesystem::path path =
            result.output_dir / "models" / ("sg_" + key.language + "_" + key.country + ".bin");
        save_skipgram(*model, path);
        std::printf("%s: model -> %s\n", key.str().c_str(), path.string().c_str());
    }
}

void cmd_similarity(const PipelineConfig& config, const std::string& benchmark,
                    const std::string& benchmark_format, const std::string& language,
                    const std::string& country) {
    const std::filesystem::path output_dir = config.get("output_dir");
    const DistributionParams params = distribution_params_from(config);
    const std::vector<std::string> bench_samples =
        corpus_sample_texts(load_parsed_corpus(benchmark, benchmark_format));
    const std::string bench_id = std::filesystem::path(benchmark).stem().string();

    std::vector<SimilarityDistribution> groups;
    for (const std::string& stage : kStages) {
        std::vector<Document> pool;
        for (Document& doc : load_stage_documents(output_dir, stage)) {
            // documents are unlabeled until stage 5.0, so "und" docs in the
            // right country belong to the tracked pool at early stages
            const std::string lang = doc.language();
            if (lang != language && lang != "und") continue;
            if (!country.empty() && doc.country != country) continue;
            pool.push_back(std::move(doc));
        }
        if (pool.empty())
            throw DataError("stage " + stage + " has no documents for the requested sub-corpus");
        groups.push_back(
            stage_distribution(corpus_sample_texts(pool), bench_samples, params, stage, bench_id));
    }

    std::string selector = language;
    if (!country.empty()) selector += "_" + country;
    const std::filesystem::path reports = output_dir / "reports";
    std::filesystem::create_directories(reports);
    const std::filesystem::path csv_path =
        reports / ("similarity_" + selector + "_vs_" + bench_id + ".csv");
    const std::filesystem::path anova_path =
        reports / ("anova_" + selector + "_vs_" + bench_id + ".json");
    atomic_write_file(csv_path, distributions_csv(groups));
    atomic_write_file(anova_path, anova_json(anova(groups)));
    std::printf("distributions -> %s\nanova -> %s\n", csv_path.string().c_str(),
                anova_path.string().c_str());
}

void cmd_eval_noise(const PipelineConfig& config, const std::string& language,
                    const std::string& country, const std::string& donor_path,
                    const std::string& ratios_csv, size_t sample_size) {
    const std::filesystem::path output_dir = config.get("output_dir");
    const SubCorpusKey key{language, country};

    std::vector<Document> pool;
    for (Document& doc : load_stage_documents(output_dir, "5.1"))
        if (subcorpus_of(doc) == key) pool.push_back(std::move(doc));
    if (pool.empty()) throw DataError("stage 5.1 has no documents for sub-corpus " + key.str());

    const std::filesystem::path model_path =
        output_dir / "models" / ("sg_" + language + "_" + country + ".bin");
    SubwordSkipGramModel model = [&] {
        if (std::filesystem::exists(model_path)) return load_skipgram(model_path);
        std::optional<SubwordSkipGramModel> trained =
            train_subword_skipgram(corpus_sample_texts(pool), key, skipgram_config_from(config));
        if (!trained)
            throw DataError("sub-corpus " + key.str() +
                            " is below outlier_min_train_words; lower the threshold to evaluate");
        return std::move(*trained);
    }();

    std::vector<std::string> donor_lexicon;
    for (const std::string& tok : tokenize(read_file(donor_path))) donor_lexicon.push_back(tok);

    const NoiseCurve curve =
        evaluate_noise_detection(pool, model, donor_lexicon, parse_ratio_list(ratios_csv),
                                 sample_size, config.get_u64("seed"),
                                 config.get_double("outlier_threshold"));

    std::string csv = "ratio,accuracy\n";
    for (const auto& [ratio, accuracy] : curve.points)
        csv += format_double(ratio) + "," + format_double(accuracy) + "\n";
    const std::filesystem::path reports = output_dir / "reports";
    std::filesystem::create_directories(reports);
    const std::filesystem::path csv_path =
        reports / ("noise_curve_" + language + "_" + country + ".csv");
    atomic_write_file(csv_path, csv);
    std::fputs(csv.c_str(), stdout);
    std::printf("curve -> %s\n", csv_path.string().c_str());
}

void cmd_report(const PipelineConfig& config) {
    const std::filesystem::path output_dir = config.get("output_dir");
    std::vector<StageManifest> manifests;
    for (const std::string& stage : kStages) {
        const std::filesystem::path path = stage_dir(output_dir, stage) / "manifest.json";
        if (!std::filesystem::exists(path))
            throw DataError("stage " + stage + " has no manifest; run the pipeline first");
        manifests.push_back(StageManifest::from_json(read_file(path)));
    }
    write_pipeline_reports(config, manifests);
    std::printf("reports -> %s\n", (output_dir / "reports").string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geographic corpus cleaning pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "configuration file (key = value lines)");
    app.add_option("--set", sets, "configuration override key=value (repeatable)");

    auto add_stage_verb = [&](const std::string& name, const std::string& help,
                              const std::string& stage, bool reports) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->fallthrough();
        sub->callback([&, stage, reports] { run_through(make_config(config_path, sets), stage, reports); });
        return sub;
    };
    add_stage_verb("ingest", "parse inputs and materialize stage 4.3", "4.3", false);
    add_stage_verb("identify", "run through the label agreement filter (stage 5.0)", "5.0", false);
    add_stage_verb("dedup", "run through exact deduplication (stage 5.1)", "5.1", false);
    add_stage_verb("filter-outliers", "run through outlier filtering (stage 5.2)", "5.2", false);
    add_stage_verb("run", "run the full pipeline and write reports", "5.2", true);

    {
        CLI::App* sub = app.add_subcommand("report", "rebuild reports from completed stages");
        sub->fallthrough();
        sub->callback([&] { cmd_report(make_config(config_path, sets)); });
    }
    {
        CLI::App* sub = app.add_subcommand("train-lid", "train one language identification model");
        sub->fallthrough();
        auto kind = std::make_shared<std::string>();
        auto data = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        sub->add_option("--kind", *kind, "model kind: bayes or linear")->required();
        sub->add_option("--data", *data, "labeled training TSV (language<TAB>text)")->required();
        sub->add_option("--out", *out, "output model file")->required();
        sub->callback([&, kind, data, out] {
            cmd_train_lid(make_config(config_path, sets), *kind, *data, *out);
        });
    }
    {
        CLI::App* sub =
            app.add_subcommand("train-outlier", "train per-sub-corpus outlier models from stage 5.1");
        sub->fallthrough();
        sub->callback([&] { cmd_train_outlier(make_config(config_path, sets)); });
    }
    {
        CLI::App* sub = app.add_subcommand(
            "similarity", "score stage outputs against a benchmark corpus and run the anova");
        sub->fallthrough();
        auto benchmark = std::make_shared<std::string>();
        auto bench_format = std::make_shared<std::string>("jsonl");
        auto language = std::make_shared<std::string>();
        auto country = std::make_shared<std::string>();
        sub->add_option("--benchmark", *benchmark, "benchmark corpus file")->required();
        sub->add_option("--benchmark-format", *bench_format, "benchmark format: jsonl or tsv");
        sub->add_option("--language", *language, "language selector")->required();
        sub->add_option("--country", *country, "optional country selector");
        sub->callback([&, benchmark, bench_format, language, country] {
            cmd_similarity(make_config(config_path, sets), *benchmark, *bench_format, *language,
                           *country);
        });
    }
    {
        CLI::App* sub = app.add_subcommand(
            "eval-noise", "noise-injection detection curve for one sub-corpus");
        sub->fallthrough();
        auto language = std::make_shared<std::string>();
        auto country = std::make_shared<std::string>();
        auto donor = std::make_shared<std::string>();
        auto ratios = std::make_shared<std::string>("0.05,0.25,0.5,1");
        auto sample_size = std::make_shared<size_t>(200);
        sub->add_option("--language", *language, "sub-corpus language")->required();
        sub->add_option("--country", *country, "sub-corpus country")->required();
        sub->add_option("--donor", *donor, "donor lexicon text file")->required();
        sub->add_option("--ratios", *ratios, "comma-separated injection ratios, increasing");
        sub->add_option("--sample-size", *sample_size, "held-out documents per ratio");
        sub->callback([&, language, country, donor, ratios, sample_size] {
            cmd_eval_noise(make_config(config_path, sets), *language, *country, *donor, *ratios,
                           *sample_size);
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const geoclean::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 1;
    } catch (const geoclean::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
    return 0;
}
