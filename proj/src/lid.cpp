#include "geoclean/lid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

#include "geoclean/binio.hpp"
#include "geoclean/common.hpp"
#include "geoclean/rng.hpp"
#include "geoclean/unicode.hpp"

namespace geoclean {

LidKind parse_lid_kind(std::string_view name) {
    if (name == "bayes") return LidKind::bayes;
    if (name == "linear") return LidKind::linear;
    throw ConfigError("unknown model kind '" + std::string(name) + "' (expected bayes or linear)");
}

std::vector<LabeledLine> load_labeled_tsv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open training data " + path.string());
    std::vector<LabeledLine> lines;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(strf("%s:%zu: expected 'language<TAB>text'", path.string().c_str(), line_no));
        lines.push_back(LabeledLine{lower_ascii(trim_view(line.substr(0, tab))), line.substr(tab + 1)});
    }
    return lines;
}

namespace {

// Appends all codepoint n-grams of the given length range, encoded back
// to UTF-8, to out.
void char_ngrams(std::string_view text, uint32_t nmin, uint32_t nmax,
                 std::vector<std::string>& out) {
    std::vector<uint32_t> cps = uni::decode_utf8(text);
    for (uint32_t n = nmin; n <= nmax; ++n) {
        if (cps.size() < n) break;
        for (size_t i = 0; i + n <= cps.size(); ++i) {
            std::string g;
            for (size_t k = 0; k < n; ++k) uni::append_utf8(g, cps[i + k]);
            out.push_back(std::move(g));
        }
    }
}

// Hashed, L2-normalized character-n-gram count vector used by the linear
// model. Returned sparse as bucket -> weight.
std::unordered_map<uint64_t, double> hashed_features(std::string_view text,
                                                     const LinearConfig& cfg) {
    std::vector<std::string> grams;
    char_ngrams(text, cfg.ngram_min, cfg.ngram_max, grams);
    std::unordered_map<uint64_t, double> feat;
    for (const std::string& g : grams) ++feat[fnv1a64(g) % cfg.buckets];
    double norm = 0.0;
    for (const auto& [_, v] : feat) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (auto& [_, v] : feat) v /= norm;
    return feat;
}

std::vector<std::string> sorted_languages(const std::vector<LabeledLine>& data) {
    std::set<std::string> langs;
    for (const LabeledLine& l : data) langs.insert(l.language);
    return std::vector<std::string>(langs.begin(), langs.end());
}

void train_bayes(LidModel& model, const std::vector<LabeledLine>& data, LidTrainStats& stats) {
    const size_t n_langs = model.languages.size();
    std::unordered_map<std::string, size_t> lang_index;
    for (size_t i = 0; i < n_langs; ++i) lang_index[model.languages[i]] = i;

    model.ngram_counts.assign(n_langs, {});
    model.ngram_totals.assign(n_langs, 0);
    std::vector<uint64_t> line_counts(n_langs, 0);
    std::set<std::string> vocabulary;

    std::vector<std::string> grams;
    for (const LabeledLine& l : data) {
        if (trim_view(l.text).empty()) {
            ++stats.skipped_empty;
            continue;
        }
        ++stats.used_lines;
        size_t li = lang_index.at(l.language);
        ++line_counts[li];
        grams.clear();
        char_ngrams(l.text, model.bayes_config.ngram_min, model.bayes_config.ngram_max, grams);
        for (std::string& g : grams) {
            vocabulary.insert(g);
            ++model.ngram_counts[li][std::move(g)];
        }
    }
    for (size_t li = 0; li < n_langs; ++li)
        for (const auto& [_, c] : model.ngram_counts[li]) model.ngram_totals[li] += c;

    model.vocabulary_size = vocabulary.size();
    model.log_prior.assign(n_langs, 0.0);
    uint64_t total_lines = 0;
    for (uint64_t c : line_counts) total_lines += c;
    if (total_lines == 0) throw DataError("no non-empty training lines");
    for (size_t li = 0; li < n_langs; ++li) {
        if (line_counts[li] == 0)
            throw DataError("language '" + model.languages[li] + "' has no non-empty training lines");
        model.log_prior[li] =
            std::log(static_cast<double>(line_counts[li]) / static_cast<double>(total_lines));
    }
}

void train_linear(LidModel& model, const std::vector<LabeledLine>& data, LidTrainStats& stats) {
    const LinearConfig& cfg = model.linear_config;
    const size_t n_langs = model.languages.size();
    std::unordered_map<std::string, size_t> lang_index;
    for (size_t i = 0; i < n_langs; ++i) lang_index[model.languages[i]] = i;

    struct Example {
        size_t gold;
        std::vector<std::pair<uint64_t, double>> features;
    };
    std::vector<Example> examples;
    for (const LabeledLine& l : data) {
        if (trim_view(l.text).empty()) {
            ++stats.skipped_empty;
            continue;
        }
        ++stats.used_lines;
        auto feat = hashed_features(l.text, cfg);
        Example ex;
        ex.gold = lang_index.at(l.language);
        ex.features.assign(feat.begin(), feat.end());
        // unordered_map iteration order is not pinned down; sort so the
        // update arithmetic is identical on every platform
        std::sort(ex.features.begin(), ex.features.end());
        examples.push_back(std::move(ex));
    }
    if (examples.empty()) throw DataError("no non-empty training lines");

    model.weights.assign(n_langs, std::vector<double>(cfg.buckets, 0.0));
    Rng rng(cfg.seed);
    std::vector<size_t> order(examples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    const uint64_t total_updates = static_cast<uint64_t>(cfg.epochs) * examples.size();
    uint64_t t = 0;
    std::vector<double> scores(n_langs);
    for (uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (size_t idx : order) {
            const Example& ex = examples[idx];
            const double lr =
                cfg.lr0 * (1.0 - static_cast<double>(t) / static_cast<double>(total_updates));
            ++t;
            // softmax cross-entropy, sparse gradient step
            double max_score = -1e300;
            for (size_t li = 0; li < n_langs; ++li) {
                double s = 0.0;
                for (const auto& [b, v] : ex.features) s += model.weights[li][b] * v;
                scores[li] = s;
                max_score = std::max(max_score, s);
            }
            double z = 0.0;
            for (size_t li = 0; li < n_langs; ++li) z += std::exp(scores[li] - max_score);
            for (size_t li = 0; li < n_langs; ++li) {
                const double p = std::exp(scores[li] - max_score) / z;
                const double g = lr * ((li == ex.gold ? 1.0 : 0.0) - p);
                if (g == 0.0) continue;
                for (const auto& [b, v] : ex.features) model.weights[li][b] += g * v;
            }
        }
    }
}

}  // namespace

LidModel train_lid(LidKind kind, const std::vector<LabeledLine>& data, const LidConfig& config,
                   LidTrainStats* stats_out) {
    LidModel model;
    model.kind = kind;
    model.bayes_config = config.bayes;
    model.linear_config = config.linear;
    model.languages = sorted_languages(data);
    if (model.languages.size() < 2)
        throw ConfigError(strf("training data has %zu language(s), need at least 2",
                               model.languages.size()));

    LidTrainStats stats;
    if (kind == LidKind::bayes)
        train_bayes(model, data, stats);
    else
        train_linear(model, data, stats);
    if (stats_out) *stats_out = stats;
    return model;
}

Prediction predict_language(const LidModel& model, std::string_view text) {
    if (trim_view(text).empty()) throw DataError("cannot predict language of empty text");

    const size_t n_langs = model.languages.size();
    std::vector<double> scores(n_langs, 0.0);

    if (model.kind == LidKind::bayes) {
        std::vector<std::string> grams;
        char_ngrams(text, model.bayes_config.ngram_min, model.bayes_config.ngram_max, grams);
        std::unordered_map<std::string, uint64_t> gram_counts;
        for (std::string& g : grams) ++gram_counts[std::move(g)];
        const double alpha = model.bayes_config.smoothing;
        const double v = static_cast<double>(model.vocabulary_size);
        for (size_t li = 0; li < n_langs; ++li) {
            double s = model.log_prior[li];
            const double denom = static_cast<double>(model.ngram_totals[li]) + alpha * v;
            for (const auto& [g, c] : gram_counts) {
                auto it = model.ngram_counts[li].find(g);
                const double num = (it == model.ngram_counts[li].end() ? 0.0 : double(it->second)) + alpha;
                s += static_cast<double>(c) * std::log(num / denom);
            }
            scores[li] = s;
        }
    } else {
        auto feat = hashed_features(text, model.linear_config);
        for (size_t li = 0; li < n_langs; ++li) {
            double s = 0.0;
            for (const auto& [b, v] : feat) s += model.weights[li][b] * v;
            scores[li] = s;
        }
    }

    // languages are sorted, so first strict maximum is the lexicographic
    // tie-break
    size_t best = 0;
    for (size_t li = 1; li < n_langs; ++li)
        if (scores[li] > scores[best]) best = li;
    return Prediction{model.languages[best], scores[best]};
}

LidEvaluation evaluate_lid(const LidModel& model, const std::vector<LabeledLine>& heldout) {
    if (heldout.empty()) throw DataError("empty held-out set");
    std::map<std::string, std::pair<uint64_t, uint64_t>> counts;  // lang -> (correct, total)
    for (const LabeledLine& l : heldout) {
        if (trim_view(l.text).empty()) continue;
        Prediction p = predict_language(model, l.text);
        auto& [correct, total] = counts[l.language];
        ++total;
        if (p.language == l.language) ++correct;
    }
    if (counts.empty()) throw DataError("held-out set has no non-empty lines");

    LidEvaluation eval;
    double sum = 0.0;
    for (const auto& [lang, ct] : counts) {
        double acc = static_cast<double>(ct.first) / static_cast<double>(ct.second);
        eval.per_language[lang] = acc;
        sum += acc;
    }
    eval.macro = sum / static_cast<double>(counts.size());
    for (const std::string& lang : model.languages)
        if (!counts.count(lang)) eval.absent_languages.push_back(lang);
    return eval;
}

AgreementResult agreement_filter(const std::vector<Document>& docs, const LidModel& model_a,
                                 const LidModel& model_b) {
    if (model_a.languages != model_b.languages)
        throw ConfigError("agreement filter needs models trained over the same language inventory");

    AgreementResult result;
    for (const Document& doc : docs) {
        if (trim_view(doc.text).empty()) {
            ++result.report.failed_count;
            result.dropped.push_back(DroppedDocRecord{doc.id, "", "", "predict-failed"});
            continue;
        }
        const std::string label_a = predict_language(model_a, doc.text).language;
        const std::string label_b = predict_language(model_b, doc.text).language;

        auto& by_country = result.report.per_country[doc.country];
        auto& by_language = result.report.per_language[label_a];
        ++by_country.total;
        ++by_language.total;
        if (label_a == label_b) {
            ++by_country.agreeing;
            ++by_language.agreeing;
            ++result.report.kept_count;
            Document kept = doc;
            kept.label_a = label_a;
            kept.label_b = label_b;
            result.kept.push_back(std::move(kept));
        } else {
            ++result.report.dropped_count;
            result.dropped.push_back(DroppedDocRecord{doc.id, label_a, label_b, "disagreement"});
        }
    }
    return result;
}

std::string serialize_lid(const LidModel& model) {
    ByteWriter w;
    w.raw("GEOLID1");
    w.u32(1);
    w.u8(static_cast<uint8_t>(model.kind));
    w.u64(model.languages.size());
    for (const std::string& lang : model.languages) w.str(lang);
    if (model.kind == LidKind::bayes) {
        w.u32(model.bayes_config.ngram_min);
        w.u32(model.bayes_config.ngram_max);
        w.f64(model.bayes_config.smoothing);
        w.u64(model.vocabulary_size);
        for (size_t li = 0; li < model.languages.size(); ++li) {
            w.u64(model.ngram_totals[li]);
            w.f64(model.log_prior[li]);
            w.u64(model.ngram_counts[li].size());
            for (const auto& [g, c] : model.ngram_counts[li]) {
                w.str(g);
                w.u64(c);
            }
        }
    } else {
        w.u32(model.linear_config.ngram_min);
        w.u32(model.linear_config.ngram_max);
        w.u64(model.linear_config.buckets);
        w.u32(model.linear_config.epochs);
        w.f64(model.linear_config.lr0);
        w.u64(model.linear_config.seed);
        for (const auto& row : model.weights)
            for (double v : row) w.f64(v);
    }
    return w.data();
}

LidModel deserialize_lid(std::string_view bytes) {
    ByteReader r(bytes);
    if (r.raw(7) != "GEOLID1") throw DataError("not a language model file (bad magic)");
    if (r.u32() != 1) throw DataError("unsupported language model version");
    LidModel model;
    model.kind = static_cast<LidKind>(r.u8());
    const uint64_t n_langs = r.u64();
    for (uint64_t i = 0; i < n_langs; ++i) model.languages.push_back(r.str());
    if (model.kind == LidKind::bayes) {
        model.bayes_config.ngram_min = r.u32();
        model.bayes_config.ngram_max = r.u32();
        model.bayes_config.smoothing = r.f64();
        model.vocabulary_size = r.u64();
        model.ngram_counts.resize(n_langs);
        model.ngram_totals.resize(n_langs);
        model.log_prior.resize(n_langs);
        for (uint64_t li = 0; li < n_langs; ++li) {
            model.ngram_totals[li] = r.u64();
            model.log_prior[li] = r.f64();
            const uint64_t entries = r.u64();
            auto hint = model.ngram_counts[li].end();
            for (uint64_t k = 0; k < entries; ++k) {
                std::string g = r.str();
                uint64_t c = r.u64();
                hint = model.ngram_counts[li].emplace_hint(hint, std::move(g), c);
            }
        }
    } else {
        model.linear_config.ngram_min = r.u32();
        model.linear_config.ngram_max = r.u32();
        model.linear_config.buckets = r.u64();
        model.linear_config.epochs = r.u32();
        model.linear_config.lr0 = r.f64();
        model.linear_config.seed = r.u64();
        model.weights.assign(n_langs, std::vector<double>(model.linear_config.buckets, 0.0));
        for (auto& row : model.weights)
            for (double& v : row) v = r.f64();
    }
    if (!r.done()) throw DataError("trailing bytes in language model file");
    return model;
}

void save_lid(const LidModel& model, const std::filesystem::path& path) {
    atomic_write_file(path, serialize_lid(model));
}

LidModel load_lid(const std::filesystem::path& path) { return deserialize_lid(read_file(path)); }

}  // namespace geoclean
