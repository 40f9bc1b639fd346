#include "geoclean/outlier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "geoclean/binio.hpp"
#include "geoclean/common.hpp"
#include "geoclean/rng.hpp"
#include "geoclean/unicode.hpp"

namespace geoclean {

namespace {

inline double log_sigmoid(double x) {
    // log(1/(1+e^-x)) = -log1p(e^-x), kept in the stable branch
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::vector<uint32_t> subword_buckets_of(std::string_view token, uint32_t ngram_min,
                                         uint32_t ngram_max, uint64_t buckets) {
    std::string wrapped = "<";
    wrapped.append(token);
    wrapped.push_back('>');
    std::vector<uint32_t> cps = uni::decode_utf8(wrapped);
    std::vector<uint32_t> rows;
    for (uint32_t n = ngram_min; n <= ngram_max; ++n) {
        if (cps.size() < n) break;
        for (size_t i = 0; i + n <= cps.size(); ++i) {
            std::string g;
            for (size_t k = 0; k < n; ++k) uni::append_utf8(g, cps[i + k]);
            rows.push_back(static_cast<uint32_t>(fnv1a64(g) % buckets));
        }
    }
    return rows;
}

// The fixed enumeration shared by training and scoring: every in-range
// (center, context) index pair within the window, both directions.
template <typename F>
void for_each_pair(size_t n_tokens, uint32_t window, F&& fn) {
    const int64_t n = static_cast<int64_t>(n_tokens);
    const int64_t w = static_cast<int64_t>(window);
    for (int64_t i = 0; i < n; ++i)
        for (int64_t d = -w; d <= w; ++d) {
            if (d == 0) continue;
            const int64_t j = i + d;
            if (j >= 0 && j < n) fn(static_cast<size_t>(i), static_cast<size_t>(j));
        }
}

uint64_t pair_count(size_t n_tokens, uint32_t window) {
    uint64_t pairs = 0;
    const uint64_t n = n_tokens;
    const uint64_t w = window;
    for (uint64_t i = 0; i < n; ++i)
        pairs += std::min(i, w) + std::min(n - 1 - i, w);
    return pairs;
}

}  // namespace

std::vector<uint32_t> SubwordSkipGramModel::subword_rows(std::string_view token) const {
    std::vector<uint32_t> rows =
        subword_buckets_of(token, config.ngram_min, config.ngram_max, config.buckets);
    const uint32_t offset = static_cast<uint32_t>(vocab_tokens.size());
    for (uint32_t& r : rows) r += offset;
    return rows;
}

void SubwordSkipGramModel::input_vector(std::string_view token, float* out) const {
    const uint32_t dim = config.dim;
    std::vector<uint32_t> rows = subword_rows(token);
    auto it = vocab.find(std::string(token));
    if (it != vocab.end()) rows.push_back(it->second);
    std::fill(out, out + dim, 0.0f);
    if (rows.empty()) return;
    for (uint32_t row : rows) {
        const float* v = &input_vectors[static_cast<size_t>(row) * dim];
        for (uint32_t k = 0; k < dim; ++k) out[k] += v[k];
    }
    const float inv = 1.0f / static_cast<float>(rows.size());
    for (uint32_t k = 0; k < dim; ++k) out[k] *= inv;
}

std::optional<SubwordSkipGramModel> train_subword_skipgram(
    const std::vector<std::string>& sample_texts, const SubCorpusKey& key,
    const SkipGramConfig& config) {
    // tokenize once; the word-count threshold is exact because tokenize
    // and count_words agree
    std::vector<std::vector<std::string>> token_seqs;
    token_seqs.reserve(sample_texts.size());
    uint64_t total_words = 0;
    for (const std::string& text : sample_texts) {
        token_seqs.push_back(tokenize(text));
        total_words += token_seqs.back().size();
    }
    if (total_words < config.min_train_words) return std::nullopt;

    SubwordSkipGramModel model;
    model.key = key;
    model.config = config;

    std::map<std::string, uint64_t> counts;  // sorted for deterministic id assignment
    for (const auto& seq : token_seqs)
        for (const std::string& tok : seq) ++counts[tok];
    std::vector<std::pair<std::string, uint64_t>> by_freq;
    for (auto& [tok, c] : counts)
        if (c >= config.min_count) by_freq.emplace_back(tok, c);
    std::sort(by_freq.begin(), by_freq.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (by_freq.size() < 2)
        throw DataError("sub-corpus " + key.str() + " has fewer than two distinct trainable tokens");
    for (auto& [tok, c] : by_freq) {
        model.vocab[tok] = static_cast<uint32_t>(model.vocab_tokens.size());
        model.vocab_tokens.push_back(tok);
        model.vocab_counts.push_back(c);
    }
    const uint32_t v_size = static_cast<uint32_t>(model.vocab_tokens.size());
    const uint32_t dim = config.dim;

    // per-vocab-token input rows (own vector + subword slots)
    std::vector<std::vector<uint32_t>> token_rows(v_size);
    for (uint32_t vi = 0; vi < v_size; ++vi) {
        token_rows[vi] = model.subword_rows(model.vocab_tokens[vi]);
        token_rows[vi].push_back(vi);
    }

    const size_t input_rows = static_cast<size_t>(v_size) + config.buckets;
    model.input_vectors.resize(input_rows * dim);
    model.output_vectors.assign(static_cast<size_t>(v_size) * dim, 0.0f);
    Rng init_rng(mix_seed(config.seed, "sg-init|" + key.str()));
    const double scale = 1.0 / static_cast<double>(dim);
    for (float& f : model.input_vectors)
        f = static_cast<float>((init_rng.unit() * 2.0 - 1.0) * scale);

    // negative-sampling table: cumulative unigram counts raised to 0.75
    std::vector<double> cumulative(v_size);
    double mass = 0.0;
    for (uint32_t vi = 0; vi < v_size; ++vi) {
        mass += std::pow(static_cast<double>(model.vocab_counts[vi]), 0.75);
        cumulative[vi] = mass;
    }
    Rng train_rng(mix_seed(config.seed, "sg-train|" + key.str()));
    auto draw_negative = [&](uint32_t exclude) {
        for (int attempt = 0; attempt < 16; ++attempt) {
            const double u = train_rng.unit() * mass;
            const uint32_t vi = static_cast<uint32_t>(
                std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
            const uint32_t clipped = std::min(vi, v_size - 1);
            if (clipped != exclude) return clipped;
        }
        return exclude == 0 ? uint32_t(1) : uint32_t(0);
    };

    // sequences as vocabulary ids; tokens cut by min_count drop out of
    // the training stream (scoring still sees them through their subwords)
    std::vector<std::vector<uint32_t>> id_seqs;
    id_seqs.reserve(token_seqs.size());
    for (const auto& seq : token_seqs) {
        std::vector<uint32_t> ids;
        ids.reserve(seq.size());
        for (const std::string& tok : seq) {
            auto it = model.vocab.find(tok);
            if (it != model.vocab.end()) ids.push_back(it->second);
        }
        id_seqs.push_back(std::move(ids));
    }
    token_seqs.clear();

    uint64_t total_pairs = 0;
    for (const auto& ids : id_seqs) total_pairs += pair_count(ids.size(), config.window);
    total_pairs *= config.epochs;
    if (total_pairs == 0)
        throw DataError("sub-corpus " + key.str() + " yields no training pairs");

    std::vector<float> hidden(dim), grad(dim);
    std::vector<uint32_t> targets(1 + config.negatives);
    uint64_t processed = 0;
    for (uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (const auto& ids : id_seqs) {
            for_each_pair(ids.size(), config.window, [&](size_t i, size_t j) {
                const double lr =
                    config.lr0 *
                    (1.0 - static_cast<double>(processed) / static_cast<double>(total_pairs));
                ++processed;
                const uint32_t center = ids[i];
                const uint32_t context = ids[j];

                const auto& rows = token_rows[center];
                std::fill(hidden.begin(), hidden.end(), 0.0f);
                for (uint32_t row : rows) {
                    const float* v = &model.input_vectors[static_cast<size_t>(row) * dim];
                    for (uint32_t k = 0; k < dim; ++k) hidden[k] += v[k];
                }
                const float inv_rows = 1.0f / static_cast<float>(rows.size());
                for (uint32_t k = 0; k < dim; ++k) hidden[k] *= inv_rows;

                targets[0] = context;
                for (uint32_t neg = 0; neg < config.negatives; ++neg)
                    targets[1 + neg] = draw_negative(context);

                std::fill(grad.begin(), grad.end(), 0.0f);
                for (size_t ti = 0; ti < targets.size(); ++ti) {
                    const double label = ti == 0 ? 1.0 : 0.0;
                    float* out = &model.output_vectors[static_cast<size_t>(targets[ti]) * dim];
                    double dot = 0.0;
                    for (uint32_t k = 0; k < dim; ++k) dot += double(hidden[k]) * double(out[k]);
                    const float g = static_cast<float>(lr * (label - sigmoid(dot)));
                    for (uint32_t k = 0; k < dim; ++k) {
                        grad[k] += g * out[k];
                        out[k] += g * hidden[k];
                    }
                }
                // the hidden state is the mean of the input rows, so each
                // row receives the gradient scaled by that same mean factor
                const float gscale = inv_rows;
                for (uint32_t row : rows) {
                    float* v = &model.input_vectors[static_cast<size_t>(row) * dim];
                    for (uint32_t k = 0; k < dim; ++k) v[k] += grad[k] * gscale;
                }
            });
        }
    }
    return model;
}

const float* DocumentScorer::cached_input(const std::string& token) {
    auto it = cache_.find(token);
    if (it == cache_.end()) {
        it = cache_.emplace(token, std::vector<float>(model_.config.dim)).first;
        model_.input_vector(token, it->second.data());
    }
    return it->second.data();
}

std::optional<double> DocumentScorer::score_tokens(const std::vector<std::string>& tokens) {
    return score_document({tokens});
}

std::optional<double> DocumentScorer::score_document(
    const std::vector<std::vector<std::string>>& sample_tokens) {
    const uint32_t dim = model_.config.dim;
    double sum = 0.0;
    uint64_t pairs = 0;
    for (const auto& tokens : sample_tokens) {
        // resolve rows once per distinct position set
        std::vector<const float*> inputs(tokens.size());
        std::vector<const float*> outputs(tokens.size());
        for (size_t i = 0; i < tokens.size(); ++i) {
            inputs[i] = cached_input(tokens[i]);
            auto it = model_.vocab.find(tokens[i]);
            outputs[i] = it == model_.vocab.end()
                             ? nullptr  // out-of-vocabulary context: zero output vector
                             : &model_.output_vectors[static_cast<size_t>(it->second) * dim];
        }
        for_each_pair(tokens.size(), model_.config.window, [&](size_t i, size_t j) {
            double dot = 0.0;
            if (outputs[j] != nullptr) {
                const float* h = inputs[i];
                const float* o = outputs[j];
                for (uint32_t k = 0; k < dim; ++k) dot += double(h[k]) * double(o[k]);
            }
            sum += log_sigmoid(dot);
            ++pairs;
        });
    }
    if (pairs == 0) return std::nullopt;
    return sum / static_cast<double>(pairs);
}

OutlierFilterResult filter_outliers(const std::vector<Document>& docs,
                                    const SubwordSkipGramModel& model, double threshold) {
    OutlierFilterResult result;
    DocumentScorer scorer(model);

    std::vector<std::optional<double>> xs(docs.size());
    std::vector<double> scoreable;
    for (size_t i = 0; i < docs.size(); ++i) {
        std::vector<std::vector<std::string>> sample_tokens;
        for (const Sample& s : segment_samples(docs[i])) sample_tokens.push_back(tokenize(s.text));
        xs[i] = scorer.score_document(sample_tokens);
        if (xs[i]) scoreable.push_back(*xs[i]);
    }

    stats::ModifiedZResult z;
    if (!scoreable.empty()) {
        z = stats::modified_zscores(scoreable);
        result.distribution.scores = scoreable;
        result.distribution.m_scores = z.scores;
        result.distribution.median = z.median;
        result.distribution.mad = z.mad;
        result.distribution.degenerate = z.degenerate;
    }

    size_t zi = 0;
    for (size_t i = 0; i < docs.size(); ++i) {
        if (!xs[i]) {
            result.unscoreable_ids.push_back(docs[i].id);
            result.kept.push_back(docs[i]);
            continue;
        }
        const double m = result.distribution.degenerate ? 0.0 : z.scores[zi];
        const double x = *xs[i];
        ++zi;
        if (m > threshold) {
            result.removed_high.push_back(docs[i]);
            result.removed_log.push_back(OutlierRecord{docs[i].id, x, m, "high"});
        } else if (m < -threshold) {
            result.removed_low.push_back(docs[i]);
            result.removed_log.push_back(OutlierRecord{docs[i].id, x, m, "low"});
        } else {
            result.kept.push_back(docs[i]);
        }
    }
    return result;
}

std::vector<std::string> inject_noise(std::vector<std::string> tokens,
                                      const std::vector<std::string>& donor_lexicon, double ratio,
                                      Rng& rng) {
    if (donor_lexicon.empty()) throw ConfigError("donor lexicon is empty");
    if (ratio < 0.0 || ratio > 1.0) throw ConfigError("noise ratio must be within [0, 1]");
    const size_t n = tokens.size();
    const size_t k = static_cast<size_t>(std::ceil(ratio * static_cast<double>(n)));
    for (size_t pos : rng.sample_indices(n, k))
        tokens[pos] = donor_lexicon[rng.below(donor_lexicon.size())];
    return tokens;
}

NoiseCurve evaluate_noise_detection(const std::vector<Document>& docs,
                                    const SubwordSkipGramModel& model,
                                    const std::vector<std::string>& donor_lexicon,
                                    const std::vector<double>& ratios, size_t sample_size,
                                    uint64_t seed, double threshold) {
    for (size_t i = 1; i < ratios.size(); ++i)
        if (ratios[i] <= ratios[i - 1]) throw ConfigError("noise ratios must be strictly increasing");
    if (sample_size == 0) throw ConfigError("sample_size must be positive");
    if (sample_size > docs.size())
        throw DataError(strf("sample_size %zu exceeds corpus size %zu", sample_size, docs.size()));

    Rng pick_rng(mix_seed(seed, "noise-heldout"));
    std::vector<size_t> heldout = pick_rng.sample_indices(docs.size(), sample_size);
    std::set<size_t> heldout_set(heldout.begin(), heldout.end());

    std::vector<Document> clean;
    clean.reserve(docs.size() - sample_size);
    for (size_t i = 0; i < docs.size(); ++i)
        if (!heldout_set.count(i)) clean.push_back(docs[i]);

    NoiseCurve curve;
    curve.subcorpus = model.key;
    for (double ratio : ratios) {
        Rng noise_rng(mix_seed(seed, "noise-ratio|" + format_double(ratio)));
        std::vector<Document> pool = clean;
        std::set<std::string> injected_ids;
        for (size_t idx : heldout) {
            std::vector<std::string> tokens =
                inject_noise(tokenize(docs[idx].text), donor_lexicon, ratio, noise_rng);
            Document noisy;
            noisy.id = docs[idx].id;
            noisy.country = docs[idx].country;
            noisy.label_a = docs[idx].label_a;
            noisy.label_b = docs[idx].label_b;
            std::string text;
            for (const std::string& tok : tokens) {
                if (!text.empty()) text.push_back(' ');
                text += tok;
            }
            noisy.text = text;
            noisy.word_count = count_words(noisy.text);
            injected_ids.insert(noisy.id);
            pool.push_back(std::move(noisy));
        }
        OutlierFilterResult filtered = filter_outliers(pool, model, threshold);
        uint64_t flagged = 0;
        for (const OutlierRecord& rec : filtered.removed_log)
            if (injected_ids.count(rec.doc_id)) ++flagged;
        curve.points.emplace_back(ratio,
                                  static_cast<double>(flagged) / static_cast<double>(sample_size));
    }
    return curve;
}

HistogramReport score_distribution_report(const std::vector<double>& scores) {
    if (scores.empty()) throw DataError("cannot build a histogram of zero scores");
    HistogramReport report;
    report.bins.assign(HistogramReport::kBins, 0);
    report.min = *std::min_element(scores.begin(), scores.end());
    report.max = *std::max_element(scores.begin(), scores.end());
    const double width = (report.max - report.min) / static_cast<double>(HistogramReport::kBins);
    for (double x : scores) {
        size_t bin = 0;
        if (width > 0.0) {
            bin = static_cast<size_t>((x - report.min) / width);
            if (bin >= HistogramReport::kBins) bin = HistogramReport::kBins - 1;
        }
        ++report.bins[bin];
    }
    if (scores.size() >= 30) {
        const double n = static_cast<double>(scores.size());
        double mean = 0.0;
        for (double x : scores) mean += x;
        mean /= n;
        double m2 = 0.0, m3 = 0.0, m4 = 0.0;
        for (double x : scores) {
            const double d = x - mean;
            m2 += d * d;
            m3 += d * d * d;
            m4 += d * d * d * d;
        }
        m2 /= n;
        m3 /= n;
        m4 /= n;
        if (m2 > 0.0) {
            report.skewness = m3 / std::pow(m2, 1.5);
            report.excess_kurtosis = m4 / (m2 * m2) - 3.0;
        }
    }
    return report;
}

std::string serialize_skipgram(const SubwordSkipGramModel& model) {
    ByteWriter w;
    w.raw("GEOSG1");
    w.u32(1);
    w.str(model.key.language);
    w.str(model.key.country);
    const SkipGramConfig& c = model.config;
    w.u32(c.dim);
    w.u32(c.window);
    w.u32(c.ngram_min);
    w.u32(c.ngram_max);
    w.u32(c.epochs);
    w.u32(c.negatives);
    w.u32(c.min_count);
    w.u64(c.buckets);
    w.f64(c.lr0);
    w.u64(c.seed);
    w.u64(c.min_train_words);
    w.u64(model.vocab_tokens.size());
    for (size_t i = 0; i < model.vocab_tokens.size(); ++i) {
        w.str(model.vocab_tokens[i]);
        w.u64(model.vocab_counts[i]);
    }
    w.u64(model.input_vectors.size());
    for (float f : model.input_vectors) w.f32(f);
    w.u64(model.output_vectors.size());
    for (float f : model.output_vectors) w.f32(f);
    return w.data();
}

SubwordSkipGramModel deserialize_skipgram(std::string_view bytes) {
    ByteReader r(bytes);
    if (r.raw(6) != "GEOSG1") throw DataError("not an embedding model file (bad magic)");
    if (r.u32() != 1) throw DataError("unsupported embedding model version");
    SubwordSkipGramModel model;
    model.key.language = r.str();
    model.key.country = r.str();
    SkipGramConfig& c = model.config;
    c.dim = r.u32();
    c.window = r.u32();
    c.ngram_min = r.u32();
    c.ngram_max = r.u32();
    c.epochs = r.u32();
    c.negatives = r.u32();
    c.min_count = r.u32();
    c.buckets = r.u64();
    c.lr0 = r.f64();
    c.seed = r.u64();
    c.min_train_words = r.u64();
    const uint64_t v_size = r.u64();
    for (uint64_t i = 0; i < v_size; ++i) {
        std::string tok = r.str();
        model.vocab[tok] = static_cast<uint32_t>(i);
        model.vocab_tokens.push_back(std::move(tok));
        model.vocab_counts.push_back(r.u64());
    }
    model.input_vectors.resize(r.u64());
    for (float& f : model.input_vectors) f = r.f32();
    model.output_vectors.resize(r.u64());
    for (float& f : model.output_vectors) f = r.f32();
    if (!r.done()) throw DataError("trailing bytes in embedding model file");
    return model;
}

void save_skipgram(const SubwordSkipGramModel& model, const std::filesystem::path& path) {
    atomic_write_file(path, serialize_skipgram(model));
}

SubwordSkipGramModel load_skipgram(const std::filesystem::path& path) {
    return deserialize_skipgram(read_file(path));
}

}  // namespace geoclean
