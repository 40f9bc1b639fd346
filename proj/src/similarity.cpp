#include "geoclean/similarity.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "geoclean/common.hpp"
#include "geoclean/document.hpp"
#include "geoclean/rng.hpp"
#include "geoclean/unicode.hpp"

namespace geoclean {

std::vector<std::string> chunk_corpus(const std::vector<std::string>& sample_texts,
                                      uint64_t chunk_words, uint64_t max_chunks, uint64_t seed) {
    if (chunk_words == 0) throw ConfigError("chunk_words must be positive");
    if (max_chunks == 0) throw ConfigError("max_chunks must be positive");

    std::vector<uint64_t> words(sample_texts.size());
    uint64_t total = 0;
    for (size_t i = 0; i < sample_texts.size(); ++i) {
        words[i] = count_words(sample_texts[i]);
        total += words[i];
    }
    if (total < chunk_words)
        throw DataError(strf("corpus too small to chunk: need %llu words, have %llu",
                             static_cast<unsigned long long>(chunk_words),
                             static_cast<unsigned long long>(total)));

    std::vector<size_t> order(sample_texts.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<std::string> chunks;
    std::string current;
    uint64_t current_words = 0;
    for (size_t idx : order) {
        if (chunks.size() == max_chunks) break;
        if (words[idx] == 0) continue;
        if (!current.empty()) current.push_back('\n');
        current += sample_texts[idx];
        current_words += words[idx];
        if (current_words >= chunk_words) {
            chunks.push_back(std::move(current));
            current.clear();
            current_words = 0;
        }
    }
    // current (if any) is the trailing partial chunk and is dropped
    return chunks;
}

NgramProfile ngram_profile(std::string_view chunk, uint32_t n, uint32_t top_k) {
    if (n == 0) throw ConfigError("n-gram order must be positive");
    if (top_k == 0) throw ConfigError("top_k must be positive");
    std::string normalized = uni::collapse_whitespace(uni::nfkc(chunk));
    if (normalized.empty()) throw DataError("cannot profile an empty chunk");

    std::unordered_map<std::string, uint64_t> counts;
    NgramProfile profile;
    profile.n = n;
    profile.top_k = top_k;
    for (std::string_view word : split(normalized, ' ')) {
        // boundary padding: each word is profiled as " word "
        std::vector<uint32_t> cps;
        cps.push_back(' ');
        for (uint32_t cp : uni::decode_utf8(word)) cps.push_back(cp);
        cps.push_back(' ');
        if (cps.size() < n) continue;
        for (size_t i = 0; i + n <= cps.size(); ++i) {
            std::string g;
            for (size_t k = 0; k < n; ++k) uni::append_utf8(g, cps[i + k]);
            ++counts[std::move(g)];
            ++profile.total;
        }
    }

    profile.counts.assign(counts.begin(), counts.end());
    std::sort(profile.counts.begin(), profile.counts.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (profile.counts.size() > top_k) profile.counts.resize(top_k);
    return profile;
}

double similarity_score(const NgramProfile& a, const NgramProfile& b) {
    if (a.n != b.n)
        throw ConfigError(strf("cannot compare profiles of different n-gram orders (%u vs %u)",
                               a.n, b.n));

    // rank within each profile: position in the (count desc, key asc)
    // order, 1-based
    std::unordered_map<std::string_view, size_t> rank_a, rank_b;
    for (size_t i = 0; i < a.counts.size(); ++i) rank_a[a.counts[i].first] = i + 1;
    for (size_t i = 0; i < b.counts.size(); ++i) rank_b[b.counts[i].first] = i + 1;

    std::map<std::string_view, bool> union_keys;
    for (const auto& [g, _] : a.counts) union_keys[g] = true;
    for (const auto& [g, _] : b.counts) union_keys[g] = true;
    const size_t u = union_keys.size();
    if (u < 2) throw DataError("similarity needs at least two distinct n-gram features");

    // absent features tie for the trailing positions and share their
    // average rank
    const double absent_a = (static_cast<double>(a.counts.size()) + 1.0 + static_cast<double>(u)) / 2.0;
    const double absent_b = (static_cast<double>(b.counts.size()) + 1.0 + static_cast<double>(u)) / 2.0;

    double mean_a = 0.0, mean_b = 0.0;
    std::vector<std::pair<double, double>> ranks;
    ranks.reserve(u);
    for (const auto& [g, _] : union_keys) {
        auto ia = rank_a.find(g);
        auto ib = rank_b.find(g);
        const double ra = ia == rank_a.end() ? absent_a : static_cast<double>(ia->second);
        const double rb = ib == rank_b.end() ? absent_b : static_cast<double>(ib->second);
        ranks.emplace_back(ra, rb);
        mean_a += ra;
        mean_b += rb;
    }
    mean_a /= static_cast<double>(u);
    mean_b /= static_cast<double>(u);

    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (const auto& [ra, rb] : ranks) {
        const double da = ra - mean_a;
        const double db = rb - mean_b;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0)
        throw DataError("similarity undefined: a profile ranks every feature identically");
    return sab / std::sqrt(saa * sbb);
}

SimilarityDistribution stage_distribution(const std::vector<std::string>& stage_samples,
                                          const std::vector<std::string>& benchmark_samples,
                                          const DistributionParams& params,
                                          const std::string& stage_id,
                                          const std::string& benchmark_id) {
    if (params.n_pairs == 0) throw ConfigError("n_pairs must be positive");

    std::vector<std::string> chunks_a =
        chunk_corpus(stage_samples, params.chunk_words, params.max_chunks,
                     mix_seed(params.seed, "chunks|" + stage_id));
    std::vector<std::string> chunks_b =
        chunk_corpus(benchmark_samples, params.chunk_words, params.max_chunks,
                     mix_seed(params.seed, "chunks|" + benchmark_id));

    std::vector<NgramProfile> profiles_a, profiles_b;
    profiles_a.reserve(chunks_a.size());
    profiles_b.reserve(chunks_b.size());
    for (const std::string& c : chunks_a) profiles_a.push_back(ngram_profile(c, params.n, params.top_k));
    for (const std::string& c : chunks_b) profiles_b.push_back(ngram_profile(c, params.n, params.top_k));

    SimilarityDistribution dist;
    dist.stage = stage_id;
    dist.benchmark = benchmark_id;
    dist.chunk_words = params.chunk_words;
    dist.n_pairs = params.n_pairs;
    Rng rng(mix_seed(params.seed, "pairs|" + stage_id + "|" + benchmark_id));
    for (uint64_t p = 0; p < params.n_pairs; ++p) {
        const size_t i = static_cast<size_t>(rng.below(profiles_a.size()));
        const size_t j = static_cast<size_t>(rng.below(profiles_b.size()));
        dist.values.push_back(similarity_score(profiles_a[i], profiles_b[j]));
    }
    return dist;
}

stats::AnovaResult anova(const std::vector<SimilarityDistribution>& groups) {
    std::vector<std::vector<double>> values;
    values.reserve(groups.size());
    for (const SimilarityDistribution& g : groups) values.push_back(g.values);
    return stats::anova_oneway(values);
}

std::string distributions_csv(const std::vector<SimilarityDistribution>& groups) {
    std::string out = "stage,benchmark,value\n";
    for (const SimilarityDistribution& g : groups)
        for (double v : g.values)
            out += g.stage + "," + g.benchmark + "," + format_double(v) + "\n";
    return out;
}

std::string anova_json(const stats::AnovaResult& result) {
    nlohmann::json j;
    if (std::isinf(result.f))
        j["F"] = nullptr;
    else
        j["F"] = result.f;
    j["p"] = result.p;
    j["df_between"] = result.df_between;
    j["df_within"] = result.df_within;
    j["group_means"] = result.group_means;
    j["degenerate"] = result.degenerate;
    return j.dump(2) + "\n";
}

}  // namespace geoclean
