#include "geoclean/dedup.hpp"

#include <openssl/evp.h>

#include <stdexcept>
#include <unordered_map>

#include "geoclean/common.hpp"
#include "geoclean/unicode.hpp"

namespace geoclean {

std::string Digest::hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(40);
    for (uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

std::string normalize_for_hash(std::string_view text) {
    std::string folded;
    folded.reserve(text.size());
    for (uint32_t cp : uni::decode_utf8(uni::nfkc(text))) {
        cp = uni::to_lower(cp);
        if (uni::is_decimal_digit(cp)) {
            folded.push_back('0');
        } else if (uni::is_punct_or_symbol(cp)) {
            // dropped, and deliberately without inserting a space: the
            // examples "Hello,  WORLD!" and "555-1234" both rely on
            // removal joining nothing and splitting nothing
        } else {
            uni::append_utf8(folded, cp);
        }
    }
    return uni::collapse_whitespace(folded);
}

Digest hash_sample(std::string_view normalized) {
    Digest d;
    unsigned int len = 0;
    if (EVP_Digest(normalized.data(), normalized.size(), d.bytes.data(), &len, EVP_sha1(),
                   nullptr) != 1 ||
        len != d.bytes.size())
        throw std::runtime_error("SHA-1 digest computation failed");
    return d;
}

DedupResult dedup_samples(const std::vector<Sample>& samples) {
    std::unordered_map<std::string, uint64_t> counts;
    std::vector<std::string> hexes;
    hexes.reserve(samples.size());
    for (const Sample& s : samples) {
        std::string hex = hash_sample(normalize_for_hash(s.text)).hex();
        ++counts[hex];
        hexes.push_back(std::move(hex));
    }

    DedupResult result;
    result.stats.input_samples = samples.size();
    for (size_t i = 0; i < samples.size(); ++i) {
        if (counts[hexes[i]] == 1) {
            result.kept.push_back(samples[i]);
        } else {
            uint64_t words = count_words(samples[i].text);
            result.removed.push_back(
                RemovedSample{samples[i].parent_id, samples[i].index, hexes[i], words});
            result.stats.removed_words += words;
        }
    }
    result.stats.kept_samples = result.kept.size();
    result.stats.removed_samples = result.removed.size();
    for (const auto& [_, count] : counts)
        if (count > 1) ++result.stats.distinct_collision_groups;
    return result;
}

}  // namespace geoclean
