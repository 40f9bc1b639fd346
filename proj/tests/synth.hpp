#pragma once

// Seeded synthetic corpus builders shared by the unit and acceptance
// tests. Languages get disjoint or deliberately overlapping alphabets
// and Zipf-weighted lexicons, so frequency structure resembles natural
// text while everything stays reproducible.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "geoclean/document.hpp"
#include "geoclean/lid.hpp"
#include "geoclean/rng.hpp"

namespace synth {

using geoclean::Document;
using geoclean::Rng;

struct Language {
    std::string name;
    std::vector<std::string> lexicon;  // rank 0 = most frequent
    std::vector<double> cumulative;    // cumulative Zipf weights

    const std::string& draw(Rng& rng) const {
        const double u = rng.unit() * cumulative.back();
        const size_t i =
            std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin();
        return lexicon[std::min(i, lexicon.size() - 1)];
    }
};

// Letter pools, one string per letter (UTF-8). qaa/qad overlap on six
// Latin letters so that pair is genuinely confusable; the rest use
// disjoint scripts.
inline const std::vector<std::string>& alphabet(size_t i) {
    static const std::vector<std::vector<std::string>> pools = {
        {"a", "e", "i", "o", "u", "n", "t", "r", "s", "l"},                // 0: Latin
        {"α", "β", "γ", "δ", "ε", "ζ",
         "η", "θ", "ι", "κ"},                          // 1: Greek
        {"б", "в", "г", "д", "е", "ж",
         "з", "и", "к", "л"},                          // 2: Cyrillic
        {"ä", "ö", "ü", "ß", "e", "i", "n", "r", "s", "t"},  // 3: Latin ext
        {"א", "ב", "ג", "ד", "ה", "ו",
         "ז", "ח", "ט", "י"},                          // 4: Hebrew
        {"ა", "ბ", "გ", "დ", "ე", "ვ",
         "ზ", "თ", "ი", "კ"},                          // 5: Georgian
    };
    return pools.at(i);
}

inline Language make_language(const std::string& name, const std::vector<std::string>& letters,
                              size_t lexicon_size, uint64_t seed) {
    Language lang;
    lang.name = name;
    Rng rng(geoclean::mix_seed(seed, "lexicon|" + name));
    std::set<std::string> seen;
    while (lang.lexicon.size() < lexicon_size) {
        const uint64_t len = rng.range(3, 8);
        std::string word;
        for (uint64_t k = 0; k < len; ++k) word += letters[rng.below(letters.size())];
        if (seen.insert(word).second) lang.lexicon.push_back(word);
    }
    double mass = 0.0;
    for (size_t r = 0; r < lang.lexicon.size(); ++r) {
        mass += 1.0 / std::pow(static_cast<double>(r + 1), 1.07);
        lang.cumulative.push_back(mass);
    }
    return lang;
}

inline std::string make_line(const Language& lang, Rng& rng, uint64_t words) {
    std::string line;
    for (uint64_t w = 0; w < words; ++w) {
        if (w) line.push_back(' ');
        line += lang.draw(rng);
    }
    return line;
}

// Text with `samples` newline-separated samples of `words` words each.
inline std::string make_text(const Language& lang, Rng& rng, uint64_t samples, uint64_t words) {
    std::string text;
    for (uint64_t s = 0; s < samples; ++s) {
        if (s) text.push_back('\n');
        text += make_line(lang, rng, words);
    }
    return text;
}

inline Document make_doc(const std::string& id, const std::string& country, const Language& lang,
                         Rng& rng, uint64_t samples, uint64_t words,
                         const std::string& label_a = "") {
    Document doc;
    doc.id = id;
    doc.country = country;
    doc.text = make_text(lang, rng, samples, words);
    doc.label_a = label_a;
    doc.word_count = geoclean::count_words(doc.text);
    return doc;
}

inline std::vector<geoclean::LabeledLine> labeled_lines(const Language& lang, Rng& rng,
                                                        uint64_t lines, uint64_t words) {
    std::vector<geoclean::LabeledLine> out;
    out.reserve(lines);
    for (uint64_t i = 0; i < lines; ++i)
        out.push_back({lang.name, make_line(lang, rng, words)});
    return out;
}

}  // namespace synth
