#pragma once

// Core corpus types: geo-tagged documents, their dedup-granularity
// samples, and the (language, country) key that names a sub-corpus.
// Word counting and segmentation live here because every later stage
// depends on them agreeing exactly.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace geoclean {

struct Document {
    std::string id;
    std::string country;  // ISO 3166-1 alpha-2, lowercase
    // Canonical text: the document's samples joined by single newlines.
    // Parsing canonicalizes incoming text (paragraph tags become line
    // breaks) so that sample word counts always sum exactly to the
    // document word count.
    std::string text;
    std::string label_a;  // ISO 639-3; empty means unset
    std::string label_b;
    uint64_t word_count = 0;

    // The language that files this document into a sub-corpus: the agreed
    // label when both labels are set and equal, otherwise the claimed
    // label_a, otherwise "und".
    std::string language() const {
        if (!label_a.empty() && label_a == label_b) return label_a;
        if (!label_a.empty()) return label_a;
        return "und";
    }
};

struct Sample {
    std::string parent_id;
    uint32_t index = 0;  // 0-based position within the parent document
    std::string text;    // non-empty after trimming
};

struct SubCorpusKey {
    std::string language;  // ISO 639-3, lowercase
    std::string country;   // ISO 3166-1 alpha-2, lowercase

    bool operator==(const SubCorpusKey&) const = default;
    bool operator<(const SubCorpusKey& o) const {
        if (language != o.language) return language < o.language;
        return country < o.country;
    }
    std::string str() const { return language + "," + country; }
};

inline SubCorpusKey subcorpus_of(const Document& doc) {
    return SubCorpusKey{doc.language(), doc.country};
}

// Counts words with script-aware segmentation: text is split into
// whitespace-delimited runs; a run with no CJK codepoints counts as one
// word; a run containing CJK codepoints counts one word per CJK
// codepoint plus one per maximal non-CJK subrun.
uint64_t count_words(std::string_view text);

// Token sequence consistent with count_words: the number of tokens
// equals the word count, with CJK codepoints emitted as single-character
// tokens.
std::vector<std::string> tokenize(std::string_view text);

// Splits text on newlines and on literal <p> / </p> tags
// (case-insensitive), trims each segment of Unicode whitespace, and
// drops empty segments.
std::vector<std::string> segment_text(std::string_view text);

// Rejoins the segments of raw text with single newlines. Documents store
// this canonical form.
std::string canonicalize_text(std::string_view raw);

std::vector<Sample> segment_samples(const Document& doc);

// One JSONL line (no trailing newline), keys sorted.
std::string serialize_document(const Document& doc);

// Parses one JSONL record. Throws DataError with a description of the
// problem; the caller attaches line numbers.
Document parse_document_json(std::string_view line);

}  // namespace geoclean
