#include "geoclean/document.hpp"

#include <json.hpp>

#include "geoclean/common.hpp"
#include "geoclean/unicode.hpp"

namespace geoclean {

uint64_t count_words(std::string_view text) {
    uint64_t total = 0;
    uint64_t cjk_in_run = 0;
    bool in_run = false;        // inside a whitespace-delimited run
    bool in_subrun = false;     // inside a non-CJK stretch of that run
    uint64_t subruns = 0;
    auto close_run = [&]() {
        if (!in_run) return;
        total += cjk_in_run > 0 ? cjk_in_run + subruns : 1;
        in_run = in_subrun = false;
        cjk_in_run = subruns = 0;
    };
    for (uint32_t cp : uni::decode_utf8(text)) {
        if (uni::is_white(cp)) {
            close_run();
        } else if (uni::is_cjk(cp)) {
            in_run = true;
            in_subrun = false;
            ++cjk_in_run;
        } else {
            in_run = true;
            if (!in_subrun) ++subruns;
            in_subrun = true;
        }
    }
    close_run();
    return total;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    bool run_has_cjk = false;
    std::vector<std::string> run_parts;  // completed pieces of the active run
    auto flush_current = [&]() {
        if (!current.empty()) {
            run_parts.push_back(std::move(current));
            current.clear();
        }
    };
    auto close_run = [&]() {
        flush_current();
        if (run_parts.empty()) return;
        if (run_has_cjk) {
            for (auto& p : run_parts) tokens.push_back(std::move(p));
        } else {
            // A run without CJK is a single word even if accumulated in
            // one piece; join defensively.
            std::string word;
            for (auto& p : run_parts) word += p;
            tokens.push_back(std::move(word));
        }
        run_parts.clear();
        run_has_cjk = false;
    };
    for (uint32_t cp : uni::decode_utf8(text)) {
        if (uni::is_white(cp)) {
            close_run();
        } else if (uni::is_cjk(cp)) {
            run_has_cjk = true;
            flush_current();
            std::string one;
            uni::append_utf8(one, cp);
            run_parts.push_back(std::move(one));
        } else {
            uni::append_utf8(current, cp);
        }
    }
    close_run();
    return tokens;
}

namespace {

// Matches <p> or </p> at byte offset i, case-insensitively. Returns the
// tag length in bytes, or 0 when there is no tag here.
size_t match_paragraph_tag(std::string_view s, size_t i) {
    if (s[i] != '<') return 0;
    size_t j = i + 1;
    if (j < s.size() && s[j] == '/') ++j;
    if (j < s.size() && (s[j] == 'p' || s[j] == 'P') && j + 1 < s.size() && s[j + 1] == '>')
        return j + 2 - i;
    return 0;
}

std::string trim_unicode(std::string_view s) {
    std::vector<uint32_t> cps = uni::decode_utf8(s);
    size_t b = 0, e = cps.size();
    while (b < e && uni::is_white(cps[b])) ++b;
    while (e > b && uni::is_white(cps[e - 1])) --e;
    std::string out;
    for (size_t i = b; i < e; ++i) uni::append_utf8(out, cps[i]);
    return out;
}

}  // namespace

std::vector<std::string> segment_text(std::string_view text) {
    std::vector<std::string> segments;
    std::string current;
    auto close = [&]() {
        std::string trimmed = trim_unicode(current);
        if (!trimmed.empty()) segments.push_back(std::move(trimmed));
        current.clear();
    };
    for (size_t i = 0; i < text.size();) {
        if (text[i] == '\n') {
            close();
            ++i;
        } else if (size_t tag = match_paragraph_tag(text, i); tag > 0) {
            close();
            i += tag;
        } else {
            current.push_back(text[i]);
            ++i;
        }
    }
    close();
    return segments;
}

std::string canonicalize_text(std::string_view raw) {
    std::string out;
    for (const std::string& seg : segment_text(raw)) {
        if (!out.empty()) out.push_back('\n');
        out += seg;
    }
    return out;
}

std::vector<Sample> segment_samples(const Document& doc) {
    std::vector<Sample> samples;
    uint32_t index = 0;
    for (std::string& seg : segment_text(doc.text))
        samples.push_back(Sample{doc.id, index++, std::move(seg)});
    return samples;
}

std::string serialize_document(const Document& doc) {
    nlohmann::json j;
    j["id"] = doc.id;
    j["country"] = doc.country;
    j["text"] = doc.text;
    if (!doc.label_a.empty()) j["label_a"] = doc.label_a;
    if (!doc.label_b.empty()) j["label_b"] = doc.label_b;
    j["word_count"] = doc.word_count;
    return j.dump();
}

Document parse_document_json(std::string_view line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw DataError("record is not a JSON object");

    auto need_string = [&](const char* key) -> std::string {
        if (!j.contains(key)) throw DataError(std::string("missing field '") + key + "'");
        if (!j[key].is_string()) throw DataError(std::string("field '") + key + "' is not a string");
        return j[key].get<std::string>();
    };

    Document doc;
    doc.id = need_string("id");
    if (doc.id.empty()) throw DataError("empty id");
    doc.country = lower_ascii(need_string("country"));
    if (doc.country.empty()) throw DataError("empty country");
    doc.text = canonicalize_text(need_string("text"));
    if (j.contains("label_a")) {
        if (!j["label_a"].is_string()) throw DataError("field 'label_a' is not a string");
        doc.label_a = lower_ascii(j["label_a"].get<std::string>());
    }
    if (j.contains("label_b")) {
        if (!j["label_b"].is_string()) throw DataError("field 'label_b' is not a string");
        doc.label_b = lower_ascii(j["label_b"].get<std::string>());
    }
    doc.word_count = count_words(doc.text);
    return doc;
}

}  // namespace geoclean
