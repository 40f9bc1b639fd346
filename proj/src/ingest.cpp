#include "geoclean/ingest.hpp"

#include <fstream>
#include <set>

#include "geoclean/common.hpp"
#include "geoclean/unicode.hpp"

namespace geoclean {

InputFormat parse_input_format(std::string_view name) {
    if (name == "jsonl") return InputFormat::jsonl;
    if (name == "tsv") return InputFormat::tsv;
    throw ConfigError("unknown input format '" + std::string(name) + "' (expected jsonl or tsv)");
}

namespace {

Document parse_document_tsv(std::string_view line) {
    std::vector<std::string> cols = split(line, '\t');
    if (cols.size() != 3)
        throw DataError(strf("expected 3 tab-separated columns, got %zu", cols.size()));
    Document doc;
    doc.id = cols[0];
    if (doc.id.empty()) throw DataError("empty id");
    doc.country = lower_ascii(cols[1]);
    if (doc.country.empty()) throw DataError("empty country");
    doc.text = canonicalize_text(cols[2]);
    doc.word_count = count_words(doc.text);
    return doc;
}

}  // namespace

std::optional<Document> DocumentReader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++report_.total_lines;
        if (trim_view(line).empty()) continue;
        const size_t line_no = report_.total_lines;
        try {
            if (!uni::valid_utf8(line)) throw DataError("invalid UTF-8");
            Document doc = format_ == InputFormat::jsonl ? parse_document_json(line)
                                                         : parse_document_tsv(line);
            if (!seen_ids_.insert(doc.id).second)
                throw DataError("duplicate id '" + doc.id + "'");
            ++report_.parsed;
            return doc;
        } catch (const DataError& e) {
            report_.errors.push_back(ParseIssue{line_no, e.what()});
        }
    }
    return std::nullopt;
}

std::vector<Document> parse_documents(std::istream& in, InputFormat format, ParseReport& report) {
    DocumentReader reader(in, format, report);
    std::vector<Document> docs;
    while (auto doc = reader.next()) docs.push_back(std::move(*doc));
    return docs;
}

std::vector<Document> parse_documents_file(const std::filesystem::path& path, InputFormat format,
                                           ParseReport& report) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open input file " + path.string());
    return parse_documents(in, format, report);
}

RegionMap load_region_map(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open region map " + path.string());
    RegionMap map;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view sv = trim_view(line);
        if (sv.empty() || sv.front() == '#') continue;
        size_t comma = sv.find(',');
        if (comma == std::string_view::npos)
            throw DataError(strf("%s:%zu: expected 'country,region'", path.string().c_str(), line_no));
        std::string country = lower_ascii(trim_view(sv.substr(0, comma)));
        std::string region = trim(sv.substr(comma + 1));
        if (region.size() >= 2 && region.front() == '"' && region.back() == '"')
            region = region.substr(1, region.size() - 2);
        if (country.empty() || region.empty())
            throw DataError(strf("%s:%zu: empty country or region", path.string().c_str(), line_no));
        map.entries[country] = region;
    }
    std::set<std::string> regions;
    for (const auto& [_, region] : map.entries) regions.insert(region);
    if (regions.size() != 16)
        throw DataError(strf("region map %s defines %zu regions, expected exactly 16",
                             path.string().c_str(), regions.size()));
    return map;
}

std::string resolve_region(const std::string& country, const RegionMap& map) {
    auto it = map.entries.find(country);
    return it == map.entries.end() ? std::string(kUnknownRegion) : it->second;
}

}  // namespace geoclean
