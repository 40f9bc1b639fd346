#pragma once

// Stream parsing of geo-tagged document files and the country-to-region
// map. Malformed records are recoverable: each one is recorded with its
// line number and parsing continues.

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "geoclean/document.hpp"

namespace geoclean {

enum class InputFormat { jsonl, tsv };

InputFormat parse_input_format(std::string_view name);

struct ParseIssue {
    size_t line = 0;  // 1-based
    std::string message;
};

struct ParseReport {
    size_t total_lines = 0;
    size_t parsed = 0;
    std::vector<ParseIssue> errors;
};

// Pulls documents off a line-oriented stream one at a time. Blank lines
// are skipped. Duplicate ids are malformed records (id uniqueness is a
// corpus invariant).
class DocumentReader {
public:
    DocumentReader(std::istream& in, InputFormat format, ParseReport& report)
        : in_(in), format_(format), report_(report) {}

    std::optional<Document> next();

private:
    std::istream& in_;
    InputFormat format_;
    ParseReport& report_;
    std::unordered_set<std::string> seen_ids_;
};

// Eager convenience wrapper over DocumentReader.
std::vector<Document> parse_documents(std::istream& in, InputFormat format, ParseReport& report);

std::vector<Document> parse_documents_file(const std::filesystem::path& path, InputFormat format,
                                           ParseReport& report);

struct RegionMap {
    std::map<std::string, std::string> entries;  // country -> region
};

// Loads a two-column CSV `country,region` (quoted region names allowed,
// '#' comment lines skipped) and checks that it defines exactly 16
// distinct regions.
RegionMap load_region_map(const std::filesystem::path& path);

inline constexpr const char* kUnknownRegion = "unknown-region";

std::string resolve_region(const std::string& country, const RegionMap& map);

}  // namespace geoclean
