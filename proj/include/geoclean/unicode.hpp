#pragma once

// Unicode text handling: UTF-8 iteration, NFKC normalization, character
// classification, and case folding. Normalization and the character
// database come from ICU; the CJK script test uses explicit codepoint
// ranges because word counting needs a fixed, documented notion of which
// scripts are written without spaces.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace geoclean::uni {

// Decodes UTF-8 into codepoints. Invalid byte sequences decode as U+FFFD
// (one replacement per rejected unit) rather than raising, so dirty web
// text flows through the pipeline instead of aborting it.
std::vector<uint32_t> decode_utf8(std::string_view text);

// Strict well-formedness check, used at ingest where malformed records
// are skipped and counted rather than repaired.
bool valid_utf8(std::string_view text);

// Encodes a single codepoint, appending to out.
void append_utf8(std::string& out, uint32_t cp);

std::string encode_utf8(const std::vector<uint32_t>& cps);

// Compatibility normalization (NFKC).
std::string nfkc(std::string_view text);

bool is_white(uint32_t cp);

// True for general categories P* and S*.
bool is_punct_or_symbol(uint32_t cp);

// True for general category Nd.
bool is_decimal_digit(uint32_t cp);

// Simple (non-expanding, locale-independent) lowercase mapping.
uint32_t to_lower(uint32_t cp);

std::string lower(std::string_view text);

// True for codepoints in the Han, Hiragana, Katakana, and Hangul blocks
// used by the word counter: scripts where tokens are not space-separated
// and each character counts as a word.
bool is_cjk(uint32_t cp);

// Collapses every run of whitespace codepoints to a single ASCII space
// and trims the ends.
std::string collapse_whitespace(std::string_view text);

}  // namespace geoclean::uni
