#include "geoclean/unicode.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <stdexcept>

namespace geoclean::uni {

std::vector<uint32_t> decode_utf8(std::string_view text) {
    std::vector<uint32_t> cps;
    cps.reserve(text.size());
    int32_t i = 0;
    const int32_t n = static_cast<int32_t>(text.size());
    const uint8_t* s = reinterpret_cast<const uint8_t*>(text.data());
    while (i < n) {
        UChar32 c;
        U8_NEXT(s, i, n, c);
        cps.push_back(c < 0 ? 0xFFFDu : static_cast<uint32_t>(c));
    }
    return cps;
}

bool valid_utf8(std::string_view text) {
    int32_t i = 0;
    const int32_t n = static_cast<int32_t>(text.size());
    const uint8_t* s = reinterpret_cast<const uint8_t*>(text.data());
    while (i < n) {
        UChar32 c;
        U8_NEXT(s, i, n, c);
        if (c < 0) return false;
    }
    return true;
}

void append_utf8(std::string& out, uint32_t cp) {
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string encode_utf8(const std::vector<uint32_t>& cps) {
    std::string out;
    out.reserve(cps.size());
    for (uint32_t cp : cps) append_utf8(out, cp);
    return out;
}

std::string nfkc(std::string_view text) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* norm = icu::Normalizer2::getNFKCInstance(status);
    if (U_FAILURE(status)) throw std::runtime_error("ICU NFKC instance unavailable");
    icu::UnicodeString input = icu::UnicodeString::fromUTF8(
        icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    icu::UnicodeString normalized = norm->normalize(input, status);
    if (U_FAILURE(status)) throw std::runtime_error("ICU NFKC normalization failed");
    std::string out;
    normalized.toUTF8String(out);
    return out;
}

bool is_white(uint32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0; }

bool is_punct_or_symbol(uint32_t cp) {
    switch (u_charType(static_cast<UChar32>(cp))) {
        case U_DASH_PUNCTUATION:
        case U_START_PUNCTUATION:
        case U_END_PUNCTUATION:
        case U_CONNECTOR_PUNCTUATION:
        case U_OTHER_PUNCTUATION:
        case U_INITIAL_PUNCTUATION:
        case U_FINAL_PUNCTUATION:
        case U_MATH_SYMBOL:
        case U_CURRENCY_SYMBOL:
        case U_MODIFIER_SYMBOL:
        case U_OTHER_SYMBOL:
            return true;
        default:
            return false;
    }
}

bool is_decimal_digit(uint32_t cp) {
    return u_charType(static_cast<UChar32>(cp)) == U_DECIMAL_DIGIT_NUMBER;
}

uint32_t to_lower(uint32_t cp) {
    return static_cast<uint32_t>(u_tolower(static_cast<UChar32>(cp)));
}

std::string lower(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (uint32_t cp : decode_utf8(text)) append_utf8(out, to_lower(cp));
    return out;
}

bool is_cjk(uint32_t cp) {
    // Han
    if (cp >= 0x4E00 && cp <= 0x9FFF) return true;
    if (cp >= 0x3400 && cp <= 0x4DBF) return true;
    if (cp >= 0xF900 && cp <= 0xFAFF) return true;
    if (cp >= 0x20000 && cp <= 0x2FA1F) return true;
    // Hiragana
    if (cp >= 0x3040 && cp <= 0x309F) return true;
    // Katakana
    if (cp >= 0x30A0 && cp <= 0x30FF) return true;
    if (cp >= 0x31F0 && cp <= 0x31FF) return true;
    // Hangul
    if (cp >= 0xAC00 && cp <= 0xD7A3) return true;
    if (cp >= 0x1100 && cp <= 0x11FF) return true;
    if (cp >= 0x3130 && cp <= 0x318F) return true;
    return false;
}

std::string collapse_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    bool seen_any = false;
    for (uint32_t cp : decode_utf8(text)) {
        if (is_white(cp)) {
            pending_space = seen_any;
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            seen_any = true;
            append_utf8(out, cp);
        }
    }
    return out;
}

}  // namespace geoclean::uni
