#include <doctest.h>

#include <fstream>
#include <string>

#include "geoclean/common.hpp"
#include "geoclean/unicode.hpp"

using namespace geoclean;

TEST_CASE("nfkc matches the frozen fixture table") {
    std::ifstream in(std::string(GEOCLEAN_SOURCE_DIR) + "/tests/data/nfkc_cases.tsv",
                     std::ios::binary);
    REQUIRE(in.is_open());
    std::string line;
    size_t cases = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const size_t tab = line.find('\t');
        REQUIRE(tab != std::string::npos);
        const std::string input = line.substr(0, tab);
        const std::string expected = line.substr(tab + 1);
        CHECK_MESSAGE(uni::nfkc(input) == expected, "input: ", input);
        ++cases;
    }
    CHECK(cases >= 30);
}

TEST_CASE("nfkc folds compatibility forms") {
    CHECK(uni::nfkc("ﬁne") == "fine");             // fi ligature
    CHECK(uni::nfkc("①②") == "12");           // circled digits
    CHECK(uni::nfkc("㎡") == "m2");                 // square-metre sign
    CHECK(uni::nfkc("Ｈｅｌｌｏ") == "Hello");  // fullwidth
}

TEST_CASE("decode and encode round-trip, including astral codepoints") {
    const std::string text = "aé世\U0001F600z";
    const auto cps = uni::decode_utf8(text);
    REQUIRE(cps.size() == 5);
    CHECK(cps[0] == U'a');
    CHECK(cps[3] == 0x1F600);
    CHECK(uni::encode_utf8(cps) == text);
}

TEST_CASE("invalid bytes decode to U+FFFD") {
    const std::string bad = "a\xFF\x80z";
    const auto cps = uni::decode_utf8(bad);
    REQUIRE(cps.size() >= 3);
    CHECK(cps.front() == U'a');
    CHECK(cps.back() == U'z');
    bool has_replacement = false;
    for (uint32_t cp : cps) has_replacement |= cp == 0xFFFD;
    CHECK(has_replacement);
}

TEST_CASE("valid_utf8 accepts well-formed text and rejects malformed bytes") {
    CHECK(uni::valid_utf8(""));
    CHECK(uni::valid_utf8("plain ascii"));
    CHECK(uni::valid_utf8("é世\U0001F600"));
    CHECK_FALSE(uni::valid_utf8("\xFF"));
    CHECK_FALSE(uni::valid_utf8("\x80"));            // lone continuation byte
    CHECK_FALSE(uni::valid_utf8("\xC3"));            // truncated sequence
    CHECK_FALSE(uni::valid_utf8("\xC0\xAF"));        // overlong encoding
    CHECK_FALSE(uni::valid_utf8("\xED\xA0\x80"));    // surrogate half
}

TEST_CASE("character class predicates") {
    CHECK(uni::is_white(U' '));
    CHECK(uni::is_white(U'\t'));
    CHECK(uni::is_white(0x3000));  // ideographic space
    CHECK_FALSE(uni::is_white(U'a'));

    CHECK(uni::is_punct_or_symbol(U'.'));
    CHECK(uni::is_punct_or_symbol(U'$'));
    CHECK(uni::is_punct_or_symbol(0xA9));  // copyright sign
    CHECK_FALSE(uni::is_punct_or_symbol(U'a'));
    CHECK_FALSE(uni::is_punct_or_symbol(U'1'));
    CHECK_FALSE(uni::is_punct_or_symbol(U' '));

    CHECK(uni::is_decimal_digit(U'7'));
    CHECK(uni::is_decimal_digit(0x0667));  // Arabic-Indic seven
    CHECK_FALSE(uni::is_decimal_digit(0x2166));  // Roman numeral seven: Nl, not Nd
    CHECK_FALSE(uni::is_decimal_digit(U'x'));
}

TEST_CASE("lowercasing is per-codepoint") {
    CHECK(uni::lower("HeLLo") == "hello");
    CHECK(uni::lower("ΑΒΓ") == "αβγ");  // Greek capitals
    CHECK(uni::lower("ÉTude") == "étude");
}

TEST_CASE("cjk ranges cover the main blocks and nothing else") {
    CHECK(uni::is_cjk(0x4E16));   // Han
    CHECK(uni::is_cjk(0x3400));   // Han extension A
    CHECK(uni::is_cjk(0x20000));  // Han extension B
    CHECK(uni::is_cjk(0x3042));   // Hiragana
    CHECK(uni::is_cjk(0x30A2));   // Katakana
    CHECK(uni::is_cjk(0xAC00));   // Hangul syllable
    CHECK(uni::is_cjk(0x1100));   // Hangul jamo
    CHECK_FALSE(uni::is_cjk(U'a'));
    CHECK_FALSE(uni::is_cjk(0x0431));  // Cyrillic
    CHECK_FALSE(uni::is_cjk(0x05d0));  // Hebrew
    CHECK_FALSE(uni::is_cjk(0x3001));  // CJK punctuation, not a word character
}

TEST_CASE("collapse_whitespace folds runs and trims ends") {
    CHECK(uni::collapse_whitespace("  a \t\n b  ") == "a b");
    CHECK(uni::collapse_whitespace("a　b") == "a b");
    CHECK(uni::collapse_whitespace("   ") == "");
    CHECK(uni::collapse_whitespace("") == "");
    CHECK(uni::collapse_whitespace("solo") == "solo");
}

TEST_CASE("format_double renders integers and fractions plainly") {
    CHECK(format_double(50.0) == "50");
    CHECK(format_double(100.0) == "100");
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(-3.59) == "-3.59");
    CHECK(format_double(0.0) == "0");
}
