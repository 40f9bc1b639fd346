#include <doctest.h>

#include <algorithm>
#include <set>

#include "geoclean/dedup.hpp"
#include "geoclean/rng.hpp"
#include "oracles.hpp"
#include "synth.hpp"

using namespace geoclean;

namespace {

Sample make_sample(const std::string& parent, uint32_t index, const std::string& text) {
    return Sample{parent, index, text};
}

}  // namespace

TEST_CASE("normalization folds case, digits, punctuation, and width") {
    CHECK(normalize_for_hash("Hello, WORLD!") == normalize_for_hash("hello world"));
    CHECK(normalize_for_hash("A1-B2") == "a0b0");  // punctuation removed without a space
    CHECK(normalize_for_hash("Tel: 123-456") == "tel 000000");
    CHECK(normalize_for_hash("Ｈｅｌｌｏ！") == "hello");
    CHECK(normalize_for_hash("  a \t\n b  ") == "a b");
    CHECK(normalize_for_hash("ﬁne") == "fine");
    CHECK(normalize_for_hash("price $25.00") == "price 0000");
    CHECK(normalize_for_hash("") == "");
    CHECK(normalize_for_hash("!!!") == "");
}

TEST_CASE("sha-1 reproduces the published test vectors") {
    for (const auto& v : oracles::kSha1Vectors) CHECK(hash_sample(v.message).hex() == v.digest_hex);
}

TEST_CASE("all members of a collision group are removed") {
    const std::vector<Sample> samples = {
        make_sample("a", 0, "unique one"),
        make_sample("a", 1, "Repeated text!"),
        make_sample("b", 0, "repeated TEXT"),
        make_sample("b", 1, "unique two"),
        make_sample("c", 0, "repeated, text"),
        make_sample("c", 1, "unique three"),
    };
    const DedupResult r = dedup_samples(samples);
    REQUIRE(r.kept.size() == 3);
    CHECK(r.kept[0].text == "unique one");
    CHECK(r.kept[1].text == "unique two");
    CHECK(r.kept[2].text == "unique three");
    REQUIRE(r.removed.size() == 3);
    CHECK(r.stats.input_samples == 6);
    CHECK(r.stats.kept_samples == 3);
    CHECK(r.stats.removed_samples == 3);
    CHECK(r.stats.distinct_collision_groups == 1);
    CHECK(r.stats.removed_words == 6);  // three two-word samples

    // every removal record carries the digest of the normalized text
    const std::string expected_digest = hash_sample(normalize_for_hash("Repeated text!")).hex();
    for (const auto& rec : r.removed) CHECK(rec.digest_hex == expected_digest);
}

TEST_CASE("dedup keeps input order and is idempotent") {
    std::vector<Sample> samples;
    for (uint32_t i = 0; i < 20; ++i)
        samples.push_back(
            make_sample("p", i, std::string("sample letter ") + static_cast<char>('a' + i)));
    samples.push_back(make_sample("p", 20, "sample number 3"));
    samples.push_back(make_sample("p", 21, "sample number 8"));

    const DedupResult first = dedup_samples(samples);
    // "sample number 3" and "sample number 8" both normalize to
    // "sample number 0"; the lettered samples stay distinct
    CHECK(first.stats.distinct_collision_groups == 1);
    CHECK(first.stats.removed_samples == 2);
    REQUIRE(first.kept.size() == 20);
    CHECK(std::is_sorted(first.kept.begin(), first.kept.end(),
                         [](const Sample& a, const Sample& b) { return a.index < b.index; }));

    const DedupResult second = dedup_samples(first.kept);
    CHECK(second.removed.empty());
    CHECK(second.kept.size() == first.kept.size());
}

TEST_CASE("kept membership is invariant under permutation") {
    Rng rng(555);
    const auto lang = synth::make_language("qaa", synth::alphabet(0), 100, 77);
    std::vector<Sample> samples;
    for (uint32_t i = 0; i < 200; ++i)
        samples.push_back(make_sample("p", i, synth::make_line(lang, rng, 6)));
    for (uint32_t i = 0; i < 30; ++i)  // plant duplicates of existing lines
        samples.push_back(make_sample("q", i, samples[rng.below(200)].text));

    auto membership = [](const DedupResult& r) {
        std::set<std::pair<std::string, uint32_t>> keys;
        for (const Sample& s : r.kept) keys.insert({s.parent_id, s.index});
        return keys;
    };
    const auto base = membership(dedup_samples(samples));
    std::vector<Sample> shuffled = samples;
    rng.shuffle(shuffled);
    CHECK(membership(dedup_samples(shuffled)) == base);
}

TEST_CASE("word accounting balances exactly") {
    Rng rng(556);
    const auto lang = synth::make_language("qaa", synth::alphabet(0), 100, 78);
    std::vector<Sample> samples;
    uint64_t total_words = 0;
    for (uint32_t i = 0; i < 100; ++i) {
        samples.push_back(make_sample("p", i, synth::make_line(lang, rng, 1 + rng.below(10))));
        total_words += count_words(samples.back().text);
    }
    samples.push_back(make_sample("p", 100, samples[0].text));
    total_words += count_words(samples[0].text);

    const DedupResult r = dedup_samples(samples);
    uint64_t kept_words = 0;
    for (const Sample& s : r.kept) kept_words += count_words(s.text);
    CHECK(kept_words + r.stats.removed_words == total_words);
}

TEST_CASE("near-duplicates collide only when normalization says so") {
    const DedupResult r = dedup_samples({
        make_sample("a", 0, "The   quick fox"),
        make_sample("a", 1, "the quick FOX"),
        make_sample("a", 2, "the quick foxes"),  // genuinely different
    });
    REQUIRE(r.kept.size() == 1);
    CHECK(r.kept[0].text == "the quick foxes");
    CHECK(r.stats.removed_samples == 2);
}
