#include "gestsynth/errors.hpp"
#include "gestsynth/text_features.hpp"

#include <doctest.h>

using namespace gestsynth;

TEST_CASE("pinyin conversion") {
    const PinyinTable empty;
    CHECK(to_pinyin("abc", empty) == "abc");
    CHECK(to_pinyin("AbC", empty) == "abc");
    CHECK_THROWS_AS(to_pinyin("\xE4\xBD\xA0", empty), UnknownCharacter);

    // Two characters with one pronunciation spell identically.
    const PinyinTable table = PinyinTable::parse("\xE5\xB8\x82\tshi4\n\xE4\xBA\x8B\tsh\xC3\xAC\n\xE5\xA5\xB3\tn\xC7\x9A\n");
    CHECK(table.size() == 3);
    CHECK(to_pinyin("\xE5\xB8\x82", table) == "shi");
    CHECK(to_pinyin("\xE5\xB8\x82", table) == to_pinyin("\xE4\xBA\x8B", table));
    CHECK(to_pinyin("\xE5\xA5\xB3", table) == "nv");
}

TEST_CASE("utf8 round-trip") {
    const std::string s = "h\xC3\xA9llo \xE4\xBD\xA0\xE5\xA5\xBD \xF0\x9F\x98\x80";
    CHECK(encode_utf8(decode_utf8(s)) == s);
    CHECK(decode_utf8(s).size() == 10);
}

TEST_CASE("letter frequencies") {
    const Eigen::VectorXd aa = letter_frequencies("aa");
    CHECK(aa[0] == 1.0);
    CHECK(aa.sum() == 1.0);
    CHECK(letter_frequencies("listen") == letter_frequencies("silent"));
    CHECK(letter_frequencies("123!").isZero(0.0));
    CHECK(letter_frequencies("Hello").sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("encode_transcript") {
    SUBCASE("pure pause") {
        TimedTranscript t;
        t.duration = 0.1;
        const FeatureSequence f = encode_transcript(t, 0.01);
        CHECK(f.frame_count() == 10);
        CHECK(f.dim() == 26);
        CHECK(f.values.isZero(0.0));
    }
    SUBCASE("word ab over [0, 0.05)") {
        TimedTranscript t;
        t.words = {{"ab", 0.0, 0.05}};
        t.duration = 0.07;
        const FeatureSequence f = encode_transcript(t, 0.01);
        REQUIRE(f.frame_count() == 7);
        for (int k = 0; k < 5; ++k) {
            CHECK(f.values(k, 0) == 0.5);
            CHECK(f.values(k, 1) == 0.5);
            CHECK(f.values.row(k).sum() == 1.0);
        }
        CHECK(f.values.row(5).isZero(0.0));
        CHECK(f.values.row(6).isZero(0.0));
    }
    SUBCASE("frame sums and permutation invariance") {
        TimedTranscript t;
        t.words = {{"hello", 0.1, 0.4}, {"world", 0.5, 0.9}};
        t.duration = 1.0;
        TimedTranscript u = t;
        std::swap(u.words[0], u.words[1]);
        const FeatureSequence f = encode_transcript(t);
        CHECK(f.values == encode_transcript(u).values);
        for (int k = 0; k < f.frame_count(); ++k) {
            const double s = f.values.row(k).sum();
            CHECK((std::abs(s - 1.0) < 1e-9 || s == 0.0));
        }
    }
}

TEST_CASE("tick_count") {
    CHECK(tick_count(0.1, 0.01) == 10);
    CHECK(tick_count(0.105, 0.01) == 11);
    CHECK(tick_count(0.0, 0.01) == 0);
}

TEST_CASE("transcript parsing") {
    const TimedTranscript t = parse_transcript("# duration_ms 2000\nhello\t0\t500\nworld 600 1100\n\n");
    REQUIRE(t.words.size() == 2);
    CHECK(t.words[1].word == "world");
    CHECK(t.words[1].start == doctest::Approx(0.6));
    CHECK(t.duration == doctest::Approx(2.0));
    CHECK(parse_transcript("a 0 100\n").duration == doctest::Approx(0.1));
    CHECK_THROWS_AS(parse_transcript("a 0\n"), MalformedHeader);
    CHECK(t.valid());
}

TEST_CASE("shipped pinyin table") {
    const PinyinTable table = PinyinTable::load(GESTSYNTH_DATA_DIR "/pinyin.tsv");
    CHECK(table.size() >= 100);
    CHECK(to_pinyin("你好", table) == "nihao");
    CHECK(to_pinyin("女绿", table) == "nvlv");
    CHECK(to_pinyin("的", table) == "de");
}
