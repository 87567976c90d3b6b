#pragma once

#include "gestsynth/audio_features.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gestsynth {

inline constexpr int kTextFeatureDim = 26;

struct TimedWord {
    std::string word;
    double start = 0.0;  // seconds
    double end = 0.0;
};

struct TimedTranscript {
    std::vector<TimedWord> words;
    double duration = 0.0;

    // Sorted, non-overlapping, positive-length words ending by `duration`.
    bool valid() const;
};

// Character -> toneless pinyin over a-z.
class PinyinTable {
   public:
    PinyinTable() = default;

    // Tab-separated "char<TAB>pinyin" lines. Tone digits and tone diacritics
    // are stripped; u-umlaut becomes 'v'.
    static PinyinTable load(const std::filesystem::path& path);
    static PinyinTable parse(std::string_view text);

    void insert(char32_t c, std::string pinyin);
    const std::string* find(char32_t c) const;
    std::size_t size() const { return map_.size(); }

   private:
    std::unordered_map<char32_t, std::string> map_;
};

std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

// Latin letters lowercased, table characters replaced by their pinyin, ASCII
// non-letters dropped. Throws UnknownCharacter for anything else.
std::string to_pinyin(std::string_view text, const PinyinTable& table);

// Normalized a-z letter histogram of a word; all zeros if it has no letters.
Eigen::VectorXd letter_frequencies(std::string_view word);

// One 26-D frame per stride tick over [0, duration).
FeatureSequence encode_transcript(const TimedTranscript& transcript, double stride = kFeatureStride);

// "word<TAB>start_ms<TAB>end_ms" per line. A "# duration_ms <N>" comment sets
// the duration; otherwise it is the last word's end.
TimedTranscript read_transcript(const std::filesystem::path& path);
TimedTranscript parse_transcript(std::string_view text, const std::string& context = "transcript");
void write_transcript(const TimedTranscript& t, const std::filesystem::path& path);

// Number of ticks k*stride that fall in [0, duration).
int tick_count(double duration, double stride);

}  // namespace gestsynth
