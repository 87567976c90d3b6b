#include "gestsynth/text_features.hpp"

#include "gestsynth/errors.hpp"
#include "text_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace gestsynth {

namespace {

// Tolerance for landing exactly on a tick when times are decimal fractions.
constexpr double kTickEps = 1e-6;

int first_tick_at_or_after(double t, double stride) {
    return static_cast<int>(std::ceil(t / stride - kTickEps));
}

char strip_tone_mark(char32_t c) {
    switch (c) {
        case U'ā': case U'á': case U'ǎ': case U'à': return 'a';
        case U'ē': case U'é': case U'ě': case U'è': return 'e';
        case U'ī': case U'í': case U'ǐ': case U'ì': return 'i';
        case U'ō': case U'ó': case U'ǒ': case U'ò': return 'o';
        case U'ū': case U'ú': case U'ǔ': case U'ù': return 'u';
        case U'ü': case U'ǖ': case U'ǘ': case U'ǚ': case U'ǜ': return 'v';
        case U'ń': case U'ň': case U'ǹ': return 'n';
        default: break;
    }
    if (c >= U'a' && c <= U'z') return static_cast<char>(c);
    if (c >= U'A' && c <= U'Z') return static_cast<char>(c - U'A' + U'a');
    return 0;
}

}  // namespace

bool TimedTranscript::valid() const {
    double prev_end = 0.0;
    for (const auto& w : words) {
        if (!(w.start < w.end) || w.start < prev_end - 1e-12 || w.start < 0.0) return false;
        prev_end = w.end;
    }
    return prev_end <= duration + 1e-9;
}

std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    std::size_t i = 0;
    while (i < s.size()) {
        const auto b = static_cast<unsigned char>(s[i]);
        int len = 0;
        char32_t c = 0;
        if (b < 0x80) { c = b; len = 1; }
        else if ((b & 0xE0) == 0xC0) { c = b & 0x1F; len = 2; }
        else if ((b & 0xF0) == 0xE0) { c = b & 0x0F; len = 3; }
        else if ((b & 0xF8) == 0xF0) { c = b & 0x07; len = 4; }
        else throw InvalidArgument("invalid UTF-8 lead byte");
        if (i + len > s.size()) throw InvalidArgument("truncated UTF-8 sequence");
        for (int k = 1; k < len; ++k) {
            const auto cb = static_cast<unsigned char>(s[i + k]);
            if ((cb & 0xC0) != 0x80) throw InvalidArgument("invalid UTF-8 continuation byte");
            c = (c << 6) | (cb & 0x3F);
        }
        out += c;
        i += len;
    }
    return out;
}

std::string encode_utf8(std::u32string_view s) {
    std::string out;
    for (char32_t c : s) {
        if (c < 0x80) {
            out += static_cast<char>(c);
        } else if (c < 0x800) {
            out += static_cast<char>(0xC0 | (c >> 6));
            out += static_cast<char>(0x80 | (c & 0x3F));
        } else if (c < 0x10000) {
            out += static_cast<char>(0xE0 | (c >> 12));
            out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (c & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (c >> 18));
            out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (c & 0x3F));
        }
    }
    return out;
}

PinyinTable PinyinTable::load(const std::filesystem::path& path) {
    return parse(detail::read_text_file(path));
}

PinyinTable PinyinTable::parse(std::string_view text) {
    PinyinTable table;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        const auto line = detail::trim(text.substr(start, nl - start));
        start = nl + 1;
        if (line.empty() || line.front() == '#') continue;
        const auto fields = detail::split_ws(line);
        if (fields.size() != 2) throw MalformedHeader("pinyin table line: '" + std::string(line) + "'");
        const auto key = decode_utf8(fields[0]);
        if (key.size() != 1) throw MalformedHeader("pinyin key must be one character");
        std::string pinyin;
        for (char32_t c : decode_utf8(fields[1])) {
            if (c >= U'0' && c <= U'9') continue;
            const char base = strip_tone_mark(c);
            if (!base) throw MalformedHeader("pinyin value has non-letter characters");
            pinyin += base;
        }
        if (pinyin.empty()) throw MalformedHeader("empty pinyin value");
        table.insert(key[0], std::move(pinyin));
    }
    return table;
}

void PinyinTable::insert(char32_t c, std::string pinyin) { map_[c] = std::move(pinyin); }

const std::string* PinyinTable::find(char32_t c) const {
    auto it = map_.find(c);
    return it == map_.end() ? nullptr : &it->second;
}

std::string to_pinyin(std::string_view text, const PinyinTable& table) {
    std::string out;
    for (char32_t c : decode_utf8(text)) {
        if (c >= U'A' && c <= U'Z') {
            out += static_cast<char>(c - U'A' + U'a');
        } else if (c >= U'a' && c <= U'z') {
            out += static_cast<char>(c);
        } else if (const std::string* p = table.find(c)) {
            out += *p;
        } else if (c < 0x80) {
            continue;
        } else {
            throw UnknownCharacter(c);
        }
    }
    return out;
}

Eigen::VectorXd letter_frequencies(std::string_view word) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(kTextFeatureDim);
    int letters = 0;
    for (char ch : word) {
        const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (c >= 'a' && c <= 'z') {
            v[c - 'a'] += 1.0;
            ++letters;
        }
    }
    if (letters > 0) v /= letters;
    return v;
}

int tick_count(double duration, double stride) {
    if (!(stride > 0.0)) throw InvalidArgument("stride must be positive");
    if (duration <= 0.0) return 0;
    return first_tick_at_or_after(duration, stride);
}

FeatureSequence encode_transcript(const TimedTranscript& transcript, double stride) {
    const int n = tick_count(transcript.duration, stride);
    FeatureSequence out;
    out.stride = stride;
    out.values = Eigen::MatrixXd::Zero(n, kTextFeatureDim);
    for (const auto& w : transcript.words) {
        const Eigen::VectorXd enc = letter_frequencies(w.word);
        if (enc.isZero(0.0)) continue;
        const int first = std::max(0, first_tick_at_or_after(w.start, stride));
        const int last = std::min(n, first_tick_at_or_after(w.end, stride));
        for (int k = first; k < last; ++k) out.values.row(k) = enc.transpose();
    }
    return out;
}

TimedTranscript parse_transcript(std::string_view text, const std::string& context) {
    TimedTranscript t;
    double explicit_duration = -1.0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        const auto line = detail::trim(text.substr(start, nl - start));
        start = nl + 1;
        if (line.empty()) continue;
        const auto fields = detail::split_ws(line);
        if (line.front() == '#') {
            if (fields.size() == 3 && fields[1] == "duration_ms") {
                explicit_duration = detail::parse_double(fields[2], context) / 1000.0;
            }
            continue;
        }
        if (fields.size() != 3) throw MalformedHeader(context + ": expected 'word start_ms end_ms'");
        TimedWord w;
        w.word = std::string(fields[0]);
        w.start = detail::parse_double(fields[1], context) / 1000.0;
        w.end = detail::parse_double(fields[2], context) / 1000.0;
        t.words.push_back(std::move(w));
    }
    std::stable_sort(t.words.begin(), t.words.end(),
                     [](const TimedWord& a, const TimedWord& b) { return a.start < b.start; });
    t.duration = explicit_duration >= 0.0 ? explicit_duration
                                          : (t.words.empty() ? 0.0 : t.words.back().end);
    if (!t.valid()) throw MalformedHeader(context + ": words overlap, are empty, or exceed the duration");
    return t;
}

TimedTranscript read_transcript(const std::filesystem::path& path) {
    return parse_transcript(detail::read_text_file(path), path.string());
}

void write_transcript(const TimedTranscript& t, const std::filesystem::path& path) {
    std::string out = "# duration_ms " + detail::format_double(t.duration * 1000.0) + "\n";
    for (const auto& w : t.words) {
        out += w.word + "\t" + detail::format_double(w.start * 1000.0) + "\t" +
               detail::format_double(w.end * 1000.0) + "\n";
    }
    detail::write_text_file(path, out);
}

}  // namespace gestsynth
