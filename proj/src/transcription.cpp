#include "gestsynth/transcription.hpp"

#include "gestsynth/errors.hpp"
#include "text_io.hpp"

namespace gestsynth {

TimedTranscript uniform_timing(std::string_view text, double rate_wps) {
    if (!(rate_wps > 0.0)) throw InvalidArgument("words per second must be positive");
    TimedTranscript t;
    const double span = 1.0 / rate_wps;
    for (const auto word : detail::split_ws(text)) {
        const double start = static_cast<double>(t.words.size()) * span;
        t.words.push_back({std::string(word), start, start + span});
    }
    t.duration = static_cast<double>(t.words.size()) * span;
    return t;
}

TimedTranscript mock_transcribe(const AudioBuffer& audio, const std::filesystem::path& sidecar_path) {
    if (!std::filesystem::exists(sidecar_path)) throw MissingSidecar(sidecar_path.string() + " does not exist");
    TimedTranscript t = read_transcript(sidecar_path);
    const double duration = audio.duration();
    for (const auto& w : t.words) {
        if (w.end > duration + 1e-9) {
            throw TimestampBeyondAudio("word '" + w.word + "' ends at " + std::to_string(w.end) +
                                       " s, audio lasts " + std::to_string(duration) + " s");
        }
    }
    t.duration = duration;
    return t;
}

std::filesystem::path sidecar_for(const std::filesystem::path& audio_path) {
    std::filesystem::path p = audio_path;
    p.replace_extension(".txt");
    return p;
}

}  // namespace gestsynth
