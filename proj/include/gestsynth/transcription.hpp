#pragma once

#include "gestsynth/audio_features.hpp"
#include "gestsynth/text_features.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace gestsynth {

// Source of word timestamps: speech-to-text for recorded audio, and the word
// timing a text-to-speech engine reports for text.
class TranscriptionProvider {
   public:
    virtual ~TranscriptionProvider() = default;
    virtual TimedTranscript transcribe(const AudioBuffer& audio) const = 0;
    virtual TimedTranscript synthesize_timing(std::string_view text, double rate_wps) const = 0;
};

// Words spaced back to back, each lasting 1/rate_wps seconds.
TimedTranscript uniform_timing(std::string_view text, double rate_wps);

// Reads the transcript sidecar and checks it against the audio duration.
TimedTranscript mock_transcribe(const AudioBuffer& audio, const std::filesystem::path& sidecar_path);

// Default sidecar location: the audio path with a .txt extension.
std::filesystem::path sidecar_for(const std::filesystem::path& audio_path);

// Offline provider backed by a sidecar transcript file and uniform timing.
class FileTranscriptionProvider final : public TranscriptionProvider {
   public:
    explicit FileTranscriptionProvider(std::filesystem::path sidecar) : sidecar_(std::move(sidecar)) {}

    TimedTranscript transcribe(const AudioBuffer& audio) const override {
        return mock_transcribe(audio, sidecar_);
    }
    TimedTranscript synthesize_timing(std::string_view text, double rate_wps) const override {
        return uniform_timing(text, rate_wps);
    }

   private:
    std::filesystem::path sidecar_;
};

}  // namespace gestsynth
