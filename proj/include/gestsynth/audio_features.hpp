#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace gestsynth {

inline constexpr int kAudioFeatureDim = 28;
inline constexpr int kStaticFeatureDim = 14;
inline constexpr int kMelFilters = 40;
inline constexpr int kCepstralCoeffs = 13;
inline constexpr double kFeatureStride = 0.010;
inline constexpr double kFeatureWindow = 0.025;
inline constexpr double kLogFloor = 1e-10;

struct AudioBuffer {
    std::vector<double> samples;
    int sample_rate = 16000;

    double duration() const {
        return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
    }
};

// Frames stored row-wise; frame k is stamped at k * stride.
struct FeatureSequence {
    double stride = kFeatureStride;
    Eigen::MatrixXd values;  // frames x dim

    int frame_count() const { return static_cast<int>(values.rows()); }
    int dim() const { return static_cast<int>(values.cols()); }
    double timestamp(int k) const { return k * stride; }
};

AudioBuffer read_wav(const std::filesystem::path& path);
void write_wav(const AudioBuffer& audio, const std::filesystem::path& path);

double rms(const AudioBuffer& audio);
AudioBuffer rms_normalize(const AudioBuffer& audio, double target_rms = 0.1);
AudioBuffer add_white_noise(const AudioBuffer& audio, double amplitude, std::uint64_t seed);

// Triangular mel filter bank over the bins of an n_fft-point DFT.
// Row m holds filter m's weight at bin k (frequency k * sample_rate / n_fft).
struct MelFilterBank {
    Eigen::MatrixXd weights;      // kMelFilters x (n_fft/2 + 1)
    std::vector<double> edges_hz; // kMelFilters + 2 corner frequencies
};

MelFilterBank mel_filter_bank(int n_fft, int sample_rate, int n_filters = kMelFilters);

struct FrameGeometry {
    int window = 0;  // samples per analysis window
    int hop = 0;     // samples between window starts
    int count = 0;   // number of full windows
};
FrameGeometry frame_geometry(std::size_t n_samples, int sample_rate);

// Per-window mel filter-bank energies of the Hamming-windowed power spectrum
// (frames x kMelFilters), before the logarithm.
Eigen::MatrixXd filter_bank_energies(const AudioBuffer& audio);

// 28-D features: 13 cepstral coefficients, log mean window energy, then the
// first difference of those 14 (zero for frame 0).
FeatureSequence mfcc_features(const AudioBuffer& audio);

// "FEAT 1 <stride> <frame_count> <dim>" followed by one frame per line.
void write_features(const FeatureSequence& f, const std::filesystem::path& path);
FeatureSequence read_features(const std::filesystem::path& path);

}  // namespace gestsynth
