#pragma once

#include "gestsynth/audio_features.hpp"
#include "gestsynth/keypose.hpp"
#include "gestsynth/seq_model.hpp"
#include "gestsynth/skeleton.hpp"
#include "gestsynth/text_features.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gestsynth {

struct PipelineConfig {
    double fps = 12.0;
    double ramp_s = kDefaultRamp;
    double hold_s = kDefaultHold;
    double delay_s = 0.2;
    double lr = 1e-3;
    int batch = 100;
    int hidden = kDefaultHidden;
    double lambda = 0.1;
    int epochs = 200;
    std::uint64_t seed = 0;
    double noise_amplitude = 0.0;
    double target_rms = 0.1;
    double text_stride = kFeatureStride;
    double words_per_second = 2.5;
    int fit_iterations = 500;
    double fit_lr = 0.01;
    std::uint64_t basis_seed = 7;
    Vec3 global_orient = Vec3::Zero();
    int crop_size = 128;
    int hand_radius = 12;

    std::filesystem::path model;
    std::filesystem::path dictionary;
    std::filesystem::path skeleton;
    std::filesystem::path camera;
    std::filesystem::path pinyin_table;

    // Flat "key = value" file; '#' starts a comment. Relative paths resolve
    // against the file's directory.
    static PipelineConfig load(const std::filesystem::path& path);
    void set(const std::string& key, const std::string& value, const std::filesystem::path& base = {});
    void validate() const;

    SkeletonModel load_skeleton() const;
    Camera load_camera() const;
    TrainConfig train_config() const;
};

void write_config(const PipelineConfig& cfg, const std::filesystem::path& path);

// rms_normalize, then optional white noise, then MFCC.
FeatureSequence audio_features_for(const AudioBuffer& audio, const PipelineConfig& cfg);
// Words go through pinyin conversion (if a table is configured) and the letter encoding.
FeatureSequence text_features_for(const TimedTranscript& transcript, const PipelineConfig& cfg);

struct FeaturesRequest {
    std::optional<std::filesystem::path> audio;
    std::optional<std::filesystem::path> transcript;
    std::filesystem::path output;
};
FeatureSequence cmd_features(const FeaturesRequest& req, const PipelineConfig& cfg);

struct FitRequest {
    std::filesystem::path detections;
    std::filesystem::path output;
    std::filesystem::path report;
};
SequenceFit cmd_fit(const FitRequest& req, const PipelineConfig& cfg);

struct TrainRequest {
    std::filesystem::path features_dir;
    std::filesystem::path poses_dir;
    std::filesystem::path model_out;
    std::filesystem::path history_csv;
};
TrainResult cmd_train(const TrainRequest& req, const PipelineConfig& cfg);

struct SynthesizeRequest {
    std::optional<std::filesystem::path> audio;
    std::optional<std::filesystem::path> sidecar;
    std::optional<std::filesystem::path> transcript;
    std::optional<std::string> text;
    std::filesystem::path output_dir;
    bool render = true;
};
struct SynthesizeResult {
    PoseSequence poses;
    std::vector<AppliedInsertion> insertions;
    int frames_rendered = 0;
};
SynthesizeResult cmd_synthesize(const SynthesizeRequest& req, const PipelineConfig& cfg, std::ostream* log = nullptr);

struct EvalMouthRequest {
    std::filesystem::path poses;
    std::filesystem::path detections;
    std::filesystem::path report;
    bool rest_baseline = false;
};
struct MouthEvaluation {
    double mean_px = 0.0;
    std::optional<double> rest_baseline_px;
    int frames = 0;
};
// Mean over frames and positive-confidence mouth landmarks of the pixel distance.
double mouth_error(const SkeletonModel& model, const Camera& camera, const Vec3& global_orient,
                   const PoseSequence& poses, const std::vector<Detection2D>& detections);
MouthEvaluation cmd_eval_mouth(const EvalMouthRequest& req, const PipelineConfig& cfg);

struct SyntheticOptions {
    int clips = 4;
    double clip_duration = 3.0;  // seconds
    int sample_rate = 16000;
    double corrupt_fraction = 0.05;
    int epochs = 150;
    int hidden = kDefaultHidden;
};
struct SyntheticCorpus {
    std::vector<std::string> clip_names;
    std::filesystem::path config;
};
SyntheticCorpus cmd_make_synthetic(const std::filesystem::path& out_dir, const PipelineConfig& cfg,
                                   const SyntheticOptions& opts = {});

// Deterministic pose associated with a vocabulary word in the synthetic corpus.
PoseVector synthetic_word_pose(const std::string& word);
const std::vector<std::string>& synthetic_vocabulary();

}  // namespace gestsynth
