#pragma once

#include "gestsynth/audio_features.hpp"
#include "gestsynth/pose.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace gestsynth {

inline constexpr int kLstmLayers = 2;
inline constexpr int kDefaultHidden = 300;

// Two stacked LSTM layers and a linear readout. Each layer's W is
// 4H x (input + H) acting on [x; h_prev], gate rows ordered input, forget,
// cell candidate, output.
struct LstmParams {
    int input_dim = 0;
    int hidden = 0;
    int output_dim = kPoseDim;
    std::array<Eigen::MatrixXd, kLstmLayers> W;
    std::array<Eigen::VectorXd, kLstmLayers> b;
    Eigen::MatrixXd Wy;  // output x H
    Eigen::VectorXd by;

    static LstmParams zeros(int input_dim, int hidden, int output_dim = kPoseDim);
    // Uniform in +-1/sqrt(fan_in) from a seeded generator.
    static LstmParams random(int input_dim, int hidden, int output_dim, std::uint64_t seed);

    static constexpr int kBlocks = 2 * kLstmLayers + 2;
    static const std::array<std::string, kBlocks>& block_names();
    std::array<Eigen::Map<Eigen::VectorXd>, kBlocks> blocks();
    std::array<Eigen::Map<const Eigen::VectorXd>, kBlocks> blocks() const;
    std::size_t parameter_count() const;
    bool all_finite() const;
};

// Activations kept by lstm_forward for backward, one column per (step, sequence)
// with column index t * batch + b. Sequences of unequal length are right-padded;
// padded steps carry no loss and so no gradient.
struct ForwardCache {
    int steps = 0;
    int batch = 0;
    std::array<Eigen::MatrixXd, kLstmLayers> input;   // layer input x
    std::array<Eigen::MatrixXd, kLstmLayers> h_prev;  // H, hidden state entering the step
    std::array<Eigen::MatrixXd, kLstmLayers> gates;   // 4H, activated
    std::array<Eigen::MatrixXd, kLstmLayers> cell;    // H
    std::array<Eigen::MatrixXd, kLstmLayers> hidden;  // H
};

// inputs[b] is input_dim x T_b; returns output_dim x T_b per sequence.
std::vector<Eigen::MatrixXd> lstm_forward(const LstmParams& params, std::span<const Eigen::MatrixXd> inputs,
                                          ForwardCache* cache = nullptr);

// Exact parameter gradients given dLoss/dOutput per sequence (output_dim x T_b).
LstmParams lstm_backward(const LstmParams& params, const ForwardCache& cache,
                         std::span<const Eigen::MatrixXd> output_grads);

// (1/T) sum_t sum_i w_i (pred - target)^2 + lambda * diff_energy(pred) / T over
// output_dim x T matrices. Writes dLoss/dPred when grad is non-null.
double weighted_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target, const LossWeights& w,
                     double lambda, Eigen::MatrixXd* grad = nullptr);
double weighted_loss(const PoseSequence& pred, const PoseSequence& target, const LossWeights& w, double lambda);

struct AdamOptions {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    LstmParams m;
    LstmParams v;
    long long step = 0;

    static AdamState for_params(const LstmParams& p);
};

void adam_step(LstmParams& params, const LstmParams& grads, AdamState& state, double lr,
               const AdamOptions& opts = {});

Eigen::MatrixXd pose_matrix(const PoseSequence& seq);  // 106 x T
PoseSequence pose_sequence_from_matrix(const Eigen::MatrixXd& m, double fps);

// Input vector per pose frame: mean of the feature frames stamped inside
// [t/fps, (t+1)/fps); empty intervals reuse the last earlier frame. Returns
// dim x frames; frames < 0 means round(feature duration * fps).
Eigen::MatrixXd align_features_to_pose_clock(const FeatureSequence& features, double fps, int frames = -1);

int delay_frames(double delay_seconds, double fps);
// Target at step t becomes the original target at t - d; the first d steps
// repeat frame 0.
PoseSequence apply_output_delay(const PoseSequence& targets, double delay_seconds);
Eigen::MatrixXd shift_targets(const Eigen::MatrixXd& targets, int d);

struct TrainingPair {
    FeatureSequence input;
    PoseSequence target;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 100;       // sequences per Adam step
    double delay = 0.2;         // seconds
    double smoothness = 0.1;    // lambda
    int epochs = 100;
    std::uint64_t seed = 0;
    int hidden = kDefaultHidden;
    LossWeights weights = default_weights();
    AdamOptions adam;
};

struct PoseRegressor {
    LstmParams params;
    Eigen::VectorXd input_mean;
    Eigen::VectorXd input_var;
    int delay_frames = 0;

    Eigen::MatrixXd standardize(const Eigen::MatrixXd& x) const;
};

struct TrainResult {
    PoseRegressor model;
    std::vector<double> loss_history;  // mean per-sequence loss seen in each epoch
    long long steps = 0;
};

TrainResult train(std::span<const TrainingPair> pairs, const TrainConfig& cfg);

// Standardize, run the network (feeding d extra copies of the last input so
// the delayed outputs line up), clamp to canonical axis-angle ranges.
PoseSequence infer(const PoseRegressor& model, const FeatureSequence& features, double fps, int frames = -1);

void save_model(const PoseRegressor& model, const std::filesystem::path& path);
PoseRegressor load_model(const std::filesystem::path& path);

}  // namespace gestsynth
