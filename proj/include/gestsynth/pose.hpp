#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <vector>

namespace gestsynth {

inline constexpr int kPoseDim = 106;
inline constexpr int kBodyJoints = 24;
inline constexpr int kHandCoeffsPerHand = 12;
inline constexpr int kExpressionCoeffs = 10;
// Body joint whose rotation drives the mouth; its dims are weighted like the face.
inline constexpr int kJawJoint = 22;

using PoseVector = Eigen::Matrix<double, kPoseDim, 1>;
using LossWeights = Eigen::Matrix<double, kPoseDim, 1>;

struct IndexRange {
    int begin;
    int end;
    constexpr int size() const { return end - begin; }
    constexpr bool contains(int i) const { return i >= begin && i < end; }
};

// Body joints as axis-angle triples, then hand PCA coefficients (left, right),
// then expression coefficients.
struct PartLayout {
    IndexRange body{0, 3 * kBodyJoints};
    IndexRange hands{3 * kBodyJoints, 3 * kBodyJoints + 2 * kHandCoeffsPerHand};
    IndexRange expression{3 * kBodyJoints + 2 * kHandCoeffsPerHand, kPoseDim};

    IndexRange left_hand() const { return {hands.begin, hands.begin + kHandCoeffsPerHand}; }
    IndexRange right_hand() const { return {hands.begin + kHandCoeffsPerHand, hands.end}; }
    bool valid() const;
};

struct PoseSequence {
    double fps = 12.0;
    std::vector<PoseVector> frames;

    std::size_t size() const { return frames.size(); }
    bool empty() const { return frames.empty(); }
    double duration() const { return static_cast<double>(frames.size()) / fps; }
};

struct WeightOptions {
    double body = 1.0;
    double hands = 4.0;
    double expression = 100.0;
    // Jaw rotation is the mouth in this parameterization.
    double jaw = 100.0;
};

LossWeights default_weights(const PartLayout& layout = {}, const WeightOptions& opts = {});

PoseVector lerp_pose(const PoseVector& a, const PoseVector& b, double w);

// Sum over t >= 1 of ||frames[t] - frames[t-1]||^2.
double sequence_diff_energy(const PoseSequence& seq);

// Rescales every body axis-angle triple whose norm exceeds pi back onto the
// pi-sphere.
PoseVector clamp_to_canonical(const PoseVector& pose);
bool is_canonical(const PoseVector& pose, double tol = 1e-6);

// "PSEQ 1 <fps> <frame_count> 106" followed by one frame per line.
void write_pose_sequence(const PoseSequence& seq, const std::filesystem::path& path);
PoseSequence read_pose_sequence(const std::filesystem::path& path);

}  // namespace gestsynth
