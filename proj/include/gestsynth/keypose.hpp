#pragma once

#include "gestsynth/pose.hpp"
#include "gestsynth/text_features.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace gestsynth {

inline constexpr double kDefaultRamp = 0.6;  // seconds
inline constexpr double kDefaultHold = 0.3;  // seconds

struct StillPose {
    PoseVector pose;
    double hold = kDefaultHold;  // seconds
};

struct MotionClip {
    PoseSequence clip;
};

using KeyPose = std::variant<StillPose, MotionClip>;

struct DictEntry {
    std::string word;
    KeyPose pose;
    double probability = 1.0;
};

struct PlannedInsertion {
    double time = 0.0;  // seconds
    DictEntry entry;
};

using InsertionPlan = std::vector<PlannedInsertion>;

// JSON array of {"word", "probability", "kind": "still"|"motion",
// "pose": [106] | "clip_path", "hold_s"}. Clip paths are relative to the file.
std::vector<DictEntry> load_dictionary(const std::filesystem::path& path, double default_hold = kDefaultHold);

std::string lowercase_ascii(std::string s);

// One seeded draw per dictionary hit; a hit is planned at its word start when
// the draw falls below the entry's probability.
InsertionPlan plan_insertions(const TimedTranscript& transcript, const std::vector<DictEntry>& dictionary,
                              std::uint64_t seed);

// Overwrites the hold frames starting at round(t*fps) with `pose` and
// linearly ramps into and out of it over round(ramp*fps) frames per side.
PoseSequence insert_still(const PoseSequence& seq, const PoseVector& pose, double t, double ramp = kDefaultRamp,
                          double hold = kDefaultHold);

PoseSequence insert_motion(const PoseSequence& seq, const PoseSequence& clip, double t,
                           double ramp = kDefaultRamp);

struct AppliedInsertion {
    std::string word;
    double time = 0.0;
    int frame = 0;
};

struct PlanResult {
    PoseSequence sequence;
    std::vector<AppliedInsertion> applied;
    std::vector<AppliedInsertion> skipped;
};

// Applies insertions in time order, skipping any whose modified window
// overlaps an earlier applied one or whose time lies outside the sequence.
PlanResult apply_plan(const PoseSequence& seq, const InsertionPlan& plan, double ramp = kDefaultRamp);

}  // namespace gestsynth
