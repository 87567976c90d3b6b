#include "gestsynth/keypose.hpp"

#include "gestsynth/errors.hpp"
#include "gestsynth/random.hpp"
#include "text_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

namespace gestsynth {

namespace {

int to_frame(double seconds, double fps) { return static_cast<int>(std::lround(seconds * fps)); }

struct Window {
    int first;  // first modified frame
    int last;   // last modified frame
};

// Overwrites frames [k, k + span) with body(i) and ramps on both sides.
template <class Body>
PoseSequence overwrite_with_ramps(const PoseSequence& seq, int k, int span, int ramp_frames, Body&& body,
                                  Window* window = nullptr) {
    PoseSequence out = seq;
    const int n = static_cast<int>(seq.size());
    const int end = std::min(n, k + span);  // exclusive
    for (int f = k; f < end; ++f) out.frames[f] = body(f - k);
    const PoseVector& first_key = out.frames[k];
    const PoseVector& last_key = out.frames[end - 1];

    const int in_ramp = std::min(ramp_frames, k);
    if (in_ramp > 0) {
        const PoseVector& start = seq.frames[k - in_ramp];
        for (int i = 1; i < in_ramp; ++i) {
            out.frames[k - in_ramp + i] = lerp_pose(start, first_key, static_cast<double>(i) / in_ramp);
        }
    }
    const int out_ramp = std::min(ramp_frames, n - end);
    if (out_ramp > 0) {
        const PoseVector& stop = seq.frames[end - 1 + out_ramp];
        for (int i = 1; i < out_ramp; ++i) {
            out.frames[end - 1 + i] = lerp_pose(last_key, stop, static_cast<double>(i) / out_ramp);
        }
    }
    if (window) *window = {k - std::max(0, in_ramp - 1), end - 1 + std::max(0, out_ramp - 1)};
    return out;
}

void check_time(const PoseSequence& seq, double t, int k) {
    if (!(t >= 0.0) || k < 0 || k >= static_cast<int>(seq.size())) {
        throw OutOfRange("insertion time " + std::to_string(t) + " s is outside the sequence");
    }
}

}  // namespace

std::string lowercase_ascii(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<DictEntry> load_dictionary(const std::filesystem::path& path, double default_hold) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(detail::read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedHeader(path.string() + ": " + e.what());
    }
    if (!doc.is_array()) throw MalformedHeader(path.string() + ": dictionary must be a JSON array");
    std::vector<DictEntry> entries;
    for (const auto& item : doc) {
        try {
            DictEntry e;
            e.word = item.at("word").get<std::string>();
            e.probability = item.at("probability").get<double>();
            if (!(e.probability >= 0.0 && e.probability <= 1.0)) {
                throw MalformedHeader("probability of '" + e.word + "' outside [0,1]");
            }
            const auto kind = item.at("kind").get<std::string>();
            if (kind == "still") {
                const auto values = item.at("pose").get<std::vector<double>>();
                if (values.size() != static_cast<std::size_t>(kPoseDim)) {
                    throw MalformedHeader("pose of '" + e.word + "' must have 106 values");
                }
                StillPose s;
                s.pose = Eigen::Map<const PoseVector>(values.data());
                s.hold = item.value("hold_s", default_hold);
                e.pose = s;
            } else if (kind == "motion") {
                std::filesystem::path clip = item.at("clip_path").get<std::string>();
                if (clip.is_relative()) clip = path.parent_path() / clip;
                MotionClip m{read_pose_sequence(clip)};
                if (m.clip.empty()) throw MalformedHeader("motion clip of '" + e.word + "' is empty");
                e.pose = std::move(m);
            } else {
                throw MalformedHeader("unknown key pose kind '" + kind + "'");
            }
            entries.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw MalformedHeader(path.string() + ": " + ex.what());
        }
    }
    return entries;
}

InsertionPlan plan_insertions(const TimedTranscript& transcript, const std::vector<DictEntry>& dictionary,
                              std::uint64_t seed) {
    std::unordered_map<std::string, const DictEntry*> lookup;
    for (const auto& e : dictionary) lookup.emplace(lowercase_ascii(e.word), &e);
    Rng rng(seed);
    InsertionPlan plan;
    for (const auto& w : transcript.words) {
        auto it = lookup.find(lowercase_ascii(w.word));
        if (it == lookup.end()) continue;
        const double u = rng.uniform();
        if (u < it->second->probability) plan.push_back({w.start, *it->second});
    }
    std::stable_sort(plan.begin(), plan.end(),
                     [](const PlannedInsertion& a, const PlannedInsertion& b) { return a.time < b.time; });
    return plan;
}

PoseSequence insert_still(const PoseSequence& seq, const PoseVector& pose, double t, double ramp, double hold) {
    if (!(ramp > 0.0)) throw InvalidArgument("ramp must be positive");
    if (!(hold >= 0.0)) throw InvalidArgument("hold must be >= 0");
    const int k = to_frame(t, seq.fps);
    check_time(seq, t, k);
    const int held = std::max(1, to_frame(hold, seq.fps));
    return overwrite_with_ramps(seq, k, held, to_frame(ramp, seq.fps), [&](int) { return pose; });
}

PoseSequence insert_motion(const PoseSequence& seq, const PoseSequence& clip, double t, double ramp) {
    if (!(ramp > 0.0)) throw InvalidArgument("ramp must be positive");
    if (clip.empty()) throw InvalidArgument("motion clip is empty");
    if (std::abs(clip.fps - seq.fps) > 1e-9) throw FpsMismatch("clip fps differs from the sequence fps");
    const int k = to_frame(t, seq.fps);
    check_time(seq, t, k);
    const int len = static_cast<int>(clip.size());
    if (k + len > static_cast<int>(seq.size())) throw OutOfRange("motion clip runs past the sequence end");
    return overwrite_with_ramps(seq, k, len, to_frame(ramp, seq.fps), [&](int i) { return clip.frames[i]; });
}

PlanResult apply_plan(const PoseSequence& seq, const InsertionPlan& plan, double ramp) {
    PlanResult res;
    res.sequence = seq;
    InsertionPlan ordered = plan;
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const PlannedInsertion& a, const PlannedInsertion& b) { return a.time < b.time; });
    const int n = static_cast<int>(seq.size());
    const int ramp_frames = to_frame(ramp, seq.fps);
    std::vector<Window> taken;
    for (const auto& p : ordered) {
        const int k = to_frame(p.time, seq.fps);
        AppliedInsertion rec{p.entry.word, p.time, k};
        int span = 0;
        if (const auto* s = std::get_if<StillPose>(&p.entry.pose)) {
            span = std::max(1, to_frame(s->hold, seq.fps));
        } else {
            span = static_cast<int>(std::get<MotionClip>(p.entry.pose).clip.size());
        }
        const bool motion_fits =
            std::holds_alternative<StillPose>(p.entry.pose) || k + span <= n;
        if (!(p.time >= 0.0) || k >= n || !motion_fits) {
            res.skipped.push_back(rec);
            continue;
        }
        const Window w{std::max(0, k - ramp_frames + 1), std::min(n - 1, k + span - 1 + ramp_frames - 1)};
        const bool overlaps = std::any_of(taken.begin(), taken.end(), [&](const Window& o) {
            return w.first <= o.last && o.first <= w.last;
        });
        if (overlaps) {
            res.skipped.push_back(rec);
            continue;
        }
        if (const auto* s = std::get_if<StillPose>(&p.entry.pose)) {
            res.sequence = insert_still(res.sequence, s->pose, p.time, ramp, s->hold);
        } else {
            res.sequence = insert_motion(res.sequence, std::get<MotionClip>(p.entry.pose).clip, p.time, ramp);
        }
        taken.push_back(w);
        res.applied.push_back(rec);
    }
    return res;
}

}  // namespace gestsynth
