#include "gestsynth/pipeline.hpp"

#include "gestsynth/errors.hpp"
#include "gestsynth/random.hpp"
#include "text_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace gestsynth {

namespace fs = std::filesystem;

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Raised-cosine bump that is 1 over the middle of [start, end] and fades out
// over `edge` seconds on both sides.
double bump(double t, double start, double end, double edge) {
    if (t <= start - edge || t >= end + edge) return 0.0;
    if (t >= start && t <= end) return 1.0;
    const double d = t < start ? start - t : t - end;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * d / edge));
}

std::string clip_name(int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "clip_%03d", i);
    return buf;
}

TimedTranscript random_transcript(Rng& rng, double duration) {
    const auto& vocab = synthetic_vocabulary();
    TimedTranscript tr;
    tr.duration = duration;
    double t = 0.3;
    while (true) {
        const double len = rng.uniform(0.3, 0.5);
        if (t + len > duration - 0.3) break;
        const auto& w = vocab[static_cast<std::size_t>(rng.next() % vocab.size())];
        // Millisecond grid so the sidecar round-trips exactly.
        tr.words.push_back({w, std::round(t * 1000.0) / 1000.0, std::round((t + len) * 1000.0) / 1000.0});
        t += len + rng.uniform(0.1, 0.3);
    }
    return tr;
}

AudioBuffer render_audio(const TimedTranscript& tr, int sample_rate, Rng& rng) {
    AudioBuffer a;
    a.sample_rate = sample_rate;
    a.samples.assign(static_cast<std::size_t>(std::lround(tr.duration * sample_rate)), 0.0);
    for (auto& s : a.samples) s = 0.005 * rng.uniform(-1.0, 1.0);
    for (const auto& w : tr.words) {
        Rng wr(fnv1a(w.word));
        double freq[3], amp[3];
        for (int k = 0; k < 3; ++k) {
            freq[k] = wr.uniform(150.0, 2500.0);
            amp[k] = wr.uniform(0.1, 0.3);
        }
        const auto s0 = static_cast<std::size_t>(std::lround(w.start * sample_rate));
        const auto s1 = std::min(a.samples.size(), static_cast<std::size_t>(std::lround(w.end * sample_rate)));
        for (std::size_t n = s0; n < s1; ++n) {
            const double t = static_cast<double>(n - s0) / sample_rate;
            const double env = std::sin(std::numbers::pi * static_cast<double>(n - s0) / static_cast<double>(s1 - s0));
            double v = 0.0;
            for (int k = 0; k < 3; ++k) v += amp[k] * std::sin(2.0 * std::numbers::pi * freq[k] * t);
            a.samples[n] += env * v;
        }
    }
    return a;
}

// Ground truth: each word's pose blended in over its interval.
PoseSequence ground_truth_poses(const TimedTranscript& tr, double fps) {
    PoseSequence seq;
    seq.fps = fps;
    const int frames = static_cast<int>(std::lround(tr.duration * fps));
    for (int i = 0; i < frames; ++i) {
        const double t = i / fps;
        PoseVector p = PoseVector::Zero();
        for (const auto& w : tr.words) {
            const double b = bump(t, w.start, w.end, 0.3);
            if (b > 0.0) p += b * synthetic_word_pose(w.word);
        }
        seq.frames.push_back(p);
    }
    return seq;
}

PoseSequence wave_clip(double fps) {
    PoseSequence clip;
    clip.fps = fps;
    const PoseVector base = synthetic_word_pose("wave");
    const int n = std::max(2, static_cast<int>(std::lround(0.8 * fps)));
    for (int i = 0; i < n; ++i) {
        PoseVector p = base;
        // Right elbow swings about its local z axis.
        p(19 * 3 + 2) += 0.4 * std::sin(2.0 * std::numbers::pi * i / (n - 1));
        clip.frames.push_back(p);
    }
    return clip;
}

}  // namespace

const std::vector<std::string>& synthetic_vocabulary() {
    static const std::vector<std::string> words{"hello", "huge", "small", "wave", "yes", "think", "you", "great"};
    return words;
}

PoseVector synthetic_word_pose(const std::string& word) {
    Rng rng(fnv1a(word));
    PoseVector p = PoseVector::Zero();
    // Skip the pelvis so the global orientation stays the only root rotation.
    for (int j = 1; j < kBodyJoints; ++j) {
        for (int k = 0; k < 3; ++k) p(3 * j + k) = 0.1 * rng.normal();
    }
    // Jaw opens (positive x) while speaking, with little sideways motion.
    p(3 * kJawJoint) = rng.uniform(0.1, 0.3);
    p(3 * kJawJoint + 1) = 0.02 * rng.normal();
    p(3 * kJawJoint + 2) = 0.02 * rng.normal();
    for (int i = 72; i < 96; ++i) p(i) = 0.25 * rng.normal();
    for (int i = 96; i < kPoseDim; ++i) p(i) = 0.8 * rng.normal();
    return p;
}

SyntheticCorpus cmd_make_synthetic(const fs::path& out_dir, const PipelineConfig& cfg, const SyntheticOptions& opts) {
    if (opts.clips < 1) throw InvalidArgument("make-synthetic needs at least one clip");
    if (opts.clip_duration < 1.0) throw InvalidArgument("clip duration must be at least 1 s");
    if (opts.corrupt_fraction < 0.0 || opts.corrupt_fraction > 1.0) {
        throw InvalidArgument("corrupt fraction must be in [0,1]");
    }
    std::error_code ec;
    for (const char* sub : {"audio", "poses", "detections", "dictionary"}) {
        fs::create_directories(out_dir / sub, ec);
        if (ec) throw IoError("cannot create " + (out_dir / sub).string() + ": " + ec.message());
    }

    PipelineConfig out = cfg;
    out.epochs = opts.epochs;
    out.hidden = opts.hidden;
    out.skeleton = out_dir / "skeleton.txt";
    out.camera = out_dir / "camera.txt";
    out.dictionary = out_dir / "dictionary.json";
    out.model = out_dir / "model.lstm";
    out.pinyin_table.clear();

    const SkeletonModel skel = cfg.load_skeleton();
    const Camera camera = cfg.load_camera();
    skel.save(out.skeleton);
    write_camera(camera, out.camera);

    Rng rng(cfg.seed);
    SyntheticCorpus corpus;
    for (int c = 0; c < opts.clips; ++c) {
        const std::string name = clip_name(c);
        const TimedTranscript tr = random_transcript(rng, opts.clip_duration);
        const AudioBuffer audio = render_audio(tr, opts.sample_rate, rng);
        write_wav(audio, out_dir / "audio" / (name + ".wav"));
        write_transcript(tr, out_dir / "audio" / (name + ".txt"));

        const PoseSequence poses = ground_truth_poses(tr, cfg.fps);
        write_pose_sequence(poses, out_dir / "poses" / (name + ".pseq"));

        std::vector<Detection2D> dets;
        for (const auto& p : poses.frames) {
            Detection2D d = detection_from_keypoints(project(forward_kinematics(skel, p, cfg.global_orient), camera));
            for (int j = 0; j < d.size(); ++j) {
                if (rng.uniform() < opts.corrupt_fraction) {
                    d.confidences(j) = 0.0;
                    d.points.col(j) = Eigen::Vector2d(rng.uniform(0.0, camera.width), rng.uniform(0.0, camera.height));
                }
            }
            dets.push_back(std::move(d));
        }
        write_detections(dets, out_dir / "detections" / (name + ".det"));
        corpus.clip_names.push_back(name);
    }

    write_pose_sequence(wave_clip(cfg.fps), out_dir / "dictionary" / "wave.pseq");
    nlohmann::json dict = nlohmann::json::array();
    const PoseVector huge = synthetic_word_pose("huge");
    dict.push_back({{"word", "huge"},
                    {"kind", "still"},
                    {"probability", 1.0},
                    {"hold_s", cfg.hold_s},
                    {"pose", std::vector<double>(huge.data(), huge.data() + kPoseDim)}});
    dict.push_back({{"word", "wave"}, {"kind", "motion"}, {"probability", 0.5}, {"clip_path", "dictionary/wave.pseq"}});
    detail::write_text_file(out.dictionary, dict.dump(2) + "\n");

    corpus.config = out_dir / "gestsynth.cfg";
    write_config(out, corpus.config);
    return corpus;
}

}  // namespace gestsynth
