#include "gestsynth/errors.hpp"
#include "gestsynth/pipeline.hpp"
#include "gestsynth/render.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gestsynth;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::vector<Detection2D> detections_for(const PoseSequence& poses, Eigen::Vector2d offset = Eigen::Vector2d::Zero()) {
    const SkeletonModel m = SkeletonModel::surrogate();
    const Camera cam = Camera::default_view();
    std::vector<Detection2D> out;
    for (const auto& p : poses.frames) {
        Detection2D d = detection_from_keypoints(project(forward_kinematics(m, p), cam));
        d.points.colwise() += offset;
        out.push_back(d);
    }
    return out;
}

PoseSequence wiggle(int frames) {
    PoseSequence s;
    s.fps = 12.0;
    for (int t = 0; t < frames; ++t) {
        PoseVector p = PoseVector::Zero();
        p[3 * kJawJoint] = 0.05 * t;
        p[100] = 0.1 * (t % 3);
        p[3 * 16 + 2] = -0.02 * t;
        s.frames.push_back(p);
    }
    return s;
}

}  // namespace

TEST_CASE("config file") {
    TempDir dir("gestsynth_test_cfg");
    std::ofstream(dir.path / "a.cfg") << "# comment\nfps = 10\nhidden=32  # trailing\n\nglobal_orient = 0.1 0 -0.2\n"
                                         "dictionary = dict.json\nseed = 5\n";
    const PipelineConfig c = PipelineConfig::load(dir.path / "a.cfg");
    CHECK(c.fps == 10.0);
    CHECK(c.hidden == 32);
    CHECK(c.seed == 5);
    CHECK(c.global_orient == Vec3(0.1, 0.0, -0.2));
    CHECK(c.dictionary == dir.path / "dict.json");
    CHECK(c.ramp_s == 0.6);
    CHECK(c.hold_s == 0.3);
    CHECK(c.delay_s == 0.2);
    CHECK(c.lr == 0.001);
    CHECK(c.batch == 100);

    write_config(c, dir.path / "b.cfg");
    const PipelineConfig d = PipelineConfig::load(dir.path / "b.cfg");
    CHECK(d.fps == c.fps);
    CHECK(d.global_orient == c.global_orient);
    CHECK(d.dictionary == c.dictionary);

    std::ofstream(dir.path / "bad.cfg") << "frames_per_second = 3\n";
    CHECK_THROWS_AS(PipelineConfig::load(dir.path / "bad.cfg"), MalformedHeader);
    std::ofstream(dir.path / "neg.cfg") << "fps = -1\n";
    CHECK_THROWS_AS(PipelineConfig::load(dir.path / "neg.cfg"), InvalidArgument);
}

TEST_CASE("mouth error") {
    const SkeletonModel m = SkeletonModel::surrogate();
    const Camera cam = Camera::default_view();
    const PoseSequence poses = wiggle(5);
    CHECK(mouth_error(m, cam, Vec3::Zero(), poses, detections_for(poses)) < 1e-9);
    CHECK(mouth_error(m, cam, Vec3::Zero(), poses, detections_for(poses, {3.0, 4.0})) == doctest::Approx(5.0).epsilon(1e-9));

    // Eight-point mouth-only detections are accepted too.
    std::vector<Detection2D> mouth_only;
    for (const auto& d : detections_for(poses, {3.0, 4.0})) {
        Detection2D k;
        k.points.resize(2, kMouthLandmarks);
        k.confidences.resize(kMouthLandmarks);
        const auto idx = SkeletonModel::mouth_keypoints();
        for (int i = 0; i < kMouthLandmarks; ++i) {
            k.points.col(i) = d.points.col(idx[i]);
            k.confidences[i] = 1.0;
        }
        mouth_only.push_back(k);
    }
    CHECK(mouth_error(m, cam, Vec3::Zero(), poses, mouth_only) == doctest::Approx(5.0).epsilon(1e-9));

    auto shorter = detections_for(poses);
    shorter.pop_back();
    CHECK_THROWS_AS(mouth_error(m, cam, Vec3::Zero(), poses, shorter), LengthMismatch);

    TempDir dir("gestsynth_test_mouth");
    write_pose_sequence(poses, dir.path / "p.pseq");
    write_detections(detections_for(poses, {3.0, 4.0}), dir.path / "d.det");
    const MouthEvaluation ev =
        cmd_eval_mouth({dir.path / "p.pseq", dir.path / "d.det", dir.path / "report.txt", true}, PipelineConfig{});
    CHECK(ev.frames == 5);
    CHECK(ev.mean_px == doctest::Approx(5.0));
    REQUIRE(ev.rest_baseline_px);
    CHECK(*ev.rest_baseline_px > 5.0);
    CHECK(slurp(dir.path / "report.txt").find("mean_px ") != std::string::npos);
}

TEST_CASE("synthetic corpus and the command chain") {
    TempDir dir("gestsynth_test_chain");
    PipelineConfig cfg;
    cfg.seed = 3;
    SyntheticOptions opts;
    opts.clips = 2;
    opts.clip_duration = 2.0;
    opts.epochs = 30;
    opts.hidden = 16;
    const SyntheticCorpus a = cmd_make_synthetic(dir.path / "a", cfg, opts);
    const SyntheticCorpus b = cmd_make_synthetic(dir.path / "b", cfg, opts);
    REQUIRE(a.clip_names.size() == 2);
    for (const auto& sub : {"audio", "poses", "detections"}) {
        CHECK(std::distance(fs::directory_iterator(dir.path / "a" / sub), fs::directory_iterator{}) ==
              (std::string(sub) == "audio" ? 4 : 2));
    }
    for (const auto& name : a.clip_names) {
        for (const auto& rel : {"audio/" + name + ".wav", "audio/" + name + ".txt", "poses/" + name + ".pseq",
                                "detections/" + name + ".det"}) {
            CHECK(slurp(dir.path / "a" / rel) == slurp(dir.path / "b" / rel));
        }
    }

    const PipelineConfig corpus = PipelineConfig::load(a.config);
    CHECK(corpus.hidden == 16);
    const fs::path root = dir.path / "a";
    const std::string clip = a.clip_names[0];

    SUBCASE("features") {
        const FeatureSequence f = cmd_features({root / "audio" / (clip + ".wav"), std::nullopt, dir.path / "f.feat"}, corpus);
        CHECK(f.dim() == 28);
        PipelineConfig noisy = corpus;
        noisy.noise_amplitude = 0.0;
        cmd_features({root / "audio" / (clip + ".wav"), std::nullopt, dir.path / "g.feat"}, noisy);
        CHECK(slurp(dir.path / "f.feat") == slurp(dir.path / "g.feat"));
        noisy.noise_amplitude = 0.01;
        cmd_features({root / "audio" / (clip + ".wav"), std::nullopt, dir.path / "h.feat"}, noisy);
        CHECK(slurp(dir.path / "f.feat") != slurp(dir.path / "h.feat"));
        const FeatureSequence t = cmd_features({std::nullopt, root / "audio" / (clip + ".txt"), dir.path / "t.feat"}, corpus);
        CHECK(t.dim() == 26);
        CHECK_THROWS_AS(cmd_features({std::nullopt, std::nullopt, dir.path / "x.feat"}, corpus), InvalidArgument);
    }
    SUBCASE("fit recovers the generating poses") {
        const SequenceFit fit =
            cmd_fit({root / "detections" / (clip + ".det"), dir.path / "fit.pseq", dir.path / "fit.txt"}, corpus);
        const PoseSequence truth = read_pose_sequence(root / "poses" / (clip + ".pseq"));
        CHECK(fit.poses.size() == truth.size());
        double mean = 0.0;
        for (double e : fit.mean_errors) mean += e;
        CHECK(mean / static_cast<double>(fit.mean_errors.size()) < 0.5);
        const std::string report = slurp(dir.path / "fit.txt");
        CHECK(report.find("frames " + std::to_string(truth.size())) != std::string::npos);
        std::ofstream(dir.path / "empty.det") << "";
        CHECK_THROWS_AS(cmd_fit({dir.path / "empty.det", dir.path / "e.pseq", {}}, corpus), InvalidArgument);
    }
    SUBCASE("train, synthesize and evaluate") {
        fs::create_directories(dir.path / "feat");
        for (const auto& name : a.clip_names) {
            cmd_features({root / "audio" / (name + ".wav"), std::nullopt, dir.path / "feat" / (name + ".feat")}, corpus);
        }
        const TrainRequest tr{dir.path / "feat", root / "poses", dir.path / "m1.lstm", dir.path / "h1.csv"};
        const TrainResult r1 = cmd_train(tr, corpus);
        cmd_train({dir.path / "feat", root / "poses", dir.path / "m2.lstm", dir.path / "h2.csv"}, corpus);
        CHECK(slurp(dir.path / "m1.lstm") == slurp(dir.path / "m2.lstm"));
        CHECK(r1.loss_history.size() == 30);
        CHECK(slurp(dir.path / "h1.csv").rfind("epoch,loss\n", 0) == 0);

        PipelineConfig frozen = corpus;
        frozen.lr = 0.0;
        const TrainResult r0 = cmd_train({dir.path / "feat", root / "poses", dir.path / "m0.lstm", {}}, frozen);
        for (double l : r0.loss_history) CHECK(l == doctest::Approx(r0.loss_history.front()).epsilon(1e-12));

        PipelineConfig run = corpus;
        run.model = dir.path / "m1.lstm";
        std::ostringstream log;
        const SynthesizeResult s =
            cmd_synthesize({root / "audio" / (clip + ".wav"), std::nullopt, std::nullopt, std::nullopt, dir.path / "out", true},
                           run, &log);
        CHECK(s.poses.size() == 24);
        CHECK(s.frames_rendered == 24);
        CHECK(fs::exists(dir.path / "out" / "frame_000023.ppm"));
        CHECK(read_ppm(dir.path / "out" / "frame_000000.ppm").width == 512);
        CHECK((log.str().find("inserted") != std::string::npos) == !s.insertions.empty());

        SUBCASE("without a dictionary synthesis is plain inference") {
            PipelineConfig plain = run;
            plain.dictionary.clear();
            const SynthesizeResult p = cmd_synthesize(
                {root / "audio" / (clip + ".wav"), std::nullopt, std::nullopt, std::nullopt, dir.path / "plain", false}, plain);
            CHECK(p.insertions.empty());
            const PoseSequence direct = infer(load_model(run.model), audio_features_for(read_wav(root / "audio" / (clip + ".wav")), run),
                                              run.fps, 24);
            CHECK(p.poses.frames == direct.frames);
            CHECK_FALSE(fs::exists(dir.path / "plain" / "frame_000000.ppm"));
        }
        SUBCASE("a certain key word is inserted exactly once") {
            fs::create_directories(dir.path / "tfeat");
            for (const auto& name : a.clip_names) {
                cmd_features({std::nullopt, root / "audio" / (name + ".txt"), dir.path / "tfeat" / (name + ".feat")}, corpus);
            }
            PipelineConfig text_run = run;
            text_run.model = dir.path / "text.lstm";
            cmd_train({dir.path / "tfeat", root / "poses", text_run.model, {}}, corpus);
            std::ostringstream tlog;
            const SynthesizeResult t = cmd_synthesize(
                {std::nullopt, std::nullopt, std::nullopt, std::string("so huge a river"), dir.path / "text", false}, text_run, &tlog);
            CHECK(t.poses.size() == static_cast<std::size_t>(std::lround(4 / run.words_per_second * run.fps)));
            REQUIRE(t.insertions.size() == 1);
            CHECK(t.insertions[0].word == "huge");
            CHECK(t.poses.frames[t.insertions[0].frame] == synthetic_word_pose("huge"));
            CHECK(tlog.str().find("inserted 'huge'") != std::string::npos);
        }

        const MouthEvaluation ev = cmd_eval_mouth(
            {dir.path / "out" / "poses.pseq", root / "detections" / (clip + ".det"), dir.path / "mouth.txt", true}, run);
        CHECK(ev.frames == 24);
        CHECK(std::isfinite(ev.mean_px));
        REQUIRE(ev.rest_baseline_px);
    }
}
