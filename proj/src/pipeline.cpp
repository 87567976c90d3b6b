#include "gestsynth/pipeline.hpp"

#include "gestsynth/errors.hpp"
#include "gestsynth/render.hpp"
#include "gestsynth/transcription.hpp"
#include "text_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace gestsynth {

namespace fs = std::filesystem;

namespace {

std::string frame_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06d.ppm", index);
    return buf;
}

}  // namespace

PipelineConfig PipelineConfig::load(const fs::path& path) {
    PipelineConfig cfg;
    const fs::path base = path.parent_path();
    for (const auto& line : detail::read_lines(path)) {
        auto t = detail::trim(line);
        if (const auto hash = t.find('#'); hash != std::string_view::npos) t = detail::trim(t.substr(0, hash));
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) throw MalformedHeader(path.string() + ": expected 'key = value'");
        cfg.set(std::string(detail::trim(t.substr(0, eq))), std::string(detail::trim(t.substr(eq + 1))), base);
    }
    cfg.validate();
    return cfg;
}

void PipelineConfig::set(const std::string& key, const std::string& value, const fs::path& base) {
    const std::string ctx = "config key '" + key + "'";
    const auto num = [&] { return detail::parse_double(value, ctx); };
    const auto integer = [&] { return static_cast<int>(detail::parse_int(value, ctx)); };
    const auto path = [&] {
        fs::path p = value;
        return (p.is_relative() && !base.empty()) ? base / p : p;
    };
    if (key == "fps") fps = num();
    else if (key == "ramp_s") ramp_s = num();
    else if (key == "hold_s") hold_s = num();
    else if (key == "delay_s") delay_s = num();
    else if (key == "lr") lr = num();
    else if (key == "batch") batch = integer();
    else if (key == "hidden") hidden = integer();
    else if (key == "lambda") lambda = num();
    else if (key == "epochs") epochs = integer();
    else if (key == "seed") seed = static_cast<std::uint64_t>(detail::parse_int(value, ctx));
    else if (key == "noise_amplitude") noise_amplitude = num();
    else if (key == "target_rms") target_rms = num();
    else if (key == "text_stride") text_stride = num();
    else if (key == "words_per_second") words_per_second = num();
    else if (key == "fit_iterations") fit_iterations = integer();
    else if (key == "fit_lr") fit_lr = num();
    else if (key == "basis_seed") basis_seed = static_cast<std::uint64_t>(detail::parse_int(value, ctx));
    else if (key == "crop_size") crop_size = integer();
    else if (key == "hand_radius") hand_radius = integer();
    else if (key == "global_orient") {
        const auto tok = detail::split_ws(value);
        if (tok.size() != 3) throw MalformedHeader(ctx + ": expected three numbers");
        global_orient = Vec3(detail::parse_double(tok[0], ctx), detail::parse_double(tok[1], ctx),
                             detail::parse_double(tok[2], ctx));
    }
    else if (key == "model") model = path();
    else if (key == "dictionary") dictionary = path();
    else if (key == "skeleton") skeleton = path();
    else if (key == "camera") camera = path();
    else if (key == "pinyin_table") pinyin_table = path();
    else throw MalformedHeader("unknown config key '" + key + "'");
}

void PipelineConfig::validate() const {
    const auto require = [](bool ok, const char* what) {
        if (!ok) throw InvalidArgument(std::string("config: ") + what);
    };
    require(fps > 0.0, "fps must be positive");
    require(ramp_s > 0.0, "ramp_s must be positive");
    require(hold_s >= 0.0, "hold_s must be >= 0");
    require(delay_s >= 0.0, "delay_s must be >= 0");
    require(lr >= 0.0, "lr must be >= 0");
    require(batch >= 1, "batch must be >= 1");
    require(hidden >= 1, "hidden must be >= 1");
    require(lambda >= 0.0, "lambda must be >= 0");
    require(epochs >= 0, "epochs must be >= 0");
    require(noise_amplitude >= 0.0, "noise_amplitude must be >= 0");
    require(target_rms > 0.0, "target_rms must be positive");
    require(text_stride > 0.0, "text_stride must be positive");
    require(words_per_second > 0.0, "words_per_second must be positive");
    require(fit_iterations >= 0, "fit_iterations must be >= 0");
    require(fit_lr > 0.0, "fit_lr must be positive");
    require(crop_size > 0 && hand_radius > 0, "crop_size and hand_radius must be positive");
}

SkeletonModel PipelineConfig::load_skeleton() const {
    return skeleton.empty() ? SkeletonModel::surrogate(basis_seed) : SkeletonModel::load(skeleton, basis_seed);
}

Camera PipelineConfig::load_camera() const {
    return camera.empty() ? Camera::default_view() : read_camera(camera);
}

TrainConfig PipelineConfig::train_config() const {
    TrainConfig t;
    t.learning_rate = lr;
    t.batch_size = batch;
    t.delay = delay_s;
    t.smoothness = lambda;
    t.epochs = epochs;
    t.seed = seed;
    t.hidden = hidden;
    return t;
}

void write_config(const PipelineConfig& cfg, const fs::path& path) {
    const auto f = [](double v) { return detail::format_double(v); };
    std::string out;
    out += "fps = " + f(cfg.fps) + "\n";
    out += "ramp_s = " + f(cfg.ramp_s) + "\n";
    out += "hold_s = " + f(cfg.hold_s) + "\n";
    out += "delay_s = " + f(cfg.delay_s) + "\n";
    out += "lr = " + f(cfg.lr) + "\n";
    out += "batch = " + std::to_string(cfg.batch) + "\n";
    out += "hidden = " + std::to_string(cfg.hidden) + "\n";
    out += "lambda = " + f(cfg.lambda) + "\n";
    out += "epochs = " + std::to_string(cfg.epochs) + "\n";
    out += "seed = " + std::to_string(cfg.seed) + "\n";
    out += "noise_amplitude = " + f(cfg.noise_amplitude) + "\n";
    out += "target_rms = " + f(cfg.target_rms) + "\n";
    out += "text_stride = " + f(cfg.text_stride) + "\n";
    out += "words_per_second = " + f(cfg.words_per_second) + "\n";
    out += "fit_iterations = " + std::to_string(cfg.fit_iterations) + "\n";
    out += "fit_lr = " + f(cfg.fit_lr) + "\n";
    out += "basis_seed = " + std::to_string(cfg.basis_seed) + "\n";
    out += "global_orient = " + f(cfg.global_orient.x()) + " " + f(cfg.global_orient.y()) + " " +
           f(cfg.global_orient.z()) + "\n";
    out += "crop_size = " + std::to_string(cfg.crop_size) + "\n";
    out += "hand_radius = " + std::to_string(cfg.hand_radius) + "\n";
    const auto rel = [&](const fs::path& p) {
        return p.lexically_proximate(path.parent_path().empty() ? fs::path(".") : path.parent_path()).string();
    };
    if (!cfg.model.empty()) out += "model = " + rel(cfg.model) + "\n";
    if (!cfg.dictionary.empty()) out += "dictionary = " + rel(cfg.dictionary) + "\n";
    if (!cfg.skeleton.empty()) out += "skeleton = " + rel(cfg.skeleton) + "\n";
    if (!cfg.camera.empty()) out += "camera = " + rel(cfg.camera) + "\n";
    if (!cfg.pinyin_table.empty()) out += "pinyin_table = " + rel(cfg.pinyin_table) + "\n";
    detail::write_text_file(path, out);
}

FeatureSequence audio_features_for(const AudioBuffer& audio, const PipelineConfig& cfg) {
    AudioBuffer a = rms_normalize(audio, cfg.target_rms);
    if (cfg.noise_amplitude > 0.0) a = add_white_noise(a, cfg.noise_amplitude, cfg.seed);
    return mfcc_features(a);
}

FeatureSequence text_features_for(const TimedTranscript& transcript, const PipelineConfig& cfg) {
    const PinyinTable table = cfg.pinyin_table.empty() ? PinyinTable{} : PinyinTable::load(cfg.pinyin_table);
    TimedTranscript spelled = transcript;
    for (auto& w : spelled.words) w.word = to_pinyin(w.word, table);
    return encode_transcript(spelled, cfg.text_stride);
}

FeatureSequence cmd_features(const FeaturesRequest& req, const PipelineConfig& cfg) {
    if (req.audio.has_value() == req.transcript.has_value()) {
        throw InvalidArgument("features needs exactly one of --audio or --transcript");
    }
    const FeatureSequence f = req.audio ? audio_features_for(read_wav(*req.audio), cfg)
                                        : text_features_for(read_transcript(*req.transcript), cfg);
    write_features(f, req.output);
    return f;
}

SequenceFit cmd_fit(const FitRequest& req, const PipelineConfig& cfg) {
    const auto detections = read_detections(req.detections);
    if (detections.empty()) throw InvalidArgument(req.detections.string() + " contains no detection frames");
    const SkeletonModel model = cfg.load_skeleton();
    const Camera camera = cfg.load_camera();
    FitOptions opts;
    opts.max_iterations = cfg.fit_iterations;
    opts.learning_rate = cfg.fit_lr;
    SequenceFit fit = fit_sequence(model, camera, detections, PoseVector::Zero(), cfg.global_orient, cfg.fps, opts);
    write_pose_sequence(fit.poses, req.output);
    if (!req.report.empty()) {
        double mean = 0.0;
        for (double e : fit.mean_errors) mean += e;
        mean /= static_cast<double>(fit.mean_errors.size());
        const auto f = [](double v) { return detail::format_double(v); };
        std::string out = "frames " + std::to_string(fit.poses.size()) + "\n";
        out += "global_orient " + f(fit.global_orient.x()) + " " + f(fit.global_orient.y()) + " " +
               f(fit.global_orient.z()) + "\n";
        out += "mean_error_px " + f(mean) + "\n";
        out += "frame energy mean_error_px\n";
        for (std::size_t t = 0; t < fit.energies.size(); ++t) {
            out += std::to_string(t) + " " + f(fit.energies[t]) + " " + f(fit.mean_errors[t]) + "\n";
        }
        detail::write_text_file(req.report, out);
    }
    return fit;
}

TrainResult cmd_train(const TrainRequest& req, const PipelineConfig& cfg) {
    std::vector<fs::path> feature_files;
    for (const auto& entry : fs::directory_iterator(req.features_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".feat") feature_files.push_back(entry.path());
    }
    std::sort(feature_files.begin(), feature_files.end());
    std::vector<TrainingPair> pairs;
    for (const auto& fp : feature_files) {
        const fs::path pose_path = req.poses_dir / (fp.stem().string() + ".pseq");
        if (!fs::exists(pose_path)) continue;
        TrainingPair p{read_features(fp), read_pose_sequence(pose_path)};
        if (std::abs(p.target.fps - cfg.fps) > 1e-9) throw FpsMismatch(pose_path.string() + " fps differs from config");
        const double feat_duration = p.input.frame_count() * p.input.stride;
        if (std::abs(feat_duration - p.target.duration()) > 1.0 / cfg.fps + 0.05) {
            throw LengthMismatch(fp.stem().string() + ": feature and pose durations differ");
        }
        pairs.push_back(std::move(p));
    }
    if (pairs.empty()) throw InvalidArgument("no matching <name>.feat / <name>.pseq pairs found");
    TrainResult res = train(pairs, cfg.train_config());
    save_model(res.model, req.model_out);
    if (!req.history_csv.empty()) {
        std::string csv = "epoch,loss\n";
        for (std::size_t e = 0; e < res.loss_history.size(); ++e) {
            csv += std::to_string(e) + "," + detail::format_double(res.loss_history[e]) + "\n";
        }
        detail::write_text_file(req.history_csv, csv);
    }
    return res;
}

SynthesizeResult cmd_synthesize(const SynthesizeRequest& req, const PipelineConfig& cfg, std::ostream* log) {
    const int sources = req.audio.has_value() + req.transcript.has_value() + req.text.has_value();
    if (sources != 1) throw InvalidArgument("synthesize needs exactly one of --audio, --transcript, --text");
    if (cfg.model.empty()) throw InvalidArgument("synthesize needs a model");
    const PoseRegressor model = load_model(cfg.model);
    const std::vector<DictEntry> dictionary =
        cfg.dictionary.empty() ? std::vector<DictEntry>{} : load_dictionary(cfg.dictionary, cfg.hold_s);

    FeatureSequence features;
    TimedTranscript transcript;
    double duration = 0.0;
    if (req.audio) {
        const AudioBuffer audio = read_wav(*req.audio);
        features = audio_features_for(audio, cfg);
        duration = audio.duration();
        if (!dictionary.empty()) {
            const FileTranscriptionProvider provider(req.sidecar.value_or(sidecar_for(*req.audio)));
            transcript = provider.transcribe(audio);
        }
    } else {
        transcript = req.transcript ? read_transcript(*req.transcript)
                                    : FileTranscriptionProvider({}).synthesize_timing(*req.text, cfg.words_per_second);
        features = text_features_for(transcript, cfg);
        duration = transcript.duration;
    }

    SynthesizeResult res;
    const int frames = static_cast<int>(std::lround(duration * cfg.fps));
    res.poses = infer(model, features, cfg.fps, frames);
    if (!dictionary.empty()) {
        const InsertionPlan plan = plan_insertions(transcript, dictionary, cfg.seed);
        PlanResult applied = apply_plan(res.poses, plan, cfg.ramp_s);
        res.poses = std::move(applied.sequence);
        res.insertions = std::move(applied.applied);
    }

    fs::create_directories(req.output_dir);
    write_pose_sequence(res.poses, req.output_dir / "poses.pseq");
    std::string ins = "word\ttime_s\tframe\n";
    for (const auto& a : res.insertions) {
        ins += a.word + "\t" + detail::format_double(a.time) + "\t" + std::to_string(a.frame) + "\n";
        if (log) *log << "inserted '" << a.word << "' at " << a.time << " s (frame " << a.frame << ")\n";
    }
    detail::write_text_file(req.output_dir / "insertions.tsv", ins);

    if (req.render) {
        const SkeletonModel skel = cfg.load_skeleton();
        const Camera camera = cfg.load_camera();
        PartMarkers markers;
        markers.hand_radius = cfg.hand_radius;
        std::string crops = "frame\tpart\tx\ty\tsize\n";
        for (std::size_t t = 0; t < res.poses.size(); ++t) {
            const Image img =
                render_skeleton(skel, res.poses.frames[t], cfg.global_orient, camera, camera.width, camera.height, markers);
            write_ppm(img, req.output_dir / frame_name(static_cast<int>(t)));
            try {
                const PartCrops c = find_part_crops(img, cfg.crop_size, markers);
                const std::pair<const char*, const CropBox*> boxes[] = {
                    {"face", &c.face}, {"left_hand", &c.left_hand}, {"right_hand", &c.right_hand}};
                for (const auto& [name, box] : boxes) {
                    crops += std::to_string(t) + "\t" + name + "\t" + std::to_string(box->x) + "\t" +
                             std::to_string(box->y) + "\t" + std::to_string(box->size) + "\n";
                }
            } catch (const MarkerMissing& e) {
                if (log) *log << "frame " << t << ": " << e.what() << "\n";
            }
            ++res.frames_rendered;
        }
        detail::write_text_file(req.output_dir / "crops.tsv", crops);
    }
    return res;
}

double mouth_error(const SkeletonModel& model, const Camera& camera, const Vec3& global_orient,
                   const PoseSequence& poses, const std::vector<Detection2D>& detections) {
    if (poses.size() != detections.size()) {
        throw LengthMismatch(std::to_string(poses.size()) + " pose frames vs " + std::to_string(detections.size()) +
                             " detection frames");
    }
    const auto mouth = SkeletonModel::mouth_keypoints();
    double sum = 0.0;
    long long n = 0;
    for (std::size_t t = 0; t < poses.size(); ++t) {
        const Keypoints2d uv = project(forward_kinematics(model, poses.frames[t], global_orient), camera);
        const Detection2D& d = detections[t];
        for (std::size_t m = 0; m < mouth.size(); ++m) {
            int det_index = 0;
            if (d.size() == kKeypoints) {
                det_index = mouth[m];
            } else if (d.size() == kMouthLandmarks) {
                det_index = static_cast<int>(m);
            } else {
                throw LengthMismatch("detection frame has neither 74 nor 8 mouth keypoints");
            }
            if (d.confidences[det_index] <= 0.0) continue;
            sum += (uv.col(mouth[m]) - d.points.col(det_index)).norm();
            ++n;
        }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

MouthEvaluation cmd_eval_mouth(const EvalMouthRequest& req, const PipelineConfig& cfg) {
    const PoseSequence poses = read_pose_sequence(req.poses);
    const auto detections = read_detections(req.detections);
    const SkeletonModel model = cfg.load_skeleton();
    const Camera camera = cfg.load_camera();
    MouthEvaluation ev;
    ev.frames = static_cast<int>(poses.size());
    ev.mean_px = mouth_error(model, camera, cfg.global_orient, poses, detections);
    if (req.rest_baseline) {
        PoseSequence rest = poses;
        for (auto& f : rest.frames) f.setZero();
        ev.rest_baseline_px = mouth_error(model, camera, cfg.global_orient, rest, detections);
    }
    if (!req.report.empty()) {
        std::string out = "frames " + std::to_string(ev.frames) + "\n";
        out += "mean_px " + detail::format_double(ev.mean_px) + "\n";
        if (ev.rest_baseline_px) out += "rest_baseline_px " + detail::format_double(*ev.rest_baseline_px) + "\n";
        detail::write_text_file(req.report, out);
    }
    return ev;
}

}  // namespace gestsynth
