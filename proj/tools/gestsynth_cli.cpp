#include "gestsynth/errors.hpp"
#include "gestsynth/pipeline.hpp"
#include "gestsynth/render.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace gestsynth;
namespace fs = std::filesystem;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    bool verbose = false;
};

// Overrides applied on top of the config file, in the order given.
struct Overrides {
    std::vector<std::pair<std::string, std::string>> values;

    void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        app->add_option_function<std::string>(
            flag, [this, key](const std::string& v) { values.emplace_back(key, v); }, help);
    }
};

PipelineConfig load_config(const Globals& g, const Overrides& o) {
    PipelineConfig cfg = g.config.empty() ? PipelineConfig{} : PipelineConfig::load(g.config);
    for (const auto& [k, v] : o.values) cfg.set(k, v);
    if (g.seed) cfg.seed = *g.seed;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Speech-driven gesture synthesis toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "flat key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "random seed (overrides the config)");
    app.add_flag("--verbose,-v", g.verbose, "progress on stderr");

    Overrides o;

    auto* features = app.add_subcommand("features", "extract audio (MFCC) or transcript (letter) features");
    FeaturesRequest freq;
    std::string f_audio, f_transcript;
    auto* fa = features->add_option("--audio", f_audio, "16-bit PCM WAV input");
    auto* ft = features->add_option("--transcript", f_transcript, "timed transcript input");
    fa->excludes(ft);
    features->add_option("-o,--output", freq.output, "feature file")->required();
    o.add(features, "--noise", "noise_amplitude", "white noise amplitude added after RMS normalization");

    auto* fit = app.add_subcommand("fit", "fit skeleton poses to 2D detections");
    FitRequest fitreq;
    fit->add_option("--detections", fitreq.detections, "detection file")->required()->check(CLI::ExistingFile);
    fit->add_option("-o,--output", fitreq.output, "pose sequence file")->required();
    fit->add_option("--report", fitreq.report, "fit report");
    o.add(fit, "--skeleton", "skeleton", "skeleton file");
    o.add(fit, "--camera", "camera", "camera file");
    o.add(fit, "--iterations", "fit_iterations", "optimizer iterations per frame");

    auto* trn = app.add_subcommand("train", "train the feature-to-pose LSTM");
    TrainRequest treq;
    trn->add_option("--features", treq.features_dir, "directory of <name>.feat")->required()->check(CLI::ExistingDirectory);
    trn->add_option("--poses", treq.poses_dir, "directory of <name>.pseq")->required()->check(CLI::ExistingDirectory);
    trn->add_option("-o,--output", treq.model_out, "model file")->required();
    trn->add_option("--history", treq.history_csv, "loss history CSV");
    o.add(trn, "--epochs", "epochs", "training epochs");
    o.add(trn, "--lr", "lr", "Adam learning rate");
    o.add(trn, "--hidden", "hidden", "LSTM hidden size");
    o.add(trn, "--delay", "delay_s", "output delay in seconds");
    o.add(trn, "--lambda", "lambda", "smoothness weight");
    o.add(trn, "--batch", "batch", "sequences per step");

    auto* syn = app.add_subcommand("synthesize", "generate poses (and frames) from audio or text");
    SynthesizeRequest sreq;
    std::string s_audio, s_sidecar, s_transcript, s_text;
    bool no_render = false;
    auto* sa = syn->add_option("--audio", s_audio, "WAV input");
    syn->add_option("--sidecar", s_sidecar, "transcript sidecar for the audio (default: <audio>.txt)");
    auto* st = syn->add_option("--transcript", s_transcript, "timed transcript input");
    auto* sx = syn->add_option("--text", s_text, "plain text input, uniformly timed");
    sa->excludes(st)->excludes(sx);
    st->excludes(sx);
    syn->add_option("-o,--output", sreq.output_dir, "output directory")->required();
    syn->add_flag("--no-render", no_render, "skip frame rendering");
    o.add(syn, "--model", "model", "model file");
    o.add(syn, "--dictionary", "dictionary", "key-pose dictionary");

    auto* ev = app.add_subcommand("eval-mouth", "mean mouth reprojection error in pixels");
    EvalMouthRequest ereq;
    ev->add_option("--poses", ereq.poses, "pose sequence file")->required()->check(CLI::ExistingFile);
    ev->add_option("--detections", ereq.detections, "detection file")->required()->check(CLI::ExistingFile);
    ev->add_option("--report", ereq.report, "report file");
    ev->add_flag("--rest-baseline", ereq.rest_baseline, "also score the constant rest pose");

    auto* mk = app.add_subcommand("make-synthetic", "write a deterministic synthetic corpus");
    fs::path mk_out;
    SyntheticOptions mopts;
    mk->add_option("-o,--output", mk_out, "output directory")->required();
    mk->add_option("--clips", mopts.clips, "number of clips");
    mk->add_option("--duration", mopts.clip_duration, "seconds per clip");
    mk->add_option("--corrupt", mopts.corrupt_fraction, "fraction of zero-confidence keypoints");
    mk->add_option("--epochs", mopts.epochs, "epochs written to the corpus config");
    mk->add_option("--hidden", mopts.hidden, "hidden size written to the corpus config");

    CLI11_PARSE(app, argc, argv);

    try {
        const PipelineConfig cfg = load_config(g, o);
        if (*features) {
            if (!f_audio.empty()) freq.audio = f_audio;
            if (!f_transcript.empty()) freq.transcript = f_transcript;
            const FeatureSequence f = cmd_features(freq, cfg);
            if (g.verbose) std::cerr << f.frame_count() << " frames x " << f.dim() << "\n";
        } else if (*fit) {
            const SequenceFit r = cmd_fit(fitreq, cfg);
            if (g.verbose) {
                double mean = 0.0;
                for (double e : r.mean_errors) mean += e;
                std::cerr << r.poses.size() << " frames, mean error " << mean / r.mean_errors.size() << " px\n";
            }
        } else if (*trn) {
            const TrainResult r = cmd_train(treq, cfg);
            if (g.verbose && !r.loss_history.empty()) {
                std::cerr << "loss " << r.loss_history.front() << " -> " << r.loss_history.back() << " after "
                          << r.steps << " steps\n";
            }
        } else if (*syn) {
            if (!s_audio.empty()) sreq.audio = s_audio;
            if (!s_sidecar.empty()) sreq.sidecar = s_sidecar;
            if (!s_transcript.empty()) sreq.transcript = s_transcript;
            if (!s_text.empty()) sreq.text = s_text;
            sreq.render = !no_render;
            const SynthesizeResult r = cmd_synthesize(sreq, cfg, &std::cerr);
            if (g.verbose) std::cerr << r.poses.size() << " frames, " << r.frames_rendered << " rendered\n";
        } else if (*ev) {
            const MouthEvaluation r = cmd_eval_mouth(ereq, cfg);
            std::cout << "mean_px " << r.mean_px << "\n";
            if (r.rest_baseline_px) std::cout << "rest_baseline_px " << *r.rest_baseline_px << "\n";
        } else if (*mk) {
            const SyntheticCorpus c = cmd_make_synthetic(mk_out, cfg, mopts);
            if (g.verbose) std::cerr << c.clip_names.size() << " clips, config " << c.config.string() << "\n";
        }
    } catch (const NonFiniteLoss& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
