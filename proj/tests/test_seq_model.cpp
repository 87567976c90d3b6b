#include "gestsynth/errors.hpp"
#include "gestsynth/random.hpp"
#include "gestsynth/seq_model.hpp"
#include "gradcheck.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>

using namespace gestsynth;

namespace {

FeatureSequence ramp_features(int frames, int dim, double stride = kFeatureStride) {
    FeatureSequence f;
    f.stride = stride;
    f.values.resize(frames, dim);
    for (int k = 0; k < frames; ++k) f.values.row(k).setConstant(k + 1.0);
    return f;
}

FeatureSequence random_features(Rng& rng, int frames, int dim, double stride) {
    FeatureSequence f;
    f.stride = stride;
    f.values.resize(frames, dim);
    for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values.data()[i] = 2.0 + 3.0 * rng.normal();
    return f;
}

PoseSequence random_poses(Rng& rng, int frames, double fps) {
    PoseSequence p;
    p.fps = fps;
    for (int t = 0; t < frames; ++t) {
        PoseVector v;
        for (int i = 0; i < kPoseDim; ++i) v[i] = 0.2 * rng.normal();
        p.frames.push_back(v);
    }
    return p;
}

bool params_equal(const LstmParams& a, const LstmParams& b) {
    const auto x = a.blocks();
    const auto y = b.blocks();
    for (int k = 0; k < LstmParams::kBlocks; ++k) {
        if (x[k].size() != y[k].size() || x[k] != y[k]) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("align_features_to_pose_clock") {
    SUBCASE("matched clocks pass through") {
        const FeatureSequence f = ramp_features(7, 3);
        const Eigen::MatrixXd a = align_features_to_pose_clock(f, 100.0);
        REQUIRE(a.cols() == 7);
        CHECK(a == f.values.transpose());
    }
    SUBCASE("mean over the frame interval") {
        const Eigen::MatrixXd a = align_features_to_pose_clock(ramp_features(10, 2), 10.0);
        REQUIRE(a.cols() == 1);
        CHECK(a(0, 0) == doctest::Approx(5.5));
    }
    SUBCASE("constant features stay constant") {
        FeatureSequence f = ramp_features(100, 4);
        f.values.setConstant(0.75);
        const Eigen::MatrixXd a = align_features_to_pose_clock(f, 12.0);
        CHECK(a.cols() == 12);
        CHECK((a.array() == 0.75).all());
    }
    SUBCASE("empty intervals reuse the preceding frame") {
        const FeatureSequence f = ramp_features(3, 1, 0.5);
        const Eigen::MatrixXd a = align_features_to_pose_clock(f, 4.0);
        REQUIRE(a.cols() == 6);
        const std::vector<double> expect{1, 1, 2, 2, 3, 3};
        for (int t = 0; t < 6; ++t) CHECK(a(0, t) == expect[t]);
    }
    CHECK_THROWS_AS(align_features_to_pose_clock(ramp_features(3, 1), 0.0), InvalidArgument);
}

TEST_CASE("output delay") {
    CHECK(delay_frames(0.2, 12.0) == 2);
    CHECK(delay_frames(0.0, 12.0) == 0);
    CHECK_THROWS_AS(delay_frames(-0.1, 12.0), InvalidArgument);
    PoseSequence s;
    s.fps = 10.0;
    for (int i = 0; i < 4; ++i) s.frames.push_back(PoseVector::Constant(i));
    const PoseSequence same = apply_output_delay(s, 0.0);
    for (int i = 0; i < 4; ++i) CHECK(same.frames[i] == s.frames[i]);
    const PoseSequence d = apply_output_delay(s, 0.1);
    REQUIRE(d.size() == 4);
    const std::vector<int> src{0, 0, 1, 2};
    for (int i = 0; i < 4; ++i) CHECK(d.frames[i] == s.frames[src[i]]);
}

TEST_CASE("lstm_forward") {
    SUBCASE("dead network emits the readout bias") {
        LstmParams p = LstmParams::zeros(3, 5);
        for (int i = 0; i < kPoseDim; ++i) p.by[i] = 0.01 * i;
        const std::vector<Eigen::MatrixXd> in{Eigen::MatrixXd::Random(3, 6)};
        const auto out = lstm_forward(p, in);
        for (int t = 0; t < 6; ++t) CHECK(out[0].col(t) == p.by);
    }
    SUBCASE("saturated gates with zero candidate keep the cell at zero") {
        LstmParams p = LstmParams::zeros(1, 1);
        for (int l = 0; l < kLstmLayers; ++l) {
            p.b[l] << 50.0, 50.0, 0.0, 50.0;
        }
        p.Wy.setOnes();
        p.by.setConstant(0.25);
        const std::vector<Eigen::MatrixXd> in{Eigen::MatrixXd::Zero(1, 1)};
        const auto out = lstm_forward(p, in);
        CHECK((out[0].col(0).array() == 0.25).all());
    }
    SUBCASE("batched sequences match single runs") {
        const LstmParams p = LstmParams::random(3, 6, kPoseDim, 4);
        const std::vector<Eigen::MatrixXd> in{Eigen::MatrixXd::Random(3, 5), Eigen::MatrixXd::Random(3, 2)};
        const auto both = lstm_forward(p, in);
        for (int b = 0; b < 2; ++b) {
            const std::vector<Eigen::MatrixXd> one{in[b]};
            CHECK((lstm_forward(p, one)[0] - both[b]).cwiseAbs().maxCoeff() < 1e-14);
        }
    }
    SUBCASE("dimension mismatch") {
        const LstmParams p = LstmParams::zeros(3, 2);
        const std::vector<Eigen::MatrixXd> in{Eigen::MatrixXd::Zero(4, 2)};
        CHECK_THROWS_AS(lstm_forward(p, in), DimMismatch);
    }
}

TEST_CASE("weighted_loss") {
    const LossWeights w = default_weights();
    Eigen::MatrixXd target = Eigen::MatrixXd::Zero(kPoseDim, 1);
    Eigen::MatrixXd pred = target;
    pred(0, 0) = 2.0;
    CHECK(weighted_loss(pred, target, w, 0.1) == 4.0);
    pred(0, 0) = 0.0;
    pred(100, 0) = 2.0;
    CHECK(weighted_loss(pred, target, w, 0.1) == 400.0);

    const Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(kPoseDim, 5, 0.3);
    CHECK(weighted_loss(constant, constant, w, 0.1) == 0.0);
    Eigen::MatrixXd grad;
    weighted_loss(constant, constant, w, 0.7, &grad);
    CHECK(grad.isZero(0.0));

    Eigen::MatrixXd moving = constant;
    moving(3, 2) = 1.3;
    CHECK(weighted_loss(moving, moving, w, 0.5) == doctest::Approx(0.5 * 2.0 / 5.0));
    CHECK_THROWS_AS(weighted_loss(moving, Eigen::MatrixXd::Zero(kPoseDim, 4), w, 0.1), LengthMismatch);
}

TEST_CASE("backward") {
    SUBCASE("gradients match central differences") {
        const gradcheck::Report r = gradcheck::check(gradcheck::make_problem(7), 1e-5, 1e-3);
        CHECK(r.block_relative < 1e-4);
        CHECK(r.entry_relative < 1e-4);
    }
    SUBCASE("zero loss gradient gives zero parameter gradients") {
        const gradcheck::Problem prob = gradcheck::make_problem(3);
        ForwardCache cache;
        const auto out = lstm_forward(prob.params, prob.inputs, &cache);
        std::vector<Eigen::MatrixXd> zero;
        for (const auto& o : out) zero.push_back(Eigen::MatrixXd::Zero(o.rows(), o.cols()));
        const LstmParams g = lstm_backward(prob.params, cache, zero);
        for (const auto& b : g.blocks()) CHECK(b.isZero(0.0));
    }
}

TEST_CASE("adam_step") {
    LstmParams p = LstmParams::random(2, 3, kPoseDim, 1);
    const LstmParams start = p;
    AdamState state = AdamState::for_params(p);

    SUBCASE("zero gradients leave parameters unchanged") {
        adam_step(p, LstmParams::zeros(2, 3), state, 0.01);
        CHECK(params_equal(p, start));
    }
    SUBCASE("first step moves each parameter by lr") {
        LstmParams g = LstmParams::zeros(2, 3);
        Rng rng(2);
        for (auto b : g.blocks()) {
            for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(1e-3, 10.0);
        }
        const double lr = 1e-3;
        adam_step(p, g, state, lr);
        const auto after = p.blocks();
        const auto before = start.blocks();
        const auto gb = g.blocks();
        for (int k = 0; k < LstmParams::kBlocks; ++k) {
            for (Eigen::Index i = 0; i < gb[k].size(); ++i) {
                const double step = before[k][i] - after[k][i];
                CHECK(std::abs(std::abs(step) - lr) / lr < 1e-5);
                CHECK((step > 0) == (gb[k][i] > 0));
            }
        }
    }
    SUBCASE("same gradients give the same trajectory") {
        LstmParams q = start;
        AdamState sq = AdamState::for_params(q);
        for (int it = 0; it < 5; ++it) {
            const LstmParams g = LstmParams::random(2, 3, kPoseDim, 100 + it);
            adam_step(p, g, state, 0.01);
            adam_step(q, g, sq, 0.01);
        }
        CHECK(params_equal(p, q));
    }
}

TEST_CASE("train") {
    Rng rng(9);
    std::vector<TrainingPair> pairs;
    for (int s = 0; s < 3; ++s) pairs.push_back({random_features(rng, 60 + 10 * s, 5, 0.01), random_poses(rng, 7 + s, 12.0)});
    TrainConfig cfg;
    cfg.hidden = 8;
    cfg.epochs = 3;
    cfg.seed = 4;

    SUBCASE("zero learning rate leaves the initialization unchanged") {
        cfg.learning_rate = 0.0;
        const TrainResult r = train(pairs, cfg);
        CHECK(params_equal(r.model.params, LstmParams::random(5, 8, kPoseDim, 4)));
        CHECK(r.loss_history.size() == 3);
        for (double l : r.loss_history) CHECK(l == doctest::Approx(r.loss_history.front()).epsilon(1e-12));
    }
    SUBCASE("batch order does not matter at zero learning rate") {
        cfg.learning_rate = 0.0;
        cfg.batch_size = 1;
        const TrainResult a = train(pairs, cfg);
        std::vector<TrainingPair> reversed(pairs.rbegin(), pairs.rend());
        const TrainResult b = train(reversed, cfg);
        CHECK(a.loss_history.front() == doctest::Approx(b.loss_history.front()).epsilon(1e-12));
        CHECK(a.steps == 9);
    }
    SUBCASE("standardization statistics whiten the training inputs") {
        const TrainResult r = train(pairs, cfg);
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(5), sq = Eigen::VectorXd::Zero(5);
        double n = 0.0;
        for (const auto& p : pairs) {
            const Eigen::MatrixXd z = r.model.standardize(align_features_to_pose_clock(p.input, 12.0, static_cast<int>(p.target.size())));
            sum += z.rowwise().sum();
            sq += z.cwiseAbs2().rowwise().sum();
            n += static_cast<double>(z.cols());
        }
        CHECK((sum / n).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(((sq / n).array() - 1.0).abs().maxCoeff() < 1e-6);
    }
    SUBCASE("training is deterministic and infer is pure") {
        const TrainResult a = train(pairs, cfg);
        const TrainResult b = train(pairs, cfg);
        CHECK(params_equal(a.model.params, b.model.params));
        CHECK(a.loss_history == b.loss_history);
        const PoseSequence x = infer(a.model, pairs[0].input, 12.0);
        const PoseSequence y = infer(a.model, pairs[0].input, 12.0);
        REQUIRE(x.size() == y.size());
        for (std::size_t t = 0; t < x.size(); ++t) CHECK(x.frames[t] == y.frames[t]);
        CHECK(infer(a.model, FeatureSequence{}, 12.0).empty());
        CHECK_THROWS_AS(infer(a.model, random_features(rng, 20, 4, 0.01), 12.0), DimMismatch);
    }
    SUBCASE("smoothness term calms constant-target training") {
        std::vector<TrainingPair> still;
        for (int s = 0; s < 2; ++s) {
            PoseSequence p;
            p.fps = 12.0;
            p.frames.assign(8, PoseVector::Constant(0.1));
            still.push_back({random_features(rng, 70, 5, 0.01), p});
        }
        cfg.smoothness = 0.5;
        cfg.epochs = 1;
        const TrainResult first = train(still, cfg);
        cfg.epochs = 2000;
        const TrainResult last = train(still, cfg);
        const auto energy = [&](const TrainResult& r) {
            double e = 0.0;
            for (const auto& p : still) e += sequence_diff_energy(infer(r.model, p.input, 12.0));
            return e;
        };
        CHECK(energy(last) < energy(first));
        CHECK(last.loss_history.back() < last.loss_history.front());
    }
    SUBCASE("invalid configuration") {
        cfg.batch_size = 0;
        CHECK_THROWS_AS(train(pairs, cfg), InvalidArgument);
        CHECK_THROWS_AS(train({}, TrainConfig{}), InvalidArgument);
    }
}

TEST_CASE("overfit and infer on a small vocabulary") {
    // Distinct constant feature per word, distinct constant pose per word.
    Rng rng(12);
    std::vector<PoseVector> word_pose;
    std::vector<Eigen::VectorXd> word_feat;
    for (int w = 0; w < 3; ++w) {
        word_pose.push_back(random_poses(rng, 1, 12.0).frames[0]);
        word_feat.push_back(Eigen::VectorXd::Unit(4, w));
    }
    std::vector<TrainingPair> pairs;
    for (const std::vector<int>& order : {std::vector<int>{0, 1, 2}, std::vector<int>{2, 0, 1}}) {
        FeatureSequence f;
        f.stride = 1.0 / 12.0;
        f.values.resize(18, 4);
        PoseSequence p;
        p.fps = 12.0;
        for (int k = 0; k < 3; ++k) {
            for (int t = 0; t < 6; ++t) {
                f.values.row(6 * k + t) = word_feat[order[k]].transpose();
                p.frames.push_back(word_pose[order[k]]);
            }
        }
        pairs.push_back({f, p});
    }
    TrainConfig cfg;
    cfg.hidden = 32;
    cfg.epochs = 400;
    cfg.delay = 0.0;
    cfg.smoothness = 0.0;
    const TrainResult r = train(pairs, cfg);
    CHECK(r.loss_history.back() < 0.05 * r.loss_history.front());
    for (const auto& p : pairs) {
        const PoseSequence out = infer(r.model, p.input, 12.0);
        CHECK(weighted_loss(out, p.target, cfg.weights, 0.0) < 10.0 * r.loss_history.back());
    }
}

TEST_CASE("model file round-trip is exact") {
    Rng rng(3);
    std::vector<TrainingPair> pairs{{random_features(rng, 50, 6, 0.01), random_poses(rng, 6, 12.0)}};
    TrainConfig cfg;
    cfg.hidden = 5;
    cfg.epochs = 2;
    const TrainResult r = train(pairs, cfg);
    const auto path = std::filesystem::temp_directory_path() / "gestsynth_test.lstm";
    save_model(r.model, path);
    const PoseRegressor back = load_model(path);
    CHECK(params_equal(back.params, r.model.params));
    CHECK(back.input_mean == r.model.input_mean);
    CHECK(back.input_var == r.model.input_var);
    CHECK(back.delay_frames == 2);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_model(path), IoError);
}
