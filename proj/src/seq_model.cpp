#include "gestsynth/seq_model.hpp"

#include "gestsynth/errors.hpp"
#include "gestsynth/random.hpp"
#include "text_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gestsynth {

namespace {

Eigen::Map<Eigen::VectorXd> flat(Eigen::MatrixXd& m) { return {m.data(), m.size()}; }
Eigen::Map<Eigen::VectorXd> flat(Eigen::VectorXd& v) { return {v.data(), v.size()}; }
Eigen::Map<const Eigen::VectorXd> flat(const Eigen::MatrixXd& m) { return {m.data(), m.size()}; }
Eigen::Map<const Eigen::VectorXd> flat(const Eigen::VectorXd& v) { return {v.data(), v.size()}; }

template <class Mat>
auto sigmoid(const Mat& x) {
    return (1.0 + (-x.array()).exp()).inverse();
}

}  // namespace

LstmParams LstmParams::zeros(int input_dim, int hidden, int output_dim) {
    if (input_dim <= 0 || hidden <= 0 || output_dim <= 0) throw InvalidArgument("LSTM dimensions must be positive");
    LstmParams p;
    p.input_dim = input_dim;
    p.hidden = hidden;
    p.output_dim = output_dim;
    for (int l = 0; l < kLstmLayers; ++l) {
        const int in = l == 0 ? input_dim : hidden;
        p.W[l] = Eigen::MatrixXd::Zero(4 * hidden, in + hidden);
        p.b[l] = Eigen::VectorXd::Zero(4 * hidden);
    }
    p.Wy = Eigen::MatrixXd::Zero(output_dim, hidden);
    p.by = Eigen::VectorXd::Zero(output_dim);
    return p;
}

LstmParams LstmParams::random(int input_dim, int hidden, int output_dim, std::uint64_t seed) {
    LstmParams p = zeros(input_dim, hidden, output_dim);
    Rng rng(seed);
    const auto fill = [&](auto& m, int fan_in) {
        const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-a, a);
    };
    for (int l = 0; l < kLstmLayers; ++l) {
        const int fan_in = static_cast<int>(p.W[l].cols());
        fill(p.W[l], fan_in);
        fill(p.b[l], fan_in);
    }
    fill(p.Wy, hidden);
    fill(p.by, hidden);
    return p;
}

const std::array<std::string, LstmParams::kBlocks>& LstmParams::block_names() {
    static const std::array<std::string, kBlocks> names = {"layer0.W", "layer0.b", "layer1.W",
                                                           "layer1.b", "readout.W", "readout.b"};
    return names;
}

std::array<Eigen::Map<Eigen::VectorXd>, LstmParams::kBlocks> LstmParams::blocks() {
    return {flat(W[0]), flat(b[0]), flat(W[1]), flat(b[1]), flat(Wy), flat(by)};
}

std::array<Eigen::Map<const Eigen::VectorXd>, LstmParams::kBlocks> LstmParams::blocks() const {
    return {flat(W[0]), flat(b[0]), flat(W[1]), flat(b[1]), flat(Wy), flat(by)};
}

std::size_t LstmParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& blk : blocks()) n += static_cast<std::size_t>(blk.size());
    return n;
}

bool LstmParams::all_finite() const {
    for (const auto& blk : blocks()) {
        if (!blk.allFinite()) return false;
    }
    return true;
}

std::vector<Eigen::MatrixXd> lstm_forward(const LstmParams& params, std::span<const Eigen::MatrixXd> inputs,
                                          ForwardCache* cache) {
    const int batch = static_cast<int>(inputs.size());
    const int H = params.hidden;
    int steps = 0;
    for (const auto& x : inputs) {
        if (x.rows() != params.input_dim) {
            throw DimMismatch("input dim " + std::to_string(x.rows()) + " != model input dim " +
                              std::to_string(params.input_dim));
        }
        steps = std::max(steps, static_cast<int>(x.cols()));
    }
    std::vector<Eigen::MatrixXd> outputs(batch);
    for (int b = 0; b < batch; ++b) outputs[b].resize(params.output_dim, inputs[b].cols());
    ForwardCache local;
    ForwardCache& st = cache ? *cache : local;
    st.steps = steps;
    st.batch = batch;
    if (batch == 0 || steps == 0) return outputs;

    const Eigen::Index cols = static_cast<Eigen::Index>(steps) * batch;
    Eigen::MatrixXd x0 = Eigen::MatrixXd::Zero(params.input_dim, cols);
    for (int b = 0; b < batch; ++b) {
        for (Eigen::Index t = 0; t < inputs[b].cols(); ++t) x0.col(t * batch + b) = inputs[b].col(t);
    }
    st.input[0] = std::move(x0);
    for (int l = 0; l < kLstmLayers; ++l) {
        if (l > 0) st.input[l] = st.hidden[l - 1];
        const Eigen::Index in = st.input[l].rows();
        // Input projections for every step at once; only the recurrence is sequential.
        Eigen::MatrixXd& g = st.gates[l];
        g.noalias() = params.W[l].leftCols(in) * st.input[l];
        g.colwise() += params.b[l];
        st.h_prev[l].resize(H, cols);
        st.cell[l].resize(H, cols);
        st.hidden[l].resize(H, cols);
        const auto Wh = params.W[l].rightCols(H);
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(H, batch);
        Eigen::MatrixXd c = Eigen::MatrixXd::Zero(H, batch);
        for (int t = 0; t < steps; ++t) {
            const Eigen::Index c0 = static_cast<Eigen::Index>(t) * batch;
            st.h_prev[l].middleCols(c0, batch) = h;
            auto gt = g.middleCols(c0, batch);
            // Column-wise products avoid repacking Wh for every step.
            for (int b = 0; b < batch; ++b) gt.col(b).noalias() += Wh * h.col(b);
            gt.topRows(2 * H) = sigmoid(gt.topRows(2 * H));
            gt.middleRows(2 * H, H) = gt.middleRows(2 * H, H).array().tanh();
            gt.bottomRows(H) = sigmoid(gt.bottomRows(H));
            c = gt.middleRows(H, H).cwiseProduct(c) + gt.topRows(H).cwiseProduct(gt.middleRows(2 * H, H));
            h = gt.bottomRows(H).cwiseProduct(c.array().tanh().matrix());
            st.cell[l].middleCols(c0, batch) = c;
            st.hidden[l].middleCols(c0, batch) = h;
        }
    }
    Eigen::MatrixXd y = params.Wy * st.hidden[kLstmLayers - 1];
    y.colwise() += params.by;
    for (int b = 0; b < batch; ++b) {
        for (Eigen::Index t = 0; t < outputs[b].cols(); ++t) outputs[b].col(t) = y.col(t * batch + b);
    }
    return outputs;
}

LstmParams lstm_backward(const LstmParams& params, const ForwardCache& cache,
                         std::span<const Eigen::MatrixXd> output_grads) {
    const int H = params.hidden;
    const int batch = cache.batch;
    const int steps = cache.steps;
    if (static_cast<int>(output_grads.size()) != batch) throw LengthMismatch("one output gradient per sequence");
    LstmParams grads = LstmParams::zeros(params.input_dim, H, params.output_dim);
    if (batch == 0 || steps == 0) return grads;

    const Eigen::Index cols = static_cast<Eigen::Index>(steps) * batch;
    Eigen::MatrixXd dy = Eigen::MatrixXd::Zero(params.output_dim, cols);
    for (int b = 0; b < batch; ++b) {
        const Eigen::Index n = std::min<Eigen::Index>(output_grads[b].cols(), steps);
        for (Eigen::Index t = 0; t < n; ++t) dy.col(t * batch + b) = output_grads[b].col(t);
    }
    const int top = kLstmLayers - 1;
    grads.Wy.noalias() = dy * cache.hidden[top].transpose();
    grads.by = dy.rowwise().sum();
    // dLoss/dh arriving from above (readout or next layer) at every step.
    Eigen::MatrixXd dh_above = params.Wy.transpose() * dy;

    Eigen::MatrixXd da(4 * H, cols);
    for (int l = top; l >= 0; --l) {
        const Eigen::Index in = cache.input[l].rows();
        const auto Wh = params.W[l].rightCols(H);
        Eigen::MatrixXd dh_next = Eigen::MatrixXd::Zero(H, batch);
        Eigen::MatrixXd dc_next = Eigen::MatrixXd::Zero(H, batch);
        for (int t = steps - 1; t >= 0; --t) {
            const Eigen::Index c0 = static_cast<Eigen::Index>(t) * batch;
            const auto g = cache.gates[l].middleCols(c0, batch);
            const Eigen::ArrayXXd i_g = g.topRows(H).array();
            const Eigen::ArrayXXd f_g = g.middleRows(H, H).array();
            const Eigen::ArrayXXd c_g = g.middleRows(2 * H, H).array();
            const Eigen::ArrayXXd o_g = g.bottomRows(H).array();
            const Eigen::ArrayXXd tanh_c = cache.cell[l].middleCols(c0, batch).array().tanh();
            const Eigen::ArrayXXd dh = dh_above.middleCols(c0, batch).array() + dh_next.array();
            const Eigen::ArrayXXd dc = dh * o_g * (1.0 - tanh_c.square()) + dc_next.array();
            const Eigen::ArrayXXd c_prev = t > 0 ? Eigen::ArrayXXd(cache.cell[l].middleCols(c0 - batch, batch).array())
                                                 : Eigen::ArrayXXd::Zero(H, batch);
            auto dat = da.middleCols(c0, batch);
            dat.topRows(H) = (dc * c_g * i_g * (1.0 - i_g)).matrix();
            dat.middleRows(H, H) = (dc * c_prev * f_g * (1.0 - f_g)).matrix();
            dat.middleRows(2 * H, H) = (dc * i_g * (1.0 - c_g.square())).matrix();
            dat.bottomRows(H) = (dh * tanh_c * o_g * (1.0 - o_g)).matrix();
            dc_next = (dc * f_g).matrix();
            for (int b = 0; b < batch; ++b) dh_next.col(b).noalias() = Wh.transpose() * dat.col(b);
        }
        grads.W[l].leftCols(in).noalias() = da * cache.input[l].transpose();
        grads.W[l].rightCols(H).noalias() = da * cache.h_prev[l].transpose();
        grads.b[l] = da.rowwise().sum();
        if (l > 0) dh_above.noalias() = params.W[l].leftCols(in).transpose() * da;
    }
    return grads;
}

double weighted_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target, const LossWeights& w,
                     double lambda, Eigen::MatrixXd* grad) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw LengthMismatch("prediction and target shapes differ");
    }
    if (pred.rows() != w.size()) throw DimMismatch("loss weights do not match output dim");
    const Eigen::Index T = pred.cols();
    if (grad) *grad = Eigen::MatrixXd::Zero(pred.rows(), T);
    if (T == 0) return 0.0;
    const double inv_t = 1.0 / static_cast<double>(T);
    const Eigen::MatrixXd err = pred - target;
    double data = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) data += w.dot(err.col(t).cwiseAbs2());
    double smooth = 0.0;
    for (Eigen::Index t = 1; t < T; ++t) smooth += (pred.col(t) - pred.col(t - 1)).squaredNorm();
    if (grad) {
        for (Eigen::Index t = 0; t < T; ++t) {
            grad->col(t) = 2.0 * inv_t * w.cwiseProduct(err.col(t));
        }
        if (lambda != 0.0) {
            for (Eigen::Index t = 1; t < T; ++t) {
                const Eigen::VectorXd d = 2.0 * lambda * inv_t * (pred.col(t) - pred.col(t - 1));
                grad->col(t) += d;
                grad->col(t - 1) -= d;
            }
        }
    }
    return inv_t * data + lambda * inv_t * smooth;
}

double weighted_loss(const PoseSequence& pred, const PoseSequence& target, const LossWeights& w, double lambda) {
    if (pred.size() != target.size()) throw LengthMismatch("prediction and target lengths differ");
    return weighted_loss(pose_matrix(pred), pose_matrix(target), w, lambda);
}

AdamState AdamState::for_params(const LstmParams& p) {
    AdamState s;
    s.m = LstmParams::zeros(p.input_dim, p.hidden, p.output_dim);
    s.v = s.m;
    return s;
}

void adam_step(LstmParams& params, const LstmParams& grads, AdamState& state, double lr, const AdamOptions& opts) {
    if (state.m.input_dim != params.input_dim || state.m.hidden != params.hidden) state = AdamState::for_params(params);
    if (grads.input_dim != params.input_dim || grads.hidden != params.hidden || grads.output_dim != params.output_dim) {
        throw DimMismatch("gradient shapes do not match parameters");
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(opts.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(opts.beta2, static_cast<double>(state.step));
    auto p = params.blocks();
    const auto g = grads.blocks();
    auto m = state.m.blocks();
    auto v = state.v.blocks();
    for (int k = 0; k < LstmParams::kBlocks; ++k) {
        m[k] = opts.beta1 * m[k] + (1.0 - opts.beta1) * g[k];
        v[k] = opts.beta2 * v[k] + (1.0 - opts.beta2) * g[k].cwiseAbs2();
        if (lr == 0.0) continue;
        p[k].array() -= lr * (m[k].array() / bc1) / ((v[k].array() / bc2).sqrt() + opts.epsilon);
    }
}

Eigen::MatrixXd pose_matrix(const PoseSequence& seq) {
    Eigen::MatrixXd m(kPoseDim, static_cast<Eigen::Index>(seq.size()));
    for (std::size_t t = 0; t < seq.size(); ++t) m.col(static_cast<Eigen::Index>(t)) = seq.frames[t];
    return m;
}

PoseSequence pose_sequence_from_matrix(const Eigen::MatrixXd& m, double fps) {
    if (m.rows() != kPoseDim) throw DimMismatch("pose matrix must have 106 rows");
    PoseSequence seq;
    seq.fps = fps;
    seq.frames.resize(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index t = 0; t < m.cols(); ++t) seq.frames[static_cast<std::size_t>(t)] = m.col(t);
    return seq;
}

Eigen::MatrixXd align_features_to_pose_clock(const FeatureSequence& features, double fps, int frames) {
    if (!(fps > 0.0)) throw InvalidArgument("fps must be positive");
    const int count = features.frame_count();
    if (count == 0) return Eigen::MatrixXd(features.dim(), 0);
    constexpr double eps = 1e-9;
    const int n = frames >= 0 ? frames
                              : static_cast<int>(std::lround(count * features.stride * fps));
    Eigen::MatrixXd out(features.dim(), n);
    const auto first_at_or_after = [&](double time) {
        return static_cast<int>(std::ceil(time / features.stride - eps));
    };
    for (int t = 0; t < n; ++t) {
        const int lo = std::max(0, first_at_or_after(t / fps));
        const int hi = std::min(count, first_at_or_after((t + 1) / fps));
        if (hi > lo) {
            out.col(t) = features.values.middleRows(lo, hi - lo).colwise().mean().transpose();
        } else {
            const int prev = std::clamp(lo - 1, 0, count - 1);
            out.col(t) = features.values.row(prev).transpose();
        }
    }
    return out;
}

int delay_frames(double delay_seconds, double fps) {
    if (!(delay_seconds >= 0.0)) throw InvalidArgument("delay must be >= 0");
    return static_cast<int>(std::lround(delay_seconds * fps));
}

Eigen::MatrixXd shift_targets(const Eigen::MatrixXd& targets, int d) {
    Eigen::MatrixXd out(targets.rows(), targets.cols());
    for (Eigen::Index t = 0; t < targets.cols(); ++t) out.col(t) = targets.col(std::max<Eigen::Index>(0, t - d));
    return out;
}

PoseSequence apply_output_delay(const PoseSequence& targets, double delay_seconds) {
    const int d = delay_frames(delay_seconds, targets.fps);
    if (d == 0) return targets;
    return pose_sequence_from_matrix(shift_targets(pose_matrix(targets), d), targets.fps);
}

Eigen::MatrixXd PoseRegressor::standardize(const Eigen::MatrixXd& x) const {
    if (x.rows() != input_mean.size()) throw DimMismatch("feature dim does not match the model");
    return (x.colwise() - input_mean).array().colwise() / input_var.array().sqrt();
}

TrainResult train(std::span<const TrainingPair> pairs, const TrainConfig& cfg) {
    if (pairs.empty()) throw InvalidArgument("no training pairs");
    if (!(cfg.learning_rate >= 0.0) || cfg.batch_size < 1 || !(cfg.delay >= 0.0) || !(cfg.smoothness >= 0.0)) {
        throw InvalidArgument("invalid training configuration");
    }
    const double fps = pairs.front().target.fps;
    const int in_dim = pairs.front().input.dim();
    std::vector<Eigen::MatrixXd> inputs, targets;
    for (const auto& p : pairs) {
        if (p.target.fps != fps) throw FpsMismatch("all training targets must share one frame rate");
        if (p.input.dim() != in_dim) throw DimMismatch("all training inputs must share one dimension");
        inputs.push_back(align_features_to_pose_clock(p.input, fps, static_cast<int>(p.target.size())));
        targets.push_back(pose_matrix(p.target));
    }

    TrainResult result;
    PoseRegressor& model = result.model;
    model.delay_frames = delay_frames(cfg.delay, fps);
    for (auto& t : targets) t = shift_targets(t, model.delay_frames);

    // Corpus-wide standardization statistics.
    Eigen::Index total = 0;
    model.input_mean = Eigen::VectorXd::Zero(in_dim);
    for (const auto& x : inputs) {
        model.input_mean += x.rowwise().sum();
        total += x.cols();
    }
    if (total == 0) throw InvalidArgument("training pairs contain no frames");
    model.input_mean /= static_cast<double>(total);
    model.input_var = Eigen::VectorXd::Zero(in_dim);
    for (const auto& x : inputs) model.input_var += (x.colwise() - model.input_mean).cwiseAbs2().rowwise().sum();
    model.input_var = (model.input_var / static_cast<double>(total)).cwiseMax(1e-8);
    for (auto& x : inputs) x = model.standardize(x);

    model.params = LstmParams::random(in_dim, cfg.hidden, kPoseDim, cfg.seed);
    AdamState adam = AdamState::for_params(model.params);
    Rng shuffle_rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);

    const std::size_t n = pairs.size();
    std::vector<std::size_t> order(n);
    std::vector<double> pair_loss(n);
    ForwardCache cache;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = n; i > 1; --i) {
            std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle_rng.next() % i)]);
        }
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<Eigen::MatrixXd> batch_in, grads;
            for (std::size_t i = start; i < end; ++i) batch_in.push_back(inputs[order[i]]);
            const auto outputs = lstm_forward(model.params, batch_in, &cache);
            const double inv_b = 1.0 / static_cast<double>(end - start);
            for (std::size_t i = start; i < end; ++i) {
                Eigen::MatrixXd g;
                pair_loss[order[i]] =
                    weighted_loss(outputs[i - start], targets[order[i]], cfg.weights, cfg.smoothness, &g);
                grads.push_back(g * inv_b);
            }
            const LstmParams pgrad = lstm_backward(model.params, cache, grads);
            adam_step(model.params, pgrad, adam, cfg.learning_rate, cfg.adam);
            ++result.steps;
        }
        const double epoch_loss = std::accumulate(pair_loss.begin(), pair_loss.end(), 0.0) / static_cast<double>(n);
        if (!std::isfinite(epoch_loss) || !model.params.all_finite()) throw NonFiniteLoss(static_cast<std::size_t>(epoch));
        result.loss_history.push_back(epoch_loss);
    }
    return result;
}

PoseSequence infer(const PoseRegressor& model, const FeatureSequence& features, double fps, int frames) {
    PoseSequence out;
    out.fps = fps;
    if (features.frame_count() == 0 || frames == 0) return out;
    if (features.dim() != model.params.input_dim) {
        throw DimMismatch("features have dim " + std::to_string(features.dim()) + ", model expects " +
                          std::to_string(model.params.input_dim));
    }
    const Eigen::MatrixXd aligned = model.standardize(align_features_to_pose_clock(features, fps, frames));
    const Eigen::Index n = aligned.cols();
    const int d = model.delay_frames;
    Eigen::MatrixXd padded(aligned.rows(), n + d);
    padded.leftCols(n) = aligned;
    for (int k = 0; k < d; ++k) padded.col(n + k) = aligned.col(n - 1);
    const std::vector<Eigen::MatrixXd> in{padded};
    const Eigen::MatrixXd y = lstm_forward(model.params, in).front();
    out = pose_sequence_from_matrix(y.middleCols(d, n), fps);
    for (auto& f : out.frames) f = clamp_to_canonical(f);
    return out;
}

void save_model(const PoseRegressor& model, const std::filesystem::path& path) {
    const LstmParams& p = model.params;
    std::string out = "LSTM 1 " + std::to_string(p.input_dim) + " " + std::to_string(p.hidden) + " " +
                      std::to_string(p.output_dim) + " " + std::to_string(model.delay_frames) + "\n";
    const auto write_matrix = [&](const std::string& name, const Eigen::MatrixXd& m) {
        out += "BLOCK " + name + " " + std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                if (c) out += ' ';
                out += detail::format_double(m(r, c));
            }
            out += '\n';
        }
    };
    const auto& names = LstmParams::block_names();
    write_matrix(names[0], p.W[0]);
    write_matrix(names[1], p.b[0]);
    write_matrix(names[2], p.W[1]);
    write_matrix(names[3], p.b[1]);
    write_matrix(names[4], p.Wy);
    write_matrix(names[5], p.by);
    write_matrix("input.mean", model.input_mean);
    write_matrix("input.var", model.input_var);
    detail::write_text_file(path, out);
}

PoseRegressor load_model(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    const std::string ctx = path.string();
    if (lines.empty()) throw MalformedHeader(ctx + ": empty model file");
    const auto h = detail::split_ws(lines[0]);
    if (h.size() != 6 || h[0] != "LSTM" || h[1] != "1") {
        throw MalformedHeader(ctx + ": expected 'LSTM 1 <in> <hidden> <out> <delay>'");
    }
    const int in = static_cast<int>(detail::parse_int(h[2], ctx));
    const int hidden = static_cast<int>(detail::parse_int(h[3], ctx));
    const int outd = static_cast<int>(detail::parse_int(h[4], ctx));
    PoseRegressor model;
    model.delay_frames = static_cast<int>(detail::parse_int(h[5], ctx));
    model.params = LstmParams::zeros(in, hidden, outd);
    std::size_t line = 1;
    const auto read_matrix = [&](const std::string& name, auto& m) {
        if (line >= lines.size()) throw MalformedHeader(ctx + ": missing block " + name);
        const auto bh = detail::split_ws(lines[line++]);
        if (bh.size() != 4 || bh[0] != "BLOCK" || bh[1] != name || detail::parse_int(bh[2], ctx) != m.rows() ||
            detail::parse_int(bh[3], ctx) != m.cols()) {
            throw MalformedHeader(ctx + ": bad header for block " + name);
        }
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            if (line >= lines.size()) throw MalformedHeader(ctx + ": truncated block " + name);
            const auto tok = detail::split_ws(lines[line++]);
            if (static_cast<Eigen::Index>(tok.size()) != m.cols()) throw MalformedHeader(ctx + ": bad row in " + name);
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = detail::parse_double(tok[c], ctx);
        }
    };
    const auto& names = LstmParams::block_names();
    read_matrix(names[0], model.params.W[0]);
    read_matrix(names[1], model.params.b[0]);
    read_matrix(names[2], model.params.W[1]);
    read_matrix(names[3], model.params.b[1]);
    read_matrix(names[4], model.params.Wy);
    read_matrix(names[5], model.params.by);
    model.input_mean = Eigen::VectorXd::Zero(in);
    model.input_var = Eigen::VectorXd::Zero(in);
    read_matrix("input.mean", model.input_mean);
    read_matrix("input.var", model.input_var);
    return model;
}

}  // namespace gestsynth
