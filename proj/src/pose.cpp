#include "gestsynth/pose.hpp"

#include "gestsynth/errors.hpp"
#include "text_io.hpp"

#include <cmath>
#include <numbers>

namespace gestsynth {

bool PartLayout::valid() const {
    return body.begin == 0 && body.end == hands.begin && hands.end == expression.begin &&
           expression.end == kPoseDim && body.size() > 0 && hands.size() > 0 &&
           expression.size() > 0;
}

LossWeights default_weights(const PartLayout& layout, const WeightOptions& opts) {
    if (!layout.valid()) throw InvalidArgument("part layout does not cover 0..106");
    LossWeights w;
    w.segment(layout.body.begin, layout.body.size()).setConstant(opts.body);
    w.segment(layout.hands.begin, layout.hands.size()).setConstant(opts.hands);
    w.segment(layout.expression.begin, layout.expression.size()).setConstant(opts.expression);
    w.segment<3>(layout.body.begin + 3 * kJawJoint).setConstant(opts.jaw);
    return w;
}

PoseVector lerp_pose(const PoseVector& a, const PoseVector& b, double w) {
    if (w == 0.0) return a;
    if (w == 1.0) return b;
    return a + w * (b - a);
}

double sequence_diff_energy(const PoseSequence& seq) {
    double e = 0.0;
    for (std::size_t t = 1; t < seq.frames.size(); ++t) {
        e += (seq.frames[t] - seq.frames[t - 1]).squaredNorm();
    }
    return e;
}

PoseVector clamp_to_canonical(const PoseVector& pose) {
    PoseVector out = pose;
    for (int j = 0; j < kBodyJoints; ++j) {
        auto aa = out.segment<3>(3 * j);
        const double n = aa.norm();
        if (n > std::numbers::pi) aa *= std::numbers::pi / n;
    }
    return out;
}

bool is_canonical(const PoseVector& pose, double tol) {
    if (!pose.allFinite()) return false;
    for (int j = 0; j < kBodyJoints; ++j) {
        if (pose.segment<3>(3 * j).norm() > std::numbers::pi + tol) return false;
    }
    return true;
}

void write_pose_sequence(const PoseSequence& seq, const std::filesystem::path& path) {
    std::string out = "PSEQ 1 " + detail::format_double(seq.fps) + " " +
                      std::to_string(seq.frames.size()) + " " + std::to_string(kPoseDim) + "\n";
    for (const auto& f : seq.frames) {
        for (int i = 0; i < kPoseDim; ++i) {
            if (i) out += ' ';
            out += detail::format_double(f[i]);
        }
        out += '\n';
    }
    detail::write_text_file(path, out);
}

PoseSequence read_pose_sequence(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    const std::string ctx = path.string();
    if (lines.empty()) throw MalformedHeader(ctx + ": empty file");
    const auto header = detail::split_ws(lines[0]);
    if (header.size() != 5 || header[0] != "PSEQ" || header[1] != "1") {
        throw MalformedHeader(ctx + ": expected 'PSEQ 1 <fps> <count> 106'");
    }
    PoseSequence seq;
    seq.fps = detail::parse_double(header[2], ctx);
    const auto count = detail::parse_int(header[3], ctx);
    if (detail::parse_int(header[4], ctx) != kPoseDim) throw MalformedHeader(ctx + ": dim != 106");
    if (!(seq.fps > 0.0) || count < 0) throw MalformedHeader(ctx + ": bad fps or count");
    if (lines.size() < static_cast<std::size_t>(count) + 1) {
        throw MalformedHeader(ctx + ": truncated frame data");
    }
    seq.frames.resize(static_cast<std::size_t>(count));
    for (long long t = 0; t < count; ++t) {
        const auto tok = detail::split_ws(lines[static_cast<std::size_t>(t) + 1]);
        if (tok.size() != kPoseDim) throw MalformedHeader(ctx + ": frame has wrong width");
        for (int i = 0; i < kPoseDim; ++i) seq.frames[t][i] = detail::parse_double(tok[i], ctx);
    }
    return seq;
}

}  // namespace gestsynth
