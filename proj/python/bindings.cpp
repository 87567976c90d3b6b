#include "gestsynth/audio_features.hpp"
#include "gestsynth/keypose.hpp"
#include "gestsynth/pipeline.hpp"
#include "gestsynth/render.hpp"
#include "gestsynth/seq_model.hpp"
#include "gestsynth/skeleton.hpp"
#include "gestsynth/text_features.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace gestsynth;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

AudioBuffer to_audio(const std::vector<double>& samples, int sample_rate) {
    AudioBuffer a;
    a.samples = samples;
    a.sample_rate = sample_rate;
    return a;
}

// Rows are frames.
PoseSequence to_sequence(const RowMatrix& frames, double fps) {
    if (frames.rows() > 0 && frames.cols() != kPoseDim) throw DimMismatch("pose frames must have 106 columns");
    PoseSequence s;
    s.fps = fps;
    for (Eigen::Index t = 0; t < frames.rows(); ++t) s.frames.push_back(frames.row(t).transpose());
    return s;
}

RowMatrix from_sequence(const PoseSequence& s) {
    RowMatrix m(static_cast<Eigen::Index>(s.size()), kPoseDim);
    for (std::size_t t = 0; t < s.size(); ++t) m.row(static_cast<Eigen::Index>(t)) = s.frames[t].transpose();
    return m;
}

TimedTranscript to_transcript(const std::vector<std::tuple<std::string, double, double>>& words, double duration) {
    TimedTranscript t;
    for (const auto& [w, s, e] : words) t.words.push_back({w, s, e});
    t.duration = duration;
    return t;
}

Detection2D to_detection(const Eigen::MatrixXd& points, const Eigen::VectorXd& confidences) {
    if (points.rows() != 2) throw DimMismatch("detections must be 2 x n");
    if (confidences.size() != points.cols()) throw DimMismatch("one confidence per keypoint");
    return {points, confidences};
}

py::array_t<std::uint8_t> to_array(const Image& img) {
    py::array_t<std::uint8_t> out({img.height, img.width, 3});
    std::copy(img.pixels.begin(), img.pixels.end(), out.mutable_data());
    return out;
}

Image from_array(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 3 || a.shape(2) != 3) throw DimMismatch("image must be height x width x 3");
    Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::copy(a.data(), a.data() + a.size(), img.pixels.begin());
    return img;
}

}  // namespace

PYBIND11_MODULE(_gestsynth, m) {
    m.doc() = "Speech-driven gesture synthesis core";

    py::register_exception<Error>(m, "Error");

    m.attr("POSE_DIM") = kPoseDim;
    m.attr("KEYPOINTS") = kKeypoints;

    // Features
    m.def("mfcc_features", [](const std::vector<double>& samples, int sample_rate) {
        return RowMatrix(mfcc_features(to_audio(samples, sample_rate)).values);
    }, py::arg("samples"), py::arg("sample_rate") = 16000);
    m.def("filter_bank_energies", [](const std::vector<double>& samples, int sample_rate) {
        return RowMatrix(filter_bank_energies(to_audio(samples, sample_rate)));
    }, py::arg("samples"), py::arg("sample_rate") = 16000);
    m.def("rms_normalize", [](const std::vector<double>& samples, double target) {
        return rms_normalize(to_audio(samples, 16000), target).samples;
    }, py::arg("samples"), py::arg("target_rms") = 0.1);
    m.def("letter_frequencies", [](const std::string& w) { return Eigen::VectorXd(letter_frequencies(w)); });
    m.def("encode_transcript", [](const std::vector<std::tuple<std::string, double, double>>& words, double duration,
                                  double stride) {
        return RowMatrix(encode_transcript(to_transcript(words, duration), stride).values);
    }, py::arg("words"), py::arg("duration"), py::arg("stride") = kFeatureStride);

    // Skeleton
    m.def("forward_kinematics", [](const PoseVector& pose, const Vec3& global_orient, std::uint64_t basis_seed) {
        return Eigen::MatrixXd(forward_kinematics(SkeletonModel::surrogate(basis_seed), pose, global_orient));
    }, py::arg("pose"), py::arg("global_orient") = Vec3::Zero(), py::arg("basis_seed") = 7);
    m.def("project_default_view", [](const Eigen::MatrixXd& points) {
        if (points.rows() != 3) throw DimMismatch("points must be 3 x n");
        return Eigen::MatrixXd(project(points, Camera::default_view()));
    }, py::arg("points"));
    m.def("fit_pose", [](const Eigen::MatrixXd& points, const Eigen::VectorXd& confidences, const PoseVector& init,
                         const Vec3& init_global, bool fix_global, std::uint64_t basis_seed) {
        const FitResult r = fit_pose(SkeletonModel::surrogate(basis_seed), Camera::default_view(),
                                     to_detection(points, confidences), init, init_global, fix_global);
        return py::make_tuple(PoseVector(r.pose), Vec3(r.global_orient), r.final_energy);
    }, py::arg("points"), py::arg("confidences"), py::arg("init"), py::arg("init_global") = Vec3::Zero(),
          py::arg("fix_global") = false, py::arg("basis_seed") = 7);

    // Sequence model
    m.def("weighted_loss", [](const RowMatrix& pred, const RowMatrix& target, double lambda) {
        return weighted_loss(to_sequence(pred, 12.0), to_sequence(target, 12.0), default_weights(), lambda);
    }, py::arg("pred"), py::arg("target"), py::arg("smoothness") = 0.1);
    m.def("infer", [](const std::filesystem::path& model, const RowMatrix& features, double stride, double fps) {
        FeatureSequence f;
        f.stride = stride;
        f.values = features;
        return from_sequence(infer(load_model(model), f, fps));
    }, py::arg("model_path"), py::arg("features"), py::arg("stride") = kFeatureStride, py::arg("fps") = 12.0);

    // Key poses
    m.def("insert_still", [](const RowMatrix& frames, const PoseVector& pose, double t, double fps, double ramp,
                             double hold) {
        return from_sequence(insert_still(to_sequence(frames, fps), pose, t, ramp, hold));
    }, py::arg("frames"), py::arg("pose"), py::arg("t"), py::arg("fps") = 12.0, py::arg("ramp") = kDefaultRamp,
          py::arg("hold") = kDefaultHold);
    m.def("insert_motion", [](const RowMatrix& frames, const RowMatrix& clip, double t, double fps, double ramp) {
        return from_sequence(insert_motion(to_sequence(frames, fps), to_sequence(clip, fps), t, ramp));
    }, py::arg("frames"), py::arg("clip"), py::arg("t"), py::arg("fps") = 12.0, py::arg("ramp") = kDefaultRamp);

    // Rendering
    m.def("render_skeleton", [](const PoseVector& pose, const Vec3& global_orient, std::uint64_t basis_seed) {
        const Camera cam = Camera::default_view();
        return to_array(render_skeleton(SkeletonModel::surrogate(basis_seed), pose, global_orient, cam, cam.width,
                                        cam.height));
    }, py::arg("pose"), py::arg("global_orient") = Vec3::Zero(), py::arg("basis_seed") = 7);
    m.def("find_part_crops", [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& image,
                                int crop_size) {
        const PartCrops c = find_part_crops(from_array(image), crop_size);
        py::dict out;
        const auto box = [](const CropBox& b) {
            return py::make_tuple(b.x, b.y, b.size, b.center.x(), b.center.y());
        };
        out["face"] = box(c.face);
        out["left_hand"] = box(c.left_hand);
        out["right_hand"] = box(c.right_hand);
        return out;
    }, py::arg("image"), py::arg("crop_size") = 128);
    m.def("encode_ppm", [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& image) {
        const auto bytes = encode_ppm(from_array(image));
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    });
    m.def("decode_ppm", [](const py::bytes& data) {
        const std::string s = data;
        return to_array(decode_ppm(std::vector<std::uint8_t>(s.begin(), s.end())));
    });

    // Synthetic corpus helpers
    m.def("synthetic_word_pose", [](const std::string& w) { return PoseVector(synthetic_word_pose(w)); });
}
