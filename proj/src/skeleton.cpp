#include "gestsynth/skeleton.hpp"

#include "gestsynth/errors.hpp"
#include "gestsynth/random.hpp"
#include "text_io.hpp"

#include <Eigen/Geometry>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace gestsynth {

namespace {

constexpr int kFitParams = kPoseDim + 3;
using ParamVec = Eigen::Matrix<double, kFitParams, 1>;

Mat3 skew(const Vec3& v) {
    Mat3 k;
    k << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
    return k;
}

Eigen::MatrixXd orthonormal_columns(int rows, int cols, Rng& rng) {
    Eigen::MatrixXd g(rows, cols);
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) g(r, c) = rng.normal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
    // Fix the sign ambiguity of QR so the basis is a function of the seed alone.
    const Eigen::MatrixXd r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
    for (int c = 0; c < cols; ++c) {
        if (r(c, c) < 0.0) q.col(c) *= -1.0;
    }
    return q;
}

std::vector<Joint> builtin_joints() {
    // y up, subject faces +z, anatomical left is +x.
    std::vector<Joint> j = {
        {"pelvis", -1, {0.0, 0.0, 0.0}},
        {"left_hip", 0, {0.06, -0.09, 0.0}},
        {"right_hip", 0, {-0.06, -0.09, 0.0}},
        {"spine1", 0, {0.0, 0.11, -0.02}},
        {"left_knee", 1, {0.04, -0.38, 0.0}},
        {"right_knee", 2, {-0.04, -0.38, 0.0}},
        {"spine2", 3, {0.0, 0.13, 0.0}},
        {"left_ankle", 4, {-0.01, -0.40, -0.04}},
        {"right_ankle", 5, {0.01, -0.40, -0.04}},
        {"spine3", 6, {0.0, 0.05, 0.02}},
        {"left_foot", 7, {0.02, -0.06, 0.12}},
        {"right_foot", 8, {-0.02, -0.06, 0.12}},
        {"neck", 9, {0.0, 0.21, -0.03}},
        {"left_collar", 9, {0.07, 0.11, -0.02}},
        {"right_collar", 9, {-0.07, 0.11, -0.02}},
        {"head", 12, {0.0, 0.09, 0.03}},
        {"left_shoulder", 13, {0.10, 0.03, -0.01}},
        {"right_shoulder", 14, {-0.10, 0.03, -0.01}},
        {"left_elbow", 16, {0.26, 0.0, -0.02}},
        {"right_elbow", 17, {-0.26, 0.0, -0.02}},
        {"left_wrist", 18, {0.25, 0.01, 0.0}},
        {"right_wrist", 19, {-0.25, 0.01, 0.0}},
        {"jaw", 15, {0.0, 0.0, 0.04}},
        {"head_top", 15, {0.0, 0.15, 0.0}},
    };
    struct Finger {
        const char* name;
        Vec3 base;
        Vec3 seg1;
        Vec3 seg2;
    };
    const Finger fingers[] = {
        {"index", {0.09, 0.0, 0.025}, {0.035, 0.0, 0.0}, {0.025, 0.0, 0.0}},
        {"middle", {0.095, 0.0, 0.0}, {0.035, 0.0, 0.0}, {0.025, 0.0, 0.0}},
        {"pinky", {0.08, 0.0, -0.04}, {0.028, 0.0, 0.0}, {0.02, 0.0, 0.0}},
        {"ring", {0.09, 0.0, -0.02}, {0.033, 0.0, 0.0}, {0.024, 0.0, 0.0}},
        {"thumb", {0.03, -0.01, 0.03}, {0.03, 0.0, 0.015}, {0.025, 0.0, 0.01}},
    };
    for (int side = 0; side < 2; ++side) {
        const bool left = side == 0;
        const int wrist = left ? kLeftWrist : kRightWrist;
        const Vec3 mirror = left ? Vec3(1, 1, 1) : Vec3(-1, 1, 1);
        const std::string prefix = left ? "left_" : "right_";
        for (const auto& f : fingers) {
            const int first = static_cast<int>(j.size());
            j.push_back({prefix + f.name + "1", wrist, f.base.cwiseProduct(mirror)});
            j.push_back({prefix + f.name + "2", first, f.seg1.cwiseProduct(mirror)});
            j.push_back({prefix + f.name + "3", first + 1, f.seg2.cwiseProduct(mirror)});
        }
    }
    return j;
}

std::vector<Vec3> builtin_face() {
    std::vector<Vec3> face;
    // Outline in front of the jaw joint, then the mouth ring.
    const int outline = kFaceLandmarks - kMouthLandmarks;
    for (int i = 0; i < outline; ++i) {
        const double a = 2.0 * std::numbers::pi * i / outline;
        face.emplace_back(0.07 * std::sin(a), 0.05 + 0.09 * std::cos(a), 0.05);
    }
    for (int i = 0; i < kMouthLandmarks; ++i) {
        const double a = 2.0 * std::numbers::pi * i / kMouthLandmarks;
        face.emplace_back(0.025 * std::sin(a), -0.01 + 0.01 * std::cos(a), 0.07);
    }
    return face;
}

std::vector<Vec3> local_axis_angles(const SkeletonModel& model, const PoseVector& pose) {
    std::vector<Vec3> aa(kSkeletonJoints);
    for (int j = 0; j < kBodyJoints; ++j) aa[j] = pose.segment<3>(3 * j);
    const PartLayout layout;
    const Eigen::VectorXd left = model.hand_basis(true) * pose.segment<kHandCoeffsPerHand>(layout.left_hand().begin);
    const Eigen::VectorXd right = model.hand_basis(false) * pose.segment<kHandCoeffsPerHand>(layout.right_hand().begin);
    for (int i = 0; i < kHandJointsPerHand; ++i) {
        aa[kLeftHandBegin + i] = left.segment<3>(3 * i);
        aa[kRightHandBegin + i] = right.segment<3>(3 * i);
    }
    return aa;
}

Vec3 canonical_axis_angle(const Vec3& aa) {
    const double n = aa.norm();
    if (n <= std::numbers::pi) return aa;
    // Same rotation, angle 2*pi - n about the flipped axis. Applied repeatedly
    // for angles beyond 2*pi.
    Vec3 out = aa * (1.0 - 2.0 * std::numbers::pi / n);
    return canonical_axis_angle(out);
}

struct ProjectionTerms {
    double energy = 0.0;
    Keypoints3d world_grad;  // dE/dp per keypoint
};

ProjectionTerms projection_terms(const Keypoints3d& pts, const Camera& cam, const Detection2D& det,
                                 bool want_grad) {
    if (det.size() != pts.cols() || det.confidences.size() != pts.cols()) {
        throw LengthMismatch("detection has " + std::to_string(det.size()) + " keypoints, model has " +
                             std::to_string(pts.cols()));
    }
    ProjectionTerms out;
    if (want_grad) out.world_grad = Keypoints3d::Zero(3, pts.cols());
    for (Eigen::Index q = 0; q < pts.cols(); ++q) {
        const Vec3 pc = cam.rotation * pts.col(q) + cam.translation;
        if (pc.z() <= 1e-6) throw BehindCamera("keypoint " + std::to_string(q) + " has depth <= 1e-6");
        const double c = det.confidences[q];
        if (c == 0.0) continue;
        const double iz = 1.0 / pc.z();
        const Eigen::Vector2d uv = cam.principal + cam.focal * Eigen::Vector2d(pc.x() * iz, pc.y() * iz);
        const Eigen::Vector2d r = uv - det.points.col(q);
        out.energy += c * r.squaredNorm();
        if (want_grad) {
            Eigen::Matrix<double, 2, 3> jp;
            jp << cam.focal * iz, 0.0, -cam.focal * pc.x() * iz * iz, 0.0, cam.focal * iz,
                -cam.focal * pc.y() * iz * iz;
            out.world_grad.col(q) = 2.0 * c * cam.rotation.transpose() * (jp.transpose() * r);
        }
    }
    return out;
}

}  // namespace

Mat3 rodrigues(const Vec3& axis_angle) {
    const double angle = axis_angle.norm();
    if (angle < 1e-12) return Mat3::Identity() + skew(axis_angle);
    return Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix();
}

Mat3 so3_left_jacobian(const Vec3& w) {
    const double phi = w.norm();
    const Mat3 k = skew(w);
    if (phi < 1e-6) return Mat3::Identity() + 0.5 * k + (1.0 / 6.0) * k * k;
    const double phi2 = phi * phi;
    return Mat3::Identity() + (1.0 - std::cos(phi)) / phi2 * k + (phi - std::sin(phi)) / (phi2 * phi) * k * k;
}

SkeletonModel::SkeletonModel(std::vector<Joint> joints, std::uint64_t basis_seed)
    : joints_(std::move(joints)), face_rest_(builtin_face()) {
    if (joints_.size() != static_cast<std::size_t>(kSkeletonJoints)) {
        throw InvalidArgument("skeleton needs exactly 54 joints, got " + std::to_string(joints_.size()));
    }
    for (int i = 0; i < kSkeletonJoints; ++i) {
        const Joint& j = joints_[i];
        if ((i == 0) != (j.parent < 0) || j.parent >= i) {
            throw InvalidArgument("joint " + j.name + ": parents must precede children with a single root");
        }
        if (!(j.scale > 0.0)) throw InvalidArgument("joint " + j.name + ": bone scale must be positive");
    }
    const auto hand_parent_ok = [&](int begin, int wrist) {
        for (int i = begin; i < begin + kHandJointsPerHand; ++i) {
            const int p = joints_[i].parent;
            if (p != wrist && (p < begin || p >= begin + kHandJointsPerHand)) return false;
        }
        return true;
    };
    if (!hand_parent_ok(kLeftHandBegin, kLeftWrist) || !hand_parent_ok(kRightHandBegin, kRightWrist)) {
        throw InvalidArgument("hand joints must hang off their wrist");
    }
    Rng rng(basis_seed);
    left_hand_basis_ = orthonormal_columns(3 * kHandJointsPerHand, kHandCoeffsPerHand, rng);
    right_hand_basis_ = orthonormal_columns(3 * kHandJointsPerHand, kHandCoeffsPerHand, rng);
    expression_basis_ = 0.05 * orthonormal_columns(3 * kFaceLandmarks, kExpressionCoeffs, rng);
}

SkeletonModel SkeletonModel::surrogate(std::uint64_t basis_seed) {
    return SkeletonModel(builtin_joints(), basis_seed);
}

SkeletonModel SkeletonModel::load(const std::filesystem::path& path, std::uint64_t basis_seed) {
    std::vector<Joint> joints;
    const std::string ctx = path.string();
    for (const auto& line : detail::read_lines(path)) {
        const auto t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto f = detail::split_ws(t);
        if (f.size() != 5 && f.size() != 6) throw MalformedHeader(ctx + ": expected 'name parent dx dy dz [scale]'");
        Joint j;
        j.name = std::string(f[0]);
        j.parent = static_cast<int>(detail::parse_int(f[1], ctx));
        j.offset = Vec3(detail::parse_double(f[2], ctx), detail::parse_double(f[3], ctx),
                        detail::parse_double(f[4], ctx));
        if (f.size() == 6) j.scale = detail::parse_double(f[5], ctx);
        joints.push_back(std::move(j));
    }
    return SkeletonModel(std::move(joints), basis_seed);
}

void SkeletonModel::save(const std::filesystem::path& path) const {
    std::string out = "# name parent dx dy dz scale\n";
    for (const auto& j : joints_) {
        out += j.name + " " + std::to_string(j.parent) + " " + detail::format_double(j.offset.x()) + " " +
               detail::format_double(j.offset.y()) + " " + detail::format_double(j.offset.z()) + " " +
               detail::format_double(j.scale) + "\n";
    }
    detail::write_text_file(path, out);
}

std::vector<int> SkeletonModel::mouth_keypoints() {
    std::vector<int> idx;
    for (int l = kFirstMouthLandmark; l < kFaceLandmarks; ++l) idx.push_back(landmark_keypoint(l));
    return idx;
}

KinematicState forward_kinematics_state(const SkeletonModel& model, const PoseVector& pose,
                                        const Vec3& global_orient) {
    KinematicState st;
    st.points.resize(3, kKeypoints);
    st.local.resize(kSkeletonJoints);
    st.global.resize(kSkeletonJoints);
    st.global_orient = rodrigues(global_orient);
    const auto aa = local_axis_angles(model, pose);
    for (int j = 0; j < kSkeletonJoints; ++j) {
        const Joint& jt = model.joint(j);
        st.local[j] = rodrigues(aa[j]);
        if (jt.parent < 0) {
            st.global[j] = st.global_orient * st.local[j];
            st.points.col(j) = jt.scale * jt.offset;
        } else {
            const Mat3& gp = st.global[jt.parent];
            st.global[j] = gp * st.local[j];
            st.points.col(j) = st.points.col(jt.parent) + gp * (jt.scale * jt.offset);
        }
    }
    const PartLayout layout;
    const Eigen::VectorXd disp =
        model.expression_basis() * pose.segment<kExpressionCoeffs>(layout.expression.begin);
    const Mat3& gj = st.global[kJawJoint];
    for (int l = 0; l < kFaceLandmarks; ++l) {
        st.points.col(kSkeletonJoints + l) =
            st.points.col(kJawJoint) + gj * (model.face_rest()[l] + disp.segment<3>(3 * l));
    }
    return st;
}

Keypoints3d forward_kinematics(const SkeletonModel& model, const PoseVector& pose, const Vec3& global_orient) {
    return forward_kinematics_state(model, pose, global_orient).points;
}

Camera Camera::default_view() {
    Camera c;
    c.focal = 500.0;
    c.principal = {256.0, 256.0};
    c.rotation = rodrigues(Vec3(std::numbers::pi, 0.0, 0.0));
    c.translation = Vec3(0.0, 0.1, 2.4);
    c.width = 512;
    c.height = 512;
    return c;
}

Camera read_camera(const std::filesystem::path& path) {
    std::map<std::string, std::vector<double>> kv;
    const std::string ctx = path.string();
    for (const auto& line : detail::read_lines(path)) {
        const auto t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) throw MalformedHeader(ctx + ": expected key = value");
        std::vector<double> vals;
        for (auto tok : detail::split_ws(t.substr(eq + 1))) vals.push_back(detail::parse_double(tok, ctx));
        kv[std::string(detail::trim(t.substr(0, eq)))] = vals;
    }
    const auto get = [&](const std::string& key, std::size_t n) -> std::vector<double> {
        auto it = kv.find(key);
        if (it == kv.end() || it->second.size() != n) throw MalformedHeader(ctx + ": missing or bad '" + key + "'");
        return it->second;
    };
    Camera c;
    c.focal = get("focal", 1)[0];
    c.principal = {get("cx", 1)[0], get("cy", 1)[0]};
    const auto r = get("rotation", 3);
    c.rotation = rodrigues(Vec3(r[0], r[1], r[2]));
    const auto tr = get("translation", 3);
    c.translation = Vec3(tr[0], tr[1], tr[2]);
    c.width = static_cast<int>(get("width", 1)[0]);
    c.height = static_cast<int>(get("height", 1)[0]);
    if (!c.valid() || c.width <= 0 || c.height <= 0) throw MalformedHeader(ctx + ": focal and size must be positive");
    return c;
}

void write_camera(const Camera& cam, const std::filesystem::path& path) {
    const Eigen::AngleAxisd aa(cam.rotation);
    const Vec3 r = aa.axis() * aa.angle();
    const auto f = [](double v) { return detail::format_double(v); };
    std::string out;
    out += "focal = " + f(cam.focal) + "\n";
    out += "cx = " + f(cam.principal.x()) + "\n";
    out += "cy = " + f(cam.principal.y()) + "\n";
    out += "rotation = " + f(r.x()) + " " + f(r.y()) + " " + f(r.z()) + "\n";
    out += "translation = " + f(cam.translation.x()) + " " + f(cam.translation.y()) + " " +
           f(cam.translation.z()) + "\n";
    out += "width = " + std::to_string(cam.width) + "\n";
    out += "height = " + std::to_string(cam.height) + "\n";
    detail::write_text_file(path, out);
}

Keypoints2d project(const Keypoints3d& points, const Camera& camera) {
    Keypoints2d out(2, points.cols());
    for (Eigen::Index q = 0; q < points.cols(); ++q) {
        const Vec3 pc = camera.rotation * points.col(q) + camera.translation;
        if (pc.z() <= 1e-6) throw BehindCamera("point " + std::to_string(q) + " has depth <= 1e-6");
        out.col(q) = camera.principal + camera.focal * Eigen::Vector2d(pc.x() / pc.z(), pc.y() / pc.z());
    }
    return out;
}

Detection2D detection_from_keypoints(const Keypoints2d& pts, double confidence) {
    Detection2D d;
    d.points = pts;
    d.confidences = Eigen::VectorXd::Constant(pts.cols(), confidence);
    return d;
}

std::vector<Detection2D> read_detections(const std::filesystem::path& path) {
    std::vector<Detection2D> frames;
    std::vector<Eigen::Vector3d> current;
    const std::string ctx = path.string();
    const auto flush = [&] {
        if (current.empty()) return;
        Detection2D d;
        d.points.resize(2, static_cast<Eigen::Index>(current.size()));
        d.confidences.resize(static_cast<Eigen::Index>(current.size()));
        for (std::size_t i = 0; i < current.size(); ++i) {
            d.points.col(i) = current[i].head<2>();
            d.confidences[i] = current[i].z();
        }
        frames.push_back(std::move(d));
        current.clear();
    };
    for (const auto& line : detail::read_lines(path)) {
        const auto t = detail::trim(line);
        if (t.empty()) {
            flush();
            continue;
        }
        const auto f = detail::split_ws(t);
        if (f.size() != 3) throw MalformedHeader(ctx + ": expected 'x y confidence'");
        const Eigen::Vector3d v(detail::parse_double(f[0], ctx), detail::parse_double(f[1], ctx),
                                detail::parse_double(f[2], ctx));
        if (!(v.z() >= 0.0 && v.z() <= 1.0)) throw MalformedHeader(ctx + ": confidence outside [0,1]");
        current.push_back(v);
    }
    flush();
    return frames;
}

void write_detections(const std::vector<Detection2D>& frames, const std::filesystem::path& path) {
    std::string out;
    for (std::size_t f = 0; f < frames.size(); ++f) {
        if (f) out += '\n';
        const auto& d = frames[f];
        for (int i = 0; i < d.size(); ++i) {
            out += detail::format_double(d.points(0, i)) + " " + detail::format_double(d.points(1, i)) + " " +
                   detail::format_double(d.confidences[i]) + "\n";
        }
    }
    detail::write_text_file(path, out);
}

double reprojection_energy(const SkeletonModel& model, const PoseVector& pose, const Vec3& global_orient,
                           const Camera& camera, const Detection2D& det) {
    return projection_terms(forward_kinematics(model, pose, global_orient), camera, det, false).energy;
}

EnergyGradient reprojection_energy_gradient(const SkeletonModel& model, const PoseVector& pose,
                                            const Vec3& global_orient, const Camera& camera,
                                            const Detection2D& det) {
    const KinematicState st = forward_kinematics_state(model, pose, global_orient);
    const ProjectionTerms terms = projection_terms(st.points, camera, det, true);
    EnergyGradient out;
    out.energy = terms.energy;

    // Sums over strict descendants of each joint of p x g and of g.
    std::vector<Vec3> moment(kSkeletonJoints, Vec3::Zero());
    std::vector<Vec3> force(kSkeletonJoints, Vec3::Zero());
    for (int l = 0; l < kFaceLandmarks; ++l) {
        const int q = kSkeletonJoints + l;
        moment[kJawJoint] += st.points.col(q).cross(terms.world_grad.col(q));
        force[kJawJoint] += terms.world_grad.col(q);
    }
    std::vector<Vec3> joint_grad(kSkeletonJoints);
    const auto aa = local_axis_angles(model, pose);
    for (int j = kSkeletonJoints - 1; j >= 0; --j) {
        const Vec3 p = st.points.col(j);
        const Vec3 lever = moment[j] - p.cross(force[j]);
        const int parent = model.joint(j).parent;
        const Mat3& gp = parent < 0 ? st.global_orient : st.global[parent];
        joint_grad[j] = so3_left_jacobian(aa[j]).transpose() * (gp.transpose() * lever);
        if (parent < 0) {
            out.d_global = so3_left_jacobian(global_orient).transpose() * lever;
        } else {
            moment[parent] += moment[j] + p.cross(terms.world_grad.col(j));
            force[parent] += force[j] + terms.world_grad.col(j);
        }
    }
    for (int j = 0; j < kBodyJoints; ++j) out.d_pose.segment<3>(3 * j) = joint_grad[j];
    const PartLayout layout;
    Eigen::VectorXd left(3 * kHandJointsPerHand), right(3 * kHandJointsPerHand);
    for (int i = 0; i < kHandJointsPerHand; ++i) {
        left.segment<3>(3 * i) = joint_grad[kLeftHandBegin + i];
        right.segment<3>(3 * i) = joint_grad[kRightHandBegin + i];
    }
    out.d_pose.segment<kHandCoeffsPerHand>(layout.left_hand().begin) = model.hand_basis(true).transpose() * left;
    out.d_pose.segment<kHandCoeffsPerHand>(layout.right_hand().begin) = model.hand_basis(false).transpose() * right;
    Eigen::VectorXd landmark_grad(3 * kFaceLandmarks);
    for (int l = 0; l < kFaceLandmarks; ++l) {
        landmark_grad.segment<3>(3 * l) = st.global[kJawJoint].transpose() * terms.world_grad.col(kSkeletonJoints + l);
    }
    out.d_pose.segment<kExpressionCoeffs>(layout.expression.begin) =
        model.expression_basis().transpose() * landmark_grad;
    return out;
}

double mean_reprojection_error(const SkeletonModel& model, const PoseVector& pose, const Vec3& global_orient,
                               const Camera& camera, const Detection2D& det) {
    const Keypoints2d uv = project(forward_kinematics(model, pose, global_orient), camera);
    if (det.size() != uv.cols()) throw LengthMismatch("detection/keypoint count mismatch");
    double sum = 0.0;
    int n = 0;
    for (int q = 0; q < det.size(); ++q) {
        if (det.confidences[q] <= 0.0) continue;
        sum += (uv.col(q) - det.points.col(q)).norm();
        ++n;
    }
    return n ? sum / n : 0.0;
}

ReprojectionResiduals reprojection_residuals(const SkeletonModel& model, const PoseVector& pose,
                                             const Vec3& global_orient, const Camera& camera,
                                             const Detection2D& det) {
    const KinematicState st = forward_kinematics_state(model, pose, global_orient);
    if (det.size() != st.points.cols() || det.confidences.size() != st.points.cols()) {
        throw LengthMismatch("detection has " + std::to_string(det.size()) + " keypoints, model has " +
                             std::to_string(st.points.cols()));
    }
    const auto aa = local_axis_angles(model, pose);
    // World rotation axis of each joint per unit change of its axis-angle.
    std::vector<Mat3> axis(kSkeletonJoints);
    for (int j = 0; j < kSkeletonJoints; ++j) {
        const int parent = model.joint(j).parent;
        axis[j] = (parent < 0 ? st.global_orient : st.global[parent]) * so3_left_jacobian(aa[j]);
    }
    const Mat3 global_axis = so3_left_jacobian(global_orient);
    const PartLayout layout;

    ReprojectionResiduals out;
    out.residuals = Eigen::VectorXd::Zero(2 * kKeypoints);
    out.jacobian = Eigen::MatrixXd::Zero(2 * kKeypoints, kFitParams);
    for (int q = 0; q < kKeypoints; ++q) {
        const Vec3 p = st.points.col(q);
        const Vec3 pc = camera.rotation * p + camera.translation;
        if (pc.z() <= 1e-6) throw BehindCamera("keypoint " + std::to_string(q) + " has depth <= 1e-6");
        const double c = det.confidences[q];
        if (c == 0.0) continue;
        const double w = std::sqrt(c);
        const double iz = 1.0 / pc.z();
        const Eigen::Vector2d uv = camera.principal + camera.focal * Eigen::Vector2d(pc.x() * iz, pc.y() * iz);
        out.residuals.segment<2>(2 * q) = w * (uv - det.points.col(q));

        Eigen::Matrix<double, 2, 3> jp;
        jp << camera.focal * iz, 0.0, -camera.focal * pc.x() * iz * iz, 0.0, camera.focal * iz,
            -camera.focal * pc.y() * iz * iz;
        const Eigen::Matrix<double, 2, 3> dres = w * jp * camera.rotation;  // d residual / d world point
        auto rows = out.jacobian.middleRows<2>(2 * q);

        int a = q < kSkeletonJoints ? model.joint(q).parent : kJawJoint;
        if (q >= kSkeletonJoints) {
            const int l = q - kSkeletonJoints;
            rows.middleCols<kExpressionCoeffs>(layout.expression.begin) =
                dres * st.global[kJawJoint] * model.expression_basis().middleRows<3>(3 * l);
        }
        for (; a >= 0; a = model.joint(a).parent) {
            const Eigen::Matrix<double, 2, 3> d = -dres * skew(p - st.points.col(a)) * axis[a];
            if (a < kBodyJoints) {
                rows.middleCols<3>(3 * a) += d;
            } else {
                const bool left = a < kRightHandBegin;
                const int i = a - (left ? kLeftHandBegin : kRightHandBegin);
                const int col = left ? layout.left_hand().begin : layout.right_hand().begin;
                rows.middleCols<kHandCoeffsPerHand>(col) += d * model.hand_basis(left).middleRows<3>(3 * i);
            }
            if (model.joint(a).parent < 0) {
                rows.middleCols<3>(kPoseDim) = -dres * skew(p - st.points.col(a)) * global_axis;
            }
        }
    }
    return out;
}

namespace {

FitResult fit_adam(const SkeletonModel& model, const Camera& camera, const Detection2D& det, const PoseVector& init,
                   const Vec3& init_global, bool fix_global, const FitOptions& opts) {
    FitResult res;
    res.pose = init;
    res.global_orient = init_global;

    ParamVec m = ParamVec::Zero(), v = ParamVec::Zero();
    double lr = opts.learning_rate;
    int step = 0;
    EnergyGradient eg = reprojection_energy_gradient(model, res.pose, res.global_orient, camera, det);
    if (!std::isfinite(eg.energy)) throw NonFinite("initial reprojection energy is not finite");
    res.initial_energy = eg.energy;
    res.energy_trace.push_back(eg.energy);

    for (int it = 0; it < opts.max_iterations; ++it) {
        ParamVec g;
        g.head<kPoseDim>() = eg.d_pose;
        g.tail<3>() = fix_global ? Vec3::Zero() : eg.d_global;
        if (!g.allFinite()) throw NonFinite("reprojection gradient is not finite");
        if (g.isZero(0.0) || eg.energy == 0.0) break;
        res.iterations = it + 1;

        ++step;
        m = opts.beta1 * m + (1.0 - opts.beta1) * g;
        v = opts.beta2 * v + (1.0 - opts.beta2) * g.cwiseProduct(g);
        const double bc1 = 1.0 - std::pow(opts.beta1, step);
        const double bc2 = 1.0 - std::pow(opts.beta2, step);
        const ParamVec delta =
            lr * ((m / bc1).array() / ((v / bc2).array().sqrt() + opts.epsilon)).matrix();

        PoseVector cand_pose = res.pose - delta.head<kPoseDim>();
        for (int j = 0; j < kBodyJoints; ++j) {
            cand_pose.segment<3>(3 * j) = canonical_axis_angle(cand_pose.segment<3>(3 * j));
        }
        const Vec3 cand_global =
            fix_global ? res.global_orient : canonical_axis_angle(res.global_orient - delta.tail<3>());
        EnergyGradient cand = reprojection_energy_gradient(model, cand_pose, cand_global, camera, det);
        if (!std::isfinite(cand.energy)) throw NonFinite("reprojection energy became non-finite");

        if (cand.energy <= eg.energy) {
            const double rel = (eg.energy - cand.energy) / std::max(eg.energy, 1e-300);
            res.pose = cand_pose;
            res.global_orient = cand_global;
            eg = std::move(cand);
            res.energy_trace.push_back(eg.energy);
            if (rel < opts.relative_tolerance) break;
            lr = std::min(opts.learning_rate, lr * 1.25);
        } else {
            lr *= 0.5;
            if (lr < 1e-12) break;
        }
    }
    res.final_energy = eg.energy;
    return res;
}


FitResult fit_levenberg_marquardt(const SkeletonModel& model, const Camera& camera, const Detection2D& det,
                                  const PoseVector& init, const Vec3& init_global, bool fix_global,
                                  const FitOptions& opts) {
    FitResult res;
    res.pose = init;
    res.global_orient = init_global;
    const int n = fix_global ? kPoseDim : kFitParams;

    ReprojectionResiduals rj = reprojection_residuals(model, res.pose, res.global_orient, camera, det);
    double energy = rj.energy();
    if (!std::isfinite(energy)) throw NonFinite("initial reprojection energy is not finite");
    res.initial_energy = energy;
    res.energy_trace.push_back(energy);

    double mu = -1.0;
    for (int it = 0; it < opts.max_iterations; ++it) {
        const Eigen::MatrixXd J = rj.jacobian.leftCols(n);
        const Eigen::VectorXd g = J.transpose() * rj.residuals;
        if (!g.allFinite()) throw NonFinite("reprojection gradient is not finite");
        if (g.isZero(0.0) || energy == 0.0) break;
        res.iterations = it + 1;

        const Eigen::MatrixXd A = J.transpose() * J;
        if (mu < 0.0) mu = opts.initial_damping * std::max(A.diagonal().maxCoeff(), 1e-12);
        Eigen::MatrixXd damped = A;
        damped.diagonal().array() += mu;
        const Eigen::VectorXd delta = damped.ldlt().solve(-g);

        PoseVector cand_pose = res.pose + delta.head<kPoseDim>();
        for (int j = 0; j < kBodyJoints; ++j) {
            cand_pose.segment<3>(3 * j) = canonical_axis_angle(cand_pose.segment<3>(3 * j));
        }
        const Vec3 cand_global =
            fix_global ? res.global_orient : canonical_axis_angle(res.global_orient + delta.tail<3>());
        ReprojectionResiduals cand = reprojection_residuals(model, cand_pose, cand_global, camera, det);
        const double cand_energy = cand.energy();
        if (!std::isfinite(cand_energy)) throw NonFinite("reprojection energy became non-finite");

        if (cand_energy <= energy) {
            const double rel = (energy - cand_energy) / std::max(energy, 1e-300);
            res.pose = cand_pose;
            res.global_orient = cand_global;
            rj = std::move(cand);
            energy = cand_energy;
            res.energy_trace.push_back(energy);
            mu = std::max(mu / 3.0, 1e-300);
            if (rel < opts.relative_tolerance) break;
        } else {
            mu *= 4.0;
            if (!std::isfinite(mu) || mu > 1e300) break;
        }
    }
    res.final_energy = energy;
    return res;
}

}  // namespace

FitResult fit_pose(const SkeletonModel& model, const Camera& camera, const Detection2D& det,
                   const PoseVector& init, const Vec3& init_global, bool fix_global, const FitOptions& opts) {
    return opts.method == FitMethod::Adam ? fit_adam(model, camera, det, init, init_global, fix_global, opts)
                                          : fit_levenberg_marquardt(model, camera, det, init, init_global,
                                                                    fix_global, opts);
}

SequenceFit fit_sequence(const SkeletonModel& model, const Camera& camera,
                         const std::vector<Detection2D>& detections, const PoseVector& init,
                         const Vec3& init_global, double fps, const FitOptions& opts) {
    if (detections.empty()) throw InvalidArgument("fit_sequence needs at least one frame");
    SequenceFit out;
    out.poses.fps = fps;
    PoseVector warm = init;
    for (std::size_t t = 0; t < detections.size(); ++t) {
        const bool first = t == 0;
        const FitResult r = fit_pose(model, camera, detections[t], warm, first ? init_global : out.global_orient,
                                     !first, opts);
        if (first) out.global_orient = r.global_orient;
        warm = r.pose;
        out.poses.frames.push_back(r.pose);
        out.energies.push_back(r.final_energy);
        out.mean_errors.push_back(mean_reprojection_error(model, r.pose, out.global_orient, camera, detections[t]));
    }
    return out;
}

}  // namespace gestsynth
