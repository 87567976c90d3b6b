#pragma once

#include "gestsynth/pose.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gestsynth {

inline constexpr int kHandJointsPerHand = 15;
inline constexpr int kSkeletonJoints = kBodyJoints + 2 * kHandJointsPerHand;  // 54
inline constexpr int kFaceLandmarks = 20;
inline constexpr int kMouthLandmarks = 8;
inline constexpr int kKeypoints = kSkeletonJoints + kFaceLandmarks;  // 74

inline constexpr int kLeftWrist = 20;
inline constexpr int kRightWrist = 21;
inline constexpr int kLeftHandBegin = kBodyJoints;
inline constexpr int kRightHandBegin = kBodyJoints + kHandJointsPerHand;
// Landmarks [kFaceLandmarks - kMouthLandmarks, kFaceLandmarks) outline the mouth.
inline constexpr int kFirstMouthLandmark = kFaceLandmarks - kMouthLandmarks;

using Keypoints3d = Eigen::Matrix<double, 3, Eigen::Dynamic>;
using Keypoints2d = Eigen::Matrix<double, 2, Eigen::Dynamic>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Joint {
    std::string name;
    int parent = -1;
    Vec3 offset = Vec3::Zero();  // rest offset from the parent, meters
    double scale = 1.0;          // per-bone length factor (beta)
};

Mat3 rodrigues(const Vec3& axis_angle);
// Left Jacobian of the SO(3) exponential: d/dt exp(w + t e) = [J_l(w) e]_x exp(w).
Mat3 so3_left_jacobian(const Vec3& axis_angle);

// Kinematic-chain stand-in for a parametric body model: 24 body joints (the
// last two are jaw and head top), 15 joints per hand driven by a 12-D linear
// basis each, and 20 face landmarks carried in the jaw frame and displaced by
// a 10-D expression basis.
class SkeletonModel {
   public:
    // Built-in rest skeleton with bases drawn from `basis_seed`.
    static SkeletonModel surrogate(std::uint64_t basis_seed = 7);
    // Joint list from a "name parent dx dy dz [scale]" file; bases from seed.
    static SkeletonModel load(const std::filesystem::path& path, std::uint64_t basis_seed = 7);
    void save(const std::filesystem::path& path) const;

    SkeletonModel(std::vector<Joint> joints, std::uint64_t basis_seed);

    const std::vector<Joint>& joints() const { return joints_; }
    const Joint& joint(int i) const { return joints_[static_cast<std::size_t>(i)]; }
    // 45 x 12, orthonormal columns.
    const Eigen::MatrixXd& hand_basis(bool left) const { return left ? left_hand_basis_ : right_hand_basis_; }
    // 60 x 10: landmark displacement (x,y,z per landmark) per expression coefficient.
    const Eigen::MatrixXd& expression_basis() const { return expression_basis_; }
    const std::vector<Vec3>& face_rest() const { return face_rest_; }

    static std::vector<int> mouth_keypoints();
    static int landmark_keypoint(int landmark) { return kSkeletonJoints + landmark; }

   private:
    std::vector<Joint> joints_;
    Eigen::MatrixXd left_hand_basis_;
    Eigen::MatrixXd right_hand_basis_;
    Eigen::MatrixXd expression_basis_;
    std::vector<Vec3> face_rest_;
};

struct KinematicState {
    Keypoints3d points;              // 3 x 74: joints then face landmarks
    std::vector<Mat3> local;         // per-joint local rotation
    std::vector<Mat3> global;        // per-joint cumulative rotation
    Mat3 global_orient = Mat3::Identity();
};

KinematicState forward_kinematics_state(const SkeletonModel& model, const PoseVector& pose,
                                        const Vec3& global_orient);
// 3 x 74 world positions.
Keypoints3d forward_kinematics(const SkeletonModel& model, const PoseVector& pose,
                               const Vec3& global_orient = Vec3::Zero());

struct Camera {
    double focal = 500.0;
    Eigen::Vector2d principal{256.0, 256.0};
    Mat3 rotation = Mat3::Identity();  // world -> camera
    Vec3 translation = Vec3::Zero();
    int width = 512;
    int height = 512;

    // Subject facing the camera, centered in a 512x512 frame.
    static Camera default_view();
    bool valid() const { return focal > 0.0; }
};

// Flat "key = value" file: focal, cx, cy, rotation (axis-angle), translation, width, height.
Camera read_camera(const std::filesystem::path& path);
void write_camera(const Camera& cam, const std::filesystem::path& path);

Keypoints2d project(const Keypoints3d& points, const Camera& camera);

struct Detection2D {
    Keypoints2d points;               // 2 x n
    Eigen::VectorXd confidences;      // n, each in [0,1]
    int size() const { return static_cast<int>(points.cols()); }
};

Detection2D detection_from_keypoints(const Keypoints2d& pts, double confidence = 1.0);

// Frames separated by blank lines, one "x y confidence" line per keypoint.
std::vector<Detection2D> read_detections(const std::filesystem::path& path);
void write_detections(const std::vector<Detection2D>& frames, const std::filesystem::path& path);

// Sum_j c_j * ||project(FK)_j - x_j||^2.
double reprojection_energy(const SkeletonModel& model, const PoseVector& pose, const Vec3& global_orient,
                           const Camera& camera, const Detection2D& det);

struct EnergyGradient {
    double energy = 0.0;
    PoseVector d_pose = PoseVector::Zero();
    Vec3 d_global = Vec3::Zero();
};

// Energy and its exact gradient with respect to pose and global orientation.
EnergyGradient reprojection_energy_gradient(const SkeletonModel& model, const PoseVector& pose,
                                            const Vec3& global_orient, const Camera& camera,
                                            const Detection2D& det);

// Mean over positive-confidence keypoints of the pixel distance.
double mean_reprojection_error(const SkeletonModel& model, const PoseVector& pose, const Vec3& global_orient,
                               const Camera& camera, const Detection2D& det);

// Confidence-weighted residuals r (2 per keypoint, sqrt(c) * (uv - x)) so that
// E = r.r, and their Jacobian with respect to [pose; global_orient] (2n x 109).
struct ReprojectionResiduals {
    Eigen::VectorXd residuals;
    Eigen::MatrixXd jacobian;
    double energy() const { return residuals.squaredNorm(); }
};

ReprojectionResiduals reprojection_residuals(const SkeletonModel& model, const PoseVector& pose,
                                             const Vec3& global_orient, const Camera& camera,
                                             const Detection2D& det);

enum class FitMethod { LevenbergMarquardt, Adam };

struct FitOptions {
    FitMethod method = FitMethod::LevenbergMarquardt;
    int max_iterations = 500;
    double relative_tolerance = 1e-8;
    // Levenberg-Marquardt damping, relative to the largest diagonal entry of J^T J.
    double initial_damping = 1e-3;
    // Adam
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct FitResult {
    PoseVector pose = PoseVector::Zero();
    Vec3 global_orient = Vec3::Zero();
    double initial_energy = 0.0;
    double final_energy = 0.0;
    int iterations = 0;
    // Energy after every accepted step, starting with the initial energy.
    std::vector<double> energy_trace;
};

FitResult fit_pose(const SkeletonModel& model, const Camera& camera, const Detection2D& det,
                   const PoseVector& init, const Vec3& init_global, bool fix_global,
                   const FitOptions& opts = {});

struct SequenceFit {
    PoseSequence poses;
    Vec3 global_orient = Vec3::Zero();
    std::vector<double> energies;
    std::vector<double> mean_errors;  // pixels, per frame
};

SequenceFit fit_sequence(const SkeletonModel& model, const Camera& camera,
                         const std::vector<Detection2D>& detections, const PoseVector& init,
                         const Vec3& init_global = Vec3::Zero(), double fps = 12.0,
                         const FitOptions& opts = {});

}  // namespace gestsynth
