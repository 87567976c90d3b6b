#include "gestsynth/errors.hpp"
#include "gestsynth/pose.hpp"

#include <doctest.h>

#include <filesystem>
#include <numbers>

using namespace gestsynth;

TEST_CASE("layout and weights") {
    const PartLayout layout;
    CHECK(layout.valid());
    CHECK(layout.body.size() == 72);
    CHECK(layout.hands.size() == 24);
    CHECK(layout.expression.size() == 10);
    const LossWeights w = default_weights();
    CHECK(w[0] == 1.0);
    CHECK(w[80] == 4.0);
    CHECK(w[100] == 100.0);
    for (int i = 0; i < 3; ++i) CHECK(w[3 * kJawJoint + i] == 100.0);
    CHECK(w[3 * kJawJoint - 1] == 1.0);
    CHECK((w.array() > 0.0).all());
}

TEST_CASE("lerp_pose") {
    const PoseVector a = PoseVector::Random();
    const PoseVector b = PoseVector::Random();
    CHECK(lerp_pose(a, b, 0.0) == a);
    CHECK(lerp_pose(a, b, 1.0) == b);
    CHECK(lerp_pose(a, a, 0.37) == a);
    CHECK(lerp_pose(PoseVector::Zero(), PoseVector::Constant(2.0), 0.25) == PoseVector::Constant(0.5));
}

TEST_CASE("sequence_diff_energy") {
    PoseSequence s;
    s.frames.assign(4, PoseVector::Constant(0.3));
    CHECK(sequence_diff_energy(s) == 0.0);

    PoseSequence two;
    two.frames = {PoseVector::Zero(), PoseVector::Unit(5)};
    CHECK(sequence_diff_energy(two) == 1.0);

    PoseSequence three;
    three.frames = {PoseVector::Zero(), PoseVector::Unit(0), 3.0 * PoseVector::Unit(0)};
    CHECK(sequence_diff_energy(three) == 5.0);

    PoseSequence r;
    for (int i = 0; i < 6; ++i) r.frames.push_back(PoseVector::Random());
    PoseSequence shifted = r;
    const PoseVector c = PoseVector::Random();
    for (auto& f : shifted.frames) f += c;
    CHECK(sequence_diff_energy(shifted) == doctest::Approx(sequence_diff_energy(r)).epsilon(1e-12));
}

TEST_CASE("canonical clamp") {
    PoseVector p = PoseVector::Zero();
    p.segment<3>(3) = Eigen::Vector3d(4.0, 0.0, 0.0);
    CHECK_FALSE(is_canonical(p));
    const PoseVector q = clamp_to_canonical(p);
    CHECK(is_canonical(q));
    CHECK(q.segment<3>(3).norm() == doctest::Approx(std::numbers::pi));
    CHECK(q.tail<34>() == p.tail<34>());
}

TEST_CASE("pose sequence file round-trip is exact") {
    const auto path = std::filesystem::temp_directory_path() / "gestsynth_test.pseq";
    PoseSequence s;
    s.fps = 12.0;
    for (int i = 0; i < 5; ++i) s.frames.push_back(PoseVector::Random() * 1e3);
    write_pose_sequence(s, path);
    const PoseSequence r = read_pose_sequence(path);
    CHECK(r.fps == 12.0);
    REQUIRE(r.size() == 5);
    for (int i = 0; i < 5; ++i) CHECK(r.frames[i] == s.frames[i]);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_pose_sequence(path), IoError);
}
