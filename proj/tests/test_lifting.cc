#include <cmath>
#include <sstream>

#include <doctest.h>

#include "omnifuse/errors.h"
#include "omnifuse/lifting.h"
#include "omnifuse/metrics.h"
#include "omnifuse/simulator.h"
#include "omnifuse/skeleton.h"

using namespace omnifuse;

namespace {

const CameraModel kCam = CameraModel::panorama(3840);

Pose2D observe(const Skeleton3D &joints, const JointMask &hidden = {}) {
    Pose2D p;
    for (std::size_t j = 0; j < kNumJoints; ++j) {
        const PixelPoint px = equirect_project(joints[j], kCam);
        p.keypoints[j] = {px.u, px.v, hidden.test(j) ? 0.0 : 1.0};
    }
    return p;
}

struct Fixture {
    Skeleton3D world;
    NormalizedPose2D pose;
    LocalPose3D truth;
};

Fixture fixture(Eigen::Vector2d ground, const JointMask &hidden = {}, double c = 10.0) {
    Fixture f;
    f.world = place_skeleton(ground);
    f.pose = normalize_pose_view(observe(f.world, hidden), kCam);
    f.truth = lifting_frame_truth(f.world, f.pose.norm_record, kCam, c);
    return f;
}

struct Moments {
    double mean = 0.0, sq = 0.0;
    int n = 0;
    void add(double x) {
        mean += x;
        sq += x * x;
        ++n;
    }
    double m() const { return mean / n; }
    double sd() const { return std::sqrt(sq / n - m() * m()); }
};

} // namespace

TEST_CASE("noiseless oracle offsets reconstruct the lifting-frame truth") {
    for (const Eigen::Vector2d &g : {Eigen::Vector2d(0.0, 3.0), Eigen::Vector2d(-2.5, -1.0), Eigen::Vector2d(0.01, -4.0)}) {
        for (const JointMask &mask : {JointMask{}, occlusion_mask(OcclusionScenario::LeftArm)}) {
            const Fixture f = fixture(g, mask);
            const DepthOffsets d = oracle_lift(f.truth, {}, f.pose.occlusion_mask);
            const LocalPose3D back = reconstruct_3d(f.pose, d, 10.0);
            CHECK(d[idx(Joint::Pelvis)] == 0.0);
            for (std::size_t j = 0; j < kNumJoints; ++j)
                CHECK((back.keypoints[j] - f.truth.keypoints[j]).norm() < 1e-9);
        }
    }
}

TEST_CASE("lifting-frame truth puts the pelvis at depth c on the view axis") {
    const Fixture f = fixture({1.5, 2.0}, {}, 7.0);
    CHECK((f.truth.keypoints[idx(Joint::Pelvis)] - Eigen::Vector3d(0.0, 0.0, 7.0)).norm() < 1e-12);
}

TEST_CASE("oracle depth noise has the configured moments") {
    const Fixture f = fixture({0.0, 3.0});
    std::array<Moments, kNumJoints> err;
    Moments pooled;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const DepthOffsets d = oracle_lift(f.truth, {0.1, 0.0, seed}, {});
        for (std::size_t j = 1; j < kNumJoints; ++j) {
            err[j].add(d[j] - (f.truth.keypoints[j].z() - 10.0));
            pooled.add(d[j] - (f.truth.keypoints[j].z() - 10.0));
        }
        CHECK(d[0] == 0.0);
    }
    CHECK(std::abs(pooled.m()) < 0.01);
    CHECK(std::abs(pooled.sd() - 0.1) < 0.01);
    for (std::size_t j = 1; j < kNumJoints; ++j)
        CHECK(std::abs(err[j].sd() - 0.1) < 0.01);
}

TEST_CASE("occlusion noise follows the kinematic chain") {
    const Fixture f = fixture({0.0, 3.0});
    const double p = 0.1;
    auto spread = [&](OcclusionScenario s) {
        std::array<Moments, kNumJoints> err;
        for (std::uint64_t seed = 0; seed < 4000; ++seed) {
            const DepthOffsets d = oracle_lift(f.truth, {0.0, p, seed}, occlusion_mask(s), 3, 1);
            for (std::size_t j = 0; j < kNumJoints; ++j)
                err[j].add(d[j] - (f.truth.keypoints[j].z() - 10.0));
        }
        return err;
    };
    // One arm: shoulder p, elbow sqrt(2) p, wrist sqrt(3) p, everything else exact.
    auto arm = spread(OcclusionScenario::LeftArm);
    CHECK(arm[idx(Joint::LShoulder)].sd() == doctest::Approx(p).epsilon(0.05));
    CHECK(arm[idx(Joint::LElbow)].sd() == doctest::Approx(std::sqrt(2.0) * p).epsilon(0.05));
    CHECK(arm[idx(Joint::LWrist)].sd() == doctest::Approx(std::sqrt(3.0) * p).epsilon(0.05));
    for (Joint j : {Joint::Pelvis, Joint::RShoulder, Joint::RWrist, Joint::LKnee, Joint::Neck})
        CHECK(arm[idx(j)].sd() < 1e-12);
    // Both legs: mirrored joints are doubled.
    auto legs = spread(OcclusionScenario::BothLegs);
    CHECK(legs[idx(Joint::RKnee)].sd() == doctest::Approx(2.0 * p).epsilon(0.05));
    CHECK(legs[idx(Joint::RAnkle)].sd() == doctest::Approx(std::sqrt(8.0) * p).epsilon(0.05));
    CHECK(legs[idx(Joint::LHip)].sd() < 1e-12);
}

TEST_CASE("reconstruction error grows with oracle noise") {
    double prev = -1.0;
    for (double noise : {0.0, 0.05, 0.1, 0.2}) {
        double total = 0.0;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const Fixture f = fixture({0.5 * static_cast<double>(seed % 7) - 1.5, 3.0});
            const DepthOffsets d = oracle_lift(f.truth, {noise, 0.0, seed}, {});
            total += mpjpe(reconstruct_3d(f.pose, d, 10.0).keypoints, f.truth.keypoints);
        }
        CHECK(total >= prev);
        prev = total;
    }
    CHECK(prev > 0.0);
}

TEST_CASE("OracleLifter looks up truth and reports unknown people") {
    const Fixture f = fixture({0.0, 2.0});
    OracleLifter lifter(
        [&](std::int64_t frame, std::int64_t person, Skeleton3D &out) {
            if (frame != 4 || person != 1)
                return false;
            out = f.world;
            return true;
        },
        kCam, 10.0, {});
    const DepthOffsets d = lifter.lift({4, 1, &f.pose});
    for (std::size_t j = 0; j < kNumJoints; ++j)
        CHECK(d[j] == doctest::Approx(f.truth.keypoints[j].z() - 10.0));
    CHECK_THROWS_AS(lifter.lift({4, 2, &f.pose}), NotFound);
}

TEST_CASE("lift records round trip bit-exactly") {
    LiftRecord rec{12, 3, {}};
    for (std::size_t j = 1; j < kNumJoints; ++j)
        rec.d[j] = 0.1 * static_cast<double>(j) + 1.0 / 3.0;
    std::stringstream ss;
    write_lift_record(ss, rec);
    write_lift_record(ss, {12, 4, {}});
    const std::string text = ss.str();
    std::istringstream in(text);
    const DepthOffsets d = ingest_external_lift(in, 12, 3);
    CHECK(d == rec.d);
    std::istringstream again(text);
    CHECK_THROWS_AS(ingest_external_lift(again, 12, 5), NotFound);

    std::istringstream all(text);
    ExternalLifter lifter(read_lift_records(all));
    NormalizedPose2D pose;
    CHECK(lifter.lift({12, 3, &pose}) == rec.d);
    CHECK_THROWS_AS(lifter.lift({13, 3, &pose}), NotFound);
}

TEST_CASE("malformed lift records") {
    std::istringstream short_row("{\"frame_id\":0,\"person_id\":0,\"d\":[0,0]}\n"
                                 "{\"frame_id\":1,\"person_id\":0,\"d\":[0,1,1,1,1,1,1,1,1,1,1,1,1,1]}\n");
    try {
        read_lift_records(short_row, "lifts.jsonl");
        FAIL("expected ParseError");
    } catch (const ParseError &e) {
        CHECK(e.line() == 1);
    }
    std::istringstream fourteen("\n{\"frame_id\":1,\"person_id\":0,\"d\":[0,1,1,1,1,1,1,1,1,1,1,1,1,1]}\n");
    try {
        read_lift_records(fourteen);
        FAIL("expected ParseError");
    } catch (const ParseError &e) {
        CHECK(e.line() == 2);
    }
    std::istringstream root("{\"frame_id\":1,\"person_id\":0,\"d\":[0.5,1,1,1,1,1,1,1,1,1,1,1,1,1,1]}\n");
    CHECK_THROWS_AS(read_lift_records(root), ValidationError);
    std::istringstream dup("{\"frame_id\":1,\"person_id\":0,\"d\":[0,1,1,1,1,1,1,1,1,1,1,1,1,1,1]}\n"
                           "{\"frame_id\":1,\"person_id\":0,\"d\":[0,1,1,1,1,1,1,1,1,1,1,1,1,1,1]}\n");
    CHECK_THROWS_AS(read_lift_records(dup), ParseError);
    std::istringstream junk("not json\n");
    CHECK_THROWS_AS(read_lift_records(junk), ParseError);
}

TEST_CASE("skeleton tables") {
    CHECK(joint_name(Joint::LWrist) == "l_wrist");
    CHECK_FALSE(parent(Joint::Pelvis).has_value());
    CHECK(parent(Joint::LAnkle) == Joint::LKnee);
    CHECK(mirror(Joint::LHip) == Joint::RHip);
    CHECK_FALSE(mirror(Joint::Neck).has_value());
    CHECK(is_ancestor(Joint::Neck, Joint::RWrist));
    CHECK_FALSE(is_ancestor(Joint::LHip, Joint::RKnee));
    for (OcclusionScenario s : kAllScenarios)
        CHECK(scenario_from_name(scenario_name(s)) == s);
    CHECK_THROWS_AS(scenario_from_name("Elbows"), InputError);
}

TEST_CASE("occlusion masks") {
    using enum Joint;
    auto mask = [](std::initializer_list<Joint> js) {
        JointMask m;
        for (Joint j : js)
            m.set(idx(j));
        return m;
    };
    CHECK(occlusion_mask(OcclusionScenario::None).none());
    CHECK(occlusion_mask(OcclusionScenario::LeftArm) == mask({LShoulder, LElbow, LWrist}));
    CHECK(occlusion_mask(OcclusionScenario::RightLeg) == mask({RKnee, RAnkle}));
    CHECK(occlusion_mask(OcclusionScenario::BothLegs) == mask({LKnee, LAnkle, RKnee, RAnkle}));
    CHECK(occlusion_mask(OcclusionScenario::LeftArmAndLeg) == mask({LShoulder, LElbow, LWrist, LKnee, LAnkle}));
    CHECK(occlusion_mask(OcclusionScenario::Torso) == mask({LHip, RHip, Neck}));
    for (OcclusionScenario s : kAllScenarios)
        CHECK_FALSE(occlusion_mask(s).test(idx(Pelvis)));
}
