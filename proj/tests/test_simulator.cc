#include <cmath>
#include <set>

#include <doctest.h>

#include "omnifuse/errors.h"
#include "omnifuse/matching.h"
#include "omnifuse/random.h"
#include "omnifuse/simulator.h"

using namespace omnifuse;

namespace {

const CameraModel kCam = CameraModel::panorama(3840);

double deg(double d) { return d * kPi / 180.0; }

Eigen::Vector2d ground_at(double azimuth, double range) { return {range * std::sin(azimuth), range * std::cos(azimuth)}; }

SceneTruth single(const Eigen::Vector2d &g, OcclusionScenario s = OcclusionScenario::None) {
    SceneTruth t;
    t.frames.resize(1);
    t.frames[0].people.push_back({0, g, place_skeleton(g), s});
    return t;
}

bool same_truth(const SceneTruth &a, const SceneTruth &b) {
    if (a.frames.size() != b.frames.size())
        return false;
    for (std::size_t f = 0; f < a.frames.size(); ++f) {
        if (a.frames[f].people.size() != b.frames[f].people.size())
            return false;
        for (std::size_t i = 0; i < a.frames[f].people.size(); ++i) {
            const auto &p = a.frames[f].people[i], &q = b.frames[f].people[i];
            if (p.ground != q.ground || p.joints != q.joints || p.scenario != q.scenario || p.person_id != q.person_id)
                return false;
        }
    }
    return true;
}

// Ground point where the camera ray through a pixel meets y = 0.
Eigen::Vector2d ground_from_pixel(const PixelPoint &px) {
    const Eigen::Vector3d d = direction_vector(equirect_unproject(px.u, px.v, kCam));
    const double t = -kCam.height_m / d.y();
    const Eigen::Vector3d p = kCam.center() + t * d;
    return {p.x(), p.z()};
}

} // namespace

TEST_CASE("place_skeleton stands on the ground facing the rig") {
    const Eigen::Vector2d g(1.2, -2.5);
    const Skeleton3D s = place_skeleton(g);
    CHECK(s[idx(Joint::LAnkle)].y() == doctest::Approx(0.0));
    CHECK(s[idx(Joint::RAnkle)].y() == doctest::Approx(0.0));
    const Eigen::Vector3d &pelvis = s[idx(Joint::Pelvis)];
    CHECK((Eigen::Vector2d(pelvis.x(), pelvis.z()) - g).norm() < 1e-12);
    // The nose sits between the pelvis and the rig in the ground plane.
    const Eigen::Vector3d &nose = s[idx(Joint::Nose)];
    CHECK(Eigen::Vector2d(nose.x(), nose.z()).norm() < g.norm());
    double top = 0.0;
    for (const auto &k : s)
        top = std::max(top, k.y());
    CHECK(top > 1.4);
    CHECK(top < 1.8);
}

TEST_CASE("gen_scene is deterministic in its seed") {
    SceneConfig cfg;
    cfg.person_count = 5;
    cfg.trajectory = Trajectory::RandomWalk;
    cfg.duration_frames = 20;
    cfg.seed = 99;
    cfg.random_scenarios = true;
    CHECK(same_truth(gen_scene(cfg), gen_scene(cfg)));
    SceneConfig other = cfg;
    other.seed = 100;
    CHECK_FALSE(same_truth(gen_scene(cfg), gen_scene(other)));
}

TEST_CASE("gen_scene honors spacing, arena and static positions") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SceneConfig cfg;
        cfg.person_count = 10;
        cfg.duration_frames = 5;
        cfg.seed = seed;
        const SceneTruth t = gen_scene(cfg);
        REQUIRE(t.frames.size() == 5);
        const auto &first = t.frames[0].people;
        REQUIRE(first.size() == 10);
        for (std::size_t i = 0; i < first.size(); ++i) {
            CHECK(first[i].ground.norm() <= cfg.arena_radius);
            CHECK(first[i].ground.norm() >= cfg.min_range);
            for (std::size_t k = i + 1; k < first.size(); ++k)
                CHECK((first[i].ground - first[k].ground).norm() >= cfg.min_separation);
        }
        for (const auto &f : t.frames) {
            for (std::size_t i = 0; i < f.people.size(); ++i)
                CHECK(f.people[i].ground == first[i].ground);
        }
    }
}

TEST_CASE("random walk steps have the configured spread") {
    SceneConfig cfg;
    cfg.trajectory = Trajectory::RandomWalk;
    cfg.step_std = 0.1;
    cfg.duration_frames = 100;
    cfg.arena_radius = 50.0;
    int in_band = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        cfg.seed = seed;
        const SceneTruth t = gen_scene(cfg);
        double sum = 0.0, sq = 0.0;
        int n = 0;
        for (std::size_t f = 1; f < t.frames.size(); ++f) {
            const Eigen::Vector2d d = t.frames[f].people[0].ground - t.frames[f - 1].people[0].ground;
            for (double v : {d.x(), d.y()}) {
                sum += v;
                sq += v * v;
                ++n;
            }
        }
        const double sd = std::sqrt((sq - sum * sum / n) / (n - 1));
        in_band += sd >= 0.08 && sd <= 0.12;
    }
    CHECK(in_band >= 19);
}

TEST_CASE("random walks stay inside the arena") {
    SceneConfig cfg;
    cfg.person_count = 4;
    cfg.trajectory = Trajectory::RandomWalk;
    cfg.step_std = 0.5;
    cfg.duration_frames = 300;
    cfg.seed = 5;
    for (const auto &f : gen_scene(cfg).frames) {
        for (const auto &p : f.people) {
            CHECK(p.ground.norm() <= cfg.arena_radius + 1e-12);
            CHECK(p.ground.norm() >= cfg.min_range - 1e-12);
        }
    }
}

TEST_CASE("gen_scene rejects infeasible configurations") {
    SceneConfig cfg;
    cfg.person_count = 10;
    cfg.arena_radius = 1.5;
    cfg.min_separation = 2.0;
    CHECK_THROWS_AS(gen_scene(cfg), ConfigError);
    cfg = {};
    cfg.person_count = 0;
    CHECK_THROWS_AS(gen_scene(cfg), ConfigError);
    cfg.person_count = 11;
    CHECK_THROWS_AS(gen_scene(cfg), ConfigError);
}

TEST_CASE("radar field of view, void zones and exact detections") {
    RadarConfig r;
    CHECK(simulate_radar(single(ground_at(deg(70.0), 3.0)), r, 0, 1).detections.empty());
    const Eigen::Vector2d g = ground_at(0.0, 3.0);
    const RadarSimResult sim = simulate_radar(single(g), r, 0, 1);
    REQUIRE(sim.detections.size() == 1);
    CHECK(sim.detections[0].xz == g);
    CHECK(sim.truth_ids == std::vector<std::int64_t>{0});

    r.void_zones.push_back({deg(10.0), deg(20.0)});
    CHECK(simulate_radar(single(ground_at(deg(15.0), 3.0)), r, 0, 1).detections.empty());
    CHECK(simulate_radar(single(ground_at(deg(25.0), 3.0)), r, 0, 1).detections.size() == 1);
}

TEST_CASE("void zones may wrap through the seam") {
    const AzimuthInterval z{deg(170.0), deg(-170.0)};
    CHECK(z.contains(deg(175.0)));
    CHECK(z.contains(deg(-175.0)));
    CHECK_FALSE(z.contains(0.0));
}

TEST_CASE("three radars cover every azimuth") {
    std::vector<RadarConfig> radars(3);
    for (int i = 0; i < 3; ++i)
        radars[i].boresight_azimuth = wrap_angle(deg(120.0 * i));
    for (int k = 0; k < 10000; ++k) {
        const Eigen::Vector2d g = ground_at(-kPi + k * kTwoPi / 10000.0, 2.0);
        bool covered = false;
        for (const auto &r : radars)
            covered = covered || radar_covers(r, g);
        CHECK(covered);
    }
}

TEST_CASE("radar noise grows toward the edge as configured") {
    RadarConfig r;
    r.noise_base_std = 0.05;
    r.noise_edge_factor = 3.0;
    auto spread = [&](double azimuth) {
        const Eigen::Vector2d g = ground_at(azimuth, 3.0);
        const SceneTruth t = single(g);
        double sq = 0.0;
        for (std::uint64_t seed = 0; seed < 10000; ++seed) {
            const Eigen::Vector2d d = simulate_radar(t, r, 0, seed).detections.at(0).xz - g;
            sq += d.squaredNorm();
        }
        return std::sqrt(sq / (2.0 * 10000.0));
    };
    const double model = radar_noise_std(r, ground_at(deg(55.0), 3.0)) / radar_noise_std(r, ground_at(0.0, 3.0));
    CHECK(model == doctest::Approx(1.0 + 2.0 * 55.0 / 60.0));
    const double ratio = spread(deg(55.0)) / spread(0.0);
    CHECK(std::abs(ratio / model - 1.0) < 0.1);
}

TEST_CASE("radar bias is applied before noise") {
    RadarConfig r;
    r.bias = azimuth_rotation(deg(5.0), 1.1);
    const Eigen::Vector2d g = ground_at(deg(10.0), 3.0);
    const Eigen::Vector2d raw = simulate_radar(single(g), r, 0, 3).detections.at(0).xz;
    CHECK(raw == radar_distort(r, g));
    CHECK(std::atan2(raw.x(), raw.y()) == doctest::Approx(deg(15.0)));
    CHECK(raw.norm() == doctest::Approx(3.3));
}

TEST_CASE("radar output is shuffled but deterministic") {
    SceneConfig cfg;
    cfg.person_count = 6;
    cfg.seed = 8;
    const SceneTruth t = gen_scene(cfg);
    RadarConfig r;
    r.fov = kTwoPi;
    r.noise_base_std = 0.02;
    const RadarSimResult a = simulate_radar(t, r, 0, 4), b = simulate_radar(t, r, 0, 4);
    REQUIRE(a.detections.size() == 6);
    CHECK(a.truth_ids == b.truth_ids);
    for (std::size_t i = 0; i < a.detections.size(); ++i) {
        CHECK(a.detections[i].xz == b.detections[i].xz);
        const auto &person = t.frames[0].people[static_cast<std::size_t>(a.truth_ids[i])];
        CHECK((a.detections[i].xz - person.ground).norm() < 0.2);
    }
    CHECK(std::set<std::int64_t>(a.truth_ids.begin(), a.truth_ids.end()).size() == 6);
}

TEST_CASE("noiseless keypoints are exact projections") {
    const SceneTruth t = single(ground_at(deg(40.0), 2.5));
    const auto poses = simulate_keypoints(t, kCam, 0, 0.0, OcclusionScenario::None, 1);
    REQUIRE(poses.size() == 1);
    CHECK(*poses[0].person_hint == 0);
    for (std::size_t j = 0; j < kNumJoints; ++j) {
        const PixelPoint px = equirect_project(t.frames[0].people[0].joints[j], kCam);
        CHECK(poses[0].keypoints[j].u == px.u);
        CHECK(poses[0].keypoints[j].v == px.v);
        CHECK(poses[0].keypoints[j].confidence >= 0.5);
        CHECK(poses[0].keypoints[j].confidence <= 1.0);
    }
}

TEST_CASE("occlusion scenarios zero the masked confidences") {
    const SceneTruth t = single(ground_at(deg(-60.0), 3.0), OcclusionScenario::Torso);
    const auto legs = simulate_keypoints(t, kCam, 0, 1.0, OcclusionScenario::BothLegs, 2);
    CHECK(legs[0].occlusion_mask() == occlusion_mask(OcclusionScenario::BothLegs));
    CHECK(legs[0].occlusion_mask().count() == 4);
    // Without an override the person's own label applies.
    const auto own = simulate_keypoints(t, kCam, 0, 1.0, std::nullopt, 2);
    CHECK(own[0].occlusion_mask() == occlusion_mask(OcclusionScenario::Torso));
}

TEST_CASE("a person behind the camera straddles the seam") {
    const SceneTruth t = single(ground_at(kPi, 2.0));
    const auto poses = simulate_keypoints(t, kCam, 0, 0.0, OcclusionScenario::None, 3);
    bool low = false, high = false;
    for (const auto &k : poses[0].keypoints) {
        low = low || k.u < 100.0;
        high = high || k.u > 3740.0;
        CHECK((k.u < 100.0 || k.u > 3740.0));
    }
    CHECK(low);
    CHECK(high);
    const double m = mean_image_x(poses[0], kCam.width_px);
    CHECK(circular_distance(m, 0.0, 3840.0) < 20.0);
    CHECK(std::abs(mean_image_x(poses[0]) - 1920.0) < 1000.0); // plain averaging lands mid-image
}

TEST_CASE("a person touching the camera center is skipped") {
    SceneTruth t = single({0.0, 0.2});
    t.frames[0].people[0].joints[idx(Joint::Neck)] = kCam.center();
    t.frames[0].people.push_back({1, {0.0, 3.0}, place_skeleton({0.0, 3.0}), {}});
    const auto poses = simulate_keypoints(t, kCam, 0, 0.0, std::nullopt, 0);
    REQUIRE(poses.size() == 1);
    CHECK(*poses[0].person_hint == 1);
}

TEST_CASE("ankle rays recover the ground position") {
    auto rng = make_rng(31, {});
    std::uniform_real_distribution<double> az(-kPi, kPi), range(1.0, 6.0);
    for (int i = 0; i < 200; ++i) {
        const Eigen::Vector2d g = ground_at(az(rng), range(rng));
        const auto poses = simulate_keypoints(single(g), kCam, 0, 0.0, OcclusionScenario::None, 0);
        const Pose2D &p = poses.at(0);
        const Eigen::Vector2d l = ground_from_pixel({p.keypoints[idx(Joint::LAnkle)].u, p.keypoints[idx(Joint::LAnkle)].v});
        const Eigen::Vector2d r = ground_from_pixel({p.keypoints[idx(Joint::RAnkle)].u, p.keypoints[idx(Joint::RAnkle)].v});
        CHECK((0.5 * (l + r) - g).norm() < 1e-6);
    }
}

TEST_CASE("keypoint noise is seeded") {
    SceneConfig cfg;
    cfg.person_count = 3;
    cfg.seed = 4;
    const SceneTruth t = gen_scene(cfg);
    const auto a = simulate_keypoints(t, kCam, 0, 2.0, std::nullopt, 11);
    const auto b = simulate_keypoints(t, kCam, 0, 2.0, std::nullopt, 11);
    const auto c = simulate_keypoints(t, kCam, 0, 2.0, std::nullopt, 12);
    REQUIRE(a.size() == 3);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].person_hint == b[i].person_hint);
        for (std::size_t j = 0; j < kNumJoints; ++j) {
            CHECK(a[i].keypoints[j].u == b[i].keypoints[j].u);
            CHECK(a[i].keypoints[j].u >= 0.0);
            CHECK(a[i].keypoints[j].u < 3840.0);
        }
        differs = differs || a[i].keypoints[3].u != c[i].keypoints[3].u;
    }
    CHECK(differs);
}

TEST_CASE("calibration grid lies on the lattice inside coverage") {
    RadarConfig r;
    r.boresight_azimuth = deg(120.0);
    const auto pts = calibration_grid(r, 0.5, 1.0, 4.0);
    CHECK(pts.size() > 20);
    for (const auto &p : pts) {
        CHECK(radar_covers(r, p));
        CHECK(p.norm() >= 1.0);
        CHECK(p.norm() <= 4.0);
        CHECK(std::abs(p.x() / 0.5 - std::round(p.x() / 0.5)) < 1e-9);
        CHECK(std::abs(p.y() / 0.5 - std::round(p.y() / 0.5)) < 1e-9);
    }
}

TEST_CASE("grid sessions record the requested dwell") {
    RadarConfig r;
    r.radar_id = 2;
    r.noise_base_std = 0.05;
    const std::vector<Eigen::Vector2d> pts = {{0.0, 2.0}, {0.5, 2.5}};
    const auto recs = simulate_grid_session(r, pts, 50, 10.0, 7);
    REQUIRE(recs.size() == 2);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(recs[i].radar_id == 2);
        CHECK(recs[i].true_position == pts[i]);
        CHECK(recs[i].readings.size() == 50);
        REQUIRE(recs[i].timestamps.size() == 50);
        CHECK(recs[i].timestamps[1] - recs[i].timestamps[0] == doctest::Approx(0.1));
    }
}

TEST_CASE("image samples pair the radar position with the observed column") {
    RadarConfig r;
    const auto pts = calibration_grid(r, 0.5, 1.0, 4.0);
    const auto samples = simulate_image_samples(r, AffineCalibration::identity(0), kCam, pts, 10, 0.0, 3);
    REQUIRE(samples.size() == pts.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK((samples[i].world_xz - pts[i]).norm() < 1e-12);
        const double pelvis_u = equirect_project({pts[i].x(), 0.95, pts[i].y()}, kCam).u;
        CHECK(circular_distance(samples[i].observed_u, pelvis_u, 3840.0) < 5.0);
    }
}
