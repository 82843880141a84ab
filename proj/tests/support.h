#pragma once

#include <cmath>
#include <random>

#include <Eigen/LU>

#include "omnifuse/pipeline.h"
#include "omnifuse/random.h"
#include "omnifuse/simulator.h"

namespace omnifuse::testing {

inline double deg(double d) { return d * kPi / 180.0; }

// Three noiseless radars covering the full circle.
inline std::vector<RadarConfig> ring_of_radars(double noise_base_std = 0.0, double edge_factor = 1.0) {
    std::vector<RadarConfig> radars;
    for (int i = 0; i < 3; ++i) {
        RadarConfig r;
        r.radar_id = i;
        r.boresight_azimuth = wrap_angle(deg(120.0 * i));
        r.noise_base_std = noise_base_std;
        r.noise_edge_factor = edge_factor;
        radars.push_back(r);
    }
    return radars;
}

inline SceneHeader basic_header(int people, int frames, std::uint64_t seed) {
    SceneHeader h;
    h.camera = CameraModel::panorama(3840);
    h.radars = ring_of_radars();
    h.scene.person_count = people;
    h.scene.duration_frames = frames;
    h.scene.trajectory = Trajectory::RandomWalk;
    h.seed = seed;
    return h;
}

// The calibration that exactly undoes a radar's simulated distortion.
inline AffineCalibration exact_calibration(const RadarConfig &r) {
    AffineCalibration cal = AffineCalibration::identity(r.radar_id);
    if (r.bias) {
        cal.matrix = r.bias->matrix.inverse();
        cal.translation = -cal.matrix * r.bias->translation;
    }
    return cal;
}

inline PipelineConfig exact_pipeline(const SceneHeader &h) {
    PipelineConfig p;
    p.camera = h.camera;
    for (const auto &r : h.radars)
        p.radars.push_back({r.radar_id, exact_calibration(r), RadarImageMap::from_camera(h.camera), true});
    return p;
}

// A FusedFrame and CameraFrame pair for one scene frame, as file replay builds them.
struct Tick {
    FusedFrame fused;
    CameraFrame camera;
};

inline Tick tick_of(const SceneFrame &frame, TickId tick) {
    Tick t;
    t.fused.tick = tick;
    t.fused.camera = {frame.frame_id, frame.timestamp};
    for (const auto &rf : frame.radars) {
        RadarSnapshot s;
        s.radar_id = rf.radar_id;
        s.tick = tick;
        s.detections = rf.detections;
        s.present = true;
        t.fused.radar_snapshots.push_back(std::move(s));
    }
    t.camera = {tick, frame.frame_id, frame.poses};
    return t;
}

// Uniform point in the annulus r0..r1 around the rig.
inline Eigen::Vector2d random_ground(std::mt19937_64 &rng, double r0, double r1) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = std::sqrt(u(rng) * (r1 * r1 - r0 * r0) + r0 * r0);
    const double a = u(rng) * kTwoPi - kPi;
    return {r * std::sin(a), r * std::cos(a)};
}

} // namespace omnifuse::testing
