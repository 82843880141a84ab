#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "omnifuse/calibration.h"
#include "omnifuse/geometry.h"
#include "omnifuse/skeleton.h"
#include "omnifuse/sync.h"

namespace omnifuse {

enum class Trajectory { Static, RandomWalk };

struct SceneConfig {
    int person_count = 1;          // 1..10
    double arena_radius = 5.0;     // meters
    double min_range = 1.0;        // people never start closer to the rig than this
    double min_separation = 0.5;   // start spacing
    Trajectory trajectory = Trajectory::Static;
    double step_std = 0.1;         // per-axis RandomWalk step, meters
    int duration_frames = 1;
    std::uint64_t seed = 0;
    OcclusionScenario scenario = OcclusionScenario::None;
    bool random_scenarios = false; // draw one scenario per person instead
};

struct PersonTruth {
    std::int64_t person_id = 0;
    Eigen::Vector2d ground = Eigen::Vector2d::Zero(); // pelvis ground point (x, z)
    Skeleton3D joints{};                               // world frame, meters
    OcclusionScenario scenario = OcclusionScenario::None;
};

struct FrameTruth {
    std::vector<PersonTruth> people;
};

struct SceneTruth {
    SceneConfig config;
    std::vector<FrameTruth> frames;
};

// Canonical skeleton standing at `ground`, facing the rig origin.
Skeleton3D place_skeleton(const Eigen::Vector2d &ground);

// Deterministic in cfg (including its seed). Throws ConfigError for
// out-of-range counts or when the start spacing cannot be met.
SceneTruth gen_scene(const SceneConfig &cfg);

// Counter-clockwise azimuth interval from `start` to `end`, radians.
struct AzimuthInterval {
    double start = 0.0;
    double end = 0.0;
    bool contains(double azimuth) const;
};

struct AffineDistortion {
    Eigen::Matrix2d matrix = Eigen::Matrix2d::Identity();
    Eigen::Vector2d translation = Eigen::Vector2d::Zero();
};

// Raw readings rotated by `rad` in azimuth about the rig and scaled in range.
AffineDistortion azimuth_rotation(double rad, double range_scale = 1.0);

struct RadarConfig {
    int radar_id = 0;
    double boresight_azimuth = 0.0;
    double fov = 2.0 * kPi / 3.0;
    double noise_base_std = 0.0;    // meters, on boresight
    double noise_edge_factor = 1.0; // multiplier reached at the FOV edge
    std::optional<AffineDistortion> bias;
    std::vector<AzimuthInterval> void_zones;
};

// Inside the FOV (edge inclusive) and outside every void zone.
bool radar_covers(const RadarConfig &cfg, const Eigen::Vector2d &xz);

// base * (1 + (edge - 1) * |off boresight| / (fov / 2)).
double radar_noise_std(const RadarConfig &cfg, const Eigen::Vector2d &xz);

// Raw (pre-calibration) reading of a true position without noise.
Eigen::Vector2d radar_distort(const RadarConfig &cfg, const Eigen::Vector2d &xz);

struct RadarSimResult {
    std::vector<RadarDetection> detections; // shuffled: detections carry no identity
    std::vector<std::int64_t> truth_ids;    // evaluation only, parallel to detections
};

RadarSimResult simulate_radar(const SceneTruth &truth, const RadarConfig &cfg, std::size_t frame, std::uint64_t seed);

// Equirectangular keypoints for every person in a frame. Joints masked by
// the scenario (the person's own label when `scenario` is empty) get
// confidence 0; the rest draw confidence from [0.5, 1]. Pose order is
// shuffled and person_hint carries the truth id.
std::vector<Pose2D> simulate_keypoints(const SceneTruth &truth, const CameraModel &cam, std::size_t frame,
                                       double detector_noise_px, std::optional<OcclusionScenario> scenario,
                                       std::uint64_t seed);

// Surveyed points on a lattice of `spacing` inside the radar's coverage,
// between the given ranges.
std::vector<Eigen::Vector2d> calibration_grid(const RadarConfig &cfg, double spacing_m, double min_range,
                                              double max_range);

// A recorded dwell per grid point: `readings_per_point` noisy raw readings at
// `rate_hz`.
std::vector<GridRecording> simulate_grid_session(const RadarConfig &cfg, std::span<const Eigen::Vector2d> points,
                                                 int readings_per_point, double rate_hz, std::uint64_t seed);

// Camera observations paired with the radar's calibrated position for the
// same standing person, the training data of the radar-to-image map.
std::vector<ImageSample> simulate_image_samples(const RadarConfig &cfg, const AffineCalibration &cal,
                                                const CameraModel &cam, std::span<const Eigen::Vector2d> points,
                                                int readings_per_point, double detector_noise_px, std::uint64_t seed);

} // namespace omnifuse
