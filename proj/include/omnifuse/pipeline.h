#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "omnifuse/calibration.h"
#include "omnifuse/config.h"
#include "omnifuse/geometry.h"
#include "omnifuse/lifting.h"
#include "omnifuse/matching.h"
#include "omnifuse/metrics.h"
#include "omnifuse/scene_io.h"
#include "omnifuse/sync.h"

namespace omnifuse {

// How lifting units become meters for a placed person.
//   Range:  pelvis range implied by the radar position and the pelvis view
//           ray, divided by c. Exact for an exact lifter.
//   Height: vertical extent of the reconstruction matched to the canonical
//           standing skeleton.
//   Fixed:  the configured world_scale.
enum class ScaleMode { Range, Height, Fixed };

enum class LifterKind { Oracle, External };

struct PipelineRadar {
    int radar_id = 0;
    AffineCalibration affine;
    RadarImageMap image_map;
    bool calibrated = true; // false when running on identity / nominal maps
};

struct PipelineConfig {
    CameraModel camera;
    std::vector<PipelineRadar> radars;
    double matching_threshold_px = 0.0; // <= 0 selects 2% of the image width
    LifterKind lifter = LifterKind::Oracle;
    OracleLifterConfig oracle;
    std::string lift_file;
    double c = 10.0;
    ScaleMode scale_mode = ScaleMode::Range;
    double world_scale = 0.0; // Fixed mode only

    // Throws ConfigError.
    void validate() const;
    double threshold_px() const;
    const PipelineRadar *radar(int radar_id) const;
};

// The camera side of one tick.
struct CameraFrame {
    TickId tick = 0;
    std::uint64_t frame_id = 0;
    std::vector<Pose2D> poses;
};

// Detection numbering used by the frame's Assignment.
struct DetectionRef {
    int radar_id = 0;
    std::size_t local_index = 0;
    Eigen::Vector2d world_xz = Eigen::Vector2d::Zero(); // after calibration
};

struct PersonFailure {
    std::size_t pose_index = 0;
    std::string message;
};

struct FrameDiagnostics {
    TickId tick = 0;
    AssemblyStatus status = AssemblyStatus::Complete;
    std::vector<int> missing_radars;
    std::vector<int> uncalibrated_radars;
    std::vector<DetectionRef> detections;
    Assignment assignment;
    std::vector<std::size_t> placed_pose_indices; // parallel to FrameResult::poses
    std::vector<PersonFailure> failures;
    Nanos fusion_time{0}; // everything except the lifter call
    Nanos lifter_time{0};
};

struct FrameResult {
    std::vector<GlobalPose3D> poses;
    FrameDiagnostics diagnostics;
};

// calibrate -> project -> match -> normalize -> lift -> reconstruct -> place.
// Errors for one person are recorded in the diagnostics and never abort the
// frame. Throws SyncError when the camera frame belongs to another tick and
// ConfigError for a snapshot from an unconfigured radar.
FrameResult run_frame(const PipelineConfig &cfg, Lifter &lifter, const FusedFrame &fused, const CameraFrame &camera);

// Lifter selected by the config. The oracle reads truth from `scene`, which
// must outlive the lifter.
std::unique_ptr<Lifter> make_lifter(const PipelineConfig &cfg, const SceneFile &scene);

struct LatencyStats {
    std::size_t count = 0;
    double p50_us = 0.0;
    double p95_us = 0.0;
    double mean_us = 0.0;
};

LatencyStats latency_stats(std::vector<double> samples_us);

struct Evaluation {
    std::size_t poses = 0;
    std::size_t unmatched_truth = 0; // placed poses with no truth counterpart
    std::size_t degenerate = 0;      // poses the aligned metrics could not score
    std::map<OcclusionScenario, PoseErrorSummary> per_scenario;
    PoseErrorSummary overall;
    std::vector<LocalizationSample> localization; // pelvis ground point
};

// Pairs placed poses with scene truth by (frame_id, person_id).
Evaluation evaluate_poses(const SceneFile &scene, std::span<const PoseRecord> poses);

struct RunReport {
    std::size_t frames_processed = 0;
    std::size_t partial_frames = 0;
    std::size_t frames_dropped = 0; // live mode with drop-oldest backpressure
    LatencyStats fusion_latency;
    double matching_accuracy_pct = 100.0;
    std::size_t poses_placed = 0;
    std::size_t unmatched_poses = 0;
    std::size_t person_failures = 0;
    std::vector<int> uncalibrated_radars;
    Evaluation evaluation;
};

struct RunOptions {
    bool live_sim = false;          // radar threads through a SensorHub
    HubOptions hub;
    std::size_t frame_queue_capacity = 4;
    BackpressurePolicy backpressure = BackpressurePolicy::Block;
};

// Replays a scene dump through run_frame, writing one pose record per placed
// person to `poses_out` when given. File replay is single-threaded; live_sim
// runs one producer thread per radar and one consumer.
RunReport run_scene(const PipelineConfig &cfg, Lifter &lifter, const SceneFile &scene, std::ostream *poses_out,
                    const RunOptions &opts = {});

void write_run_report(std::ostream &out, const RunReport &report);
void write_evaluation(std::ostream &out, const Evaluation &eval);

// --- configuration files ----------------------------------------------------

// [camera] width_px, yaw_offset_deg, height_m
CameraModel camera_from_config(const Config &cfg);
// [scene], [camera] and [[radar]] tables.
SceneHeader scene_header_from_config(const Config &cfg, std::uint64_t seed);
// [pipeline] table plus calibration documents matched to the radars by id.
// Radars without one run on identity / nominal maps and are flagged.
PipelineConfig pipeline_from_config(const Config &cfg, const CameraModel &cam, std::span<const RadarConfig> radars,
                                    std::span<const RadarCalibration> calibrations);
RunOptions run_options_from_config(const Config &cfg);

} // namespace omnifuse
