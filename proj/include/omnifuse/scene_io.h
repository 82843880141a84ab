#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "omnifuse/geometry.h"
#include "omnifuse/simulator.h"
#include "omnifuse/sync.h"

namespace omnifuse {

inline constexpr int kSchemaVersion = 1;

// Everything needed to regenerate a scene dump.
struct SceneHeader {
    CameraModel camera;
    std::vector<RadarConfig> radars;
    SceneConfig scene;
    double detector_noise_px = 0.0;
    double frame_period_s = 0.1;
    std::uint64_t seed = 0;
};

struct RadarFrame {
    int radar_id = 0;
    std::vector<RadarDetection> detections;
    std::vector<std::int64_t> truth_ids; // evaluation only
};

struct SceneFrame {
    std::uint64_t frame_id = 0;
    Nanos timestamp{0};
    std::vector<PersonTruth> truth;
    std::vector<RadarFrame> radars;
    std::vector<Pose2D> poses;
};

struct SceneFile {
    SceneHeader header;
    std::vector<SceneFrame> frames;

    // Truth for one person in one frame, or nullptr.
    const PersonTruth *truth_of(std::uint64_t frame_id, std::int64_t person_id) const;
};

// Runs the simulator for every frame of the header's scene.
SceneFile simulate_scene(const SceneHeader &header);

// JSON Lines: a header object ("type": "header") followed by one
// "type": "frame" object per frame. Both carry schema_version.
void write_scene_jsonl(std::ostream &out, const SceneFile &scene);
// Throws ParseError with the offending line.
SceneFile read_scene_jsonl(std::istream &in, const std::string &source = "<scene>");

// One placed person per line.
struct PoseRecord {
    std::uint64_t frame_id = 0;
    std::int64_t person_id = -1;
    int source_radar = -1;
    Skeleton3D joints{}; // world frame, meters
};

void write_pose_record(std::ostream &out, const PoseRecord &rec);
std::vector<PoseRecord> read_pose_records(std::istream &in, const std::string &source = "<poses>");

} // namespace omnifuse
