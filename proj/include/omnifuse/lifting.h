#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>

#include "omnifuse/geometry.h"

namespace omnifuse {

struct LiftRequest {
    std::int64_t frame_id = 0;
    std::int64_t person_id = -1;
    const NormalizedPose2D *pose = nullptr;
};

// 2D-to-3D lifter boundary: per-keypoint depth offsets relative to the root,
// with the root assumed to sit c units from the camera. Implementations must
// return an offset for every joint, occluded ones included, and 0 for the root.
// Implementations are called from the single pipeline thread.
class Lifter {
  public:
    virtual ~Lifter() = default;
    virtual DepthOffsets lift(const LiftRequest &req) = 0;
};

struct OracleLifterConfig {
    double noise_std = 0.0;         // per-joint depth noise, lifting units
    double occlusion_penalty = 0.0; // extra noise std on masked joints
    std::uint64_t seed = 0;
};

// Ground truth expressed in the lifting frame of a View-normalized pose: the
// pelvis-centered virtual camera, scaled so the pelvis sits at depth c, with
// lateral axes multiplied by the normalization factor. Reconstructing the
// normalized pose with the exact depths of this frame reproduces it.
LocalPose3D lifting_frame_truth(const Skeleton3D &world_joints, const NormRecord &rec, const CameraModel &cam,
                                double c);

// Depth offsets read off a lifting-frame pose plus seeded noise. Occlusion
// noise is drawn once per masked joint and carried to its kinematic
// descendants; it is doubled when the joint's mirror is masked too, since the
// lifter loses its symmetric cue. The root offset is always exactly 0.
DepthOffsets oracle_lift(const LocalPose3D &truth, const OracleLifterConfig &cfg, const JointMask &occluded,
                         std::int64_t frame_id = 0, std::int64_t person_id = 0);

// Pipeline adapter around oracle_lift; needs the scene truth it stands in for.
class OracleLifter final : public Lifter {
  public:
    // Looks up world-frame joints for (frame, person); returns false if unknown.
    using TruthLookup = std::function<bool(std::int64_t frame, std::int64_t person, Skeleton3D &out)>;

    OracleLifter(TruthLookup truth, CameraModel cam, double c, OracleLifterConfig cfg)
        : truth_(std::move(truth)), cam_(cam), c_(c), cfg_(cfg) {}

    DepthOffsets lift(const LiftRequest &req) override;

  private:
    TruthLookup truth_;
    CameraModel cam_;
    double c_;
    OracleLifterConfig cfg_;
};

// JSON Lines lift records: {"schema_version":1,"frame_id":F,"person_id":P,"d":[15 numbers]}.
struct LiftRecord {
    std::int64_t frame_id = 0;
    std::int64_t person_id = 0;
    DepthOffsets d{};
};

void write_lift_record(std::ostream &out, const LiftRecord &rec);

// Throws ParseError (with line) for malformed rows or a wrong offset count and
// ValidationError when the root offset deviates from 0 by more than 1e-6.
std::map<std::pair<std::int64_t, std::int64_t>, DepthOffsets> read_lift_records(std::istream &in,
                                                                              const std::string &source = "<lifts>");

// Offsets for (frame, person) from a lift-record file. Throws NotFound.
DepthOffsets ingest_external_lift(std::istream &in, std::int64_t frame_id, std::int64_t person_id,
                                  const std::string &source = "<lifts>");

class ExternalLifter final : public Lifter {
  public:
    explicit ExternalLifter(std::map<std::pair<std::int64_t, std::int64_t>, DepthOffsets> records)
        : records_(std::move(records)) {}

    DepthOffsets lift(const LiftRequest &req) override;

  private:
    std::map<std::pair<std::int64_t, std::int64_t>, DepthOffsets> records_;
};

} // namespace omnifuse
