#include "omnifuse/lifting.h"

#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "omnifuse/errors.h"
#include "omnifuse/random.h"

namespace omnifuse {

using nlohmann::json;

LocalPose3D lifting_frame_truth(const Skeleton3D &world_joints, const NormRecord &rec, const CameraModel &cam,
                                double c) {
    if (rec.frame != NormFrame::View)
        throw InputError("lifting-frame truth needs a view-normalized pose");
    const ViewBasis basis = view_basis(rec.view);
    const double k = cam.px_per_rad() / rec.scale_px_per_unit;
    const Eigen::Vector3d center = cam.center();
    const double root_depth = (world_joints[idx(Joint::Pelvis)] - center).dot(basis.forward);
    if (!(root_depth > 0.0))
        throw DomainError("pelvis lies behind the view");
    const double s = c / root_depth;

    LocalPose3D out;
    out.c = c;
    for (std::size_t j = 0; j < kNumJoints; ++j) {
        const Eigen::Vector3d p = world_joints[j] - center;
        out.keypoints[j] = {k * s * p.dot(basis.right), k * s * p.dot(basis.down), s * p.dot(basis.forward)};
    }
    return out;
}

DepthOffsets oracle_lift(const LocalPose3D &truth, const OracleLifterConfig &cfg, const JointMask &occluded,
                         std::int64_t frame_id, std::int64_t person_id) {
    DepthOffsets d{};
    for (std::size_t j = 0; j < kNumJoints; ++j)
        d[j] = truth.keypoints[j].z() - truth.c;

    auto rng = make_rng(cfg.seed, {static_cast<std::uint64_t>(frame_id), static_cast<std::uint64_t>(person_id)});
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t j = 1; j < kNumJoints; ++j)
        d[j] += cfg.noise_std * normal(rng);

    for (std::size_t j = 1; j < kNumJoints; ++j) {
        if (!occluded.test(j))
            continue;
        const auto m = mirror(static_cast<Joint>(j));
        const double std_dev = cfg.occlusion_penalty * ((m && occluded.test(idx(*m))) ? 2.0 : 1.0);
        const double e = std_dev * normal(rng);
        for (std::size_t i = 1; i < kNumJoints; ++i) {
            if (is_ancestor(static_cast<Joint>(j), static_cast<Joint>(i)))
                d[i] += e;
        }
    }
    d[idx(Joint::Pelvis)] = 0.0;
    return d;
}

DepthOffsets OracleLifter::lift(const LiftRequest &req) {
    Skeleton3D world;
    if (!truth_(req.frame_id, req.person_id, world))
        throw NotFound("no ground truth for frame " + std::to_string(req.frame_id) + " person " +
                       std::to_string(req.person_id));
    const LocalPose3D t = lifting_frame_truth(world, req.pose->norm_record, cam_, c_);
    return oracle_lift(t, cfg_, req.pose->occlusion_mask, req.frame_id, req.person_id);
}

void write_lift_record(std::ostream &out, const LiftRecord &rec) {
    json doc = {{"schema_version", 1}, {"frame_id", rec.frame_id}, {"person_id", rec.person_id}, {"d", rec.d}};
    out << doc.dump() << '\n';
}

std::map<std::pair<std::int64_t, std::int64_t>, DepthOffsets> read_lift_records(std::istream &in,
                                                                              const std::string &source) {
    std::map<std::pair<std::int64_t, std::int64_t>, DepthOffsets> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception &e) {
            throw ParseError(source, lineno, e.what());
        }
        if (!doc.is_object() || !doc.contains("frame_id") || !doc.contains("person_id") || !doc.contains("d"))
            throw ParseError(source, lineno, "lift record needs frame_id, person_id and d");
        const json &arr = doc["d"];
        if (!arr.is_array() || arr.size() != kNumJoints)
            throw ParseError(source, lineno,
                             "d must hold " + std::to_string(kNumJoints) + " offsets, got " +
                                 std::to_string(arr.is_array() ? arr.size() : 0));
        DepthOffsets d{};
        for (std::size_t j = 0; j < kNumJoints; ++j) {
            if (!arr[j].is_number())
                throw ParseError(source, lineno, "offset " + std::to_string(j) + " is not a number");
            d[j] = arr[j].get<double>();
        }
        if (doc.contains("schema_version") && doc["schema_version"] != 1)
            throw ParseError(source, lineno, "unsupported schema_version");
        if (!(std::abs(d[0]) <= 1e-6))
            throw ValidationError(source + ":" + std::to_string(lineno) + ": root offset must be 0");
        std::pair<std::int64_t, std::int64_t> key;
        try {
            key = {doc["frame_id"].get<std::int64_t>(), doc["person_id"].get<std::int64_t>()};
        } catch (const json::exception &e) {
            throw ParseError(source, lineno, e.what());
        }
        if (!out.emplace(key, d).second)
            throw ParseError(source, lineno, "duplicate record");
    }
    return out;
}

DepthOffsets ingest_external_lift(std::istream &in, std::int64_t frame_id, std::int64_t person_id,
                                  const std::string &source) {
    const auto records = read_lift_records(in, source);
    auto it = records.find({frame_id, person_id});
    if (it == records.end())
        throw NotFound("no lift record for frame " + std::to_string(frame_id) + " person " + std::to_string(person_id));
    return it->second;
}

DepthOffsets ExternalLifter::lift(const LiftRequest &req) {
    auto it = records_.find({req.frame_id, req.person_id});
    if (it == records_.end())
        throw NotFound("no lift record for frame " + std::to_string(req.frame_id) + " person " +
                       std::to_string(req.person_id));
    return it->second;
}

} // namespace omnifuse
