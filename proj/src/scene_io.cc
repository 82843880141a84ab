#include "omnifuse/scene_io.h"

#include <istream>
#include <ostream>

#include <json.hpp>

#include "omnifuse/errors.h"

namespace omnifuse {

using nlohmann::json;

namespace {

json vec2(const Eigen::Vector2d &v) { return json::array({v.x(), v.y()}); }
json vec3(const Eigen::Vector3d &v) { return json::array({v.x(), v.y(), v.z()}); }

// Reads fields of one JSON document and reports failures against its line.
class Reader {
  public:
    Reader(const std::string &source, std::size_t line) : source_(source), line_(line) {}

    [[noreturn]] void fail(const std::string &what) const { throw ParseError(source_, line_, what); }

    const json &field(const json &obj, const char *key) const {
        if (!obj.is_object())
            fail(std::string("expected an object holding '") + key + "'");
        auto it = obj.find(key);
        if (it == obj.end())
            fail(std::string("missing field '") + key + "'");
        return *it;
    }

    double number(const json &v, const char *what) const {
        if (!v.is_number())
            fail(std::string(what) + " must be a number");
        return v.get<double>();
    }

    std::int64_t integer(const json &v, const char *what) const {
        if (!v.is_number_integer())
            fail(std::string(what) + " must be an integer");
        return v.get<std::int64_t>();
    }

    const json &array(const json &v, const char *what, std::size_t size = 0) const {
        if (!v.is_array() || (size && v.size() != size))
            fail(std::string(what) + (size ? " must be an array of " + std::to_string(size) : " must be an array"));
        return v;
    }

    Eigen::Vector2d vec2(const json &v, const char *what) const {
        array(v, what, 2);
        return {number(v[0], what), number(v[1], what)};
    }

    Eigen::Vector3d vec3(const json &v, const char *what) const {
        array(v, what, 3);
        return {number(v[0], what), number(v[1], what), number(v[2], what)};
    }

    Skeleton3D skeleton(const json &v) const {
        array(v, "joints", kNumJoints);
        Skeleton3D s;
        for (std::size_t j = 0; j < kNumJoints; ++j)
            s[j] = vec3(v[j], "joint");
        return s;
    }

    std::uint64_t seed(const json &v) const {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            fail("seed must be a non-negative integer");
        return v.get<std::uint64_t>();
    }

    void check_version(const json &doc) const {
        const auto v = integer(field(doc, "schema_version"), "schema_version");
        if (v != kSchemaVersion)
            fail("unsupported schema_version " + std::to_string(v));
    }

  private:
    const std::string &source_;
    std::size_t line_;
};

json camera_json(const CameraModel &cam) {
    return {{"width_px", cam.width_px},
            {"height_px", cam.height_px},
            {"yaw_offset_rad", cam.yaw_offset_rad},
            {"height_m", cam.height_m}};
}

CameraModel camera_from(const Reader &r, const json &j) {
    CameraModel cam;
    cam.width_px = static_cast<int>(r.integer(r.field(j, "width_px"), "width_px"));
    cam.height_px = static_cast<int>(r.integer(r.field(j, "height_px"), "height_px"));
    cam.yaw_offset_rad = r.number(r.field(j, "yaw_offset_rad"), "yaw_offset_rad");
    cam.height_m = r.number(r.field(j, "height_m"), "height_m");
    try {
        cam.validate();
    } catch (const InputError &e) {
        r.fail(e.what());
    }
    return cam;
}

json radar_json(const RadarConfig &cfg) {
    json j = {{"radar_id", cfg.radar_id},
              {"boresight_rad", cfg.boresight_azimuth},
              {"fov_rad", cfg.fov},
              {"noise_base_std", cfg.noise_base_std},
              {"noise_edge_factor", cfg.noise_edge_factor},
              {"bias", nullptr},
              {"void_zones", json::array()}};
    if (cfg.bias) {
        const auto &m = cfg.bias->matrix;
        j["bias"] = {{"matrix", {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}}, {"translation", vec2(cfg.bias->translation)}};
    }
    for (const auto &z : cfg.void_zones)
        j["void_zones"].push_back({z.start, z.end});
    return j;
}

RadarConfig radar_from(const Reader &r, const json &j) {
    RadarConfig cfg;
    cfg.radar_id = static_cast<int>(r.integer(r.field(j, "radar_id"), "radar_id"));
    cfg.boresight_azimuth = r.number(r.field(j, "boresight_rad"), "boresight_rad");
    cfg.fov = r.number(r.field(j, "fov_rad"), "fov_rad");
    cfg.noise_base_std = r.number(r.field(j, "noise_base_std"), "noise_base_std");
    cfg.noise_edge_factor = r.number(r.field(j, "noise_edge_factor"), "noise_edge_factor");
    const json &bias = r.field(j, "bias");
    if (!bias.is_null()) {
        const json &m = r.array(r.field(bias, "matrix"), "bias.matrix", 4);
        AffineDistortion d;
        d.matrix << r.number(m[0], "bias.matrix"), r.number(m[1], "bias.matrix"), r.number(m[2], "bias.matrix"),
            r.number(m[3], "bias.matrix");
        d.translation = r.vec2(r.field(bias, "translation"), "bias.translation");
        cfg.bias = d;
    }
    for (const auto &z : r.array(r.field(j, "void_zones"), "void_zones")) {
        const Eigen::Vector2d v = r.vec2(z, "void zone");
        cfg.void_zones.push_back({v.x(), v.y()});
    }
    return cfg;
}

const char *trajectory_name(Trajectory t) { return t == Trajectory::Static ? "static" : "random_walk"; }

json scene_config_json(const SceneConfig &s) {
    return {{"person_count", s.person_count},
            {"arena_radius", s.arena_radius},
            {"min_range", s.min_range},
            {"min_separation", s.min_separation},
            {"trajectory", trajectory_name(s.trajectory)},
            {"step_std", s.step_std},
            {"duration_frames", s.duration_frames},
            {"seed", s.seed},
            {"scenario", std::string(scenario_name(s.scenario))},
            {"random_scenarios", s.random_scenarios}};
}

SceneConfig scene_config_from(const Reader &r, const json &j) {
    SceneConfig s;
    s.person_count = static_cast<int>(r.integer(r.field(j, "person_count"), "person_count"));
    s.arena_radius = r.number(r.field(j, "arena_radius"), "arena_radius");
    s.min_range = r.number(r.field(j, "min_range"), "min_range");
    s.min_separation = r.number(r.field(j, "min_separation"), "min_separation");
    const json &traj = r.field(j, "trajectory");
    if (traj == "static")
        s.trajectory = Trajectory::Static;
    else if (traj == "random_walk")
        s.trajectory = Trajectory::RandomWalk;
    else
        r.fail("unknown trajectory");
    s.step_std = r.number(r.field(j, "step_std"), "step_std");
    s.duration_frames = static_cast<int>(r.integer(r.field(j, "duration_frames"), "duration_frames"));
    s.seed = r.seed(r.field(j, "seed"));
    const json &scen = r.field(j, "scenario");
    if (!scen.is_string())
        r.fail("scenario must be a string");
    try {
        s.scenario = scenario_from_name(scen.get<std::string>());
    } catch (const Error &e) {
        r.fail(e.what());
    }
    const json &rnd = r.field(j, "random_scenarios");
    if (!rnd.is_boolean())
        r.fail("random_scenarios must be a boolean");
    s.random_scenarios = rnd.get<bool>();
    return s;
}

json person_json(const PersonTruth &p) {
    json joints = json::array();
    for (const auto &k : p.joints)
        joints.push_back(vec3(k));
    return {{"person_id", p.person_id},
            {"ground", vec2(p.ground)},
            {"joints", joints},
            {"scenario", std::string(scenario_name(p.scenario))}};
}

PersonTruth person_from(const Reader &r, const json &j) {
    PersonTruth p;
    p.person_id = r.integer(r.field(j, "person_id"), "person_id");
    p.ground = r.vec2(r.field(j, "ground"), "ground");
    p.joints = r.skeleton(r.field(j, "joints"));
    const json &scen = r.field(j, "scenario");
    if (!scen.is_string())
        r.fail("scenario must be a string");
    try {
        p.scenario = scenario_from_name(scen.get<std::string>());
    } catch (const Error &e) {
        r.fail(e.what());
    }
    return p;
}

json pose2d_json(const Pose2D &pose) {
    json kps = json::array();
    for (const auto &k : pose.keypoints)
        kps.push_back({k.u, k.v, k.confidence});
    json j = {{"keypoints", kps}, {"person_hint", nullptr}};
    if (pose.person_hint)
        j["person_hint"] = *pose.person_hint;
    return j;
}

Pose2D pose2d_from(const Reader &r, const json &j) {
    Pose2D pose;
    const json &kps = r.array(r.field(j, "keypoints"), "keypoints", kNumJoints);
    for (std::size_t k = 0; k < kNumJoints; ++k) {
        const Eigen::Vector3d v = r.vec3(kps[k], "keypoint");
        if (!(v.z() >= 0.0 && v.z() <= 1.0))
            r.fail("keypoint confidence must lie in [0, 1]");
        pose.keypoints[k] = {v.x(), v.y(), v.z()};
    }
    const json &hint = r.field(j, "person_hint");
    if (!hint.is_null())
        pose.person_hint = r.integer(hint, "person_hint");
    return pose;
}

json parse_line(const std::string &text, const Reader &r) {
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        r.fail(std::string("invalid JSON: ") + e.what());
    }
}

} // namespace

const PersonTruth *SceneFile::truth_of(std::uint64_t frame_id, std::int64_t person_id) const {
    auto search = [&](const SceneFrame &f) -> const PersonTruth * {
        for (const auto &p : f.truth) {
            if (p.person_id == person_id)
                return &p;
        }
        return nullptr;
    };
    if (frame_id < frames.size() && frames[frame_id].frame_id == frame_id)
        return search(frames[frame_id]);
    for (const auto &f : frames) {
        if (f.frame_id == frame_id)
            return search(f);
    }
    return nullptr;
}

SceneFile simulate_scene(const SceneHeader &header) {
    header.camera.validate();
    SceneConfig sc = header.scene;
    sc.seed = header.seed;
    SceneFile out;
    out.header = header;
    out.header.scene = sc;
    const SceneTruth truth = gen_scene(sc);
    for (std::size_t f = 0; f < truth.frames.size(); ++f) {
        SceneFrame frame;
        frame.frame_id = f;
        frame.timestamp = std::chrono::duration_cast<Nanos>(
            std::chrono::duration<double>(static_cast<double>(f) * header.frame_period_s));
        frame.truth = truth.frames[f].people;
        for (const auto &radar : header.radars) {
            RadarSimResult r = simulate_radar(truth, radar, f, header.seed);
            frame.radars.push_back({radar.radar_id, std::move(r.detections), std::move(r.truth_ids)});
        }
        frame.poses = simulate_keypoints(truth, header.camera, f, header.detector_noise_px, std::nullopt, header.seed);
        out.frames.push_back(std::move(frame));
    }
    return out;
}

void write_scene_jsonl(std::ostream &out, const SceneFile &scene) {
    const SceneHeader &h = scene.header;
    json radars = json::array();
    for (const auto &r : h.radars)
        radars.push_back(radar_json(r));
    json head = {{"type", "header"},
                 {"schema_version", kSchemaVersion},
                 {"camera", camera_json(h.camera)},
                 {"radars", radars},
                 {"scene", scene_config_json(h.scene)},
                 {"detector_noise_px", h.detector_noise_px},
                 {"frame_period_s", h.frame_period_s},
                 {"seed", h.seed}};
    out << head.dump() << '\n';
    for (const auto &f : scene.frames) {
        json truth = json::array(), rf = json::array(), poses = json::array();
        for (const auto &p : f.truth)
            truth.push_back(person_json(p));
        for (const auto &r : f.radars) {
            json dets = json::array();
            for (const auto &d : r.detections)
                dets.push_back(vec2(d.xz));
            rf.push_back({{"radar_id", r.radar_id}, {"detections", dets}, {"truth_ids", r.truth_ids}});
        }
        for (const auto &p : f.poses)
            poses.push_back(pose2d_json(p));
        json doc = {{"type", "frame"},
                    {"schema_version", kSchemaVersion},
                    {"frame_id", f.frame_id},
                    {"timestamp_ns", f.timestamp.count()},
                    {"truth", truth},
                    {"radars", rf},
                    {"poses", poses}};
        out << doc.dump() << '\n';
    }
}

SceneFile read_scene_jsonl(std::istream &in, const std::string &source) {
    SceneFile scene;
    std::string text;
    std::size_t line = 0;
    bool have_header = false;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty())
            continue;
        const Reader r(source, line);
        const json doc = parse_line(text, r);
        if (!doc.is_object())
            r.fail("expected a JSON object");
        r.check_version(doc);
        const json &type = r.field(doc, "type");
        if (type == "header") {
            if (have_header)
                r.fail("second header");
            have_header = true;
            SceneHeader &h = scene.header;
            h.camera = camera_from(r, r.field(doc, "camera"));
            for (const auto &rj : r.array(r.field(doc, "radars"), "radars"))
                h.radars.push_back(radar_from(r, rj));
            h.scene = scene_config_from(r, r.field(doc, "scene"));
            h.detector_noise_px = r.number(r.field(doc, "detector_noise_px"), "detector_noise_px");
            h.frame_period_s = r.number(r.field(doc, "frame_period_s"), "frame_period_s");
            h.seed = r.seed(r.field(doc, "seed"));
        } else if (type == "frame") {
            if (!have_header)
                r.fail("frame before header");
            SceneFrame f;
            f.frame_id = static_cast<std::uint64_t>(r.integer(r.field(doc, "frame_id"), "frame_id"));
            f.timestamp = Nanos{r.integer(r.field(doc, "timestamp_ns"), "timestamp_ns")};
            for (const auto &p : r.array(r.field(doc, "truth"), "truth"))
                f.truth.push_back(person_from(r, p));
            for (const auto &rj : r.array(r.field(doc, "radars"), "radars")) {
                RadarFrame rf;
                rf.radar_id = static_cast<int>(r.integer(r.field(rj, "radar_id"), "radar_id"));
                for (const auto &d : r.array(r.field(rj, "detections"), "detections"))
                    rf.detections.push_back({r.vec2(d, "detection")});
                for (const auto &t : r.array(r.field(rj, "truth_ids"), "truth_ids"))
                    rf.truth_ids.push_back(r.integer(t, "truth id"));
                if (rf.truth_ids.size() != rf.detections.size())
                    r.fail("truth_ids and detections differ in length");
                f.radars.push_back(std::move(rf));
            }
            for (const auto &p : r.array(r.field(doc, "poses"), "poses"))
                f.poses.push_back(pose2d_from(r, p));
            scene.frames.push_back(std::move(f));
        } else {
            r.fail("unknown record type");
        }
    }
    if (!have_header)
        throw ParseError(source, line, "missing header");
    return scene;
}

void write_pose_record(std::ostream &out, const PoseRecord &rec) {
    json joints = json::array();
    for (const auto &k : rec.joints)
        joints.push_back(vec3(k));
    json doc = {{"schema_version", kSchemaVersion},
                {"frame_id", rec.frame_id},
                {"person_id", rec.person_id},
                {"source_radar", rec.source_radar},
                {"joints", joints}};
    out << doc.dump() << '\n';
}

std::vector<PoseRecord> read_pose_records(std::istream &in, const std::string &source) {
    std::vector<PoseRecord> out;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty())
            continue;
        const Reader r(source, line);
        const json doc = parse_line(text, r);
        r.check_version(doc);
        PoseRecord rec;
        rec.frame_id = static_cast<std::uint64_t>(r.integer(r.field(doc, "frame_id"), "frame_id"));
        rec.person_id = r.integer(r.field(doc, "person_id"), "person_id");
        rec.source_radar = static_cast<int>(r.integer(r.field(doc, "source_radar"), "source_radar"));
        rec.joints = r.skeleton(r.field(doc, "joints"));
        out.push_back(rec);
    }
    return out;
}

} // namespace omnifuse
