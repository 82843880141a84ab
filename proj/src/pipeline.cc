#include "omnifuse/pipeline.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <ostream>
#include <set>
#include <thread>

#include <json.hpp>

#include "omnifuse/errors.h"

namespace omnifuse {

using nlohmann::json;

namespace {

using SteadyTime = std::chrono::steady_clock;

// Vertical extent of the canonical skeleton, lowest ankle to highest joint.
double canonical_extent() {
    const Skeleton3D &body = canonical_skeleton();
    double top = body[0].y();
    for (const auto &k : body)
        top = std::max(top, k.y());
    return top - std::min(body[idx(Joint::LAnkle)].y(), body[idx(Joint::RAnkle)].y());
}

double height_world_scale(const LocalPose3D &aligned) {
    // Lifting frame: y grows downward.
    const double ankle = std::max(aligned.keypoints[idx(Joint::LAnkle)].y(), aligned.keypoints[idx(Joint::RAnkle)].y());
    double top = ankle;
    for (const auto &k : aligned.keypoints)
        top = std::min(top, k.y());
    const double extent = ankle - top;
    if (!(extent > 0.0))
        throw DomainError("reconstruction has no vertical extent");
    return canonical_extent() / extent;
}

} // namespace

void PipelineConfig::validate() const {
    camera.validate();
    if (radars.empty())
        throw ConfigError("pipeline needs at least one radar");
    std::set<int> ids;
    for (const auto &r : radars) {
        if (!ids.insert(r.radar_id).second)
            throw ConfigError("radar " + std::to_string(r.radar_id) + " configured twice");
        if (r.image_map.width_px != camera.width_px)
            throw ConfigError("image map of radar " + std::to_string(r.radar_id) + " was fit for width " +
                              std::to_string(r.image_map.width_px) + ", camera is " + std::to_string(camera.width_px));
    }
    if (!(c > 1.0) || !std::isfinite(c))
        throw ConfigError("lifting constant c must be > 1");
    if (scale_mode == ScaleMode::Fixed && !(world_scale > 0.0))
        throw ConfigError("fixed scale mode needs world_scale > 0");
    if (oracle.noise_std < 0.0 || oracle.occlusion_penalty < 0.0)
        throw ConfigError("oracle noise settings must be >= 0");
    if (lifter == LifterKind::External && lift_file.empty())
        throw ConfigError("external lifter needs lift_file");
}

double PipelineConfig::threshold_px() const {
    return matching_threshold_px > 0.0 ? matching_threshold_px : 0.02 * camera.width_px;
}

const PipelineRadar *PipelineConfig::radar(int radar_id) const {
    for (const auto &r : radars) {
        if (r.radar_id == radar_id)
            return &r;
    }
    return nullptr;
}

FrameResult run_frame(const PipelineConfig &cfg, Lifter &lifter, const FusedFrame &fused, const CameraFrame &camera) {
    if (camera.tick != fused.tick)
        throw SyncError("camera frame of tick " + std::to_string(camera.tick) + " paired with fused tick " +
                        std::to_string(fused.tick));
    const auto start = SteadyTime::now();
    Nanos lift_time{0};

    FrameResult out;
    FrameDiagnostics &diag = out.diagnostics;
    diag.tick = fused.tick;
    diag.status = fused.status;
    diag.missing_radars = fused.missing_radars;

    const CameraModel &cam = cfg.camera;
    const double width = cam.width_px;

    std::vector<RadarCandidate> radar_cands;
    for (const auto &snap : fused.radar_snapshots) {
        const PipelineRadar *radar = cfg.radar(snap.radar_id);
        if (!radar)
            throw ConfigError("snapshot from unconfigured radar " + std::to_string(snap.radar_id));
        if (!snap.present)
            continue;
        if (!radar->calibrated)
            diag.uncalibrated_radars.push_back(radar->radar_id);
        for (std::size_t k = 0; k < snap.detections.size(); ++k) {
            const Eigen::Vector2d xz = apply_affine(radar->affine, snap.detections[k].xz);
            const std::size_t global = diag.detections.size();
            diag.detections.push_back({radar->radar_id, k, xz});
            try {
                radar_cands.push_back({global, radar_to_image_x(radar->image_map, xz), xz});
            } catch (const DomainError &) {
                // A detection at the rig origin has no column; it stays unmatched.
            }
        }
    }

    std::vector<CameraCandidate> cam_cands;
    cam_cands.reserve(camera.poses.size());
    for (std::size_t i = 0; i < camera.poses.size(); ++i) {
        try {
            cam_cands.push_back({i, mean_image_x(camera.poses[i], cam.width_px)});
        } catch (const Error &e) {
            diag.failures.push_back({i, std::string("mean x: ") + e.what()});
        }
    }

    diag.assignment = match_people(cam_cands, radar_cands, cfg.threshold_px(), width);

    for (const auto &pair : diag.assignment.pairs) {
        const Pose2D &pose = camera.poses[pair.pose_index];
        const DetectionRef &det = diag.detections[pair.detection_index];
        const std::int64_t person = pose.person_hint.value_or(static_cast<std::int64_t>(pair.pose_index));
        try {
            const NormalizedPose2D norm = normalize_pose_view(pose, cam);
            const auto lift_start = SteadyTime::now();
            const DepthOffsets d = lifter.lift({static_cast<std::int64_t>(camera.frame_id), person, &norm});
            lift_time += SteadyTime::now() - lift_start;
            const LocalPose3D local = reconstruct_3d(norm, d, cfg.c);
            const LocalPose3D aligned = align_view_to_world(local, norm.norm_record, cam);
            double scale = cfg.world_scale;
            if (cfg.scale_mode == ScaleMode::Range)
                scale = range_world_scale(det.world_xz, norm.norm_record, cfg.c);
            else if (cfg.scale_mode == ScaleMode::Height)
                scale = height_world_scale(aligned);
            GlobalPose3D g = place_global(aligned, det.world_xz, scale);
            g.person_id = person;
            g.source_radar = det.radar_id;
            out.poses.push_back(g);
            diag.placed_pose_indices.push_back(pair.pose_index);
        } catch (const Error &e) {
            diag.failures.push_back({pair.pose_index, e.what()});
        }
    }

    diag.lifter_time = lift_time;
    diag.fusion_time = std::chrono::duration_cast<Nanos>(SteadyTime::now() - start) - lift_time;
    return out;
}

std::unique_ptr<Lifter> make_lifter(const PipelineConfig &cfg, const SceneFile &scene) {
    if (cfg.lifter == LifterKind::External) {
        std::ifstream in(cfg.lift_file);
        if (!in)
            throw InputError("cannot open lift file '" + cfg.lift_file + "'");
        return std::make_unique<ExternalLifter>(read_lift_records(in, cfg.lift_file));
    }
    auto lookup = [&scene](std::int64_t frame, std::int64_t person, Skeleton3D &out) {
        if (frame < 0)
            return false;
        const PersonTruth *t = scene.truth_of(static_cast<std::uint64_t>(frame), person);
        if (!t)
            return false;
        out = t->joints;
        return true;
    };
    return std::make_unique<OracleLifter>(lookup, cfg.camera, cfg.c, cfg.oracle);
}

LatencyStats latency_stats(std::vector<double> samples_us) {
    LatencyStats s;
    s.count = samples_us.size();
    if (samples_us.empty())
        return s;
    std::sort(samples_us.begin(), samples_us.end());
    auto pct = [&](double p) {
        // Nearest-rank percentile.
        const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(samples_us.size())));
        return samples_us[std::clamp<std::size_t>(rank, 1, samples_us.size()) - 1];
    };
    s.p50_us = pct(0.50);
    s.p95_us = pct(0.95);
    double sum = 0.0;
    for (double v : samples_us)
        sum += v;
    s.mean_us = sum / static_cast<double>(samples_us.size());
    return s;
}

Evaluation evaluate_poses(const SceneFile &scene, std::span<const PoseRecord> poses) {
    Evaluation ev;
    for (const auto &rec : poses) {
        ++ev.poses;
        const PersonTruth *truth = scene.truth_of(rec.frame_id, rec.person_id);
        if (!truth) {
            ++ev.unmatched_truth;
            continue;
        }
        const Eigen::Vector3d &pelvis = rec.joints[idx(Joint::Pelvis)];
        ev.localization.push_back({{pelvis.x(), pelvis.z()}, truth->ground});
        try {
            const PoseErrorReport r = pose_error_report(rec.joints, truth->joints, truth->scenario);
            ev.per_scenario[truth->scenario].add(r);
            ev.overall.add(r);
        } catch (const Error &) {
            ++ev.degenerate;
        }
    }
    return ev;
}

namespace {

// Folds frame results into a RunReport and writes pose records.
class RunAccumulator {
  public:
    RunAccumulator(const SceneFile &scene, std::ostream *poses_out) : scene_(scene), out_(poses_out) {}

    void add(const SceneFrame &frame, const CameraFrame &camera, const FrameResult &res) {
        const FrameDiagnostics &diag = res.diagnostics;
        ++report_.frames_processed;
        if (diag.status == AssemblyStatus::Partial)
            ++report_.partial_frames;
        latencies_.push_back(std::chrono::duration<double, std::micro>(diag.fusion_time).count());
        report_.unmatched_poses += diag.assignment.unmatched_poses.size();
        report_.person_failures += diag.failures.size();
        uncalibrated_.insert(diag.uncalibrated_radars.begin(), diag.uncalibrated_radars.end());

        std::vector<TruthPair> truth;
        for (std::size_t i = 0; i < camera.poses.size(); ++i) {
            if (!camera.poses[i].person_hint)
                continue;
            for (std::size_t g = 0; g < diag.detections.size(); ++g) {
                if (truth_id(frame, diag.detections[g]) == *camera.poses[i].person_hint)
                    truth.push_back({i, g});
            }
        }
        std::set<std::size_t> people;
        for (const auto &t : truth)
            people.insert(t.pose_index);
        people_ += people.size();
        correct_ += static_cast<std::size_t>(
            std::llround(matching_accuracy(diag.assignment, truth) * static_cast<double>(people.size()) / 100.0));

        for (const auto &g : res.poses) {
            PoseRecord rec{frame.frame_id, g.person_id, g.source_radar, g.keypoints};
            if (out_)
                write_pose_record(*out_, rec);
            records_.push_back(rec);
        }
    }

    RunReport finish(std::size_t dropped) {
        report_.frames_dropped = dropped;
        report_.fusion_latency = latency_stats(latencies_);
        report_.matching_accuracy_pct =
            people_ ? 100.0 * static_cast<double>(correct_) / static_cast<double>(people_) : 100.0;
        report_.poses_placed = records_.size();
        report_.uncalibrated_radars.assign(uncalibrated_.begin(), uncalibrated_.end());
        report_.evaluation = evaluate_poses(scene_, records_);
        return report_;
    }

  private:
    static std::int64_t truth_id(const SceneFrame &frame, const DetectionRef &det) {
        for (const auto &r : frame.radars) {
            if (r.radar_id == det.radar_id && det.local_index < r.truth_ids.size())
                return r.truth_ids[det.local_index];
        }
        return -1;
    }

    const SceneFile &scene_;
    std::ostream *out_;
    RunReport report_;
    std::vector<double> latencies_;
    std::vector<PoseRecord> records_;
    std::set<int> uncalibrated_;
    std::size_t people_ = 0, correct_ = 0;
};

const RadarFrame *radar_frame(const SceneFrame &frame, int radar_id) {
    for (const auto &r : frame.radars) {
        if (r.radar_id == radar_id)
            return &r;
    }
    return nullptr;
}

CameraFrame camera_frame(const SceneFrame &frame, TickId tick) { return {tick, frame.frame_id, frame.poses}; }

RunReport replay(const PipelineConfig &cfg, Lifter &lifter, const SceneFile &scene, RunAccumulator &acc) {
    TickId tick = 0;
    for (const auto &frame : scene.frames) {
        FusedFrame fused;
        fused.tick = ++tick;
        fused.camera = {frame.frame_id, frame.timestamp};
        for (const auto &radar : cfg.radars) {
            RadarSnapshot snap;
            snap.radar_id = radar.radar_id;
            snap.tick = fused.tick;
            snap.capture_time = frame.timestamp;
            if (const RadarFrame *rf = radar_frame(frame, radar.radar_id)) {
                snap.detections = rf->detections;
                snap.present = true;
            } else {
                fused.missing_radars.push_back(radar.radar_id);
            }
            fused.radar_snapshots.push_back(std::move(snap));
        }
        fused.status = fused.missing_radars.empty() ? AssemblyStatus::Complete : AssemblyStatus::Partial;
        acc.add(frame, camera_frame(frame, fused.tick), run_frame(cfg, lifter, fused, camera_frame(frame, fused.tick)));
    }
    return acc.finish(0);
}

RunReport live(const PipelineConfig &cfg, Lifter &lifter, const SceneFile &scene, RunAccumulator &acc,
               const RunOptions &opts) {
    struct Work {
        FusedFrame fused;
        const SceneFrame *frame = nullptr;
    };
    std::vector<int> ids;
    for (const auto &r : cfg.radars)
        ids.push_back(r.radar_id);
    SensorHub hub(ids, opts.hub);
    BoundedQueue<Work> queue(opts.frame_queue_capacity, opts.backpressure);
    std::exception_ptr consumer_error;

    // A fresh hub numbers ticks from 1, one per scene frame.
    std::vector<std::thread> radars;
    for (int id : ids) {
        radars.emplace_back([&hub, &scene, id] {
            TickId last = 0;
            while (auto t = hub.await_request(id, last)) {
                last = *t;
                std::vector<RadarDetection> dets;
                if (*t - 1 < scene.frames.size()) {
                    if (const RadarFrame *rf = radar_frame(scene.frames[*t - 1], id))
                        dets = rf->detections;
                }
                hub.submit_snapshot(id, *t, std::move(dets));
            }
        });
    }

    std::thread consumer([&] {
        try {
            while (auto w = queue.pop()) {
                const CameraFrame cam = camera_frame(*w->frame, w->fused.tick);
                acc.add(*w->frame, cam, run_frame(cfg, lifter, w->fused, cam));
            }
        } catch (...) {
            consumer_error = std::current_exception();
            queue.close();
        }
    });

    std::exception_ptr producer_error;
    try {
        for (const auto &frame : scene.frames) {
            const TickId t = hub.tick({frame.frame_id, frame.timestamp});
            if (!queue.push({hub.assemble(t), &frame}))
                break;
        }
    } catch (...) {
        producer_error = std::current_exception();
    }
    queue.close();
    consumer.join();
    hub.stop();
    for (auto &th : radars)
        th.join();
    if (producer_error)
        std::rethrow_exception(producer_error);
    if (consumer_error)
        std::rethrow_exception(consumer_error);
    return acc.finish(queue.dropped());
}

} // namespace

RunReport run_scene(const PipelineConfig &cfg, Lifter &lifter, const SceneFile &scene, std::ostream *poses_out,
                    const RunOptions &opts) {
    cfg.validate();
    RunAccumulator acc(scene, poses_out);
    return opts.live_sim ? live(cfg, lifter, scene, acc, opts) : replay(cfg, lifter, scene, acc);
}

namespace {

json summary_json(const PoseErrorSummary &s) {
    return {{"count", s.count},
            {"mpjpe_mm", s.mpjpe_mm},
            {"n_mpjpe_mm", s.n_mpjpe_mm},
            {"pa_mpjpe_mm", s.pa_mpjpe_mm},
            {"per_joint_mm", s.per_joint_mm}};
}

json evaluation_json(const Evaluation &ev) {
    json per = json::object();
    for (const auto &[scenario, s] : ev.per_scenario)
        per[std::string(scenario_name(scenario))] = summary_json(s);
    json loc = {{"x_cm", nullptr}, {"z_cm", nullptr}, {"n", ev.localization.size()}};
    if (!ev.localization.empty()) {
        loc["x_cm"] = localization_mae(ev.localization, Axis::X);
        loc["z_cm"] = localization_mae(ev.localization, Axis::Z);
    }
    return {{"schema_version", kSchemaVersion},
            {"poses", ev.poses},
            {"unmatched_truth", ev.unmatched_truth},
            {"degenerate", ev.degenerate},
            {"overall", summary_json(ev.overall)},
            {"per_scenario", per},
            {"localization_mae", loc}};
}

} // namespace

void write_evaluation(std::ostream &out, const Evaluation &eval) { out << evaluation_json(eval).dump(2) << '\n'; }

void write_run_report(std::ostream &out, const RunReport &r) {
    json doc = {{"schema_version", kSchemaVersion},
                {"frames_processed", r.frames_processed},
                {"partial_frames", r.partial_frames},
                {"frames_dropped", r.frames_dropped},
                {"fusion_latency_us",
                 {{"count", r.fusion_latency.count},
                  {"p50", r.fusion_latency.p50_us},
                  {"p95", r.fusion_latency.p95_us},
                  {"mean", r.fusion_latency.mean_us}}},
                {"matching_accuracy_pct", r.matching_accuracy_pct},
                {"poses_placed", r.poses_placed},
                {"unmatched_poses", r.unmatched_poses},
                {"person_failures", r.person_failures},
                {"uncalibrated_radars", r.uncalibrated_radars},
                {"evaluation", evaluation_json(r.evaluation)}};
    out << doc.dump(2) << '\n';
}

// --- configuration ------------------------------------------------------------

namespace {

double deg(double d) { return d * kPi / 180.0; }

RadarConfig radar_from_section(const ConfigSection &s, int index) {
    RadarConfig r;
    r.radar_id = static_cast<int>(s.integer("id", index));
    r.boresight_azimuth = wrap_angle(deg(s.number("boresight_deg", 120.0 * index)));
    r.fov = deg(s.number("fov_deg", 120.0));
    if (!(r.fov > 0.0 && r.fov <= kTwoPi + 1e-12))
        throw ConfigError(s.name() + ".fov_deg must lie in (0, 360]");
    r.noise_base_std = s.number("noise_base_std", 0.0);
    r.noise_edge_factor = s.number("noise_edge_factor", 1.0);
    if (r.noise_base_std < 0.0 || r.noise_edge_factor < 0.0)
        throw ConfigError(s.name() + " noise settings must be >= 0");
    if (s.has("bias_matrix") || s.has("bias_rotation_deg") || s.has("bias_range_scale") || s.has("bias_translation")) {
        AffineDistortion d = azimuth_rotation(deg(s.number("bias_rotation_deg", 0.0)), s.number("bias_range_scale", 1.0));
        if (s.has("bias_matrix")) {
            const auto m = s.numbers("bias_matrix");
            if (m.size() != 4)
                throw ConfigError(s.name() + ".bias_matrix needs 4 numbers (row-major)");
            d.matrix << m[0], m[1], m[2], m[3];
        }
        if (s.has("bias_translation")) {
            const auto t = s.numbers("bias_translation");
            if (t.size() != 2)
                throw ConfigError(s.name() + ".bias_translation needs 2 numbers");
            d.translation = {t[0], t[1]};
        }
        r.bias = d;
    }
    const auto zones = s.numbers("void_zones_deg");
    if (zones.size() % 2 != 0)
        throw ConfigError(s.name() + ".void_zones_deg needs start/end pairs");
    for (std::size_t i = 0; i < zones.size(); i += 2)
        r.void_zones.push_back({wrap_angle(deg(zones[i])), wrap_angle(deg(zones[i + 1]))});
    return r;
}

} // namespace

CameraModel camera_from_config(const Config &cfg) {
    const ConfigSection s = cfg.section("camera");
    const auto width = s.integer("width_px", 3840);
    if (width <= 0 || width % 2 != 0 || width > (1 << 20))
        throw ConfigError("camera.width_px must be a positive even number");
    try {
        return CameraModel::panorama(static_cast<int>(width), wrap_angle(deg(s.number("yaw_offset_deg", 0.0))),
                                     s.number("height_m", 1.2));
    } catch (const InputError &e) {
        throw ConfigError(e.what());
    }
}

SceneHeader scene_header_from_config(const Config &cfg, std::uint64_t seed) {
    SceneHeader h;
    h.camera = camera_from_config(cfg);
    h.seed = seed;
    const ConfigSection s = cfg.section("scene");
    h.scene.person_count = static_cast<int>(s.integer("person_count", 3));
    h.scene.arena_radius = s.number("arena_radius", 5.0);
    h.scene.min_range = s.number("min_range", 1.0);
    h.scene.min_separation = s.number("min_separation", 0.5);
    const std::string traj = s.string("trajectory", "static");
    if (traj == "static")
        h.scene.trajectory = Trajectory::Static;
    else if (traj == "random_walk")
        h.scene.trajectory = Trajectory::RandomWalk;
    else
        throw ConfigError("scene.trajectory must be \"static\" or \"random_walk\"");
    h.scene.step_std = s.number("step_std", 0.1);
    h.scene.duration_frames = static_cast<int>(s.integer("frames", 10));
    const std::string scen = s.string("scenario", "None");
    if (scen == "random") {
        h.scene.random_scenarios = true;
    } else {
        try {
            h.scene.scenario = scenario_from_name(scen);
        } catch (const Error &e) {
            throw ConfigError(std::string("scene.scenario: ") + e.what());
        }
    }
    h.scene.seed = seed;
    h.detector_noise_px = s.number("detector_noise_px", 0.0);
    h.frame_period_s = s.number("frame_period_s", 0.1);
    if (h.detector_noise_px < 0.0 || !(h.frame_period_s > 0.0))
        throw ConfigError("scene.detector_noise_px must be >= 0 and frame_period_s > 0");

    const auto tables = cfg.array("radar");
    if (tables.empty()) {
        for (int i = 0; i < 3; ++i) {
            RadarConfig r;
            r.radar_id = i;
            r.boresight_azimuth = wrap_angle(deg(120.0 * i));
            h.radars.push_back(r);
        }
    }
    for (std::size_t i = 0; i < tables.size(); ++i)
        h.radars.push_back(radar_from_section(tables[i], static_cast<int>(i)));
    return h;
}

PipelineConfig pipeline_from_config(const Config &cfg, const CameraModel &cam, std::span<const RadarConfig> radars,
                                    std::span<const RadarCalibration> calibrations) {
    const ConfigSection s = cfg.section("pipeline");
    PipelineConfig p;
    p.camera = cam;
    p.c = s.number("c", 10.0);
    p.matching_threshold_px = s.number("threshold_px", 0.0);
    if (s.has("threshold_frac"))
        p.matching_threshold_px = s.number("threshold_frac", 0.02) * cam.width_px;
    const std::string mode = s.string("scale_mode", "range");
    if (mode == "range")
        p.scale_mode = ScaleMode::Range;
    else if (mode == "height")
        p.scale_mode = ScaleMode::Height;
    else if (mode == "fixed")
        p.scale_mode = ScaleMode::Fixed;
    else
        throw ConfigError("pipeline.scale_mode must be range, height or fixed");
    p.world_scale = s.number("world_scale", 0.0);
    const std::string lifter = s.string("lifter", "oracle");
    if (lifter == "oracle")
        p.lifter = LifterKind::Oracle;
    else if (lifter == "external")
        p.lifter = LifterKind::External;
    else
        throw ConfigError("pipeline.lifter must be oracle or external");
    p.lift_file = s.string("lift_file", "");
    p.oracle.noise_std = s.number("noise_std", 0.0);
    p.oracle.occlusion_penalty = s.number("occlusion_penalty", 0.0);

    for (const auto &r : radars) {
        PipelineRadar pr;
        pr.radar_id = r.radar_id;
        const auto it = std::find_if(calibrations.begin(), calibrations.end(),
                                     [&](const RadarCalibration &c) { return c.affine.radar_id == r.radar_id; });
        if (it != calibrations.end()) {
            pr.affine = it->affine;
            pr.image_map = it->image_map;
        } else {
            pr.affine = AffineCalibration::identity(r.radar_id);
            pr.image_map = RadarImageMap::from_camera(cam);
            pr.calibrated = false;
        }
        p.radars.push_back(pr);
    }
    for (const auto &c : calibrations) {
        if (!p.radar(c.affine.radar_id))
            throw ConfigError("calibration for undeclared radar " + std::to_string(c.affine.radar_id));
    }
    p.validate();
    return p;
}

RunOptions run_options_from_config(const Config &cfg) {
    const ConfigSection s = cfg.section("pipeline");
    RunOptions o;
    o.live_sim = s.boolean("live_sim", false);
    const double timeout_ms = s.number("timeout_ms", 50.0);
    if (!(timeout_ms > 0.0))
        throw ConfigError("pipeline.timeout_ms must be positive");
    o.hub.timeout = std::chrono::duration_cast<Nanos>(std::chrono::duration<double, std::milli>(timeout_ms));
    const auto hub_cap = s.integer("hub_queue_capacity", 8);
    const auto frame_cap = s.integer("frame_queue_capacity", 4);
    if (hub_cap < 1 || frame_cap < 1)
        throw ConfigError("queue capacities must be >= 1");
    o.hub.queue_capacity = static_cast<std::size_t>(hub_cap);
    o.frame_queue_capacity = static_cast<std::size_t>(frame_cap);
    const std::string bp = s.string("backpressure", "block");
    if (bp == "block")
        o.backpressure = BackpressurePolicy::Block;
    else if (bp == "drop_oldest")
        o.backpressure = BackpressurePolicy::DropOldest;
    else
        throw ConfigError("pipeline.backpressure must be block or drop_oldest");
    return o;
}

} // namespace omnifuse
