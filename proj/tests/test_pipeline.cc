#include <algorithm>
#include <sstream>

#include <doctest.h>

#include "omnifuse/config.h"
#include "omnifuse/errors.h"
#include "omnifuse/metrics.h"
#include "omnifuse/pipeline.h"
#include "omnifuse/scene_io.h"
#include "support.h"

using namespace omnifuse;
using namespace omnifuse::testing;

namespace {

double worst_joint_error(const GlobalPose3D &pose, const PersonTruth &truth) {
    double worst = 0.0;
    for (std::size_t j = 0; j < kNumJoints; ++j)
        worst = std::max(worst, (pose.keypoints[j] - truth.joints[j]).norm());
    return worst;
}

// Every placed pose in every frame against its truth, in meters.
double worst_scene_error(const PipelineConfig &cfg, const SceneFile &scene, std::size_t *placed = nullptr) {
    auto lifter = make_lifter(cfg, scene);
    double worst = 0.0;
    std::size_t n = 0;
    for (std::size_t f = 0; f < scene.frames.size(); ++f) {
        const Tick t = tick_of(scene.frames[f], f + 1);
        const FrameResult r = run_frame(cfg, *lifter, t.fused, t.camera);
        for (const auto &p : r.poses) {
            const PersonTruth *truth = scene.truth_of(scene.frames[f].frame_id, p.person_id);
            REQUIRE(truth != nullptr);
            worst = std::max(worst, worst_joint_error(p, *truth));
            ++n;
        }
    }
    if (placed)
        *placed = n;
    return worst;
}

} // namespace

TEST_CASE("exact inputs reproduce the truth in range mode") {
    SceneHeader h = basic_header(4, 5, 3);
    h.radars[1].bias = azimuth_rotation(deg(4.0), 1.03);
    const SceneFile scene = simulate_scene(h);
    std::size_t placed = 0;
    CHECK(worst_scene_error(exact_pipeline(h), scene, &placed) < 1e-9);
    CHECK(placed >= 18);
}

TEST_CASE("height scale mode is exact for the canonical skeleton") {
    const SceneHeader h = basic_header(3, 3, 8);
    PipelineConfig cfg = exact_pipeline(h);
    cfg.scale_mode = ScaleMode::Height;
    CHECK(worst_scene_error(cfg, simulate_scene(h)) < 1e-9);
}

TEST_CASE("fixed scale mode keeps the radar position and the floor") {
    const SceneHeader h = basic_header(2, 1, 9);
    const SceneFile scene = simulate_scene(h);
    PipelineConfig cfg = exact_pipeline(h);
    cfg.scale_mode = ScaleMode::Fixed;
    cfg.world_scale = 0.1;
    auto lifter = make_lifter(cfg, scene);
    const Tick t = tick_of(scene.frames[0], 1);
    const FrameResult r = run_frame(cfg, *lifter, t.fused, t.camera);
    REQUIRE_FALSE(r.poses.empty());
    for (std::size_t k = 0; k < r.poses.size(); ++k) {
        const auto &p = r.poses[k];
        const Eigen::Vector3d &pelvis = p.keypoints[idx(Joint::Pelvis)];
        const Eigen::Vector2d det = r.diagnostics.detections[r.diagnostics.assignment.pairs[k].detection_index].world_xz;
        CHECK((Eigen::Vector2d(pelvis.x(), pelvis.z()) - det).norm() < 1e-9);
        CHECK(std::min(p.keypoints[idx(Joint::LAnkle)].y(), p.keypoints[idx(Joint::RAnkle)].y()) == doctest::Approx(0.0));
    }
    cfg.world_scale = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("run_frame rejects mismatched ticks and unknown radars") {
    const SceneHeader h = basic_header(1, 1, 1);
    const SceneFile scene = simulate_scene(h);
    const PipelineConfig cfg = exact_pipeline(h);
    auto lifter = make_lifter(cfg, scene);
    Tick t = tick_of(scene.frames[0], 5);
    t.camera.tick = 6;
    CHECK_THROWS_AS(run_frame(cfg, *lifter, t.fused, t.camera), SyncError);
    t.camera.tick = 5;
    t.fused.radar_snapshots[0].radar_id = 42;
    CHECK_THROWS_AS(run_frame(cfg, *lifter, t.fused, t.camera), ConfigError);
}

TEST_CASE("partial frames place what the present radars support") {
    SceneHeader h = basic_header(1, 1, 2);
    h.scene.person_count = 3;
    const SceneFile scene = simulate_scene(h);
    const PipelineConfig cfg = exact_pipeline(h);
    auto lifter = make_lifter(cfg, scene);
    Tick t = tick_of(scene.frames[0], 1);
    const std::size_t full = run_frame(cfg, *lifter, t.fused, t.camera).poses.size();

    // Silence a radar that has detections.
    int silent = -1;
    for (const auto &rf : scene.frames[0].radars) {
        if (!rf.detections.empty())
            silent = rf.radar_id;
    }
    REQUIRE(silent >= 0);
    for (auto &s : t.fused.radar_snapshots) {
        if (s.radar_id == silent) {
            s.present = false;
            s.detections.clear();
        }
    }
    t.fused.status = AssemblyStatus::Partial;
    t.fused.missing_radars = {silent};
    const FrameResult r = run_frame(cfg, *lifter, t.fused, t.camera);
    CHECK(r.diagnostics.status == AssemblyStatus::Partial);
    CHECK(r.diagnostics.missing_radars == std::vector<int>{silent});
    CHECK(r.poses.size() < full);
    CHECK(r.poses.size() + r.diagnostics.assignment.unmatched_poses.size() == t.camera.poses.size());
    for (const auto &d : r.diagnostics.detections)
        CHECK(d.radar_id != silent);
}

TEST_CASE("one failing person does not abort the frame") {
    const SceneHeader h = basic_header(3, 1, 4);
    const SceneFile scene = simulate_scene(h);
    const PipelineConfig cfg = exact_pipeline(h);
    auto lifter = make_lifter(cfg, scene);
    Tick t = tick_of(scene.frames[0], 1);
    const std::size_t full = run_frame(cfg, *lifter, t.fused, t.camera).poses.size();
    REQUIRE(full == 3);

    t.camera.poses[0].person_hint = 99; // the oracle has no truth for this person
    for (auto &k : t.camera.poses[1].keypoints)
        k.confidence = 0.0; // nothing visible
    const FrameResult r = run_frame(cfg, *lifter, t.fused, t.camera);
    CHECK(r.poses.size() == 1);
    REQUIRE(r.diagnostics.failures.size() == 2);
    std::vector<std::size_t> failed;
    for (const auto &f : r.diagnostics.failures) {
        failed.push_back(f.pose_index);
        CHECK_FALSE(f.message.empty());
    }
    std::sort(failed.begin(), failed.end());
    CHECK(failed == std::vector<std::size_t>{0, 1});
    CHECK(r.diagnostics.placed_pose_indices == std::vector<std::size_t>{2});
}

TEST_CASE("uncalibrated radars are flagged") {
    const Config cfg = [] {
        std::istringstream in("[pipeline]\nscale_mode = \"height\"\n");
        return Config::parse(in);
    }();
    const SceneHeader h = basic_header(1, 1, 1);
    const PipelineConfig p = pipeline_from_config(cfg, h.camera, h.radars, {});
    REQUIRE(p.radars.size() == 3);
    for (const auto &r : p.radars)
        CHECK_FALSE(r.calibrated);
    CHECK(p.scale_mode == ScaleMode::Height);
    CHECK(p.threshold_px() == doctest::Approx(0.02 * 3840));

    const SceneFile scene = simulate_scene(h);
    auto lifter = make_lifter(p, scene);
    const Tick t = tick_of(scene.frames[0], 1);
    CHECK_FALSE(run_frame(p, *lifter, t.fused, t.camera).diagnostics.uncalibrated_radars.empty());
}

TEST_CASE("live and file replay produce identical poses") {
    SceneHeader h = basic_header(3, 8, 12);
    h.radars = ring_of_radars(0.02, 2.0);
    h.detector_noise_px = 1.0;
    const SceneFile scene = simulate_scene(h);
    PipelineConfig cfg = exact_pipeline(h);
    cfg.oracle = {0.05, 0.1, 3};
    auto run = [&](bool live) {
        auto lifter = make_lifter(cfg, scene);
        RunOptions opts;
        opts.live_sim = live;
        opts.hub.timeout = std::chrono::seconds(5);
        std::ostringstream out;
        const RunReport r = run_scene(cfg, *lifter, scene, &out, opts);
        CHECK(r.frames_processed == 8);
        CHECK(r.partial_frames == 0);
        return out.str();
    };
    const std::string replay = run(false);
    CHECK_FALSE(replay.empty());
    CHECK(run(true) == replay);
    CHECK(run(false) == replay);
}

TEST_CASE("run_scene reports and evaluates") {
    const SceneHeader h = basic_header(3, 4, 6);
    const SceneFile scene = simulate_scene(h);
    const PipelineConfig cfg = exact_pipeline(h);
    auto lifter = make_lifter(cfg, scene);
    std::stringstream out;
    const RunReport r = run_scene(cfg, *lifter, scene, &out);
    CHECK(r.poses_placed == 12);
    CHECK(r.matching_accuracy_pct == 100.0);
    CHECK(r.fusion_latency.count == 4);
    const auto records = read_pose_records(out);
    REQUIRE(records.size() == 12);

    Evaluation ev = evaluate_poses(scene, records);
    CHECK(ev.poses == 12);
    CHECK(ev.unmatched_truth == 0);
    CHECK(ev.overall.mpjpe_mm < 1e-6);
    CHECK(localization_mae(ev.localization, Axis::X) < 1e-6);

    std::vector<PoseRecord> extra = records;
    extra.push_back({0, 77, 0, records[0].joints});
    ev = evaluate_poses(scene, extra);
    CHECK(ev.poses == 13);
    CHECK(ev.overall.count == 12);
    CHECK(ev.unmatched_truth == 1);

    std::ostringstream report, evaluation;
    write_run_report(report, r);
    write_evaluation(evaluation, ev);
    CHECK(report.str().find("schema_version") != std::string::npos);
    CHECK(evaluation.str().find("schema_version") != std::string::npos);
}

TEST_CASE("latency percentiles use the nearest rank") {
    std::vector<double> v;
    for (int i = 100; i >= 1; --i)
        v.push_back(i);
    const LatencyStats s = latency_stats(v);
    CHECK(s.count == 100);
    CHECK(s.p50_us == 50.0);
    CHECK(s.p95_us == 95.0);
    CHECK(s.mean_us == doctest::Approx(50.5));
    CHECK(latency_stats({}).count == 0);
    CHECK(latency_stats({7.0}).p95_us == 7.0);
}

TEST_CASE("external lifter configuration") {
    PipelineConfig cfg = exact_pipeline(basic_header(1, 1, 1));
    cfg.lifter = LifterKind::External;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.lift_file = "/nonexistent/lifts.jsonl";
    CHECK_THROWS_AS(make_lifter(cfg, SceneFile{}), InputError);
}
