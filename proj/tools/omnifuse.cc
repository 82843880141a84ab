#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "omnifuse/calibration.h"
#include "omnifuse/config.h"
#include "omnifuse/errors.h"
#include "omnifuse/metrics.h"
#include "omnifuse/pipeline.h"
#include "omnifuse/scene_io.h"
#include "omnifuse/simulator.h"

namespace {

using namespace omnifuse;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::ifstream open_in(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const std::string &path) {
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot open '" + path + "' for writing");
    return out;
}

Config load_config(const std::string &path) {
    if (path.empty()) {
        std::istringstream empty;
        return Config::parse(empty, "<defaults>");
    }
    // A config that cannot be read or parsed is a usage error.
    try {
        return Config::load(path);
    } catch (const Error &e) {
        throw ConfigError(e.what());
    }
}

std::uint64_t resolve_seed(const Config &cfg, const std::optional<std::uint64_t> &flag) {
    if (flag)
        return *flag;
    const auto s = cfg.section("scene").integer("seed", 0);
    if (s < 0)
        throw ConfigError("scene.seed must be >= 0");
    return static_cast<std::uint64_t>(s);
}

SceneFile load_scene(const std::string &path) {
    auto in = open_in(path);
    return read_scene_jsonl(in, path);
}

std::vector<RadarCalibration> load_calibration(const std::string &path) {
    if (path.empty())
        return {};
    auto in = open_in(path);
    return read_calibration_jsonl(in, path);
}

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string scene;
    std::string calibration;
    std::string grid;
    std::string image_samples;
    std::string grid_out;
    std::string image_samples_out;
    std::string poses;
    std::string report;
    bool live_sim = false;
    std::optional<int> radar;
};

int cmd_simulate(const Options &o) {
    const Config cfg = load_config(o.config);
    const std::uint64_t seed = resolve_seed(cfg, o.seed);
    const SceneHeader header = scene_header_from_config(cfg, seed);
    const SceneFile scene = simulate_scene(header);
    auto out = open_out(o.out);
    write_scene_jsonl(out, scene);

    const ConfigSection s = cfg.section("simulate");
    const std::string grid_out = o.grid_out.empty() ? s.string("grid_csv", "") : o.grid_out;
    const std::string samples_out = o.image_samples_out.empty() ? s.string("image_samples_csv", "") : o.image_samples_out;
    if (grid_out.empty() && samples_out.empty()) {
        std::cout << "wrote " << scene.frames.size() << " frames to " << o.out << '\n';
        return 0;
    }
    const double spacing = s.number("grid_spacing_m", 0.5);
    const double min_range = s.number("grid_min_range_m", 1.0);
    const double max_range = s.number("grid_max_range_m", 4.0);
    const auto readings = static_cast<int>(s.integer("readings_per_point", 50));
    const double rate = s.number("rate_hz", 10.0);
    if (!(rate > 0.0))
        throw ConfigError("simulate.rate_hz must be positive");

    std::vector<GridRecording> grid;
    std::vector<RadarImageSample> samples;
    for (const auto &radar : header.radars) {
        const auto pts = calibration_grid(radar, spacing, min_range, max_range);
        auto recs = simulate_grid_session(radar, pts, readings, rate, seed);
        grid.insert(grid.end(), recs.begin(), recs.end());
        const auto img = simulate_image_samples(radar, AffineCalibration::identity(radar.radar_id), header.camera, pts,
                                                readings, header.detector_noise_px, seed);
        for (const auto &smp : img)
            samples.push_back({radar.radar_id, smp});
    }
    if (!grid_out.empty()) {
        auto g = open_out(grid_out);
        write_grid_csv(g, grid);
    }
    if (!samples_out.empty()) {
        auto f = open_out(samples_out);
        write_image_samples_csv(f, samples);
    }
    std::cout << "wrote " << scene.frames.size() << " frames to " << o.out << " and " << grid.size()
              << " grid dwells\n";
    return 0;
}

int cmd_calibrate(const Options &o) {
    const Config cfg = load_config(o.config);
    const CameraModel cam = camera_from_config(cfg);
    const ConfigSection s = cfg.section("calibrate");
    // Falls back to the files the simulate command was told to write.
    const ConfigSection sim = cfg.section("simulate");
    const std::string grid_path = o.grid.empty() ? s.string("grid", sim.string("grid_csv", "")) : o.grid;
    const std::string samples_path =
        o.image_samples.empty() ? s.string("image_samples", sim.string("image_samples_csv", "")) : o.image_samples;
    if (grid_path.empty())
        throw ConfigError("calibrate needs a grid CSV (--grid or calibrate.grid)");

    auto gin = open_in(grid_path);
    const auto recs = read_grid_csv(gin, grid_path);
    const double spacing = s.number("grid_spacing_m", 0.5);
    if (!on_grid(recs, spacing))
        std::cerr << "warning: grid positions are not on a " << spacing << " m lattice\n";

    std::vector<RadarImageSample> image_samples;
    if (!samples_path.empty()) {
        auto in = open_in(samples_path);
        image_samples = read_image_samples_csv(in, samples_path);
    }

    std::map<int, std::vector<CalibrationSample>> by_radar;
    for (const auto &r : recs)
        by_radar[r.radar_id].push_back(average_grid_readings(r));

    std::vector<RadarCalibration> cals;
    for (const auto &[id, samples] : by_radar) {
        RadarCalibration rc;
        rc.affine = fit_affine_lm(samples, {}, id);
        std::vector<LocalizationSample> pre, post;
        for (const auto &smp : samples) {
            pre.push_back({smp.raw, smp.truth});
            post.push_back({apply_affine(rc.affine, smp.raw), smp.truth});
        }
        rc.pre_mae_x_cm = localization_mae(pre, Axis::X);
        rc.pre_mae_z_cm = localization_mae(pre, Axis::Z);
        rc.post_mae_x_cm = localization_mae(post, Axis::X);
        rc.post_mae_z_cm = localization_mae(post, Axis::Z);

        std::vector<ImageSample> img;
        for (const auto &smp : image_samples) {
            if (smp.radar_id == id)
                img.push_back({apply_affine(rc.affine, smp.sample.world_xz), smp.sample.observed_u});
        }
        rc.image_map = img.empty() ? RadarImageMap::from_camera(cam) : fit_radar_to_image(img, cam);
        std::cout << "radar " << id << ": rms " << rc.affine.fit_rms_m << " m, MAE x " << rc.pre_mae_x_cm << " -> "
                  << rc.post_mae_x_cm << " cm, z " << rc.pre_mae_z_cm << " -> " << rc.post_mae_z_cm << " cm"
                  << (img.empty() ? ", nominal image map" : "") << '\n';
        cals.push_back(rc);
    }
    auto out = open_out(o.out);
    write_calibration_jsonl(out, cals);
    return 0;
}

int cmd_run(const Options &o) {
    const Config cfg = load_config(o.config);
    const SceneFile scene = load_scene(o.scene);
    const std::string cal_path = o.calibration.empty() ? cfg.section("pipeline").string("calibration", "") : o.calibration;
    const auto cals = load_calibration(cal_path);
    PipelineConfig pc = pipeline_from_config(cfg, scene.header.camera, scene.header.radars, cals);
    pc.oracle.seed = o.seed ? *o.seed : scene.header.seed;
    RunOptions opts = run_options_from_config(cfg);
    opts.live_sim = opts.live_sim || o.live_sim;

    const auto lifter = make_lifter(pc, scene);
    auto out = open_out(o.out);
    const RunReport report = run_scene(pc, *lifter, scene, &out, opts);
    if (!o.report.empty()) {
        auto r = open_out(o.report);
        write_run_report(r, report);
    }
    std::cout << "frames " << report.frames_processed << ", placed " << report.poses_placed << ", matching "
              << report.matching_accuracy_pct << "%, fusion p50 " << report.fusion_latency.p50_us << " us\n";
    if (!report.uncalibrated_radars.empty())
        std::cerr << "warning: " << report.uncalibrated_radars.size() << " radar(s) ran without calibration\n";
    return 0;
}

int cmd_evaluate(const Options &o) {
    const SceneFile scene = load_scene(o.scene);
    auto in = open_in(o.poses);
    const auto poses = read_pose_records(in, o.poses);
    const Evaluation ev = evaluate_poses(scene, poses);
    auto out = open_out(o.out);
    write_evaluation(out, ev);
    std::cout << "poses " << ev.poses << ", MPJPE " << ev.overall.mpjpe_mm << " mm\n";
    return 0;
}

int cmd_heatmap(const Options &o) {
    const Config cfg = load_config(o.config);
    const SceneFile scene = load_scene(o.scene);
    const auto cals = load_calibration(o.calibration);
    const ConfigSection s = cfg.section("heatmap");
    const double r = scene.header.scene.arena_radius;
    HeatmapBounds bounds{s.number("min_x", -r), s.number("max_x", r), s.number("min_z", -r), s.number("max_z", r)};
    const double cell = s.number("cell_size_m", 0.5);

    std::vector<LocalizationSample> samples;
    for (const auto &frame : scene.frames) {
        for (const auto &rf : frame.radars) {
            if (o.radar && rf.radar_id != *o.radar)
                continue;
            AffineCalibration cal = AffineCalibration::identity(rf.radar_id);
            for (const auto &c : cals) {
                if (c.affine.radar_id == rf.radar_id)
                    cal = c.affine;
            }
            for (std::size_t k = 0; k < rf.detections.size(); ++k) {
                for (const auto &p : frame.truth) {
                    if (p.person_id == rf.truth_ids[k])
                        samples.push_back({apply_affine(cal, rf.detections[k].xz), p.ground});
                }
            }
        }
    }
    const HeatmapGrid grid = build_heatmap(samples, cell, bounds);
    auto out = open_out(o.out);
    write_heatmap_csv(out, grid);
    std::cout << "binned " << samples.size() << " detections into " << grid.nx << "x" << grid.nz << " cells\n";
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Omnidirectional camera and mmWave radar pose fusion toolkit"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App *sub, bool out_required) {
        sub->add_option("--config", o.config, "TOML-style configuration file")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Seed for every random stream");
        auto *out = sub->add_option("--out", o.out, "Output file");
        if (out_required)
            out->required();
    };

    auto *sim = app.add_subcommand("simulate", "Generate a synthetic scene dump (JSON Lines)");
    common(sim, true);
    sim->add_option("--grid-out", o.grid_out, "Also write a calibration grid session CSV");
    sim->add_option("--image-samples-out", o.image_samples_out, "Also write radar/image training samples CSV");

    auto *cal = app.add_subcommand("calibrate", "Fit per-radar affine corrections and image maps");
    common(cal, true);
    cal->add_option("--grid", o.grid, "Grid recording CSV")->check(CLI::ExistingFile);
    cal->add_option("--image-samples", o.image_samples, "Radar/image samples CSV")->check(CLI::ExistingFile);

    auto *run = app.add_subcommand("run", "Replay a scene through the fusion pipeline");
    common(run, true);
    run->add_option("--scene", o.scene, "Scene JSON Lines")->required()->check(CLI::ExistingFile);
    run->add_option("--calibration", o.calibration, "Calibration JSON Lines")->check(CLI::ExistingFile);
    run->add_option("--report", o.report, "Run report JSON");
    run->add_flag("--live-sim", o.live_sim, "Feed radars through threaded sources and the sync hub");

    auto *eval = app.add_subcommand("evaluate", "Score placed poses against scene truth");
    common(eval, true);
    eval->add_option("--scene", o.scene, "Scene JSON Lines")->required()->check(CLI::ExistingFile);
    eval->add_option("--poses", o.poses, "Pose JSON Lines from run")->required()->check(CLI::ExistingFile);

    auto *heat = app.add_subcommand("heatmap", "Per-cell radar localization error CSV");
    common(heat, true);
    heat->add_option("--scene", o.scene, "Scene JSON Lines")->required()->check(CLI::ExistingFile);
    heat->add_option("--calibration", o.calibration, "Calibration JSON Lines")->check(CLI::ExistingFile);
    heat->add_option("--radar", o.radar, "Only this radar's detections");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(o);
        if (cal->parsed())
            return cmd_calibrate(o);
        if (run->parsed())
            return cmd_run(o);
        if (eval->parsed())
            return cmd_evaluate(o);
        return cmd_heatmap(o);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
