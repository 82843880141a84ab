#include "omnifuse/simulator.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <string>

#include "omnifuse/errors.h"
#include "omnifuse/matching.h"
#include "omnifuse/random.h"

namespace omnifuse {

namespace {

// Stream tags keep the generators of different simulator parts independent.
enum StreamTag : std::uint64_t {
    kSceneStream = 1,
    kRadarStream = 2,
    kKeypointStream = 3,
    kGridStream = 4,
    kImageSampleStream = 5,
};

} // namespace

Skeleton3D place_skeleton(const Eigen::Vector2d &ground) {
    const double phi = std::atan2(ground.x(), ground.y());
    const Eigen::Vector3d left(std::cos(phi), 0.0, -std::sin(phi));
    const Eigen::Vector3d up(0.0, 1.0, 0.0);
    const Eigen::Vector3d forward(-std::sin(phi), 0.0, -std::cos(phi));
    const Eigen::Vector3d base(ground.x(), 0.0, ground.y());
    Skeleton3D out;
    const Skeleton3D &body = canonical_skeleton();
    for (std::size_t j = 0; j < kNumJoints; ++j)
        out[j] = base + body[j].x() * left + body[j].y() * up + body[j].z() * forward;
    return out;
}

SceneTruth gen_scene(const SceneConfig &cfg) {
    if (cfg.person_count < 1 || cfg.person_count > 10)
        throw ConfigError("person_count must be in 1..10, got " + std::to_string(cfg.person_count));
    if (!(cfg.arena_radius > cfg.min_range) || cfg.min_range < 0.0)
        throw ConfigError("arena_radius must exceed min_range");
    if (cfg.duration_frames < 1)
        throw ConfigError("duration_frames must be >= 1");
    if (cfg.step_std < 0.0)
        throw ConfigError("step_std must be >= 0");

    auto rng = make_rng(cfg.seed, {kSceneStream});
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    const double r0 = cfg.min_range, r1 = cfg.arena_radius;
    std::vector<Eigen::Vector2d> positions;
    int attempts = 0;
    while (static_cast<int>(positions.size()) < cfg.person_count) {
        if (++attempts > 100000)
            throw ConfigError("cannot place " + std::to_string(cfg.person_count) + " people " +
                              std::to_string(cfg.min_separation) + " m apart in the arena");
        const double r = std::sqrt(unit(rng) * (r1 * r1 - r0 * r0) + r0 * r0);
        const double theta = unit(rng) * kTwoPi;
        const Eigen::Vector2d p(r * std::sin(theta), r * std::cos(theta));
        const bool clear = std::all_of(positions.begin(), positions.end(),
                                       [&](const Eigen::Vector2d &q) { return (p - q).norm() >= cfg.min_separation; });
        if (clear)
            positions.push_back(p);
    }

    std::vector<OcclusionScenario> scenarios(positions.size(), cfg.scenario);
    if (cfg.random_scenarios) {
        std::uniform_int_distribution<std::size_t> pick(0, kAllScenarios.size() - 1);
        for (auto &s : scenarios)
            s = kAllScenarios[pick(rng)];
    }

    SceneTruth truth;
    truth.config = cfg;
    truth.frames.resize(static_cast<std::size_t>(cfg.duration_frames));
    auto inside = [&](const Eigen::Vector2d &p) { return p.norm() <= r1 && p.norm() >= r0; };
    for (int f = 0; f < cfg.duration_frames; ++f) {
        if (f > 0 && cfg.trajectory == Trajectory::RandomWalk) {
            for (auto &p : positions) {
                const Eigen::Vector2d step(cfg.step_std * normal(rng), cfg.step_std * normal(rng));
                if (inside(p + step))
                    p += step;
                else if (inside(p - step))
                    p -= step;
            }
        }
        auto &frame = truth.frames[static_cast<std::size_t>(f)];
        for (std::size_t i = 0; i < positions.size(); ++i) {
            PersonTruth person;
            person.person_id = static_cast<std::int64_t>(i);
            person.ground = positions[i];
            person.joints = place_skeleton(positions[i]);
            person.scenario = scenarios[i];
            frame.people.push_back(person);
        }
    }
    return truth;
}

bool AzimuthInterval::contains(double azimuth) const {
    double span = std::fmod(end - start, kTwoPi);
    if (span < 0.0)
        span += kTwoPi;
    double off = std::fmod(azimuth - start, kTwoPi);
    if (off < 0.0)
        off += kTwoPi;
    return off <= span;
}

AffineDistortion azimuth_rotation(double rad, double range_scale) {
    AffineDistortion d;
    d.matrix << std::cos(rad), std::sin(rad), -std::sin(rad), std::cos(rad);
    d.matrix *= range_scale;
    return d;
}

namespace {

double off_boresight(const RadarConfig &cfg, const Eigen::Vector2d &xz) {
    return std::abs(wrap_angle(std::atan2(xz.x(), xz.y()) - cfg.boresight_azimuth));
}

} // namespace

bool radar_covers(const RadarConfig &cfg, const Eigen::Vector2d &xz) {
    if (xz.squaredNorm() == 0.0)
        return false;
    if (off_boresight(cfg, xz) > cfg.fov / 2.0)
        return false;
    const double az = std::atan2(xz.x(), xz.y());
    return std::none_of(cfg.void_zones.begin(), cfg.void_zones.end(),
                        [&](const AzimuthInterval &z) { return z.contains(az); });
}

double radar_noise_std(const RadarConfig &cfg, const Eigen::Vector2d &xz) {
    const double frac = off_boresight(cfg, xz) / (cfg.fov / 2.0);
    return cfg.noise_base_std * (1.0 + (cfg.noise_edge_factor - 1.0) * frac);
}

Eigen::Vector2d radar_distort(const RadarConfig &cfg, const Eigen::Vector2d &xz) {
    if (!cfg.bias)
        return xz;
    return cfg.bias->matrix * xz + cfg.bias->translation;
}

RadarSimResult simulate_radar(const SceneTruth &truth, const RadarConfig &cfg, std::size_t frame,
                              std::uint64_t seed) {
    if (frame >= truth.frames.size())
        throw InputError("frame " + std::to_string(frame) + " out of range");
    auto rng = make_rng(seed, {kRadarStream, static_cast<std::uint64_t>(cfg.radar_id), frame});
    std::normal_distribution<double> normal(0.0, 1.0);

    RadarSimResult out;
    for (const auto &person : truth.frames[frame].people) {
        if (!radar_covers(cfg, person.ground))
            continue;
        const double sigma = radar_noise_std(cfg, person.ground);
        const double nx = normal(rng), nz = normal(rng);
        RadarDetection det;
        det.xz = radar_distort(cfg, person.ground) + Eigen::Vector2d(sigma * nx, sigma * nz);
        out.detections.push_back(det);
        out.truth_ids.push_back(person.person_id);
    }
    std::vector<std::size_t> order(out.detections.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    RadarSimResult shuffled;
    for (std::size_t i : order) {
        shuffled.detections.push_back(out.detections[i]);
        shuffled.truth_ids.push_back(out.truth_ids[i]);
    }
    return shuffled;
}

std::vector<Pose2D> simulate_keypoints(const SceneTruth &truth, const CameraModel &cam, std::size_t frame,
                                       double detector_noise_px, std::optional<OcclusionScenario> scenario,
                                       std::uint64_t seed) {
    if (frame >= truth.frames.size())
        throw InputError("frame " + std::to_string(frame) + " out of range");
    auto rng = make_rng(seed, {kKeypointStream, frame});
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> confidence(0.5, 1.0);

    std::vector<Pose2D> poses;
    for (const auto &person : truth.frames[frame].people) {
        const JointMask mask = occlusion_mask(scenario.value_or(person.scenario));
        Pose2D pose;
        pose.person_hint = person.person_id;
        bool ok = true;
        for (std::size_t j = 0; j < kNumJoints && ok; ++j) {
            PixelPoint px;
            try {
                px = equirect_project(person.joints[j], cam);
            } catch (const DomainError &) {
                ok = false;
                break;
            }
            double u = px.u + detector_noise_px * normal(rng);
            double v = px.v + detector_noise_px * normal(rng);
            u = std::fmod(u, static_cast<double>(cam.width_px));
            if (u < 0.0)
                u += cam.width_px;
            if (u >= cam.width_px)
                u = 0.0;
            v = std::clamp(v, 0.0, static_cast<double>(cam.height_px));
            const double conf = confidence(rng);
            pose.keypoints[j] = {u, v, mask.test(j) ? 0.0 : conf};
        }
        if (!ok) {
            std::cerr << "warning: person " << person.person_id << " coincides with the camera in frame " << frame
                      << "; skipped\n";
            continue;
        }
        poses.push_back(pose);
    }
    std::shuffle(poses.begin(), poses.end(), rng);
    return poses;
}

std::vector<Eigen::Vector2d> calibration_grid(const RadarConfig &cfg, double spacing_m, double min_range,
                                              double max_range) {
    if (!(spacing_m > 0.0))
        throw InputError("grid spacing must be positive");
    std::vector<Eigen::Vector2d> pts;
    const int n = static_cast<int>(std::ceil(max_range / spacing_m));
    for (int ix = -n; ix <= n; ++ix) {
        for (int iz = -n; iz <= n; ++iz) {
            const Eigen::Vector2d p(ix * spacing_m, iz * spacing_m);
            const double r = p.norm();
            if (r >= min_range && r <= max_range && radar_covers(cfg, p))
                pts.push_back(p);
        }
    }
    return pts;
}

std::vector<GridRecording> simulate_grid_session(const RadarConfig &cfg, std::span<const Eigen::Vector2d> points,
                                                 int readings_per_point, double rate_hz, std::uint64_t seed) {
    if (readings_per_point < 1)
        throw InputError("need at least one reading per grid point");
    std::vector<GridRecording> recs;
    std::normal_distribution<double> normal(0.0, 1.0);
    double t = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto rng = make_rng(seed, {kGridStream, static_cast<std::uint64_t>(cfg.radar_id), i});
        GridRecording rec;
        rec.radar_id = cfg.radar_id;
        rec.true_position = points[i];
        const double sigma = radar_noise_std(cfg, points[i]);
        const Eigen::Vector2d raw = radar_distort(cfg, points[i]);
        for (int k = 0; k < readings_per_point; ++k) {
            const double nx = normal(rng), nz = normal(rng);
            rec.readings.push_back(raw + Eigen::Vector2d(sigma * nx, sigma * nz));
            rec.timestamps.push_back(t);
            t += 1.0 / rate_hz;
        }
        recs.push_back(std::move(rec));
    }
    return recs;
}

std::vector<ImageSample> simulate_image_samples(const RadarConfig &cfg, const AffineCalibration &cal,
                                                const CameraModel &cam, std::span<const Eigen::Vector2d> points,
                                                int readings_per_point, double detector_noise_px,
                                                std::uint64_t seed) {
    const auto recs = simulate_grid_session(cfg, points, readings_per_point, 10.0, seed);
    std::vector<ImageSample> out;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        auto rng = make_rng(seed, {kImageSampleStream, static_cast<std::uint64_t>(cfg.radar_id), i});
        const Skeleton3D body = place_skeleton(points[i]);
        Pose2D pose;
        for (std::size_t j = 0; j < kNumJoints; ++j) {
            const PixelPoint px = equirect_project(body[j], cam);
            double u = std::fmod(px.u + detector_noise_px * normal(rng) + cam.width_px, cam.width_px);
            pose.keypoints[j] = {u, px.v + detector_noise_px * normal(rng), 1.0};
        }
        ImageSample s;
        s.world_xz = apply_affine(cal, average_grid_readings(recs[i]).raw);
        s.observed_u = mean_image_x(pose, cam.width_px);
        out.push_back(s);
    }
    return out;
}

} // namespace omnifuse
