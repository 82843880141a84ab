#include "omnifuse/matching.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "omnifuse/errors.h"

namespace omnifuse {

double mean_image_x(const Pose2D &pose, std::optional<int> width_px) {
    double sum = 0.0;
    std::size_t n = 0;
    std::optional<double> ref;
    const double width = width_px ? static_cast<double>(*width_px) : 0.0;
    for (const auto &kp : pose.keypoints) {
        if (!(kp.confidence > 0.0))
            continue;
        double u = kp.u;
        if (width_px) {
            if (!ref)
                ref = u;
            if (u - *ref > width / 2.0)
                u -= width;
            else if (*ref - u > width / 2.0)
                u += width;
        }
        sum += u;
        ++n;
    }
    if (n == 0)
        throw InputError("mean_image_x: every keypoint is occluded");
    double mean = sum / static_cast<double>(n);
    if (width_px) {
        if (mean < 0.0)
            mean += width;
        else if (mean >= width)
            mean -= width;
    }
    return mean;
}

double circular_distance(double a, double b, double width) {
    const double d = std::fmod(std::abs(a - b), width);
    return std::min(d, width - d);
}

namespace {

Assignment greedy_claim(std::vector<MatchPair> candidates, std::span<const CameraCandidate> cands,
                        std::span<const RadarCandidate> radars) {
    std::sort(candidates.begin(), candidates.end(), [](const MatchPair &a, const MatchPair &b) {
        return std::tie(a.distance, a.detection_index, a.pose_index) <
               std::tie(b.distance, b.detection_index, b.pose_index);
    });

    std::map<std::size_t, bool> pose_taken, det_taken;
    Assignment out;
    for (const auto &c : candidates) {
        if (pose_taken[c.pose_index] || det_taken[c.detection_index])
            continue;
        pose_taken[c.pose_index] = true;
        det_taken[c.detection_index] = true;
        out.pairs.push_back(c);
    }
    std::sort(out.pairs.begin(), out.pairs.end(),
              [](const MatchPair &a, const MatchPair &b) { return a.pose_index < b.pose_index; });
    for (const auto &c : cands) {
        if (!pose_taken[c.pose_index])
            out.unmatched_poses.push_back(c.pose_index);
    }
    for (const auto &r : radars) {
        if (!det_taken[r.detection_index])
            out.unmatched_detections.push_back(r.detection_index);
    }
    std::sort(out.unmatched_poses.begin(), out.unmatched_poses.end());
    std::sort(out.unmatched_detections.begin(), out.unmatched_detections.end());
    return out;
}

} // namespace

Assignment match_people(std::span<const CameraCandidate> cands, std::span<const RadarCandidate> radars,
                        double threshold_px, double width_px) {
    if (!(threshold_px > 0.0))
        throw InputError("matching threshold must be positive");

    std::multimap<double, const RadarCandidate *> tree;
    for (const auto &r : radars)
        tree.emplace(r.projected_x, &r);

    std::vector<const CameraCandidate *> order;
    for (const auto &c : cands)
        order.push_back(&c);
    std::sort(order.begin(), order.end(), [](const CameraCandidate *a, const CameraCandidate *b) {
        return std::tie(a->mean_x, a->pose_index) < std::tie(b->mean_x, b->pose_index);
    });

    std::vector<MatchPair> candidates;
    auto collect = [&](const CameraCandidate &c, double lo, double hi) {
        for (auto it = tree.lower_bound(lo); it != tree.end() && it->first <= hi; ++it) {
            const double d = circular_distance(c.mean_x, it->first, width_px);
            if (d <= threshold_px)
                candidates.push_back({c.pose_index, it->second->detection_index, d});
        }
    };
    for (const CameraCandidate *c : order) {
        if (2.0 * threshold_px >= width_px) {
            collect(*c, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
            continue;
        }
        const double lo = c->mean_x - threshold_px, hi = c->mean_x + threshold_px;
        collect(*c, std::max(lo, 0.0), std::min(hi, width_px));
        if (lo < 0.0)
            collect(*c, lo + width_px, width_px);
        if (hi > width_px)
            collect(*c, 0.0, hi - width_px);
    }
    // A pair found by two overlapping range queries must count once.
    std::sort(candidates.begin(), candidates.end(), [](const MatchPair &a, const MatchPair &b) {
        return std::tie(a.pose_index, a.detection_index) < std::tie(b.pose_index, b.detection_index);
    });
    candidates.erase(std::unique(candidates.begin(), candidates.end(),
                                 [](const MatchPair &a, const MatchPair &b) {
                                     return a.pose_index == b.pose_index && a.detection_index == b.detection_index;
                                 }),
                     candidates.end());
    return greedy_claim(std::move(candidates), cands, radars);
}

Assignment match_people_angle_baseline(std::span<const CameraCandidate> cands, std::span<const RadarCandidate> radars,
                                       const CameraModel &cam, double threshold_rad) {
    if (!(threshold_rad > 0.0))
        throw InputError("matching threshold must be positive");
    std::vector<MatchPair> candidates;
    for (const auto &c : cands) {
        const double cam_az = equirect_unproject(c.mean_x, cam.height_px / 2.0, cam).azimuth;
        for (const auto &r : radars) {
            if (r.world_xz.squaredNorm() == 0.0)
                continue;
            const double radar_az = std::atan2(r.world_xz.x(), r.world_xz.y());
            const double d = std::abs(wrap_angle(cam_az - radar_az));
            if (d <= threshold_rad)
                candidates.push_back({c.pose_index, r.detection_index, d});
        }
    }
    return greedy_claim(std::move(candidates), cands, radars);
}

double matching_error_pct(double radar_value, double camera_value) {
    if (camera_value == 0.0)
        throw DomainError("matching error undefined for a zero camera value");
    return 100.0 * std::abs(radar_value - camera_value) / camera_value;
}

} // namespace omnifuse
