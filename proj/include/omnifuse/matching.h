#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "omnifuse/geometry.h"

namespace omnifuse {

struct CameraCandidate {
    std::size_t pose_index = 0;
    double mean_x = 0.0; // pixels
};

struct RadarCandidate {
    std::size_t detection_index = 0;
    double projected_x = 0.0; // pixels, via radar_to_image_x
    Eigen::Vector2d world_xz = Eigen::Vector2d::Zero();
};

struct MatchPair {
    std::size_t pose_index = 0;
    std::size_t detection_index = 0;
    double distance = 0.0; // pixels, or radians for the angle baseline
};

struct Assignment {
    std::vector<MatchPair> pairs; // sorted by pose_index
    std::vector<std::size_t> unmatched_poses;
    std::vector<std::size_t> unmatched_detections;
};

// Mean column of the visible keypoints. With `width_px`, keypoints on the far
// side of the panorama seam are unwrapped around the first visible keypoint
// before averaging and the result is wrapped back into [0, width); without
// it, this is the plain arithmetic mean. Throws InputError if nothing is visible.
double mean_image_x(const Pose2D &pose, std::optional<int> width_px = std::nullopt);

// min(|a - b|, width - |a - b|).
double circular_distance(double a, double b, double width);

// Threshold-gated nearest matching on the image x axis. Radar columns are
// kept in an ordered tree; every camera candidate range-queries it for
// detections within `threshold`, and the candidate pairs are claimed
// greedily, smallest distance first (ties: lower detection index, then lower
// pose index).
Assignment match_people(std::span<const CameraCandidate> cands, std::span<const RadarCandidate> radars,
                        double threshold_px, double width_px);

// Earlier method kept as a baseline: compares the camera azimuth implied by
// mean_x with the raw world azimuth atan2(x, z) of each detection.
Assignment match_people_angle_baseline(std::span<const CameraCandidate> cands, std::span<const RadarCandidate> radars,
                                       const CameraModel &cam, double threshold_rad);

// 100 * |radar - camera| / camera. Throws DomainError when camera == 0.
double matching_error_pct(double radar_value, double camera_value);

} // namespace omnifuse
