#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "omnifuse/matching.h"
#include "omnifuse/skeleton.h"

namespace omnifuse {

// Point-set errors are returned in the units of their inputs.

// Mean over joints of the per-joint Euclidean distance.
// Throws InputError for mismatched or empty point sets.
double mpjpe(std::span<const Eigen::Vector3d> pred, std::span<const Eigen::Vector3d> gt);

// MPJPE after centering both sets and scaling pred by the least-squares
// factor <pred_c, gt_c> / <pred_c, pred_c>. Throws InputError when pred has
// no spread about its centroid. `scale_out` receives the factor.
double n_mpjpe(std::span<const Eigen::Vector3d> pred, std::span<const Eigen::Vector3d> gt,
               double *scale_out = nullptr);

// MPJPE after aligning pred onto gt with a proper rotation, translation and,
// unless disabled, a uniform scale (Umeyama / orthogonal Procrustes). The
// alignment is one-directional, so the metric is not symmetric. Throws
// AlignmentError when either set has rank < 2 about its centroid.
double pa_mpjpe(std::span<const Eigen::Vector3d> pred, std::span<const Eigen::Vector3d> gt, bool with_scale = true);

struct PoseErrorReport {
    double mpjpe_mm = 0.0;
    double n_mpjpe_mm = 0.0;
    double pa_mpjpe_mm = 0.0;
    std::array<double, kNumJoints> per_joint_mm{};
    OcclusionScenario scenario = OcclusionScenario::None;
};

// All three errors of a meter-valued pose pair, reported in millimeters.
PoseErrorReport pose_error_report(const Skeleton3D &pred_m, const Skeleton3D &gt_m,
                                  OcclusionScenario scenario = OcclusionScenario::None);

// Running mean of reports for one scenario.
struct PoseErrorSummary {
    std::size_t count = 0;
    double mpjpe_mm = 0.0;
    double n_mpjpe_mm = 0.0;
    double pa_mpjpe_mm = 0.0;
    std::array<double, kNumJoints> per_joint_mm{};

    void add(const PoseErrorReport &r);
};

enum class Axis { X, Z };

struct LocalizationSample {
    Eigen::Vector2d pred = Eigen::Vector2d::Zero(); // meters
    Eigen::Vector2d truth = Eigen::Vector2d::Zero();
};

// Mean |pred - truth| along one axis, centimeters. Throws InputError when empty.
double localization_mae(std::span<const LocalizationSample> samples, Axis axis);

// A pose index paired with one detection that belongs to the same person.
// A person seen by several radars contributes several acceptable pairs.
struct TruthPair {
    std::size_t pose_index = 0;
    std::size_t detection_index = 0;
};

// 100 * correct pairs / people that had a detection. A pair is correct when
// it appears in `truth`. Returns 100 when truth is empty.
double matching_accuracy(const Assignment &assignment, std::span<const TruthPair> truth);

struct HeatmapBounds {
    double min_x = -5.0, max_x = 5.0;
    double min_z = -5.0, max_z = 5.0;
};

struct HeatmapCell {
    double sum_abs_x = 0.0, sum_abs_z = 0.0;
    std::size_t n = 0;

    bool empty() const { return n == 0; }
    double mae_x_m() const { return sum_abs_x / static_cast<double>(n); }
    double mae_z_m() const { return sum_abs_z / static_cast<double>(n); }
};

struct HeatmapGrid {
    double cell_size = 0.5;
    Eigen::Vector2d origin = Eigen::Vector2d::Zero(); // lower (x, z) corner
    std::size_t nx = 0, nz = 0;
    std::vector<HeatmapCell> cells; // row-major in z, then x

    const HeatmapCell &at(std::size_t ix, std::size_t iz) const { return cells[iz * nx + ix]; }
    Eigen::Vector2d cell_center(std::size_t ix, std::size_t iz) const;
    // Cell holding a point, or nullopt outside the bounds.
    std::optional<std::pair<std::size_t, std::size_t>> cell_of(const Eigen::Vector2d &xz) const;
};

// Samples are binned by their true position; samples outside the bounds are
// ignored. Throws InputError for a non-positive cell size or empty bounds.
HeatmapGrid build_heatmap(std::span<const LocalizationSample> samples, double cell_size, const HeatmapBounds &bounds);

// Header `cell_x,cell_z,mae_x_m,mae_z_m,n`, cell centers, one row per cell.
// Empty cells leave both error fields blank.
void write_heatmap_csv(std::ostream &out, const HeatmapGrid &grid);

} // namespace omnifuse
