#pragma once

#include <array>
#include <cstdint>
#include <numbers>
#include <optional>

#include <Eigen/Core>

#include "omnifuse/skeleton.h"

namespace omnifuse {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Wraps an angle into [-pi, pi).
double wrap_angle(double rad);

// World frame: x and z span the ground plane, y points up. The camera sits at
// (0, height_m, 0). Azimuth is atan2(x, z), so it grows from +z toward +x.
struct CameraModel {
    int width_px = 3840;
    int height_px = 1920;
    double yaw_offset_rad = 0.0; // azimuth of the image-center column
    double height_m = 1.2;

    // Full equirectangular panorama of the given width.
    static CameraModel panorama(int width_px, double yaw_offset_rad = 0.0, double height_m = 1.2);

    // Throws InputError unless width = 2 * height and yaw is in [-pi, pi).
    void validate() const;

    Eigen::Vector3d center() const { return {0.0, height_m, 0.0}; }

    // Horizontal pixels per radian of azimuth (equal to the vertical density).
    double px_per_rad() const { return width_px / kTwoPi; }
};

struct PixelPoint {
    double u = 0.0;
    double v = 0.0;
};

struct Direction {
    double azimuth = 0.0;   // [-pi, pi)
    double elevation = 0.0; // [-pi/2, pi/2]
};

// Unit vector for a viewing direction in the world frame.
Eigen::Vector3d direction_vector(const Direction &d);

// Direction of a world point as seen from the camera center.
Direction direction_of(const Eigen::Vector3d &world_point, const CameraModel &cam);

// u = W * (wrap(az - yaw) + pi) / 2pi, v = H * (pi/2 - el) / pi, with u in [0, W).
// Throws DomainError for the camera center itself.
PixelPoint equirect_project(const Eigen::Vector3d &world_point, const CameraModel &cam);

// Exact inverse of the angular map above. Requires 0 <= u < W and 0 <= v <= H.
Direction equirect_unproject(double u, double v, const CameraModel &cam);

struct Keypoint2D {
    double u = 0.0;
    double v = 0.0;
    double confidence = 0.0; // 0 marks an occluded / undetected joint
};

struct Pose2D {
    std::array<Keypoint2D, kNumJoints> keypoints{};
    std::optional<std::int64_t> person_hint;

    bool visible(std::size_t j) const { return keypoints[j].confidence > 0.0; }
    JointMask occlusion_mask() const;
};

// Frame the normalized coordinates live in.
//   Pixel: raw image-plane offsets from the pelvis pixel.
//   View:  gnomonic (pinhole) coordinates of a virtual camera that looks
//          straight at the pelvis, so the pinhole relation x = X/Z holds exactly.
enum class NormFrame { Pixel, View };

struct NormRecord {
    PixelPoint root_px;
    // Pixel frame: pixels per normalized unit.
    // View frame: pixel-equivalent scale, i.e. tangent-plane radius times px_per_rad.
    double scale_px_per_unit = 1.0;
    NormFrame frame = NormFrame::Pixel;
    Direction view; // pelvis direction, View frame only
};

struct NormalizedPose2D {
    std::array<Eigen::Vector2d, kNumJoints> keypoints{};
    JointMask occlusion_mask;
    NormRecord norm_record;
};

// Pelvis-rooted, unit max-radius normalization in pixel space.
// Throws NormalizationError when the pelvis is occluded or fewer than two
// joints are visible.
NormalizedPose2D normalize_pose(const Pose2D &pose);

// Same convention in the pelvis-centered virtual view of a panorama. This is
// the form the fusion pipeline feeds to the lifter.
NormalizedPose2D normalize_pose_view(const Pose2D &pose, const CameraModel &cam);

// Inverse of either normalization for a single keypoint. `cam` is required
// for the View frame.
PixelPoint denormalize_keypoint(const NormRecord &rec, const Eigen::Vector2d &xy, const CameraModel *cam = nullptr);

// Orthonormal basis of the virtual view looking along `d`: right grows with
// azimuth, down points toward the ground, forward is the viewing direction.
struct ViewBasis {
    Eigen::Vector3d right;
    Eigen::Vector3d down;
    Eigen::Vector3d forward;
};
ViewBasis view_basis(const Direction &d);

// Output of the perspective reconstruction. Image convention: y grows down.
struct LocalPose3D {
    Skeleton3D keypoints{};
    double c = 10.0;
};

using DepthOffsets = std::array<double, kNumJoints>;

// z_i = max(1, d_i + c); keypoint i = (x_i z_i, y_i z_i, z_i).
// Throws InputError for c <= 1 or non-finite offsets.
LocalPose3D reconstruct_3d(const NormalizedPose2D &pose, const DepthOffsets &depth_offsets, double c);

// Rotates a View-frame reconstruction onto world-aligned axes and undoes the
// normalization scale, leaving the root at (0, 0, c) with y still pointing
// down. Pixel-frame poses are returned unchanged.
LocalPose3D align_view_to_world(const LocalPose3D &pose, const NormRecord &rec, const CameraModel &cam);

// Meters per lifting unit for a person whose pelvis lies on the ground-plane
// point radar_xz and on the view ray `rec.view`: the pelvis range divided by c.
double range_world_scale(const Eigen::Vector2d &radar_xz, const NormRecord &rec, double c);

struct GlobalPose3D {
    Skeleton3D keypoints{};
    std::int64_t person_id = -1;
    int source_radar = -1;
};

// x' = x s + radar_x, z' = (z - c) s + radar_z, y' = -y s; then y' is shifted
// so the lowest ankle sits exactly on y = 0.
GlobalPose3D place_global(const LocalPose3D &pose, const Eigen::Vector2d &radar_xz, double world_scale);

} // namespace omnifuse
