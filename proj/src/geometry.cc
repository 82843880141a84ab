#include "omnifuse/geometry.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Geometry>

#include "omnifuse/errors.h"

namespace omnifuse {

namespace {

PixelPoint pixel_of(const Direction &d, const CameraModel &cam) {
    double u = cam.width_px * ((wrap_angle(d.azimuth - cam.yaw_offset_rad) + kPi) / kTwoPi);
    if (u >= cam.width_px)
        u -= cam.width_px;
    if (u < 0.0)
        u = 0.0;
    double v = cam.height_px * ((kPi / 2.0 - d.elevation) / kPi);
    return {u, v};
}

Direction direction_from_vector(const Eigen::Vector3d &p) {
    return {std::atan2(p.x(), p.z()), std::atan2(p.y(), std::hypot(p.x(), p.z()))};
}

} // namespace

double wrap_angle(double rad) {
    if (rad >= -kPi && rad < kPi)
        return rad;
    double r = std::fmod(rad + kPi, kTwoPi);
    if (r < 0.0)
        r += kTwoPi;
    r -= kPi;
    if (r >= kPi)
        r = -kPi;
    return r;
}

CameraModel CameraModel::panorama(int width_px, double yaw_offset_rad, double height_m) {
    CameraModel cam;
    cam.width_px = width_px;
    cam.height_px = width_px / 2;
    cam.yaw_offset_rad = yaw_offset_rad;
    cam.height_m = height_m;
    cam.validate();
    return cam;
}

void CameraModel::validate() const {
    if (width_px <= 0 || height_px <= 0 || width_px != 2 * height_px)
        throw InputError("camera must be a full equirectangular panorama (width = 2 * height), got " +
                         std::to_string(width_px) + "x" + std::to_string(height_px));
    if (!(yaw_offset_rad >= -kPi && yaw_offset_rad < kPi))
        throw InputError("camera yaw offset must lie in [-pi, pi)");
}

Eigen::Vector3d direction_vector(const Direction &d) {
    const double ce = std::cos(d.elevation);
    return {ce * std::sin(d.azimuth), std::sin(d.elevation), ce * std::cos(d.azimuth)};
}

Direction direction_of(const Eigen::Vector3d &world_point, const CameraModel &cam) {
    const Eigen::Vector3d p = world_point - cam.center();
    if (p.squaredNorm() == 0.0)
        throw DomainError("point coincides with the camera center");
    return direction_from_vector(p);
}

PixelPoint equirect_project(const Eigen::Vector3d &world_point, const CameraModel &cam) {
    return pixel_of(direction_of(world_point, cam), cam);
}

Direction equirect_unproject(double u, double v, const CameraModel &cam) {
    if (!(u >= 0.0 && u < cam.width_px) || !(v >= 0.0 && v <= cam.height_px))
        throw DomainError("pixel (" + std::to_string(u) + ", " + std::to_string(v) + ") outside the panorama");
    const double az = wrap_angle((u / cam.width_px) * kTwoPi - kPi + cam.yaw_offset_rad);
    const double el = kPi / 2.0 - (v / cam.height_px) * kPi;
    return {az, el};
}

JointMask Pose2D::occlusion_mask() const {
    JointMask m;
    for (std::size_t j = 0; j < kNumJoints; ++j)
        m.set(j, !visible(j));
    return m;
}

namespace {

void check_normalizable(const Pose2D &pose) {
    if (!pose.visible(idx(Joint::Pelvis)))
        throw NormalizationError("pelvis is occluded");
    const auto visible = kNumJoints - pose.occlusion_mask().count();
    if (visible < 2)
        throw NormalizationError("need at least two visible keypoints");
}

double max_visible_radius(const std::array<Eigen::Vector2d, kNumJoints> &pts, const JointMask &occluded) {
    double r = 0.0;
    for (std::size_t j = 1; j < kNumJoints; ++j) {
        if (!occluded.test(j))
            r = std::max(r, std::hypot(pts[j].x(), pts[j].y()));
    }
    if (!(r > 0.0) || !std::isfinite(r))
        throw NormalizationError("visible keypoints all coincide with the pelvis");
    return r;
}

} // namespace

NormalizedPose2D normalize_pose(const Pose2D &pose) {
    check_normalizable(pose);
    NormalizedPose2D out;
    out.occlusion_mask = pose.occlusion_mask();
    const Keypoint2D &root = pose.keypoints[idx(Joint::Pelvis)];

    std::array<Eigen::Vector2d, kNumJoints> offsets;
    for (std::size_t j = 0; j < kNumJoints; ++j)
        offsets[j] = {pose.keypoints[j].u - root.u, pose.keypoints[j].v - root.v};
    offsets[0].setZero();

    const double scale = max_visible_radius(offsets, out.occlusion_mask);
    for (std::size_t j = 0; j < kNumJoints; ++j)
        out.keypoints[j] = offsets[j] / scale;
    out.norm_record = NormRecord{{root.u, root.v}, scale, NormFrame::Pixel, {}};
    return out;
}

ViewBasis view_basis(const Direction &d) {
    ViewBasis b;
    b.forward = direction_vector(d);
    b.right = Eigen::Vector3d(std::cos(d.azimuth), 0.0, -std::sin(d.azimuth));
    b.down = b.right.cross(b.forward);
    return b;
}

NormalizedPose2D normalize_pose_view(const Pose2D &pose, const CameraModel &cam) {
    check_normalizable(pose);
    NormalizedPose2D out;
    out.occlusion_mask = pose.occlusion_mask();
    const Keypoint2D &root = pose.keypoints[idx(Joint::Pelvis)];

    Direction view;
    try {
        view = equirect_unproject(root.u, root.v, cam);
    } catch (const DomainError &e) {
        throw NormalizationError(std::string("pelvis pixel: ") + e.what());
    }
    const ViewBasis basis = view_basis(view);

    std::array<Eigen::Vector2d, kNumJoints> tangent;
    tangent[0].setZero();
    for (std::size_t j = 1; j < kNumJoints; ++j) {
        const Keypoint2D &kp = pose.keypoints[j];
        const bool occluded = out.occlusion_mask.test(j);
        Eigen::Vector3d dir;
        try {
            dir = direction_vector(equirect_unproject(kp.u, kp.v, cam));
        } catch (const DomainError &e) {
            if (!occluded)
                throw NormalizationError(std::string(joint_name(static_cast<Joint>(j))) + ": " + e.what());
            tangent[j].setZero();
            continue;
        }
        const double depth = dir.dot(basis.forward);
        if (depth <= 1e-9) {
            if (!occluded)
                throw NormalizationError(std::string(joint_name(static_cast<Joint>(j))) +
                                         " lies outside the pelvis-centered view");
            tangent[j].setZero();
            continue;
        }
        tangent[j] = {dir.dot(basis.right) / depth, dir.dot(basis.down) / depth};
    }

    const double radius = max_visible_radius(tangent, out.occlusion_mask);
    for (std::size_t j = 0; j < kNumJoints; ++j)
        out.keypoints[j] = tangent[j] / radius;
    out.norm_record = NormRecord{{root.u, root.v}, radius * cam.px_per_rad(), NormFrame::View, view};
    return out;
}

PixelPoint denormalize_keypoint(const NormRecord &rec, const Eigen::Vector2d &xy, const CameraModel *cam) {
    if (rec.frame == NormFrame::Pixel)
        return {rec.root_px.u + xy.x() * rec.scale_px_per_unit, rec.root_px.v + xy.y() * rec.scale_px_per_unit};
    if (cam == nullptr)
        throw InputError("view-frame denormalization needs the camera model");
    const ViewBasis basis = view_basis(rec.view);
    const Eigen::Vector2d g = xy * (rec.scale_px_per_unit / cam->px_per_rad());
    const Eigen::Vector3d dir = basis.forward + g.x() * basis.right + g.y() * basis.down;
    return pixel_of(direction_from_vector(dir), *cam);
}

LocalPose3D reconstruct_3d(const NormalizedPose2D &pose, const DepthOffsets &depth_offsets, double c) {
    if (!(c > 1.0) || !std::isfinite(c))
        throw InputError("lifting distance c must be finite and > 1");
    LocalPose3D out;
    out.c = c;
    for (std::size_t j = 0; j < kNumJoints; ++j) {
        const double d = depth_offsets[j];
        if (!std::isfinite(d))
            throw InputError("non-finite depth offset for " + std::string(joint_name(static_cast<Joint>(j))));
        const double z = std::max(1.0, d + c);
        out.keypoints[j] = {pose.keypoints[j].x() * z, pose.keypoints[j].y() * z, z};
    }
    return out;
}

LocalPose3D align_view_to_world(const LocalPose3D &pose, const NormRecord &rec, const CameraModel &cam) {
    if (rec.frame == NormFrame::Pixel)
        return pose;
    const ViewBasis basis = view_basis(rec.view);
    const double unscale = rec.scale_px_per_unit / cam.px_per_rad();
    LocalPose3D out;
    out.c = pose.c;
    for (std::size_t j = 0; j < kNumJoints; ++j) {
        const Eigen::Vector3d &p = pose.keypoints[j];
        const Eigen::Vector3d w =
            (p.x() * unscale) * basis.right + (p.y() * unscale) * basis.down + (p.z() - pose.c) * basis.forward;
        out.keypoints[j] = {w.x(), -w.y(), w.z() + pose.c};
    }
    return out;
}

double range_world_scale(const Eigen::Vector2d &radar_xz, const NormRecord &rec, double c) {
    const double planar = radar_xz.norm();
    if (!(planar > 0.0))
        throw DomainError("radar position at the rig origin has no range");
    return planar / std::cos(rec.view.elevation) / c;
}

GlobalPose3D place_global(const LocalPose3D &pose, const Eigen::Vector2d &radar_xz, double world_scale) {
    if (!(world_scale > 0.0))
        throw InputError("world_scale must be positive");
    GlobalPose3D out;
    for (std::size_t j = 0; j < kNumJoints; ++j) {
        const Eigen::Vector3d &p = pose.keypoints[j];
        out.keypoints[j] = {p.x() * world_scale + radar_xz.x(), -p.y() * world_scale,
                            (p.z() - pose.c) * world_scale + radar_xz.y()};
    }
    const double ground =
        std::min(out.keypoints[idx(Joint::LAnkle)].y(), out.keypoints[idx(Joint::RAnkle)].y());
    for (auto &k : out.keypoints)
        k.y() -= ground;
    return out;
}

} // namespace omnifuse
