#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <optional>
#include <string_view>

#include <Eigen/Core>

namespace omnifuse {

inline constexpr std::size_t kNumJoints = 15;

// Joint order used everywhere (files, masks, lifter outputs). Index 0 is the
// root; lifter depth offsets are relative to it.
enum class Joint : int {
    Pelvis = 0,
    LHip,
    RHip,
    LKnee,
    RKnee,
    LAnkle,
    RAnkle,
    Neck,
    Nose,
    LShoulder,
    RShoulder,
    LElbow,
    RElbow,
    LWrist,
    RWrist,
};

constexpr int idx(Joint j) { return static_cast<int>(j); }

using JointMask = std::bitset<kNumJoints>;
using Skeleton3D = std::array<Eigen::Vector3d, kNumJoints>;

std::string_view joint_name(Joint j);

// Kinematic parent; the pelvis has none.
std::optional<Joint> parent(Joint j);

// Left/right counterpart; central joints have none.
std::optional<Joint> mirror(Joint j);

// True if `ancestor` lies on the kinematic path from `j` to the root
// (a joint counts as its own ancestor).
bool is_ancestor(Joint ancestor, Joint j);

enum class OcclusionScenario {
    None,
    LeftArm,
    LeftLeg,
    RightArm,
    RightLeg,
    LeftArmAndLeg,
    RightArmAndLeg,
    BothLegs,
    Torso,
};

inline constexpr std::array<OcclusionScenario, 9> kAllScenarios = {
    OcclusionScenario::None,          OcclusionScenario::LeftArm,        OcclusionScenario::LeftLeg,
    OcclusionScenario::RightArm,      OcclusionScenario::RightLeg,       OcclusionScenario::LeftArmAndLeg,
    OcclusionScenario::RightArmAndLeg, OcclusionScenario::BothLegs,      OcclusionScenario::Torso,
};

std::string_view scenario_name(OcclusionScenario s);
OcclusionScenario scenario_from_name(std::string_view name);

// Repo-wide occlusion mask table:
//   arm   = shoulder + elbow + wrist
//   leg   = knee + ankle
//   torso = both hips + neck
JointMask occlusion_mask(OcclusionScenario s);

// Canonical 1.7 m standing person in body coordinates (meters):
//   x: lateral, positive toward the person's left
//   y: up, ankles at 0
//   z: forward, positive in the direction the person faces
const Skeleton3D &canonical_skeleton();

inline constexpr double kCanonicalHeightM = 1.7;

} // namespace omnifuse
