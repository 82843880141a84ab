#include "omnifuse/skeleton.h"

#include <string>

#include "omnifuse/errors.h"

namespace omnifuse {

namespace {

constexpr std::array<std::string_view, kNumJoints> kJointNames = {
    "pelvis",    "l_hip",      "r_hip",   "l_knee",  "r_knee",   "l_ankle",  "r_ankle", "neck",
    "nose",      "l_shoulder", "r_shoulder", "l_elbow", "r_elbow", "l_wrist", "r_wrist",
};

constexpr std::array<int, kNumJoints> kParent = {
    -1,                   // pelvis
    idx(Joint::Pelvis),   // l_hip
    idx(Joint::Pelvis),   // r_hip
    idx(Joint::LHip),     // l_knee
    idx(Joint::RHip),     // r_knee
    idx(Joint::LKnee),    // l_ankle
    idx(Joint::RKnee),    // r_ankle
    idx(Joint::Pelvis),   // neck
    idx(Joint::Neck),     // nose
    idx(Joint::Neck),     // l_shoulder
    idx(Joint::Neck),     // r_shoulder
    idx(Joint::LShoulder), // l_elbow
    idx(Joint::RShoulder), // r_elbow
    idx(Joint::LElbow),   // l_wrist
    idx(Joint::RElbow),   // r_wrist
};

constexpr std::array<int, kNumJoints> kMirror = {
    -1,
    idx(Joint::RHip),      idx(Joint::LHip),      idx(Joint::RKnee),  idx(Joint::LKnee),
    idx(Joint::RAnkle),    idx(Joint::LAnkle),    -1,                 -1,
    idx(Joint::RShoulder), idx(Joint::LShoulder), idx(Joint::RElbow), idx(Joint::LElbow),
    idx(Joint::RWrist),    idx(Joint::LWrist),
};

JointMask mask_of(std::initializer_list<Joint> joints) {
    JointMask m;
    for (Joint j : joints)
        m.set(idx(j));
    return m;
}

const JointMask kLeftArm = mask_of({Joint::LShoulder, Joint::LElbow, Joint::LWrist});
const JointMask kRightArm = mask_of({Joint::RShoulder, Joint::RElbow, Joint::RWrist});
const JointMask kLeftLeg = mask_of({Joint::LKnee, Joint::LAnkle});
const JointMask kRightLeg = mask_of({Joint::RKnee, Joint::RAnkle});
const JointMask kTorso = mask_of({Joint::LHip, Joint::RHip, Joint::Neck});

} // namespace

std::string_view joint_name(Joint j) { return kJointNames[idx(j)]; }

std::optional<Joint> parent(Joint j) {
    int p = kParent[idx(j)];
    if (p < 0)
        return std::nullopt;
    return static_cast<Joint>(p);
}

std::optional<Joint> mirror(Joint j) {
    int m = kMirror[idx(j)];
    if (m < 0)
        return std::nullopt;
    return static_cast<Joint>(m);
}

bool is_ancestor(Joint ancestor, Joint j) {
    for (int cur = idx(j); cur >= 0; cur = kParent[cur]) {
        if (cur == idx(ancestor))
            return true;
    }
    return false;
}

std::string_view scenario_name(OcclusionScenario s) {
    switch (s) {
    case OcclusionScenario::None:
        return "None";
    case OcclusionScenario::LeftArm:
        return "LeftArm";
    case OcclusionScenario::LeftLeg:
        return "LeftLeg";
    case OcclusionScenario::RightArm:
        return "RightArm";
    case OcclusionScenario::RightLeg:
        return "RightLeg";
    case OcclusionScenario::LeftArmAndLeg:
        return "LeftArmAndLeg";
    case OcclusionScenario::RightArmAndLeg:
        return "RightArmAndLeg";
    case OcclusionScenario::BothLegs:
        return "BothLegs";
    case OcclusionScenario::Torso:
        return "Torso";
    }
    return "None";
}

OcclusionScenario scenario_from_name(std::string_view name) {
    for (OcclusionScenario s : kAllScenarios) {
        if (scenario_name(s) == name)
            return s;
    }
    throw InputError("unknown occlusion scenario '" + std::string(name) + "'");
}

JointMask occlusion_mask(OcclusionScenario s) {
    switch (s) {
    case OcclusionScenario::None:
        return {};
    case OcclusionScenario::LeftArm:
        return kLeftArm;
    case OcclusionScenario::LeftLeg:
        return kLeftLeg;
    case OcclusionScenario::RightArm:
        return kRightArm;
    case OcclusionScenario::RightLeg:
        return kRightLeg;
    case OcclusionScenario::LeftArmAndLeg:
        return kLeftArm | kLeftLeg;
    case OcclusionScenario::RightArmAndLeg:
        return kRightArm | kRightLeg;
    case OcclusionScenario::BothLegs:
        return kLeftLeg | kRightLeg;
    case OcclusionScenario::Torso:
        return kTorso;
    }
    return {};
}

const Skeleton3D &canonical_skeleton() {
    // Ankles are symmetric about the pelvis ground point, so the midpoint of
    // the two ankles recovers the person's planar position.
    static const Skeleton3D skeleton = {
        Eigen::Vector3d(0.00, 0.95, 0.00),  // pelvis
        Eigen::Vector3d(0.10, 0.93, 0.00),  // l_hip
        Eigen::Vector3d(-0.10, 0.93, 0.00), // r_hip
        Eigen::Vector3d(0.11, 0.50, 0.04),  // l_knee
        Eigen::Vector3d(-0.11, 0.50, 0.04), // r_knee
        Eigen::Vector3d(0.12, 0.00, 0.00),  // l_ankle
        Eigen::Vector3d(-0.12, 0.00, 0.00), // r_ankle
        Eigen::Vector3d(0.00, 1.45, 0.01),  // neck
        Eigen::Vector3d(0.00, 1.60, 0.10),  // nose
        Eigen::Vector3d(0.19, 1.42, 0.00),  // l_shoulder
        Eigen::Vector3d(-0.19, 1.42, 0.00), // r_shoulder
        Eigen::Vector3d(0.24, 1.15, 0.05),  // l_elbow
        Eigen::Vector3d(-0.24, 1.15, 0.05), // r_elbow
        Eigen::Vector3d(0.26, 0.90, 0.15),  // l_wrist
        Eigen::Vector3d(-0.26, 0.90, 0.15), // r_wrist
    };
    return skeleton;
}

} // namespace omnifuse
