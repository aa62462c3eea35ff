#pragma once

// Forward kinematics of the skeleton tree.
//
// Each joint rotation is the intrinsic sequence flexion (about y), then
// abduction (about x), then axial rotation (about z), expressed in the parent
// segment frame. Postures are in degrees; radians never leave this header.

#include "reach/body_model.hpp"

#include <span>
#include <vector>

namespace reach {

struct Pose {
    Mat3 rotation = Mat3::Identity();
    Vec3 position = Vec3::Zero();
};

struct SegmentPoses {
    std::vector<Pose> segments;  // world frame, indexed like BodyModel::segments
    Vec3 end_effector = Vec3::Zero();
    Vec3 com = Vec3::Zero();
};

inline Mat3 axis_rotation(const Vec3& axis, double rad) {
    return Eigen::AngleAxisd(rad, axis).toRotationMatrix();
}

/// Anatomical joint rotation for (flexion, rotation, abduction) in degrees.
inline Mat3 joint_rotation(double flexion, double rotation, double abduction) {
    return axis_rotation(Vec3::UnitY(), deg2rad(flexion)) * axis_rotation(Vec3::UnitX(), deg2rad(abduction)) *
           axis_rotation(Vec3::UnitZ(), deg2rad(rotation));
}

/// One single-axis factor of a joint rotation: angle = deg2rad(q[dof]) about `axis`.
struct ElementaryRotation {
    int dof = 0;
    Vec3 axis = Vec3::UnitZ();  // signed; reversed joints use negated axes
};

/// Validated model plus the precomputed joint factorisation shared by the
/// kinematics and dynamics kernels. Immutable; safe to share across threads.
class Skeleton {
public:
    explicit Skeleton(BodyModel model) : model_(std::move(model)), topo_(validate(model_)) {
        factors_.reserve(model_.joints.size());
        for (std::size_t j = 0; j < model_.joints.size(); ++j) {
            int base = static_cast<int>(3 * j);
            const int flex = base + static_cast<int>(Plane::Flexion);
            const int rot = base + static_cast<int>(Plane::Rotation);
            const int abd = base + static_cast<int>(Plane::Abduction);
            if (!model_.joints[j].reversed) {
                factors_.push_back({{{flex, Vec3::UnitY()}, {abd, Vec3::UnitX()}, {rot, Vec3::UnitZ()}}});
            } else {
                // Transpose of the anatomical rotation.
                factors_.push_back({{{rot, -Vec3::UnitZ()}, {abd, -Vec3::UnitX()}, {flex, -Vec3::UnitY()}}});
            }
        }
    }

    const BodyModel& model() const { return model_; }
    const Topology& topology() const { return topo_; }
    std::size_t dof_count() const { return model_.dof_count(); }
    const std::array<ElementaryRotation, 3>& factors(std::size_t joint) const { return factors_[joint]; }

    /// Tree-frame rotation of a joint (child relative to parent) at posture q (deg).
    Mat3 local_rotation(std::size_t joint, std::span<const double> q) const {
        Mat3 r = Mat3::Identity();
        for (const auto& f : factors_[joint]) r = r * axis_rotation(f.axis, deg2rad(q[f.dof]));
        return r;
    }

private:
    BodyModel model_;
    Topology topo_;
    std::vector<std::array<ElementaryRotation, 3>> factors_;
};

inline void check_posture(const Skeleton& sk, std::span<const double> q) {
    if (q.size() != sk.dof_count())
        throw ContractError("posture has " + std::to_string(q.size()) + " entries, model has " +
                            std::to_string(sk.dof_count()) + " DoF");
}

inline Vec3 whole_body_com(const BodyModel& model, const std::vector<Pose>& poses) {
    Vec3 sum = Vec3::Zero();
    double mass = 0.0;
    for (std::size_t i = 0; i < model.segments.size(); ++i) {
        const auto& s = model.segments[i];
        sum += s.mass * (poses[i].position + poses[i].rotation * s.com_offset);
        mass += s.mass;
    }
    return sum / mass;
}

inline Vec3 whole_body_com(const BodyModel& model, const SegmentPoses& poses) {
    return whole_body_com(model, poses.segments);
}

inline SegmentPoses forward_kinematics(const Skeleton& sk, std::span<const double> q) {
    check_posture(sk, q);
    const auto& m = sk.model();
    const auto& topo = sk.topology();
    SegmentPoses out;
    out.segments.resize(m.segments.size());
    for (std::size_t j = 0; j < m.joints.size(); ++j) {
        Pose parent;
        if (topo.parent_segment[j] >= 0) parent = out.segments[topo.parent_segment[j]];
        Pose& child = out.segments[topo.child_segment[j]];
        child.position = parent.position + parent.rotation * m.joints[j].origin;
        child.rotation = parent.rotation * sk.local_rotation(j, q);
    }
    const auto& ee = out.segments[topo.end_effector];
    out.end_effector = ee.position + ee.rotation * m.segments[topo.end_effector].distal();
    out.com = whole_body_com(m, out.segments);
    return out;
}

inline SegmentPoses forward_kinematics(const Skeleton& sk, const VecX& q) {
    return forward_kinematics(sk, std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
}

/// Segment endpoints (proximal, distal) in world coordinates, for stick-figure export.
inline std::vector<std::pair<Vec3, Vec3>> segment_endpoints(const BodyModel& model, const SegmentPoses& poses) {
    std::vector<std::pair<Vec3, Vec3>> out;
    out.reserve(model.segments.size());
    for (std::size_t i = 0; i < model.segments.size(); ++i) {
        const auto& p = poses.segments[i];
        out.emplace_back(p.position, p.position + p.rotation * model.segments[i].distal());
    }
    return out;
}

} // namespace reach
