#pragma once

// Articulated human skeleton: segments, three-DoF rotational joints and the
// anthropometric builder for the default 12-segment / 36-DoF reaching model.
//
// Frames: right-handed, x anterior, y left, z up at neutral. Every segment
// frame has its origin at the joint that attaches it to the tree (for the leg
// that is the anatomically distal joint, since the tree is rooted at the
// ankle). DoF order is joint-major, plane-minor with planes ordered
// flexion/extension, internal/external rotation, abduction/adduction.

#include "reach/common.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace reach {

enum class Plane : int { Flexion = 0, Rotation = 1, Abduction = 2 };

inline constexpr std::array<const char*, 3> kPlaneNames = {"flexion", "rotation", "abduction"};
inline constexpr double kLockedBandDeg = 0.02;
inline constexpr const char* kGround = "ground";

struct Segment {
    std::string name;
    double mass = 0.0;   // kg
    double length = 0.0; // m
    Vec3 axis = Vec3::UnitZ();         // unit direction from proximal joint to distal end
    Vec3 com_offset = Vec3::Zero();    // m, segment frame
    Mat3 inertia = Mat3::Zero();       // kg m^2 about the COM, segment frame

    Vec3 distal() const { return axis * length; }
    bool operator==(const Segment&) const = default;
};

struct DofSpec {
    double lower = -180.0;   // deg
    double upper = 180.0;    // deg
    double stiffness = 0.0;  // N m / deg
    double damping = 0.0;    // N m s / deg
    double neutral = 0.0;    // deg

    /// Table entries of +/-0.01 deg are immobile in practice.
    bool locked() const { return upper - lower <= kLockedBandDeg + 1e-12; }
    double clamp(double deg) const { return std::min(std::max(deg, lower), upper); }
    bool operator==(const DofSpec&) const = default;
};

struct JointSpec {
    std::string name;
    std::string parent;  // segment name, or kGround for the base joint
    std::string child;
    Vec3 origin = Vec3::Zero();  // joint centre in the parent segment frame (world for the base)
    // True when the tree child is the anatomically proximal segment (leg joints
    // of a model rooted at the ankle). Angles keep their anatomical meaning.
    bool reversed = false;
    std::array<DofSpec, 3> dof{};

    bool operator==(const JointSpec&) const = default;
};

struct BodyModel {
    std::string name;
    std::vector<Segment> segments;
    std::vector<JointSpec> joints;  // parents listed before children
    std::string end_effector;       // segment whose distal point is the end-effector

    std::size_t dof_count() const { return 3 * joints.size(); }

    std::optional<std::size_t> segment_index(const std::string& n) const {
        for (std::size_t i = 0; i < segments.size(); ++i)
            if (segments[i].name == n) return i;
        return std::nullopt;
    }
    std::optional<std::size_t> joint_index(const std::string& n) const {
        for (std::size_t i = 0; i < joints.size(); ++i)
            if (joints[i].name == n) return i;
        return std::nullopt;
    }

    const DofSpec& dof(std::size_t k) const { return joints[k / 3].dof[k % 3]; }

    /// Global DoF index of (joint, plane). Throws ConfigError for unknown joints.
    std::size_t dof_index(const std::string& joint, Plane plane) const {
        auto j = joint_index(joint);
        if (!j) throw ConfigError("unknown joint '" + joint + "'");
        return 3 * *j + static_cast<std::size_t>(plane);
    }

    std::string dof_name(std::size_t k) const {
        return joints[k / 3].name + "." + kPlaneNames[k % 3];
    }

    VecX neutral_posture() const {
        VecX q(dof_count());
        for (std::size_t k = 0; k < dof_count(); ++k) q[k] = dof(k).neutral;
        return q;
    }

    double total_mass() const {
        double m = 0.0;
        for (const auto& s : segments) m += s.mass;
        return m;
    }

    bool operator==(const BodyModel&) const = default;
};

/// Index view of a validated model.
struct Topology {
    std::vector<int> parent_segment;  // per joint, -1 for ground
    std::vector<int> child_segment;   // per joint
    std::vector<int> segment_joint;   // per segment: the joint that attaches it
    int end_effector = -1;
};

/// Checks every model invariant and returns the index view. Throws ConfigError
/// naming the offending segment/joint.
inline Topology validate(const BodyModel& m) {
    if (m.segments.empty()) throw ConfigError("model has no segments");
    Topology topo;
    topo.segment_joint.assign(m.segments.size(), -1);

    for (const auto& s : m.segments) {
        if (!(s.mass > 0.0)) throw ConfigError("segment '" + s.name + "': mass must be > 0");
        if (!(s.length > 0.0)) throw ConfigError("segment '" + s.name + "': length must be > 0");
        if (std::abs(s.axis.norm() - 1.0) > 1e-9)
            throw ConfigError("segment '" + s.name + "': axis must be a unit vector");
        if (s.com_offset.norm() > s.length * (1.0 + 1e-12))
            throw ConfigError("segment '" + s.name + "': |com_offset| exceeds length");
        if ((s.inertia - s.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw ConfigError("segment '" + s.name + "': inertia not symmetric");
        Eigen::SelfAdjointEigenSolver<Mat3> eig(s.inertia);
        if (eig.eigenvalues().minCoeff() < -1e-12)
            throw ConfigError("segment '" + s.name + "': inertia not positive semi-definite");
    }

    std::vector<bool> attached(m.segments.size(), false);
    int roots = 0;
    for (std::size_t j = 0; j < m.joints.size(); ++j) {
        const auto& js = m.joints[j];
        for (int p = 0; p < 3; ++p) {
            const auto& d = js.dof[p];
            std::string where = "joint '" + js.name + "' " + kPlaneNames[p];
            if (!(d.lower < d.upper)) throw ConfigError(where + ": limit_lower must be < limit_upper");
            if (d.stiffness < 0.0) throw ConfigError(where + ": stiffness must be >= 0");
            if (d.damping < 0.0) throw ConfigError(where + ": damping must be >= 0");
            if (d.neutral < d.lower || d.neutral > d.upper)
                throw ConfigError(where + ": neutral posture outside joint limits");
        }
        auto child = m.segment_index(js.child);
        if (!child) throw ConfigError("joint '" + js.name + "': unknown child segment '" + js.child + "'");
        if (attached[*child])
            throw ConfigError("joint '" + js.name + "': segment '" + js.child + "' attached twice");
        int parent = -1;
        if (js.parent == kGround) {
            ++roots;
        } else {
            auto p = m.segment_index(js.parent);
            if (!p) throw ConfigError("joint '" + js.name + "': unknown parent segment '" + js.parent + "'");
            if (!attached[*p])
                throw ConfigError("joint '" + js.name + "': parent '" + js.parent +
                                  "' is not attached earlier in the joint list");
            parent = static_cast<int>(*p);
        }
        attached[*child] = true;
        topo.parent_segment.push_back(parent);
        topo.child_segment.push_back(static_cast<int>(*child));
        topo.segment_joint[*child] = static_cast<int>(j);
    }
    if (roots != 1) throw ConfigError("model must have exactly one joint attached to ground");
    for (std::size_t i = 0; i < m.segments.size(); ++i)
        if (!attached[i]) throw ConfigError("segment '" + m.segments[i].name + "' is not attached to the tree");

    auto ee = m.segment_index(m.end_effector);
    if (!ee) throw ConfigError("end_effector segment '" + m.end_effector + "' not found");
    topo.end_effector = static_cast<int>(*ee);
    return topo;
}

// ---------------------------------------------------------------------------
// Anthropometrics

/// One row per modeled segment. Fractions are relative to stature (lengths),
/// body mass (mass) and segment length (COM position, radii of gyration).
struct AnthropometricRow {
    std::string segment;
    std::string joint;   // joint attaching the segment to `parent`
    std::string parent;  // segment name or kGround
    bool reversed = false;
    double direction = 1.0;       // +1: segment points up (+z) at neutral, -1: down
    double lateral_fraction = 0.0; // joint y offset on the parent's distal end, fraction of stature
    double mass_fraction = 0.0;
    double length_fraction = 0.0;
    double com_fraction = 0.0;     // from the tree-proximal joint
    std::array<double, 3> gyration{}; // about segment x, y, z; fraction of segment length

    bool operator==(const AnthropometricRow&) const = default;
};

struct AnthropometricTable {
    std::vector<AnthropometricRow> rows;
    std::string end_effector;

    bool operator==(const AnthropometricTable&) const = default;
};

using JointTable = std::map<std::string, std::array<DofSpec, 3>>;

inline void validate(const AnthropometricTable& t) {
    if (t.rows.empty()) throw ConfigError("anthropometric table is empty");
    auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
    double mass_sum = 0.0;
    for (const auto& r : t.rows) {
        const std::string where = "anthropometric row '" + r.segment + "': ";
        if (!in_unit(r.mass_fraction)) throw ConfigError(where + "mass_fraction must be in (0, 1]");
        if (!in_unit(r.length_fraction)) throw ConfigError(where + "length_fraction must be in (0, 1]");
        if (!in_unit(r.com_fraction)) throw ConfigError(where + "com_fraction must be in (0, 1]");
        for (double g : r.gyration)
            if (!in_unit(g)) throw ConfigError(where + "gyration fractions must be in (0, 1]");
        if (std::abs(r.lateral_fraction) > 1.0) throw ConfigError(where + "lateral_fraction must be in [-1, 1]");
        if (r.direction != 1.0 && r.direction != -1.0) throw ConfigError(where + "direction must be +1 or -1");
        mass_sum += r.mass_fraction;
    }
    if (mass_sum > 1.0 + 1e-12)
        throw ConfigError("anthropometric table: mass fractions sum to " + std::to_string(mass_sum) + " > 1");
}

/// Joint ranges and viscoelastic coefficients for the reaching model. Locked
/// planes carry +/-0.01 deg; absent dampers are zero.
inline JointTable default_joint_table() {
    auto d = [](double upper, double lower, double k = 0.0, double b = 0.0) {
        return DofSpec{lower, upper, k, b, 0.0};
    };
    // columns: upper, lower, K, B ; order flexion, rotation, abduction
    JointTable t;
    t["ankle"] = {d(54.3, -12.2, 1.0 / 6.0), d(0.01, -0.01), d(19.2, -19.2, 1.0 / 15.0)};
    t["knee"] = {d(141.2, -0.01, 1.0 / 20.0), d(0.01, -0.01), d(0.01, -0.01)};
    t["hip"] = {d(12.1, -121.3, 1.0 / 3.0), d(44.2, -44.2), d(25.6, -25.6, 1.0)};
    t["l_shoulder"] = {d(62, -167, 0.192, 0.014), d(69, -104, 0.192, 0.014), d(184, -0.01, 0.192, 0.014)};
    t["l_elbow"] = {d(0.3, -140.5, 0.1571, 0.0122), d(81.1, -75, 0.1571, 0.0122), d(0.01, -0.01)};
    t["l_wrist"] = {d(35.3, -21.1, 0.1047, 0.0105), d(0.01, -0.01, 0.1047, 0.0105), d(74, -74.8, 0.1047, 0.0105)};
    t["cervical"] = {d(141, -141, 0.25), d(93, -93, 0.42), d(172, -172, 0.33)};
    t["thoracic"] = {d(27, -27, 0.25), d(21, -21, 0.42), d(4, -4, 0.33)};
    t["lumbar"] = {d(43, -43, 0.25), d(19, -19, 0.42), d(8, -8, 0.33)};
    t["r_shoulder"] = {d(62, -167, 0.192, 0.014), d(69, -104, 0.192, 0.014), d(0.01, -184, 0.192, 0.014)};
    t["r_elbow"] = {d(0.3, -140.5, 0.1571, 0.0122), d(75, -81.1, 0.1571, 0.0122), d(0.01, -0.01)};
    t["r_wrist"] = {d(35.3, -21.1, 0.1047, 0.0105), d(0.01, -0.01, 0.1047, 0.0105), d(74.8, -74, 0.1047, 0.0105)};
    return t;
}

/// Segment fractions after de Leva's adjustment of Zatsiorsky-Seluyanov data
/// (male), re-expressed from the tree-proximal joint. Single leg on the
/// midline; feet are the fixed base and not modeled.
inline AnthropometricTable default_anthropometric_table() {
    AnthropometricTable t;
    t.end_effector = "r_hand";
    auto row = [](std::string seg, std::string joint, std::string parent, bool rev, double dir,
                  double lat, double mf, double lf, double cf, std::array<double, 3> g) {
        return AnthropometricRow{std::move(seg), std::move(joint), std::move(parent), rev, dir, lat,
                                 mf, lf, cf, g};
    };
    t.rows = {
        row("shank", "ankle", kGround, true, 1, 0.0, 0.0433, 0.2493, 0.5541, {0.255, 0.249, 0.103}),
        row("thigh", "knee", "shank", true, 1, 0.0, 0.1416, 0.2425, 0.5905, {0.329, 0.329, 0.149}),
        row("pelvis", "hip", "thigh", true, 1, 0.0, 0.1117, 0.0837, 0.3885, {0.551, 0.615, 0.587}),
        row("abdomen", "lumbar", "pelvis", false, 1, 0.0, 0.1633, 0.1238, 0.5498, {0.383, 0.482, 0.468}),
        row("thorax", "thoracic", "abdomen", false, 1, 0.0, 0.1596, 0.0980, 0.7001, {0.454, 0.716, 0.659}),
        row("head", "cervical", "thorax", false, 1, 0.0, 0.0694, 0.1395, 0.4998, {0.315, 0.303, 0.261}),
        row("r_upper_arm", "r_shoulder", "thorax", false, -1, -0.13, 0.0271, 0.1618, 0.5772, {0.269, 0.285, 0.158}),
        row("r_forearm", "r_elbow", "r_upper_arm", false, -1, 0.0, 0.0162, 0.1545, 0.4574, {0.265, 0.276, 0.121}),
        row("r_hand", "r_wrist", "r_forearm", false, -1, 0.0, 0.0061, 0.1080, 0.3624, {0.235, 0.290, 0.185}),
        row("l_upper_arm", "l_shoulder", "thorax", false, -1, 0.13, 0.0271, 0.1618, 0.5772, {0.269, 0.285, 0.158}),
        row("l_forearm", "l_elbow", "l_upper_arm", false, -1, 0.0, 0.0162, 0.1545, 0.4574, {0.265, 0.276, 0.121}),
        row("l_hand", "l_wrist", "l_forearm", false, -1, 0.0, 0.0061, 0.1080, 0.3624, {0.235, 0.290, 0.185}),
    };
    return t;
}

/// Scales the table by stature and body mass. Joint ranges and viscoelastic
/// coefficients come from `joints`, looked up by joint name.
inline BodyModel build_from_anthropometrics(double height, double mass, const AnthropometricTable& table,
                                            const JointTable& joints = default_joint_table()) {
    if (!(height > 0.0)) throw ContractError("height must be > 0");
    if (!(mass > 0.0)) throw ContractError("mass must be > 0");
    validate(table);

    BodyModel model;
    model.name = "anthropometric";
    model.end_effector = table.end_effector;
    for (const auto& r : table.rows) {
        Segment s;
        s.name = r.segment;
        s.mass = r.mass_fraction * mass;
        s.length = r.length_fraction * height;
        s.axis = Vec3(0.0, 0.0, r.direction);
        s.com_offset = s.axis * (r.com_fraction * s.length);
        for (int a = 0; a < 3; ++a) {
            double radius = r.gyration[a] * s.length;
            s.inertia(a, a) = s.mass * radius * radius;
        }
        model.segments.push_back(s);

        auto jt = joints.find(r.joint);
        if (jt == joints.end()) throw ConfigError("joint table has no entry for joint '" + r.joint + "'");
        JointSpec j;
        j.name = r.joint;
        j.parent = r.parent;
        j.child = r.segment;
        j.reversed = r.reversed;
        j.dof = jt->second;
        model.joints.push_back(j);
    }
    // Joint origins sit on the parent's distal end, shifted laterally.
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        auto& j = model.joints[i];
        Vec3 lateral(0.0, table.rows[i].lateral_fraction * height, 0.0);
        if (j.parent == kGround) {
            j.origin = lateral;
        } else {
            auto p = model.segment_index(j.parent);
            if (!p) throw ConfigError("anthropometric row '" + j.child + "': unknown parent '" + j.parent + "'");
            j.origin = model.segments[*p].distal() + lateral;
        }
    }
    validate(model);
    return model;
}

/// One-leg approximation of a two-leg stance: thigh and shank mass and inertia
/// are doubled. Not idempotent.
inline BodyModel double_leg_masses(BodyModel model) {
    for (const char* name : {"thigh", "shank"}) {
        auto i = model.segment_index(name);
        if (!i) throw ConfigError(std::string("double_leg_masses: model has no '") + name + "' segment");
        model.segments[*i].mass *= 2.0;
        model.segments[*i].inertia *= 2.0;
    }
    return model;
}

/// The shipped reaching model: mean subject stature/mass, one leg with doubled
/// mass properties.
inline constexpr double kSubjectHeight = 1.6912;
inline constexpr double kSubjectMass = 68.59;

inline BodyModel default_model() {
    BodyModel m = double_leg_masses(
        build_from_anthropometrics(kSubjectHeight, kSubjectMass, default_anthropometric_table()));
    m.name = "default";
    return m;
}

} // namespace reach
