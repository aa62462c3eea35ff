#pragma once

// YAML persistence for BodyModel, the anthropometric table and the joint
// table. Numbers are written with 17 significant digits so save/load is exact.
// Numeric fields also accept "a/b" fraction strings (e.g. stiffness "1/6").

#include "reach/body_model.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace reach {

namespace yaml_detail {

inline int line_of(const YAML::Node& n) { return n.Mark().line + 1; }

inline double parse_number(const YAML::Node& n, const std::string& field) {
    if (!n.IsScalar()) throw ParseError("field '" + field + "': expected a number", line_of(n));
    const std::string& s = n.Scalar();
    auto slash = s.find('/');
    auto to_double = [&](std::string_view v) {
        double out = 0.0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size())
            throw ParseError("field '" + field + "': '" + s + "' is not a number", line_of(n));
        return out;
    };
    if (slash == std::string::npos) return to_double(s);
    std::string_view sv(s);
    double den = to_double(sv.substr(slash + 1));
    if (den == 0.0) throw ParseError("field '" + field + "': zero denominator", line_of(n));
    return to_double(sv.substr(0, slash)) / den;
}

inline const YAML::Node require(const YAML::Node& parent, const std::string& key, const std::string& ctx) {
    if (!parent.IsMap()) throw ParseError(ctx + ": expected a mapping", line_of(parent));
    YAML::Node n = parent[key];
    if (!n) throw ParseError(ctx + ": missing field '" + key + "'", line_of(parent));
    return n;
}

inline double get_double(const YAML::Node& parent, const std::string& key, const std::string& ctx) {
    return parse_number(require(parent, key, ctx), ctx + "." + key);
}

inline double get_double_or(const YAML::Node& parent, const std::string& key, const std::string& ctx,
                            double fallback) {
    YAML::Node n = parent[key];
    return n ? parse_number(n, ctx + "." + key) : fallback;
}

inline std::string get_string(const YAML::Node& parent, const std::string& key, const std::string& ctx) {
    auto n = require(parent, key, ctx);
    if (!n.IsScalar()) throw ParseError(ctx + "." + key + ": expected a string", line_of(n));
    return n.Scalar();
}

inline bool get_bool_or(const YAML::Node& parent, const std::string& key, const std::string& ctx, bool fallback) {
    YAML::Node n = parent[key];
    if (!n) return fallback;
    try {
        return n.as<bool>();
    } catch (const YAML::Exception&) {
        throw ParseError(ctx + "." + key + ": expected true/false", line_of(n));
    }
}

inline Vec3 get_vec3(const YAML::Node& parent, const std::string& key, const std::string& ctx) {
    auto n = require(parent, key, ctx);
    if (!n.IsSequence() || n.size() != 3)
        throw ParseError(ctx + "." + key + ": expected a 3-element list", line_of(n));
    return {parse_number(n[0], ctx + "." + key), parse_number(n[1], ctx + "." + key),
            parse_number(n[2], ctx + "." + key)};
}

inline Mat3 get_mat3(const YAML::Node& parent, const std::string& key, const std::string& ctx) {
    auto n = require(parent, key, ctx);
    if (!n.IsSequence() || n.size() != 3)
        throw ParseError(ctx + "." + key + ": expected a 3x3 nested list", line_of(n));
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
        if (!n[r].IsSequence() || n[r].size() != 3)
            throw ParseError(ctx + "." + key + ": expected a 3x3 nested list", line_of(n[r]));
        for (int c = 0; c < 3; ++c) m(r, c) = parse_number(n[r][c], ctx + "." + key);
    }
    return m;
}

inline YAML::Node load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    try {
        YAML::Node root = YAML::Load(in);
        if (!root || root.IsNull()) throw ParseError("'" + path.string() + "' is empty");
        return root;
    } catch (const YAML::ParserException& e) {
        throw ParseError("'" + path.string() + "': " + e.msg, e.mark.line + 1);
    }
}

inline void write_file(const std::filesystem::path& path, const YAML::Emitter& out) {
    if (!out.good()) throw std::runtime_error("YAML emitter error: " + out.GetLastError());
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << out.c_str() << "\n";
}

inline void emit_vec3(YAML::Emitter& out, const Vec3& v) {
    out << YAML::Flow << YAML::BeginSeq << v[0] << v[1] << v[2] << YAML::EndSeq;
}

inline DofSpec parse_dof(const YAML::Node& n, const std::string& ctx) {
    DofSpec d;
    d.lower = get_double(n, "lower", ctx);
    d.upper = get_double(n, "upper", ctx);
    d.stiffness = get_double_or(n, "stiffness", ctx, 0.0);
    d.damping = get_double_or(n, "damping", ctx, 0.0);
    d.neutral = get_double_or(n, "neutral", ctx, 0.0);
    return d;
}

inline std::array<DofSpec, 3> parse_dofs(const YAML::Node& joint, const std::string& ctx) {
    std::array<DofSpec, 3> out;
    for (int p = 0; p < 3; ++p) {
        std::string c = ctx + "." + kPlaneNames[p];
        out[p] = parse_dof(require(joint, kPlaneNames[p], ctx), c);
    }
    return out;
}

inline void emit_dofs(YAML::Emitter& out, const std::array<DofSpec, 3>& dofs) {
    for (int p = 0; p < 3; ++p) {
        const auto& d = dofs[p];
        out << YAML::Key << kPlaneNames[p] << YAML::Value << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "lower" << YAML::Value << d.lower;
        out << YAML::Key << "upper" << YAML::Value << d.upper;
        out << YAML::Key << "stiffness" << YAML::Value << d.stiffness;
        out << YAML::Key << "damping" << YAML::Value << d.damping;
        out << YAML::Key << "neutral" << YAML::Value << d.neutral;
        out << YAML::EndMap;
    }
}

} // namespace yaml_detail

inline BodyModel parse_model(const YAML::Node& root) {
    using namespace yaml_detail;
    BodyModel m;
    m.name = root["name"] ? root["name"].as<std::string>() : "";
    m.end_effector = get_string(root, "end_effector", "model");
    auto segs = require(root, "segments", "model");
    if (!segs.IsSequence()) throw ParseError("model.segments: expected a list", line_of(segs));
    for (const auto& n : segs) {
        Segment s;
        s.name = get_string(n, "name", "segment");
        std::string ctx = "segment '" + s.name + "'";
        s.mass = get_double(n, "mass", ctx);
        s.length = get_double(n, "length", ctx);
        s.axis = get_vec3(n, "axis", ctx);
        s.com_offset = get_vec3(n, "com_offset", ctx);
        s.inertia = get_mat3(n, "inertia", ctx);
        m.segments.push_back(std::move(s));
    }
    auto joints = require(root, "joints", "model");
    if (!joints.IsSequence()) throw ParseError("model.joints: expected a list", line_of(joints));
    for (const auto& n : joints) {
        JointSpec j;
        j.name = get_string(n, "name", "joint");
        std::string ctx = "joint '" + j.name + "'";
        j.parent = get_string(n, "parent", ctx);
        j.child = get_string(n, "child", ctx);
        j.origin = get_vec3(n, "origin", ctx);
        j.reversed = get_bool_or(n, "reversed", ctx, false);
        j.dof = parse_dofs(n, ctx);
        m.joints.push_back(std::move(j));
    }
    return m;
}

/// Reads and validates a model file.
inline BodyModel load_model(const std::filesystem::path& path) {
    BodyModel m = parse_model(yaml_detail::load_file(path));
    validate(m);
    return m;
}

inline std::string model_to_yaml(const BodyModel& m) {
    using namespace yaml_detail;
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << m.name;
    out << YAML::Key << "end_effector" << YAML::Value << m.end_effector;
    out << YAML::Key << "segments" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : m.segments) {
        out << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value << s.name;
        out << YAML::Key << "mass" << YAML::Value << s.mass;
        out << YAML::Key << "length" << YAML::Value << s.length;
        out << YAML::Key << "axis" << YAML::Value;
        emit_vec3(out, s.axis);
        out << YAML::Key << "com_offset" << YAML::Value;
        emit_vec3(out, s.com_offset);
        out << YAML::Key << "inertia" << YAML::Value << YAML::BeginSeq;
        for (int r = 0; r < 3; ++r) emit_vec3(out, s.inertia.row(r).transpose());
        out << YAML::EndSeq << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "joints" << YAML::Value << YAML::BeginSeq;
    for (const auto& j : m.joints) {
        out << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value << j.name;
        out << YAML::Key << "parent" << YAML::Value << j.parent;
        out << YAML::Key << "child" << YAML::Value << j.child;
        out << YAML::Key << "origin" << YAML::Value;
        emit_vec3(out, j.origin);
        out << YAML::Key << "reversed" << YAML::Value << j.reversed;
        emit_dofs(out, j.dof);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
    if (!out.good()) throw std::runtime_error("YAML emitter error: " + out.GetLastError());
    return std::string(out.c_str()) + "\n";
}

inline void save_model(const BodyModel& m, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << model_to_yaml(m);
}

inline JointTable parse_joint_table(const YAML::Node& root) {
    using namespace yaml_detail;
    auto joints = require(root, "joints", "joint table");
    if (!joints.IsSequence()) throw ParseError("joint table: 'joints' must be a list", line_of(joints));
    JointTable t;
    for (const auto& n : joints) {
        std::string name = get_string(n, "name", "joint table entry");
        t[name] = parse_dofs(n, "joint '" + name + "'");
    }
    return t;
}

inline JointTable load_joint_table(const std::filesystem::path& path) {
    return parse_joint_table(yaml_detail::load_file(path));
}

inline AnthropometricTable parse_anthropometric_table(const YAML::Node& root) {
    using namespace yaml_detail;
    AnthropometricTable t;
    t.end_effector = get_string(root, "end_effector", "anthropometric table");
    auto rows = require(root, "segments", "anthropometric table");
    if (!rows.IsSequence()) throw ParseError("anthropometric table: 'segments' must be a list", line_of(rows));
    for (const auto& n : rows) {
        AnthropometricRow r;
        r.segment = get_string(n, "name", "anthropometric row");
        std::string ctx = "anthropometric row '" + r.segment + "'";
        r.joint = get_string(n, "joint", ctx);
        r.parent = get_string(n, "parent", ctx);
        r.reversed = get_bool_or(n, "reversed", ctx, false);
        r.direction = get_double_or(n, "direction", ctx, 1.0);
        r.lateral_fraction = get_double_or(n, "lateral_fraction", ctx, 0.0);
        r.mass_fraction = get_double(n, "mass_fraction", ctx);
        r.length_fraction = get_double(n, "length_fraction", ctx);
        r.com_fraction = get_double(n, "com_fraction", ctx);
        Vec3 g = get_vec3(n, "gyration", ctx);
        r.gyration = {g[0], g[1], g[2]};
        t.rows.push_back(std::move(r));
    }
    validate(t);
    return t;
}

inline AnthropometricTable load_anthropometric_table(const std::filesystem::path& path) {
    return parse_anthropometric_table(yaml_detail::load_file(path));
}

} // namespace reach
