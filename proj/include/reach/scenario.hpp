#pragma once

// Scenario driver: model construction, target placement from a virtual
// posture, lambda0 calibration from a min-error primary run, optimisation of
// one strategy and the strategy x target comparison grid.

#include "reach/model_io.hpp"
#include "reach/reaching.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace reach {

// ---------------------------------------------------------------------------
// Presets and targets

inline constexpr const char* kPresetFull = "full";          // every unlocked DoF
inline constexpr const char* kPresetAllDof = "all-dof";     // every DoF, locked ones included
inline constexpr const char* kPresetPlanar6 = "planar-6dof";

/// Sagittal-plane desk-scale set: ankle, knee, hip, lumbar, right shoulder
/// and right elbow flexion.
inline std::vector<std::size_t> planar_6dof(const BodyModel& m) {
    std::vector<std::size_t> out;
    for (const char* j : {"ankle", "knee", "hip", "lumbar", "r_shoulder", "r_elbow"})
        out.push_back(m.dof_index(j, Plane::Flexion));
    return out;
}

inline std::vector<std::size_t> preset_dofs(const BodyModel& m, const std::string& preset) {
    if (preset == kPresetFull) return unlocked_dofs(m);
    if (preset == kPresetAllDof) return all_dofs(m);
    if (preset == kPresetPlanar6) return planar_6dof(m);
    throw ConfigError("unknown preset '" + preset + "' (expected full, all-dof or planar-6dof)");
}

/// Lumbar and thoracic share trunk flexion in proportion to their flexion
/// ranges (43:27).
inline constexpr double kLumbarShare = 43.0 / 70.0;
inline constexpr double kThoracicShare = 27.0 / 70.0;

/// Posture used to place targets: trunk flexed, right shoulder flexed 90 deg,
/// right elbow extended, everything else neutral.
inline VecX virtual_reach_posture(const BodyModel& m, double trunk_flexion_deg) {
    VecX q = m.neutral_posture();
    q[m.dof_index("lumbar", Plane::Flexion)] = kLumbarShare * trunk_flexion_deg;
    q[m.dof_index("thoracic", Plane::Flexion)] = kThoracicShare * trunk_flexion_deg;
    q[m.dof_index("r_shoulder", Plane::Flexion)] = -90.0;  // forward flexion is negative
    q[m.dof_index("r_elbow", Plane::Flexion)] = 0.0;
    for (Eigen::Index k = 0; k < q.size(); ++k) {
        const auto& d = m.dof(static_cast<std::size_t>(k));
        if (q[k] < d.lower || q[k] > d.upper)
            throw ConfigError("virtual posture for trunk flexion " + std::to_string(trunk_flexion_deg) +
                              " deg violates the range of " + m.dof_name(static_cast<std::size_t>(k)));
    }
    return q;
}

inline Vec3 place_target(const Skeleton& sk, double trunk_flexion_deg) {
    return forward_kinematics(sk, virtual_reach_posture(sk.model(), trunk_flexion_deg)).end_effector;
}

/// Movement durations of the high, middle and low reaches.
inline std::optional<double> default_duration(double trunk_flexion_deg) {
    if (trunk_flexion_deg == 15.0) return 0.56;
    if (trunk_flexion_deg == 30.0) return 0.575;
    if (trunk_flexion_deg == 60.0) return 0.68;
    return std::nullopt;
}

inline std::string target_label(double trunk_flexion_deg) {
    if (trunk_flexion_deg == 15.0) return "high";
    if (trunk_flexion_deg == 30.0) return "middle";
    if (trunk_flexion_deg == 60.0) return "low";
    return "flex" + std::to_string(static_cast<int>(std::lround(trunk_flexion_deg)));
}

// ---------------------------------------------------------------------------
// Configuration

struct ModelSource {
    std::optional<std::string> file;  // model file; otherwise built from anthropometrics
    double height = kSubjectHeight;
    double mass = kSubjectMass;
    std::optional<std::string> table;        // anthropometric table file
    std::optional<std::string> joint_table;  // joint range / viscoelasticity file
    bool double_legs = true;
};

struct ScenarioConfig {
    std::string name = "scenario";
    ModelSource model;
    std::string preset = kPresetFull;
    std::optional<Vec3> target_position;
    std::optional<double> trunk_flexion;
    std::optional<double> duration;
    Strategy strategy = Strategy::MinError;
    std::optional<double> lambda0_power;  // nullopt: calibrate
    std::optional<double> lambda0_com;
    double lambda0_power_fallback = 0.0;  // used if calibration fails
    double lambda0_com_fallback = 0.0;
    double penalty_weight = kDefaultPenaltyWeight;
    OptimizerConfig optimizer;
    std::string output_dir = "out";

    void check() const {
        if (target_position.has_value() == trunk_flexion.has_value())
            throw ConfigError("scenario '" + name + "': give exactly one of target.position or target.trunk_flexion");
        if (resolved_duration() <= 0.0) throw ConfigError("scenario '" + name + "': duration must be > 0");
        if ((lambda0_power && *lambda0_power < 0.0) || (lambda0_com && *lambda0_com < 0.0))
            throw ConfigError("scenario '" + name + "': lambda0 values must be >= 0");
        optimizer.check();
    }

    double resolved_duration() const {
        if (duration) return *duration;
        if (trunk_flexion) {
            if (auto d = default_duration(*trunk_flexion)) return *d;
        }
        throw ConfigError("scenario '" + name + "': duration is required for this target");
    }
};

inline BodyModel build_model(const ModelSource& src) {
    if (src.file) return load_model(*src.file);
    AnthropometricTable table = src.table ? load_anthropometric_table(*src.table) : default_anthropometric_table();
    JointTable joints = src.joint_table ? load_joint_table(*src.joint_table) : default_joint_table();
    BodyModel m = build_from_anthropometrics(src.height, src.mass, table, joints);
    if (src.double_legs) m = double_leg_masses(std::move(m));
    m.name = "default";
    return m;
}

inline ScenarioConfig parse_scenario(const YAML::Node& root) {
    using namespace yaml_detail;
    ScenarioConfig c;
    if (root["name"]) c.name = root["name"].as<std::string>();
    if (auto m = root["model"]) {
        if (m["file"]) c.model.file = m["file"].as<std::string>();
        c.model.height = get_double_or(m, "height", "model", c.model.height);
        c.model.mass = get_double_or(m, "mass", "model", c.model.mass);
        if (m["table"]) c.model.table = m["table"].as<std::string>();
        if (m["joint_table"]) c.model.joint_table = m["joint_table"].as<std::string>();
        c.model.double_legs = get_bool_or(m, "double_legs", "model", true);
    }
    if (root["preset"]) c.preset = root["preset"].as<std::string>();
    auto target = require(root, "target", "scenario");
    if (target["position"]) c.target_position = get_vec3(target, "position", "target");
    if (target["trunk_flexion"]) c.trunk_flexion = get_double(target, "trunk_flexion", "target");
    if (root["duration"]) c.duration = get_double(root, "duration", "scenario");
    if (root["strategy"]) c.strategy = parse_strategy(root["strategy"].as<std::string>());
    if (auto l = root["lambda0"]) {
        auto value = [&](const char* key, std::optional<double>& out) {
            YAML::Node n = l[key];
            if (!n || (n.IsScalar() && n.Scalar() == "auto")) return;
            out = parse_number(n, std::string("lambda0.") + key);
        };
        value("power", c.lambda0_power);
        value("com", c.lambda0_com);
        c.lambda0_power_fallback = get_double_or(l, "power_fallback", "lambda0", 0.0);
        c.lambda0_com_fallback = get_double_or(l, "com_fallback", "lambda0", 0.0);
    }
    c.penalty_weight = get_double_or(root, "penalty_weight", "scenario", c.penalty_weight);
    if (auto o = root["optimizer"]) {
        auto& oc = c.optimizer;
        oc.eps_param = get_double_or(o, "eps_param", "optimizer", oc.eps_param);
        oc.eps_cost = get_double_or(o, "eps_cost", "optimizer", oc.eps_cost);
        oc.error_tolerance = get_double_or(o, "error_tolerance", "optimizer", oc.error_tolerance);
        oc.max_iterations = static_cast<int>(get_double_or(o, "max_iterations", "optimizer", oc.max_iterations));
        oc.fd_step = get_double_or(o, "fd_step", "optimizer", oc.fd_step);
        oc.sigma0 = get_double_or(o, "sigma0", "optimizer", oc.sigma0);
        oc.sigma_up = get_double_or(o, "sigma_up", "optimizer", oc.sigma_up);
        oc.sigma_down = get_double_or(o, "sigma_down", "optimizer", oc.sigma_down);
        oc.shrink = get_double_or(o, "shrink", "optimizer", oc.shrink);
        oc.max_trials = static_cast<int>(get_double_or(o, "max_trials", "optimizer", oc.max_trials));
        oc.threads = static_cast<unsigned>(get_double_or(o, "threads", "optimizer", oc.threads));
    }
    if (root["output"]) c.output_dir = root["output"].as<std::string>();
    c.check();
    return c;
}

/// Relative model, table and joint-table paths are taken from the scenario
/// file's directory.
inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
    try {
        ScenarioConfig c = parse_scenario(yaml_detail::load_file(path));
        auto anchor = [&](std::optional<std::string>& f) {
            if (f && std::filesystem::path(*f).is_relative()) f = (path.parent_path() / *f).lexically_normal().string();
        };
        anchor(c.model.file);
        anchor(c.model.table);
        anchor(c.model.joint_table);
        return c;
    } catch (const YAML::Exception& e) {
        throw ParseError("'" + path.string() + "': " + e.msg, e.mark.line + 1);
    } catch (const ParseError& e) {
        if (e.message().rfind("'" + path.string() + "'", 0) == 0) throw;
        throw ParseError("'" + path.string() + "': " + e.message(), e.line());
    }
}

// ---------------------------------------------------------------------------
// Running

struct Calibration {
    double lambda0_power = 0.0;
    double lambda0_com = 0.0;
    bool ran_primary = false;
    bool power_failed = false;
    bool com_failed = false;
    double primary_power = 0.0;  // integrals measured on the primary run
    double primary_com = 0.0;
    std::optional<OptResult> primary;
};

struct MovementSummary {
    double final_error = 0.0;          // m
    double total_power_squared = 0.0;  // J^2
    double final_com_squared = 0.0;    // m^2
    Vec3 final_com_displacement = Vec3::Zero();  // m
    double total_energy = 0.0;         // J
    double p6_norm = 0.0;
    double composite = 0.0;
};

struct SimulationResult {
    ScenarioConfig config;
    std::shared_ptr<const Skeleton> skeleton;
    ParamLayout layout;
    Vec3 target = Vec3::Zero();
    Calibration calibration;
    OptResult optimization;
    MovementEvaluation movement;
    CartesianPath min_jerk;
    MovementSummary summary;
};

inline MovementSummary summarize(const MovementEvaluation& mv, const ParamLayout& layout, const VecX& p) {
    MovementSummary s;
    s.final_error = mv.cost.e_f.norm();
    s.total_power_squared = mv.dynamics.total_power_squared;
    s.final_com_squared = mv.dynamics.final_com_squared;
    s.final_com_displacement = mv.dynamics.com.back() - mv.dynamics.com.front();
    s.total_energy = mv.dynamics.total_energy;
    double p6 = 0.0;
    for (std::size_t i = 0; i < layout.active.size(); ++i) p6 += p[2 * i + 1] * p[2 * i + 1];
    s.p6_norm = std::sqrt(p6);
    s.composite = mv.cost.composite;
    return s;
}

struct PreparedScenario {
    std::shared_ptr<const Skeleton> skeleton;
    ParamLayout layout;
    Vec3 target;
};

inline PreparedScenario prepare(const ScenarioConfig& cfg, std::shared_ptr<const Skeleton> skeleton = nullptr) {
    cfg.check();
    PreparedScenario ps;
    ps.skeleton = skeleton ? std::move(skeleton) : std::make_shared<const Skeleton>(build_model(cfg.model));
    const auto& m = ps.skeleton->model();
    ps.layout = make_layout(m, preset_dofs(m, cfg.preset), cfg.resolved_duration());
    ps.target = cfg.target_position ? *cfg.target_position : place_target(*ps.skeleton, *cfg.trunk_flexion);
    return ps;
}

inline CostSpec cost_spec(const ScenarioConfig& cfg, const Vec3& target, Strategy strategy, double lp, double lc) {
    CostSpec spec;
    spec.strategy = strategy;
    spec.lambda0_power = lp;
    spec.lambda0_com = lc;
    spec.target = target;
    spec.duration = cfg.resolved_duration();
    spec.tolerance_error = cfg.optimizer.error_tolerance;
    return spec;
}

/// Runs the min-error primary simulation and inverts its physiological
/// integrals. Explicit lambda0 values in the config take precedence.
inline Calibration calibrate(const ScenarioConfig& cfg, const PreparedScenario& ps, bool force = false) {
    Calibration cal;
    const bool need_power = !cfg.lambda0_power && (force || uses_power(cfg.strategy));
    const bool need_com = !cfg.lambda0_com && (force || uses_com(cfg.strategy));
    cal.lambda0_power = cfg.lambda0_power.value_or(cfg.lambda0_power_fallback);
    cal.lambda0_com = cfg.lambda0_com.value_or(cfg.lambda0_com_fallback);
    if (!need_power && !need_com) return cal;

    ReachingObjective primary(ps.skeleton, ps.layout, cost_spec(cfg, ps.target, Strategy::MinError, 0.0, 0.0),
                              cfg.penalty_weight);
    cal.primary = optimize(primary.problem(), initial_params(ps.layout), cfg.optimizer);
    cal.ran_primary = true;
    auto mv = primary.evaluate_full(cal.primary->params);
    cal.primary_power = mv.cost.phys_power;
    cal.primary_com = mv.cost.phys_com;
    if (need_power) {
        try {
            cal.lambda0_power = calibrate_lambda0(cal.primary_power);
        } catch (const CalibrationError&) {
            cal.power_failed = true;
        }
    }
    if (need_com) {
        try {
            cal.lambda0_com = calibrate_lambda0(cal.primary_com);
        } catch (const CalibrationError&) {
            cal.com_failed = true;
        }
    }
    return cal;
}

inline SimulationResult run_prepared(const ScenarioConfig& cfg, const PreparedScenario& ps, const Calibration& cal) {
    SimulationResult r;
    r.config = cfg;
    r.skeleton = ps.skeleton;
    r.layout = ps.layout;
    r.target = ps.target;
    r.calibration = cal;
    ReachingObjective obj(ps.skeleton, ps.layout,
                          cost_spec(cfg, ps.target, cfg.strategy, cal.lambda0_power, cal.lambda0_com),
                          cfg.penalty_weight);
    r.optimization = optimize(obj.problem(), initial_params(ps.layout), cfg.optimizer);
    r.movement = obj.evaluate_full(r.optimization.params);
    r.min_jerk = min_jerk_reference(r.movement.dynamics.end_effector.front(), ps.target, ps.layout.duration);
    r.summary = summarize(r.movement, ps.layout, obj.clamp(r.optimization.params));
    return r;
}

/// build model -> place target -> (primary run + calibration) -> optimise -> evaluate.
inline SimulationResult run_scenario(const ScenarioConfig& cfg) {
    PreparedScenario ps = prepare(cfg);
    return run_prepared(cfg, ps, calibrate(cfg, ps));
}

// ---------------------------------------------------------------------------
// Strategy comparison

struct ComparisonCell {
    std::string target;
    Strategy strategy = Strategy::MinError;
    bool ok = false;
    std::string note;  // failure message or termination reason
    MovementSummary summary;
    double wall_time = 0.0;
    std::optional<SimulationResult> result;
};

struct ComparisonReport {
    std::vector<std::string> targets;
    std::vector<Strategy> strategies;
    std::vector<ComparisonCell> cells;  // target-major

    const ComparisonCell& cell(const std::string& target, Strategy s) const {
        for (const auto& c : cells)
            if (c.target == target && c.strategy == s) return c;
        throw std::out_of_range("no comparison cell for " + target + "/" + std::string(to_string(s)));
    }
};

/// Runs every strategy on every target. One calibration per target is shared
/// by its strategies; failures are recorded per cell.
inline ComparisonReport compare_strategies(const std::vector<ScenarioConfig>& targets,
                                           const std::vector<Strategy>& strategies, bool keep_results = false) {
    ComparisonReport rep;
    rep.strategies = strategies;
    std::shared_ptr<const Skeleton> shared;
    for (const auto& base : targets) {
        const std::string label = base.trunk_flexion ? target_label(*base.trunk_flexion) : base.name;
        rep.targets.push_back(label);
        std::optional<PreparedScenario> ps;
        std::optional<Calibration> cal;
        std::string setup_error;
        try {
            ps = prepare(base, shared);
            shared = ps->skeleton;
            bool any_phys = false;
            for (auto s : strategies) any_phys = any_phys || s != Strategy::MinError;
            ScenarioConfig c = base;
            cal = any_phys ? calibrate(c, *ps, true) : calibrate(c, *ps, false);
        } catch (const std::exception& e) {
            setup_error = e.what();
        }
        for (auto s : strategies) {
            ComparisonCell cell;
            cell.target = label;
            cell.strategy = s;
            if (!setup_error.empty()) {
                cell.note = setup_error;
                rep.cells.push_back(std::move(cell));
                continue;
            }
            try {
                ScenarioConfig c = base;
                c.strategy = s;
                auto r = run_prepared(c, *ps, *cal);
                cell.ok = true;
                cell.note = std::string(to_string(r.optimization.reason));
                cell.summary = r.summary;
                cell.wall_time = r.optimization.wall_time;
                if (keep_results) cell.result = std::move(r);
            } catch (const std::exception& e) {
                cell.note = e.what();
            }
            rep.cells.push_back(std::move(cell));
        }
    }
    return rep;
}

} // namespace reach
