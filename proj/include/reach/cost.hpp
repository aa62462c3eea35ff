#pragma once

// Composite reaching criteria with an error-adaptive weight:
//
//     C = e_f^T e_f * (1 + lambda0_p * I_power + lambda0_c * I_com)
//
// where e_f is the end-effector error at movement end and the integrals are
// physiological costs over the movement. Only the terms selected by the
// strategy enter the bracket.

#include "reach/dynamics.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace reach {

enum class Strategy { MinError, MinPower, MinCOM, MinPowerCOM };

inline constexpr std::array<Strategy, 4> kAllStrategies = {Strategy::MinError, Strategy::MinPower, Strategy::MinCOM,
                                                           Strategy::MinPowerCOM};

inline std::string_view to_string(Strategy s) {
    switch (s) {
    case Strategy::MinError: return "minError";
    case Strategy::MinPower: return "minPower";
    case Strategy::MinCOM: return "minCOM";
    case Strategy::MinPowerCOM: return "minPowerCOM";
    }
    return "?";
}

inline Strategy parse_strategy(std::string_view s) {
    for (auto st : kAllStrategies)
        if (to_string(st) == s) return st;
    throw ConfigError("unknown strategy '" + std::string(s) + "' (expected minError, minPower, minCOM or minPowerCOM)");
}

inline bool uses_power(Strategy s) { return s == Strategy::MinPower || s == Strategy::MinPowerCOM; }
inline bool uses_com(Strategy s) { return s == Strategy::MinCOM || s == Strategy::MinPowerCOM; }

struct CostSpec {
    Strategy strategy = Strategy::MinError;
    double lambda0_power = 0.0;
    double lambda0_com = 0.0;
    VecX dof_weights;                   // diagonal of R over DoF; empty = identity
    Vec3 com_weights = Vec3::Ones();    // diagonal of R over COM components
    Vec3 target = Vec3::Zero();         // m
    double duration = 0.0;              // s
    double tolerance_error = 0.002;     // m

    void check() const {
        if (lambda0_power < 0.0 || lambda0_com < 0.0) throw ConfigError("lambda0 values must be >= 0");
        if (dof_weights.size() > 0 && (dof_weights.array() < 0.0).any())
            throw ConfigError("DoF weights must be >= 0");
        if ((com_weights.array() < 0.0).any()) throw ConfigError("COM weights must be >= 0");
    }
};

struct CostReport {
    Vec3 e_f = Vec3::Zero();
    double task_error_sq = 0.0;  // m^2
    double phys_power = 0.0;     // J^2
    double phys_com = 0.0;       // m^2 s
    double penalty = 0.0;        // joint-limit penalty already scaled by its weight
    double composite = 0.0;
};

inline Vec3 task_error(const Vec3& end_effector_final, const Vec3& target) { return end_effector_final - target; }

/// Integral of P^T R P over the movement.
inline double physiological_power(const DynamicsOutput& out, const VecX& dof_weights = {}) {
    std::vector<double> y(out.time.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        auto row = out.power.row(static_cast<Eigen::Index>(i));
        y[i] = dof_weights.size() == 0 ? row.squaredNorm()
                                       : (row.array().square() * dof_weights.transpose().array()).sum();
    }
    return trapezoid(out.time, y);
}

/// Integral of d^T R_c d with d the COM displacement from t = 0.
inline double physiological_com(const std::vector<double>& time, const std::vector<Vec3>& com,
                                 const Vec3& com_weights = Vec3::Ones()) {
    std::vector<double> y(time.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        Vec3 d = com[i] - com[0];
        y[i] = (d.array().square() * com_weights.array()).sum();
    }
    return trapezoid(time, y);
}

/// The bracketed multiplier 1 + (selected lambda0 * integral terms) + penalty.
inline double cost_bracket(const CostSpec& spec, double phys_power, double phys_com, double penalty = 0.0) {
    if (phys_power < 0.0 || phys_com < 0.0 || penalty < 0.0)
        throw ContractError("composite_cost: physiological integrals must be >= 0");
    double b = 1.0 + penalty;
    if (uses_power(spec.strategy)) b += spec.lambda0_power * phys_power;
    if (uses_com(spec.strategy)) b += spec.lambda0_com * phys_com;
    return b;
}

inline double composite_cost(const Vec3& e_f, double phys_power, double phys_com, const CostSpec& spec,
                             double penalty = 0.0) {
    return e_f.squaredNorm() * cost_bracket(spec, phys_power, phys_com, penalty);
}

inline CostReport make_report(const Vec3& e_f, double phys_power, double phys_com, const CostSpec& spec,
                              double penalty = 0.0) {
    CostReport r;
    r.e_f = e_f;
    r.task_error_sq = e_f.squaredNorm();
    r.phys_power = phys_power;
    r.phys_com = phys_com;
    r.penalty = penalty;
    r.composite = composite_cost(e_f, phys_power, phys_com, spec, penalty);
    return r;
}

/// Least-squares residuals whose squared norm is the composite cost: the
/// three error components followed by one term per bracket contribution.
inline VecX cost_residuals(const Vec3& e_f, double phys_power, double phys_com, const CostSpec& spec,
                           double penalty = 0.0) {
    cost_bracket(spec, phys_power, phys_com, penalty);  // argument checks
    const double e = e_f.norm();
    VecX r(6);
    r << e_f[0], e_f[1], e_f[2],
        uses_power(spec.strategy) ? e * std::sqrt(spec.lambda0_power * phys_power) : 0.0,
        uses_com(spec.strategy) ? e * std::sqrt(spec.lambda0_com * phys_com) : 0.0, e * std::sqrt(penalty);
    return r;
}

class CalibrationError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// lambda0 = 1 / (max physiological integral), taken from a min-error run.
inline double calibrate_lambda0(double max_integral) {
    if (!(max_integral > 0.0) || !std::isfinite(max_integral))
        throw CalibrationError("calibrate_lambda0: integral must be positive and finite");
    return 1.0 / max_integral;
}

} // namespace reach
