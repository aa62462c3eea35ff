#pragma once

// Sixth-order polynomial joint controller and the minimum-jerk reference.
//
// Each active DoF is driven by
//     theta(t) = p0 + p3 t^3 + p4 t^4 + p5 t^5 + p6 t^6
// with p0..p5 fixed by rest-to-rest boundary conditions, leaving the final
// angle theta_f and p6 as the tunable pair. Angles in degrees, p6 in deg/s^6.

#include "reach/body_model.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace reach {

struct PolynomialCoefficients {
    std::array<double, 7> p{};

    double position(double t) const {
        double v = 0.0;
        for (int k = 6; k >= 0; --k) v = v * t + p[k];
        return v;
    }
    double velocity(double t) const {
        double v = 0.0;
        for (int k = 6; k >= 1; --k) v = v * t + k * p[k];
        return v;
    }
    double acceleration(double t) const {
        double v = 0.0;
        for (int k = 6; k >= 2; --k) v = v * t + k * (k - 1) * p[k];
        return v;
    }
    double jerk(double t) const {
        double v = 0.0;
        for (int k = 6; k >= 3; --k) v = v * t + k * (k - 1) * (k - 2) * p[k];
        return v;
    }
};

/// Coefficients satisfying theta(0)=theta0, theta(tf)=thetaf and zero
/// velocity and acceleration at both ends, for a given p6.
inline PolynomialCoefficients closure_coefficients(double theta0, double thetaf, double p6, double tf) {
    if (!(tf > 0.0)) throw ContractError("closure_coefficients: t_f must be > 0");
    const double delta = thetaf - theta0;
    const double tf3 = tf * tf * tf;
    const double tf6 = tf3 * tf3;
    PolynomialCoefficients c;
    c.p[0] = theta0;
    c.p[3] = (10.0 * delta - p6 * tf6) / tf3;
    c.p[4] = (-15.0 * delta + 3.0 * p6 * tf6) / (tf3 * tf);
    c.p[5] = (6.0 * delta - 3.0 * p6 * tf6) / (tf3 * tf * tf);
    c.p[6] = p6;
    return c;
}

/// round(tf/step)+1 samples spaced by `step`; the last sample is exactly tf.
inline std::vector<double> time_grid(double tf, double step = kDefaultStep) {
    if (!(tf > 0.0) || !(step > 0.0)) throw ContractError("time_grid: t_f and step must be > 0");
    auto n = static_cast<std::size_t>(std::llround(tf / step)) + 1;
    if (n < 2) n = 2;
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) * step;
    t.back() = tf;
    return t;
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Sampled joint motion: one row per time sample, one column per DoF.
struct JointTrajectory {
    std::vector<double> time;
    RowMatrix angle;         // deg
    RowMatrix velocity;      // deg/s
    RowMatrix acceleration;  // deg/s^2

    std::size_t samples() const { return time.size(); }
    std::size_t dofs() const { return static_cast<std::size_t>(angle.cols()); }
};

/// Single-DoF sampling of the polynomial and its analytic derivatives.
inline JointTrajectory eval_trajectory(const PolynomialCoefficients& c, double tf, double step = kDefaultStep) {
    JointTrajectory traj;
    traj.time = time_grid(tf, step);
    const auto n = static_cast<Eigen::Index>(traj.time.size());
    traj.angle.resize(n, 1);
    traj.velocity.resize(n, 1);
    traj.acceleration.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        double t = traj.time[static_cast<std::size_t>(i)];
        traj.angle(i, 0) = c.position(t);
        traj.velocity(i, 0) = c.velocity(t);
        traj.acceleration(i, 0) = c.acceleration(t);
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Whole-body parameterisation

/// Which DoF are tuned. Parameters are stored per active DoF as the pair
/// (theta_f, p6), so p = [thf_0, p6_0, thf_1, p6_1, ...]. Inactive DoF stay at
/// their starting angle.
struct ParamLayout {
    std::vector<std::size_t> active;  // global DoF indices
    VecX start;                        // theta0 for every DoF, deg
    double duration = 0.0;             // t_f, s

    std::size_t size() const { return 2 * active.size(); }
};

/// Active set excluding DoF locked by their joint limits.
inline std::vector<std::size_t> unlocked_dofs(const BodyModel& model) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < model.dof_count(); ++k)
        if (!model.dof(k).locked()) out.push_back(k);
    return out;
}

inline std::vector<std::size_t> all_dofs(const BodyModel& model) {
    std::vector<std::size_t> out(model.dof_count());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = k;
    return out;
}

inline ParamLayout make_layout(const BodyModel& model, std::vector<std::size_t> active, double duration) {
    if (!(duration > 0.0)) throw ContractError("movement duration must be > 0");
    for (auto k : active)
        if (k >= model.dof_count()) throw ContractError("active DoF index out of range");
    return ParamLayout{std::move(active), model.neutral_posture(), duration};
}

/// Zero-motion start point: theta_f = theta0 and p6 = 0 for every active DoF.
inline VecX initial_params(const ParamLayout& layout) {
    VecX p = VecX::Zero(static_cast<Eigen::Index>(layout.size()));
    for (std::size_t i = 0; i < layout.active.size(); ++i) p[2 * i] = layout.start[layout.active[i]];
    return p;
}

/// Final posture implied by a parameter vector.
inline VecX final_posture(const ParamLayout& layout, const VecX& p) {
    VecX q = layout.start;
    for (std::size_t i = 0; i < layout.active.size(); ++i) q[layout.active[i]] = p[2 * i];
    return q;
}

/// Full-body trajectory on the grid for parameters p.
inline JointTrajectory generate_trajectory(const ParamLayout& layout, const VecX& p, double step = kDefaultStep) {
    if (static_cast<std::size_t>(p.size()) != layout.size())
        throw ContractError("parameter vector has " + std::to_string(p.size()) + " entries, layout expects " +
                            std::to_string(layout.size()));
    JointTrajectory traj;
    traj.time = time_grid(layout.duration, step);
    const auto n = static_cast<Eigen::Index>(traj.time.size());
    const auto dofs = layout.start.size();
    traj.angle = layout.start.transpose().replicate(n, 1);
    traj.velocity = RowMatrix::Zero(n, dofs);
    traj.acceleration = RowMatrix::Zero(n, dofs);
    for (std::size_t a = 0; a < layout.active.size(); ++a) {
        const auto k = static_cast<Eigen::Index>(layout.active[a]);
        auto c = closure_coefficients(layout.start[k], p[2 * a], p[2 * a + 1], layout.duration);
        for (Eigen::Index i = 0; i < n; ++i) {
            double t = traj.time[static_cast<std::size_t>(i)];
            traj.angle(i, k) = c.position(t);
            traj.velocity(i, k) = c.velocity(t);
            traj.acceleration(i, k) = c.acceleration(t);
        }
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Minimum-jerk reference

/// Normalised quintic profile s(tau) = 10 tau^3 - 15 tau^4 + 6 tau^5 and its
/// first three derivatives with respect to tau.
inline std::array<double, 4> min_jerk_profile(double tau) {
    const double t2 = tau * tau, t3 = t2 * tau, t4 = t3 * tau, t5 = t4 * tau;
    return {10 * t3 - 15 * t4 + 6 * t5, 30 * t2 - 60 * t3 + 30 * t4, 60 * tau - 180 * t2 + 120 * t3,
            60 - 360 * tau + 360 * t2};
}

inline void check_min_jerk_args(double T, double t) {
    if (!(T > 0.0)) throw ContractError("min-jerk duration must be > 0");
    if (t < 0.0 || t > T) throw ContractError("min-jerk time outside [0, T]");
}

inline Vec3 min_jerk_position(const Vec3& x0, const Vec3& xf, double T, double t) {
    check_min_jerk_args(T, t);
    const double s = min_jerk_profile(t / T)[0];
    return (1.0 - s) * x0 + s * xf;  // exact at both ends and at T/2
}

inline Vec3 min_jerk_velocity(const Vec3& x0, const Vec3& xf, double T, double t) {
    check_min_jerk_args(T, t);
    return (xf - x0) * (min_jerk_profile(t / T)[1] / T);
}

inline Vec3 min_jerk_acceleration(const Vec3& x0, const Vec3& xf, double T, double t) {
    check_min_jerk_args(T, t);
    return (xf - x0) * (min_jerk_profile(t / T)[2] / (T * T));
}

inline Vec3 min_jerk_jerk(const Vec3& x0, const Vec3& xf, double T, double t) {
    check_min_jerk_args(T, t);
    return (xf - x0) * (min_jerk_profile(t / T)[3] / (T * T * T));
}

struct CartesianPath {
    std::vector<double> time;
    std::vector<Vec3> position, velocity, acceleration, jerk;
};

/// Minimum-jerk end-effector path sampled on the standard grid.
inline CartesianPath min_jerk_reference(const Vec3& x0, const Vec3& xf, double T, double step = kDefaultStep) {
    CartesianPath path;
    path.time = time_grid(T, step);
    for (double t : path.time) {
        path.position.push_back(min_jerk_position(x0, xf, T, t));
        path.velocity.push_back(min_jerk_velocity(x0, xf, T, t));
        path.acceleration.push_back(min_jerk_acceleration(x0, xf, T, t));
        path.jerk.push_back(min_jerk_jerk(x0, xf, T, t));
    }
    return path;
}

} // namespace reach
