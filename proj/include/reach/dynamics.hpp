#pragma once

// Algebraic inverse dynamics of the open tree (recursive Newton-Euler),
// passive joint viscoelasticity and movement-level power/COM summaries.
//
// The base joint is fixed to ground, so ground reaction is the base
// constraint force and never appears in joint torques.

#include "reach/controller.hpp"
#include "reach/kinematics.hpp"

#include <span>
#include <vector>

namespace reach {

struct DynamicsOptions {
    double gravity = kGravity;   // m/s^2, acting along -z
    bool viscoelastic = true;    // add K (theta - neutral) + B theta_dot
};

/// Passive torque of one DoF; angle measured from the neutral posture.
inline double viscoelastic_torque(const DofSpec& d, double theta_deg, double rate_deg_s) {
    return d.stiffness * (theta_deg - d.neutral) + d.damping * rate_deg_s;
}

struct SampleDynamics {
    VecX torque;   // N m, per DoF
    Vec3 com = Vec3::Zero();
    Vec3 end_effector = Vec3::Zero();
};

namespace detail {

inline void check_finite(std::span<const double> v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw ContractError(std::string("inverse_dynamics: non-finite ") + what);
}

} // namespace detail

/// Joint torques for one sample. Angles in deg, rates in deg/s and deg/s^2.
inline SampleDynamics inverse_dynamics(const Skeleton& sk, std::span<const double> q, std::span<const double> qd,
                                       std::span<const double> qdd, const DynamicsOptions& opts = {}) {
    const auto n = sk.dof_count();
    if (q.size() != n || qd.size() != n || qdd.size() != n)
        throw ContractError("inverse_dynamics: state vectors must have " + std::to_string(n) + " entries");
    detail::check_finite(q, "angle");
    detail::check_finite(qd, "velocity");
    detail::check_finite(qdd, "acceleration");

    const auto& m = sk.model();
    const auto& topo = sk.topology();
    const std::size_t nseg = m.segments.size();
    const std::size_t njoint = m.joints.size();

    std::vector<Mat3> rot(nseg);
    std::vector<Vec3> origin(nseg), omega(nseg), alpha(nseg), accel(nseg);
    std::vector<std::array<Vec3, 3>> axes(njoint);

    // Outward pass. Gravity enters as an upward acceleration of the ground.
    const Vec3 ground_accel(0.0, 0.0, opts.gravity);
    for (std::size_t j = 0; j < njoint; ++j) {
        const int ps = topo.parent_segment[j];
        const int cs = topo.child_segment[j];
        Mat3 r = Mat3::Identity();
        Vec3 o = Vec3::Zero(), w = Vec3::Zero(), dw = Vec3::Zero(), a = ground_accel;
        const Vec3& off = m.joints[j].origin;
        if (ps >= 0) {
            r = rot[ps];
            Vec3 d = r * off;
            o = origin[ps] + d;
            w = omega[ps];
            dw = alpha[ps];
            a = accel[ps] + dw.cross(d) + w.cross(w.cross(d));
        } else {
            o = off;
        }
        const auto& f = sk.factors(j);
        for (int k = 0; k < 3; ++k) {
            Vec3 axis_w = r * f[k].axis;
            axes[j][k] = axis_w;
            const double rate = deg2rad(qd[f[k].dof]);
            const double acc = deg2rad(qdd[f[k].dof]);
            dw += acc * axis_w + w.cross(rate * axis_w);
            w += rate * axis_w;
            r = r * axis_rotation(f[k].axis, deg2rad(q[f[k].dof]));
        }
        rot[cs] = r;
        origin[cs] = o;
        omega[cs] = w;
        alpha[cs] = dw;
        accel[cs] = a;
    }

    // Inward pass: force and moment (about the joint centre) each joint
    // transmits from parent to child.
    std::vector<Vec3> force(nseg, Vec3::Zero()), moment(nseg, Vec3::Zero());
    SampleDynamics out;
    out.torque = VecX::Zero(static_cast<Eigen::Index>(n));
    Vec3 com_sum = Vec3::Zero();
    double mass_sum = 0.0;
    for (std::size_t jj = njoint; jj-- > 0;) {
        const int cs = topo.child_segment[jj];
        const int ps = topo.parent_segment[jj];
        const auto& s = m.segments[cs];
        const Mat3& r = rot[cs];
        const Vec3 c = r * s.com_offset;
        const Vec3 ac = accel[cs] + alpha[cs].cross(c) + omega[cs].cross(omega[cs].cross(c));
        const Mat3 inertia_w = r * s.inertia * r.transpose();
        const Vec3 f_body = s.mass * ac;
        const Vec3 n_body = inertia_w * alpha[cs] + omega[cs].cross(inertia_w * omega[cs]);
        force[cs] += f_body;
        moment[cs] += n_body + c.cross(f_body);
        com_sum += s.mass * (origin[cs] + c);
        mass_sum += s.mass;

        const auto& f = sk.factors(jj);
        for (int k = 0; k < 3; ++k) out.torque[f[k].dof] = moment[cs].dot(axes[jj][k]);

        if (ps >= 0) {
            const Vec3 lever = origin[cs] - origin[ps];
            force[ps] += force[cs];
            moment[ps] += moment[cs] + lever.cross(force[cs]);
        }
    }

    if (opts.viscoelastic)
        for (std::size_t k = 0; k < n; ++k) out.torque[k] += viscoelastic_torque(m.dof(k), q[k], qd[k]);

    out.com = com_sum / mass_sum;
    const auto ee = topo.end_effector;
    out.end_effector = origin[ee] + rot[ee] * m.segments[ee].distal();
    return out;
}

struct PowerSample {
    VecX per_dof;          // W
    double total_abs = 0.0; // W, sum of |tau_i * omega_i|
};

/// Joint power from torque (N m) and joint rate. `rate_is_degrees` converts
/// deg/s to rad/s first.
inline PowerSample joint_power(const VecX& torque, const VecX& rate, bool rate_is_degrees = true) {
    if (torque.size() != rate.size()) throw ContractError("joint_power: length mismatch");
    PowerSample p;
    p.per_dof = torque.cwiseProduct(rate_is_degrees ? VecX(rate * deg2rad(1.0)) : rate);
    for (Eigen::Index i = 0; i < p.per_dof.size(); ++i) p.total_abs += std::abs(p.per_dof[i]);
    return p;
}

/// Trapezoid rule on a (possibly non-uniform) grid.
inline double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

struct DynamicsOutput {
    std::vector<double> time;
    RowMatrix torque;             // N m
    RowMatrix power;              // W, per DoF
    std::vector<double> total_abs_power;  // W
    std::vector<Vec3> com;
    std::vector<Vec3> end_effector;

    double total_power_squared = 0.0;  // J^2 (W^2 s): integral of P^T P
    double final_com_squared = 0.0;    // m^2: |com(tf) - com(0)|^2
    double com_integral = 0.0;         // m^2 s: integral of |com(t) - com(0)|^2
    double total_energy = 0.0;         // J: integral of total_abs_power
};

/// Inverse dynamics and forward kinematics over the whole trajectory.
/// Summation order is fixed, so results are bit-reproducible.
inline DynamicsOutput evaluate_movement(const Skeleton& sk, const JointTrajectory& traj,
                                        const DynamicsOptions& opts = {}) {
    if (traj.dofs() != sk.dof_count()) throw ContractError("evaluate_movement: trajectory DoF count mismatch");
    const std::size_t ns = traj.samples();
    const auto nd = static_cast<Eigen::Index>(sk.dof_count());
    DynamicsOutput out;
    out.time = traj.time;
    out.torque.resize(static_cast<Eigen::Index>(ns), nd);
    out.power.resize(static_cast<Eigen::Index>(ns), nd);
    out.total_abs_power.resize(ns);
    out.com.resize(ns);
    out.end_effector.resize(ns);
    std::vector<double> p2(ns), dcom2(ns);
    for (std::size_t i = 0; i < ns; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        auto span_of = [&](const RowMatrix& mat) {
            return std::span<const double>(mat.row(row).data(), static_cast<std::size_t>(nd));
        };
        auto s = inverse_dynamics(sk, span_of(traj.angle), span_of(traj.velocity), span_of(traj.acceleration), opts);
        auto pw = joint_power(s.torque, traj.velocity.row(row).transpose());
        out.torque.row(row) = s.torque.transpose();
        out.power.row(row) = pw.per_dof.transpose();
        out.total_abs_power[i] = pw.total_abs;
        out.com[i] = s.com;
        out.end_effector[i] = s.end_effector;
        p2[i] = pw.per_dof.squaredNorm();
        dcom2[i] = (s.com - out.com[0]).squaredNorm();
    }
    out.total_power_squared = trapezoid(out.time, p2);
    out.com_integral = trapezoid(out.time, dcom2);
    out.final_com_squared = dcom2.back();
    out.total_energy = trapezoid(out.time, out.total_abs_power);
    return out;
}

} // namespace reach
