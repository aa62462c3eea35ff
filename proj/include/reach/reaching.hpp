#pragma once

// The reaching objective: controller parameters -> joint trajectories ->
// kinematics/dynamics -> composite cost residuals.
//
// Joint limits are enforced twice: final angles in the parameter vector are
// clamped into range before evaluation, and intermediate samples outside the
// range add a quadratic exterior penalty to the cost bracket.

#include "reach/controller.hpp"
#include "reach/cost.hpp"
#include "reach/dynamics.hpp"
#include "reach/kinematics.hpp"
#include "reach/optimizer.hpp"

#include <memory>

namespace reach {

inline constexpr double kDefaultPenaltyWeight = 1e3;  // per deg^2

/// Clamps every theta_f entry of p into its joint range.
inline VecX clamp_final_angles(const BodyModel& model, const ParamLayout& layout, VecX p) {
    for (std::size_t i = 0; i < layout.active.size(); ++i) p[2 * i] = model.dof(layout.active[i]).clamp(p[2 * i]);
    return p;
}

/// Sum over samples and DoF of the squared excursion beyond the joint range (deg^2).
inline double limit_violation(const BodyModel& model, const JointTrajectory& traj) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < traj.angle.rows(); ++i)
        for (Eigen::Index k = 0; k < traj.angle.cols(); ++k) {
            const auto& d = model.dof(static_cast<std::size_t>(k));
            const double q = traj.angle(i, k);
            const double over = std::max({0.0, q - d.upper, d.lower - q});
            s += over * over;
        }
    return s;
}

struct MovementEvaluation {
    JointTrajectory trajectory;
    DynamicsOutput dynamics;
    CostReport cost;
};

class ReachingObjective {
public:
    ReachingObjective(std::shared_ptr<const Skeleton> skeleton, ParamLayout layout, CostSpec spec,
                      double penalty_weight = kDefaultPenaltyWeight, DynamicsOptions dynamics = {},
                      double step = kDefaultStep)
        : sk_(std::move(skeleton)), layout_(std::move(layout)), spec_(std::move(spec)),
          penalty_weight_(penalty_weight), dyn_(dynamics), step_(step) {
        spec_.check();
        if (penalty_weight_ < 0.0) throw ConfigError("penalty weight must be >= 0");
        if (spec_.dof_weights.size() != 0 && static_cast<std::size_t>(spec_.dof_weights.size()) != sk_->dof_count())
            throw ConfigError("DoF weight vector must have one entry per DoF");
    }

    const Skeleton& skeleton() const { return *sk_; }
    const ParamLayout& layout() const { return layout_; }
    const CostSpec& spec() const { return spec_; }

    VecX clamp(const VecX& p) const { return clamp_final_angles(sk_->model(), layout_, p); }

    /// Residuals at p. Only the quantities the strategy needs are computed.
    Evaluation evaluate(const VecX& p) const {
        VecX pc = clamp(p);
        JointTrajectory traj = generate_trajectory(layout_, pc, step_);
        const double penalty = penalty_weight_ * limit_violation(sk_->model(), traj);
        double power = 0.0, com = 0.0;
        Vec3 ee;
        if (uses_power(spec_.strategy)) {
            DynamicsOutput out = evaluate_movement(*sk_, traj, dyn_);
            power = physiological_power(out, spec_.dof_weights);
            com = physiological_com(out.time, out.com, spec_.com_weights);
            ee = out.end_effector.back();
        } else if (uses_com(spec_.strategy)) {
            std::vector<Vec3> track(traj.samples());
            for (std::size_t i = 0; i < traj.samples(); ++i) track[i] = forward_kinematics(*sk_, row(traj.angle, i)).com;
            com = physiological_com(traj.time, track, spec_.com_weights);
            ee = forward_kinematics(*sk_, row(traj.angle, traj.samples() - 1)).end_effector;
        } else {
            ee = forward_kinematics(*sk_, row(traj.angle, traj.samples() - 1)).end_effector;
        }
        Vec3 e = task_error(ee, spec_.target);
        Evaluation ev;
        ev.residual = cost_residuals(e, power, com, spec_, penalty);
        ev.error = e.norm();
        return ev;
    }

    /// Full evaluation at p (clamped) with every output populated.
    MovementEvaluation evaluate_full(const VecX& p) const {
        MovementEvaluation m;
        VecX pc = clamp(p);
        m.trajectory = generate_trajectory(layout_, pc, step_);
        m.dynamics = evaluate_movement(*sk_, m.trajectory, dyn_);
        const double penalty = penalty_weight_ * limit_violation(sk_->model(), m.trajectory);
        m.cost = make_report(task_error(m.dynamics.end_effector.back(), spec_.target),
                             physiological_power(m.dynamics, spec_.dof_weights),
                             physiological_com(m.dynamics.time, m.dynamics.com, spec_.com_weights), spec_, penalty);
        return m;
    }

    /// p6 moves the angle by at most p6 tf^6 / 64 (at tf/2), so its typical
    /// magnitude is 64 / tf^6.
    Problem problem() const {
        VecX scale = VecX::Ones(static_cast<Eigen::Index>(layout_.size()));
        for (Eigen::Index i = 1; i < scale.size(); i += 2) scale[i] = 64.0 / std::pow(layout_.duration, 6);
        return Problem{[this](const VecX& p) { return evaluate(p); }, [this](const VecX& p) { return clamp(p); },
                       std::move(scale)};
    }

private:
    static std::span<const double> row(const RowMatrix& m, std::size_t i) {
        return {m.row(static_cast<Eigen::Index>(i)).data(), static_cast<std::size_t>(m.cols())};
    }

    std::shared_ptr<const Skeleton> sk_;
    ParamLayout layout_;
    CostSpec spec_;
    double penalty_weight_;
    DynamicsOptions dyn_;
    double step_;
};

} // namespace reach
