#pragma once

// Levenberg-Marquardt search with backtracking line search over a generic
// least-squares objective C(p) = r(p)^T r(p).
//
// Step:  dp = -alpha [H + sigma I]^-1 grad C,  grad C = 2 J^T r,
// where H = 2 J^T J is the Gauss-Newton approximation of the Hessian of C,
// i.e. lm_step() is called with the Jacobian of sqrt(2) r. J comes from
// central differences. sigma is multiplied by sigma_up on a failed line
// search and by sigma_down after an accepted step.

#include "reach/common.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace reach {

struct OptimizerConfig {
    double eps_param = 1e-6;
    double eps_cost = 1e-6;
    double error_tolerance = 0.002;  // m; ignored when the objective reports no task error
    int max_iterations = 500;
    double fd_step = 1e-6;           // relative
    double sigma0 = 1e-3;
    double sigma_min = 1e-12;        // floor for the damping after accepted steps
    double sigma_up = 10.0;
    double sigma_down = 0.1;
    double shrink = 0.5;
    int max_trials = 30;
    unsigned threads = 1;            // Jacobian column probes

    void check() const {
        if (!(eps_param > 0 && eps_cost > 0 && error_tolerance > 0 && fd_step > 0 && sigma0 > 0))
            throw ConfigError("optimizer thresholds must be > 0");
        if (!(sigma_up > 1.0 && sigma_down > 0.0 && sigma_down < 1.0))
            throw ConfigError("optimizer requires sigma_up > 1 > sigma_down > 0");
        if (!(shrink > 0.0 && shrink < 1.0)) throw ConfigError("line-search shrink factor must be in (0, 1)");
        if (max_iterations < 0 || max_trials < 1) throw ConfigError("iteration limits must be positive");
    }
};

/// One objective evaluation: residual vector plus, for reaching problems, the
/// end-effector error norm (NaN otherwise).
struct Evaluation {
    VecX residual;
    double error = std::numeric_limits<double>::quiet_NaN();

    double cost() const { return residual.squaredNorm(); }
};

struct Problem {
    std::function<Evaluation(const VecX&)> evaluate;
    /// Optional projection onto the feasible box, applied to every trial point.
    std::function<VecX(const VecX&)> project;
    /// Optional typical magnitude per coordinate, floors the difference step.
    VecX scale;

    VecX feasible(const VecX& p) const { return project ? project(p) : p; }
    double typical(Eigen::Index i) const { return scale.size() > i ? scale[i] : 1.0; }
};

enum class Termination { ParamTol, CostTol, ErrorTol, MaxIter };

inline std::string_view to_string(Termination t) {
    switch (t) {
    case Termination::ParamTol: return "param-tol";
    case Termination::CostTol: return "cost-tol";
    case Termination::ErrorTol: return "error-tol";
    case Termination::MaxIter: return "max-iter";
    }
    return "?";
}

struct IterationRecord {
    int iteration = 0;
    double cost = 0.0;
    double step_norm = 0.0;
    double sigma = 0.0;
    double alpha = 0.0;
    double error = 0.0;
};

struct OptResult {
    VecX params;
    double cost = 0.0;
    double error = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    long evaluations = 0;
    Termination reason = Termination::MaxIter;
    double wall_time = 0.0;  // s
    std::vector<IterationRecord> log;  // entry 0 is the starting point
};

struct JacobianResult {
    MatX jacobian;  // d r / d p
    VecX gradient;  // 2 J^T r
    VecX residual;
};

/// Central-difference Jacobian of the residuals with
/// h_i = fd_step * max(typical_i, |p_i|); typical_i defaults to 1.
/// Columns are independent and may be probed on several threads; results do
/// not depend on the thread count.
inline JacobianResult fd_jacobian(const Problem& problem, const VecX& p, const VecX& residual, double fd_step,
                                  unsigned threads = 1) {
    const auto n = p.size();
    const auto m = residual.size();
    JacobianResult out;
    out.residual = residual;
    out.jacobian.resize(m, n);
    std::vector<std::string> failures(static_cast<std::size_t>(n));

    auto column = [&](Eigen::Index i) {
        const double h = fd_step * std::max(problem.typical(i), std::abs(p[i]));
        VecX plus = p, minus = p;
        plus[i] += h;
        minus[i] -= h;
        plus = problem.feasible(plus);
        minus = problem.feasible(minus);
        const double span = plus[i] - minus[i];
        if (span == 0.0) {
            out.jacobian.col(i).setZero();
            return;
        }
        VecX rp = problem.evaluate(plus).residual;
        VecX rm = problem.evaluate(minus).residual;
        if (!rp.allFinite() || !rm.allFinite() || rp.size() != m || rm.size() != m) {
            failures[static_cast<std::size_t>(i)] = "non-finite objective when probing coordinate " + std::to_string(i);
            return;
        }
        out.jacobian.col(i) = (rp - rm) / span;
    };

    const unsigned nt = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (nt == 1) {
        for (Eigen::Index i = 0; i < n; ++i) column(i);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < nt; ++t)
            pool.emplace_back([&, t] {
                for (Eigen::Index i = t; i < n; i += nt) column(i);
            });
    }
    for (const auto& f : failures)
        if (!f.empty()) throw EvaluationError(f);
    out.gradient = 2.0 * out.jacobian.transpose() * residual;
    return out;
}

/// dp = -alpha (J^T J + sigma I)^-1 grad. Returns nullopt when the damped
/// normal matrix is not numerically positive definite (caller raises sigma).
inline std::optional<VecX> lm_step(const MatX& jacobian, const VecX& gradient, double sigma, double alpha = 1.0) {
    if (!(sigma > 0.0)) throw ContractError("lm_step: sigma must be > 0");
    MatX a = jacobian.transpose() * jacobian;
    a.diagonal().array() += sigma;
    Eigen::LLT<MatX> llt(a);
    if (llt.info() != Eigen::Success) return std::nullopt;
    VecX dp = -alpha * llt.solve(gradient);
    if (!dp.allFinite()) return std::nullopt;
    return dp;
}

struct LineSearchResult {
    double alpha = 0.0;
    VecX params;
    Evaluation eval;
    int trials = 0;
};

/// Backtracking from alpha = 1 until the cost strictly decreases.
inline std::optional<LineSearchResult> line_search(const Problem& problem, const VecX& p, double cost,
                                                   const VecX& dp, double shrink = 0.5, int max_trials = 30) {
    double alpha = 1.0;
    for (int k = 1; k <= max_trials; ++k, alpha *= shrink) {
        VecX trial = problem.feasible(p + alpha * dp);
        Evaluation ev = problem.evaluate(trial);
        if (std::isfinite(ev.cost()) && ev.cost() < cost) return LineSearchResult{alpha, std::move(trial), std::move(ev), k};
    }
    return std::nullopt;
}

/// Minimises C from p0. Stops on step size, cost, end-effector error or the
/// iteration cap; the accepted cost sequence is strictly decreasing.
inline OptResult optimize(const Problem& problem, const VecX& p0, const OptimizerConfig& cfg = {}) {
    cfg.check();
    const auto started = std::chrono::steady_clock::now();
    OptResult res;
    VecX p = problem.feasible(p0);
    Evaluation ev = problem.evaluate(p);
    res.evaluations = 1;
    if (!std::isfinite(ev.cost())) throw EvaluationError("objective is not finite at the starting point");
    double sigma = cfg.sigma0;
    res.log.push_back({0, ev.cost(), 0.0, sigma, 0.0, ev.error});

    auto reached = [&](const Evaluation& e) -> std::optional<Termination> {
        if (e.cost() <= cfg.eps_cost) return Termination::CostTol;
        if (std::isfinite(e.error) && e.error <= cfg.error_tolerance) return Termination::ErrorTol;
        return std::nullopt;
    };

    std::optional<Termination> stop = reached(ev);
    int iter = 0;
    while (!stop) {
        if (iter >= cfg.max_iterations) {
            stop = Termination::MaxIter;
            break;
        }
        auto jac = fd_jacobian(problem, p, ev.residual, cfg.fd_step, cfg.threads);
        res.evaluations += 2 * p.size();
        const MatX scaled = std::sqrt(2.0) * jac.jacobian;

        bool accepted = false;
        while (!accepted) {
            auto dp = lm_step(scaled, jac.gradient, sigma);
            if (!dp) {
                sigma *= cfg.sigma_up;
                continue;
            }
            if (dp->norm() <= cfg.eps_param) {
                stop = Termination::ParamTol;
                break;
            }
            auto ls = line_search(problem, p, ev.cost(), *dp, cfg.shrink, cfg.max_trials);
            if (ls) res.evaluations += ls->trials;
            else res.evaluations += cfg.max_trials;
            if (!ls) {
                sigma *= cfg.sigma_up;
                continue;
            }
            const double moved = (ls->params - p).norm();
            p = std::move(ls->params);
            ev = std::move(ls->eval);
            sigma = std::max(sigma * cfg.sigma_down, cfg.sigma_min);
            ++iter;
            res.log.push_back({iter, ev.cost(), moved, sigma, ls->alpha, ev.error});
            accepted = true;
            stop = reached(ev);
            if (!stop && moved <= cfg.eps_param) stop = Termination::ParamTol;
        }
    }
    res.params = p;
    res.cost = ev.cost();
    res.error = ev.error;
    res.iterations = iter;
    res.reason = *stop;
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return res;
}

} // namespace reach
