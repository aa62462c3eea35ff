// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any
// FAIL. Set REACH_ACCEPTANCE_LONG=1 to add the full-model band check.

#include "two_link.hpp"

#include "reach/outputs.hpp"
#include "reach/savgol.hpp"
#include "reach/scenario.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

using namespace reach;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int n, bool ok, const std::string& what, const std::string& detail) {
    std::printf("%s criterion %d: %s [%s]\n", ok ? "PASS" : "FAIL", n, what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
    char b[96];
    std::snprintf(b, sizeof b, f, a);
    return b;
}

bool strictly_decreasing(const OptResult& r) {
    for (std::size_t i = 1; i < r.log.size(); ++i)
        if (!(r.log[i].cost < r.log[i - 1].cost)) return false;
    return true;
}

Problem residual_problem(std::function<VecX(const VecX&)> r) {
    return Problem{[r](const VecX& p) { return Evaluation{r(p)}; }, {}, {}};
}

ScenarioConfig planar(double flexion, Strategy s = Strategy::MinError) {
    ScenarioConfig c;
    c.name = target_label(flexion);
    c.preset = kPresetPlanar6;
    c.trunk_flexion = flexion;
    c.strategy = s;
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const double kFlexions[] = {15.0, 30.0, 60.0};

// ---------------------------------------------------------------------------

void criterion1() {
    auto t0 = Clock::now();
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> ang(-180, 180), p6(-1000, 1000), tf(0.2, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double a = ang(rng), b = ang(rng), p = p6(rng), T = tf(rng);
        auto c = closure_coefficients(a, b, p, T);
        const double r[6] = {c.position(0) - a, c.velocity(0), c.acceleration(0),
                             c.position(T) - b, c.velocity(T), c.acceleration(T)};
        for (double v : r) worst = std::max(worst, std::abs(v));
    }
    const double dt = seconds_since(t0);
    report(1, worst <= 1e-9 && dt < 1.0, "polynomial closure, 1000 random cases",
           "max boundary residual " + fmt("%.3g", worst) + " (deg, deg/s, deg/s^2), " + fmt("%.3f s", dt));
}

void criterion2() {
    auto t0 = Clock::now();
    std::mt19937 rng(202);
    std::uniform_real_distribution<double> u(-1.0, 1.0), dur(0.3, 1.5);
    bool mid_exact = true;
    double ends = 0.0, colin = 0.0, peak_err = 0.0;
    for (int k = 0; k < 100; ++k) {
        const Vec3 x0(u(rng), u(rng), u(rng) + 1.0), xf(u(rng), u(rng), u(rng) + 1.0);
        const double T = dur(rng);
        if (!(min_jerk_position(x0, xf, T, T / 2) == (x0 + xf) / 2)) mid_exact = false;
        for (double t : {0.0, T}) {
            ends = std::max(ends, min_jerk_velocity(x0, xf, T, t).norm());
            ends = std::max(ends, min_jerk_acceleration(x0, xf, T, t).norm());
        }
        const Vec3 d = xf - x0, dir = d.normalized();
        auto path = min_jerk_reference(x0, xf, T);
        double vmax = 0.0;
        for (std::size_t i = 0; i < path.time.size(); ++i) {
            const Vec3 rel = path.position[i] - x0;
            colin = std::max(colin, (rel - rel.dot(dir) * dir).norm());
            vmax = std::max(vmax, path.velocity[i].norm());
        }
        // s'(1/2) = 30/4 - 60/8 + 30/16 = 15/8
        const double vmid = min_jerk_velocity(x0, xf, T, T / 2).norm() / d.norm();
        peak_err = std::max(peak_err, std::abs(vmid - 1.875 / T));
        if (vmax > min_jerk_velocity(x0, xf, T, T / 2).norm() * (1 + 1e-12)) peak_err = 1.0;
    }
    const double dt = seconds_since(t0);
    const bool ok = mid_exact && ends <= 1e-12 && colin <= 1e-12 && peak_err <= 1e-9 && dt < 1.0;
    report(2, ok, "min-jerk analytics",
           std::string("midpoint ") + (mid_exact ? "exact" : "inexact") + ", endpoint v/a " + fmt("%.3g", ends) +
               ", colinearity " + fmt("%.3g", colin) + " m, peak factor error " + fmt("%.3g", peak_err) + ", " +
               fmt("%.3f s", dt));
}

void criterion3() {
    auto t0 = Clock::now();
    auto sp = [](const VecX& v) { return std::span<const double>(v.data(), static_cast<std::size_t>(v.size())); };
    const double m = 1.3, L = 0.7, lc = 0.45;
    // horizontal, static
    Skeleton horiz(fx::planar_chain({{m, L, lc, 0.0}}, Vec3(1, 0, 0)));
    VecX z = VecX::Zero(3);
    const double tg = std::abs(inverse_dynamics(horiz, sp(z), sp(z), sp(z)).torque[0]);
    const double rel_g = std::abs(tg - m * kGravity * lc) / (m * kGravity * lc);
    // hanging, at rest, pure angular acceleration
    Skeleton hang(fx::planar_chain({{m, L, lc, 0.0}}));
    VecX qdd = VecX::Zero(3);
    qdd[0] = rad2deg(2.5);
    const double ti = inverse_dynamics(hang, sp(z), sp(z), sp(qdd)).torque[0];
    const double rel_i = std::abs(ti - m * lc * lc * 2.5) / (m * lc * lc * 2.5);
    // energy rate on a conservative three-link chain
    std::vector<fx::Link> links = {{2.0, 0.4, 0.2, 0.03}, {1.5, 0.35, 0.15, 0.02}, {0.8, 0.25, 0.1, 0.005}};
    Skeleton chain(fx::planar_chain(links));
    const double T = 0.6;
    std::vector<fx::Poly6> polys = {fx::Poly6(0, -70, 250, T), fx::Poly6(0, 50, -200, T), fx::Poly6(0, -40, 90, T)};
    JointTrajectory tr;
    tr.time = time_grid(T);
    const auto n = static_cast<Eigen::Index>(tr.time.size());
    tr.angle = RowMatrix::Zero(n, 9);
    tr.velocity = tr.angle;
    tr.acceleration = tr.angle;
    for (Eigen::Index i = 0; i < n; ++i)
        for (int l = 0; l < 3; ++l) {
            const double t = tr.time[static_cast<std::size_t>(i)];
            tr.angle(i, 3 * l) = polys[l].x(t);
            tr.velocity(i, 3 * l) = polys[l].v(t);
            tr.acceleration(i, 3 * l) = polys[l].a(t);
        }
    auto out = evaluate_movement(chain, tr);
    auto energy = [&](double t) {
        std::vector<double> q(3), qd(3);
        for (int l = 0; l < 3; ++l) q[l] = deg2rad(polys[l].x(t)), qd[l] = deg2rad(polys[l].v(t));
        return fx::chain_energy(links, q, qd, kGravity);
    };
    double pmax = 0.0, worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) pmax = std::max(pmax, std::abs(out.power.row(i).sum()));
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        const double t = tr.time[static_cast<std::size_t>(i)];
        const double dedt = (energy(t + 1e-3) - energy(t - 1e-3)) / 2e-3;
        worst = std::max(worst, std::abs(out.power.row(i).sum() - dedt));
    }
    const double rel_e = worst / pmax;
    const double dt = seconds_since(t0);
    report(3, rel_g <= 1e-6 && rel_i <= 1e-6 && rel_e <= 1e-3 && dt < 10.0, "inverse-dynamics oracles",
           "pendulum " + fmt("%.3g", rel_g) + ", inertial " + fmt("%.3g", rel_i) + ", energy rate " +
               fmt("%.3g", rel_e) + " (relative), " + fmt("%.2f s", dt));
}

void criterion4() {
    auto t0 = Clock::now();
    fx::TwoLinkArm arm;
    double worst = 0.0;
    int zero_coords = 0;
    struct Case {
        Strategy s;
        double lp, lc;
        double p[4];
    };
    const Case cases[] = {{Strategy::MinError, 0, 0, {-40, 120, -30, -150}},
                          {Strategy::MinPower, 2e-3, 0, {-60, -80, -70, 40}},
                          {Strategy::MinCOM, 0, 50, {-100, 300, -20, -90}},
                          {Strategy::MinPowerCOM, 2e-3, 50, {-40, 120, -30, -150}}};
    for (const auto& c : cases) {
        auto obj = arm.objective(fx::hanging_tip(arm.lengths(), {-75, -55}), c.s, c.lp, c.lc);
        auto prob = obj.problem();
        VecX p(4);
        p << c.p[0], c.p[1], c.p[2], c.p[3];
        auto j = fd_jacobian(prob, p, prob.evaluate(p).residual, 1e-6);
        VecX o(4);
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            auto f = [&](double x) {
                VecX q = p;
                q[i] = x;
                return prob.evaluate(q).cost();
            };
            // p6 shifts the angle by p6 tf^6 / 64 at most
            const double typical = i % 2 ? 64.0 / std::pow(arm.layout.duration, 6) : 1.0;
            o[i] = fx::stencil5(f, p[i], 1e-3 * std::max(typical, std::abs(p[i])));
        }
        // a coordinate with no influence (p6 under minError) has a zero
        // gradient; its oracle is roundoff, so both must sit at that floor
        const double floor = 1e-9 * o.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            if (std::abs(o[i]) <= floor) {
                if (std::abs(j.gradient[i]) > floor) worst = std::max(worst, 1.0);
                ++zero_coords;
                continue;
            }
            worst = std::max(worst, std::abs(j.gradient[i] - o[i]) / std::abs(o[i]));
        }
    }
    const double dt = seconds_since(t0);
    report(4, worst <= 1e-4 && dt < 30.0, "gradient fidelity on the planar 2-link composite cost",
           "max relative deviation " + fmt("%.3g", worst) + " over 4 strategies, " +
               std::to_string(zero_coords) + " zero-gradient coordinates at roundoff, " + fmt("%.2f s", dt));
}

void criterion5() {
    MatX j(1, 1);
    j << 2.0;
    VecX g(1);
    g << 4.0;
    auto dp = lm_step(j, g, 1.0, 1.0);
    const bool scalar = dp && std::abs((*dp)[0] + 0.8) <= 1e-12;

    VecX a(3);
    a << 1.0, -2.0, 3.0;
    auto bowl = optimize(residual_problem([a](const VecX& p) { return VecX(p - a); }), VecX::Zero(3));
    auto rosen = optimize(residual_problem([](const VecX& p) {
                              VecX r(2);
                              r << 10 * (p[1] - p[0] * p[0]), 1 - p[0];
                              return r;
                          }),
                          (VecX(2) << -1.2, 1.0).finished());
    fx::TwoLinkArm arm;
    auto two = optimize(arm.objective(fx::hanging_tip(arm.lengths(), {-70, -50}), Strategy::MinPower, 1e-2).problem(),
                        initial_params(arm.layout));
    auto full = run_scenario(planar(60, Strategy::MinPowerCOM)).optimization;
    const bool mono = strictly_decreasing(bowl) && strictly_decreasing(rosen) && strictly_decreasing(two) &&
                      strictly_decreasing(full);
    report(5, scalar && bowl.iterations <= 5 && mono, "LM correctness",
           "scalar step " + (dp ? fmt("%.17g", (*dp)[0]) : std::string("none")) + ", bowl " +
               std::to_string(bowl.iterations) + " iterations, monotone accepted costs on " +
               "bowl, Rosenbrock, 2-link, planar-6dof: " + (mono ? "yes" : "no"));
}

std::vector<SimulationResult> criterion6() {
    auto t0 = Clock::now();
    std::vector<SimulationResult> runs;
    double worst = 0.0;
    for (double f : kFlexions) {
        runs.push_back(run_scenario(planar(f)));
        worst = std::max(worst, runs.back().summary.final_error);
    }
    // two-link reduction against a 0.1 deg lattice
    fx::TwoLinkArm arm;
    bool grid_ok = true;
    double grid_err = 0.0;
    for (auto angles : {std::vector<double>{-70, -50}, std::vector<double>{-120, -30}, std::vector<double>{-20, -95}}) {
        const Vec3 target = fx::hanging_tip(arm.lengths(), angles);
        auto obj = arm.objective(target);
        auto r = optimize(obj.problem(), initial_params(arm.layout));
        auto g = fx::grid_search(arm.lengths(), arm.ranges, target, 0.002);
        VecX th = obj.clamp(r.params);
        grid_err = std::max(grid_err, r.error);
        grid_ok = grid_ok && r.error <= 0.002 && g.within > 0;
        for (int k = 0; k < 2; ++k) grid_ok = grid_ok && th[2 * k] >= g.lo[k] - 0.1 && th[2 * k] <= g.hi[k] + 0.1;
    }
    const double dt = seconds_since(t0);
    report(6, worst <= 0.002 && grid_ok && dt <= 300.0, "end-to-end planar-6dof minError reaches",
           "worst final error " + fmt("%.3g mm", 1e3 * worst) + " over high/middle/low; 2-link grid agreement " +
               (grid_ok ? "yes" : "no") + " (worst " + fmt("%.3g mm", 1e3 * grid_err) + "); " + fmt("%.1f s", dt));
    return runs;
}

void criterion7() {
    auto t0 = Clock::now();
    std::vector<ScenarioConfig> targets;
    for (double f : kFlexions) {
        auto c = planar(f);
        c.optimizer.error_tolerance = 1e-7;
        c.optimizer.eps_cost = 1e-14;
        targets.push_back(c);
    }
    auto rep = compare_strategies(targets, {kAllStrategies.begin(), kAllStrategies.end()});
    bool ok = true;
    std::string detail;
    for (const auto& t : rep.targets) {
        double com_min = 1e300, com_mincom = 0.0;
        for (auto s : kAllStrategies) {
            const auto& c = rep.cell(t, s);
            ok = ok && c.ok;
            com_min = std::min(com_min, c.summary.final_com_squared);
        }
        com_mincom = rep.cell(t, Strategy::MinCOM).summary.final_com_squared;
        const double pe = rep.cell(t, Strategy::MinError).summary.total_power_squared;
        const double ppc = rep.cell(t, Strategy::MinPowerCOM).summary.total_power_squared;
        const bool here = com_mincom <= com_min && ppc <= pe;
        ok = ok && here;
        detail += t + ": COM2 minCOM " + fmt("%.4g", com_mincom) + " (min " + fmt("%.4g", com_min) +
                  "), P2 minPowerCOM " + fmt("%.4g", ppc) + " vs minError " + fmt("%.4g", pe) + "; ";
    }
    if (std::getenv("REACH_ACCEPTANCE_LONG")) {
        auto c = planar(30);
        c.preset = kPresetFull;
        auto r = run_scenario(c);
        const double p2 = r.summary.total_power_squared, c2 = r.summary.final_com_squared;
        const bool band = p2 >= 1e2 && p2 <= 1e4 && c2 >= 1e-4 && c2 <= 1e-1;
        ok = ok && band;
        detail += "full model middle minError: P2 " + fmt("%.4g", p2) + " J^2, COM2 " + fmt("%.4g", c2) + " m^2 (" +
                  (band ? "in band" : "out of band") + "); ";
    } else {
        detail += "full-model band check not run; ";
    }
    report(7, ok, "strategy orderings on converged planar-6dof runs", detail + fmt("%.1f s", seconds_since(t0)));
}

void criterion8(const std::vector<SimulationResult>& runs) {
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& s = runs[i].summary;
        if (i > 0) {
            const auto& p = runs[i - 1].summary;
            ok = ok && s.final_com_displacement.norm() >= p.final_com_displacement.norm() &&
                 s.total_energy >= p.total_energy;
        }
        detail += target_label(kFlexions[i]) + ": COM " + fmt("%.4g mm", 1e3 * s.final_com_displacement.norm()) +
                  ", energy " + fmt("%.4g J", s.total_energy) + (i + 1 < runs.size() ? "; " : "");
    }
    report(8, ok, "target-height monotonicity (minError, 15/30/60 deg)", detail);
}

void criterion9() {
    bool ok = true;
    CostSpec spec;
    spec.lambda0_power = 3.0;
    spec.lambda0_com = 7.0;
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-1, 1);
    for (auto s : kAllStrategies) {
        spec.strategy = s;
        ok = ok && composite_cost(Vec3::Zero(), 1e4, 2.0, spec) == 0.0;
        CostSpec zero;
        zero.strategy = s;
        for (int i = 0; i < 20; ++i) {
            const Vec3 e(u(rng), u(rng), u(rng));
            CostSpec me;
            ok = ok && composite_cost(e, 100 * (1 + u(rng)), 1 + u(rng), zero) == e.squaredNorm() &&
                 composite_cost(e, 5.0, 1.0, me) == e.squaredNorm();
        }
    }
    ok = ok && calibrate_lambda0(1.0) == 1.0;
    report(9, ok, "cost algebra", "e_f = 0 gives C = 0, lambda0 = 0 gives minError, calibrate_lambda0(1) = 1");
}

void criterion10() {
    std::vector<double> y(300);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double x = 0.01 * static_cast<double>(i) - 1.2;
        y[i] = 0.5 - 1.3 * x + 0.7 * x * x + 0.9 * x * x * x;
    }
    auto s = savgol_filter(y);
    double cubic = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) cubic = std::max(cubic, std::abs(s[i] - y[i]));
    double coef = 0.0;
    VecX c = savgol_coefficients(61, 4);
    auto ref = fx::savgol_normal_equations(61, 4, 30);
    for (int i = 0; i < 61; ++i) coef = std::max(coef, std::abs(c[i] - ref[i]));
    for (int at : {0, 10, 45}) {
        VecX w = savgol_weights(61, 4, at);
        auto r = fx::savgol_normal_equations(61, 4, at);
        for (int i = 0; i < 61; ++i) coef = std::max(coef, std::abs(w[i] - r[i]));
    }
    report(10, cubic <= 1e-10 && coef <= 1e-10, "Savitzky-Golay 61-point 4th order",
           "cubic residual " + fmt("%.3g", cubic) + ", coefficient deviation " + fmt("%.3g", coef));
}

void criterion11() {
    const auto root = std::filesystem::temp_directory_path() / "reach_acceptance";
    std::filesystem::remove_all(root);
    auto cfg = planar(30, Strategy::MinPowerCOM);
    emit_outputs(run_scenario(cfg), root / "a");
    emit_outputs(run_scenario(cfg), root / "b");
    cfg.optimizer.threads = 4;
    emit_outputs(run_scenario(cfg), root / "c");
    bool ok = true;
    std::string differ;
    for (const char* f : {"timeseries.csv", "summary.csv", "optimizer_log.csv", "params.csv", "poses.csv"}) {
        const auto a = slurp(root / "a" / f);
        const bool same = !a.empty() && a == slurp(root / "b" / f) && a == slurp(root / "c" / f);
        if (!same) differ += std::string(" ") + f;
        ok = ok && same;
    }
    std::filesystem::remove_all(root);
    report(11, ok, "reproducibility", ok ? "5 output files byte-identical across reruns and 1 vs 4 threads"
                                         : "differing:" + differ);
}

template <class F>
auto guarded(int n, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const std::exception& e) {
        report(n, false, "threw", e.what());
        return decltype(f())();
    }
}

} // namespace

int main() {
    guarded(1, [] { criterion1(); });
    guarded(2, [] { criterion2(); });
    guarded(3, [] { criterion3(); });
    guarded(4, [] { criterion4(); });
    guarded(5, [] { criterion5(); });
    auto runs = guarded(6, [] { return criterion6(); });
    guarded(7, [] { criterion7(); });
    guarded(8, [&] { criterion8(runs); });
    guarded(9, [] { criterion9(); });
    guarded(10, [] { criterion10(); });
    guarded(11, [] { criterion11(); });
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
