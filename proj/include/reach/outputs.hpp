#pragma once

// CSV artifacts. All numbers are written with 9 significant digits and no
// timing information, so identical runs give byte-identical files.

#include "reach/scenario.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace reach {

inline std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    ~CsvWriter() noexcept(false) {
        if (std::uncaught_exceptions() == 0) close();
    }
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    CsvWriter& cell(const std::string& s) {
        if (!first_) line_ += ',';
        line_ += s;
        first_ = false;
        return *this;
    }
    CsvWriter& cell(double v) { return cell(fmt9(v)); }
    CsvWriter& cell(long v) { return cell(std::to_string(v)); }
    CsvWriter& cell(int v) { return cell(std::to_string(v)); }
    void end() {
        line_ += '\n';
        out_ << line_;
        line_.clear();
        first_ = true;
    }
    void comment(const std::string& s) {
        out_ << "# " << s << '\n';
    }
    void close() {
        if (!out_.is_open()) return;
        out_.close();
        if (out_.fail()) throw std::runtime_error("error writing '" + path_.string() + "'");
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::string line_;
    bool first_ = true;
};

/// Quote a free-text field if it contains a delimiter.
inline std::string csv_text(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c == '\n' ? ' ' : c;
    }
    return q + '"';
}

inline void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory '" + dir.string() + "': " + ec.message());
}

/// t, theta/tau/power per DoF, total |power|, end effector, COM, min-jerk reference.
inline void write_timeseries(const std::filesystem::path& path, const BodyModel& m, const JointTrajectory& traj,
                             const DynamicsOutput& dyn, const CartesianPath* min_jerk = nullptr) {
    CsvWriter w(path);
    const auto n = m.dof_count();
    w.cell("t");
    for (const char* prefix : {"theta:", "tau:", "power:"})
        for (std::size_t k = 0; k < n; ++k) w.cell(prefix + m.dof_name(k));
    w.cell("total_abs_power");
    for (const char* c : {"ee_x", "ee_y", "ee_z", "com_x", "com_y", "com_z"}) w.cell(c);
    if (min_jerk)
        for (const char* c : {"minjerk_x", "minjerk_y", "minjerk_z"}) w.cell(c);
    w.end();
    for (std::size_t i = 0; i < dyn.time.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        w.cell(dyn.time[i]);
        for (std::size_t k = 0; k < n; ++k) w.cell(traj.angle(r, static_cast<Eigen::Index>(k)));
        for (std::size_t k = 0; k < n; ++k) w.cell(dyn.torque(r, static_cast<Eigen::Index>(k)));
        for (std::size_t k = 0; k < n; ++k) w.cell(dyn.power(r, static_cast<Eigen::Index>(k)));
        w.cell(dyn.total_abs_power[i]);
        for (int c = 0; c < 3; ++c) w.cell(dyn.end_effector[i][c]);
        for (int c = 0; c < 3; ++c) w.cell(dyn.com[i][c]);
        if (min_jerk) {
            const Vec3& x = min_jerk->position[std::min(i, min_jerk->position.size() - 1)];
            for (int c = 0; c < 3; ++c) w.cell(x[c]);
        }
        w.end();
    }
}

inline void write_summary(const std::filesystem::path& path, const SimulationResult& r) {
    CsvWriter w(path);
    w.cell("key").cell("value").end();
    auto row = [&](const std::string& k, const std::string& v) { w.cell(k).cell(csv_text(v)).end(); };
    auto num = [&](const std::string& k, double v) { row(k, fmt9(v)); };
    row("scenario", r.config.name);
    row("strategy", std::string(to_string(r.config.strategy)));
    row("preset", r.config.preset);
    num("active_dofs", static_cast<double>(r.layout.active.size()));
    num("target_x_m", r.target.x());
    num("target_y_m", r.target.y());
    num("target_z_m", r.target.z());
    num("duration_s", r.layout.duration);
    num("lambda0_power", r.calibration.lambda0_power);
    num("lambda0_com", r.calibration.lambda0_com);
    row("calibration", !r.calibration.ran_primary                                  ? "explicit"
                       : (r.calibration.power_failed || r.calibration.com_failed) ? "failed-fallback"
                                                                                   : "auto");
    row("termination", std::string(to_string(r.optimization.reason)));
    num("iterations", r.optimization.iterations);
    num("evaluations", static_cast<double>(r.optimization.evaluations));
    num("composite_cost", r.summary.composite);
    num("final_error_m", r.summary.final_error);
    num("total_power_squared_J2", r.summary.total_power_squared);
    num("final_com_squared_m2", r.summary.final_com_squared);
    num("final_com_dx_mm", 1e3 * r.summary.final_com_displacement.x());
    num("final_com_dy_mm", 1e3 * r.summary.final_com_displacement.y());
    num("final_com_dz_mm", 1e3 * r.summary.final_com_displacement.z());
    num("total_energy_J", r.summary.total_energy);
    num("p6_norm", r.summary.p6_norm);
}

inline void write_optimizer_log(const std::filesystem::path& path, const OptResult& o) {
    CsvWriter w(path);
    w.cell("iteration").cell("cost").cell("step_norm").cell("sigma").cell("alpha").cell("error_m").end();
    for (const auto& it : o.log)
        w.cell(it.iteration).cell(it.cost).cell(it.step_norm).cell(it.sigma).cell(it.alpha).cell(it.error).end();
}

inline void write_params(const std::filesystem::path& path, const BodyModel& m, const ParamLayout& layout,
                         const VecX& p) {
    CsvWriter w(path);
    w.cell("dof").cell("theta_f_deg").cell("p6").end();
    for (std::size_t i = 0; i < layout.active.size(); ++i)
        w.cell(m.dof_name(layout.active[i])).cell(p[2 * i]).cell(p[2 * i + 1]).end();
}

/// Segment endpoints at the first and last sample, for stick figures.
inline void write_poses(const std::filesystem::path& path, const Skeleton& sk, const JointTrajectory& traj) {
    CsvWriter w(path);
    w.cell("t").cell("segment");
    for (const char* c : {"prox_x", "prox_y", "prox_z", "dist_x", "dist_y", "dist_z"}) w.cell(c);
    w.end();
    for (std::size_t i : {std::size_t{0}, traj.samples() - 1}) {
        VecX q = traj.angle.row(static_cast<Eigen::Index>(i)).transpose();
        auto ends = segment_endpoints(sk.model(), forward_kinematics(sk, q));
        for (std::size_t s = 0; s < ends.size(); ++s) {
            w.cell(traj.time[i]).cell(sk.model().segments[s].name);
            for (int c = 0; c < 3; ++c) w.cell(ends[s].first[c]);
            for (int c = 0; c < 3; ++c) w.cell(ends[s].second[c]);
            w.end();
        }
    }
}

inline void emit_outputs(const SimulationResult& r, const std::filesystem::path& dir) {
    ensure_dir(dir);
    write_timeseries(dir / "timeseries.csv", r.skeleton->model(), r.movement.trajectory, r.movement.dynamics,
                     &r.min_jerk);
    write_summary(dir / "summary.csv", r);
    write_optimizer_log(dir / "optimizer_log.csv", r.optimization);
    write_params(dir / "params.csv", r.skeleton->model(), r.layout, r.optimization.params);
    write_poses(dir / "poses.csv", *r.skeleton, r.movement.trajectory);
}

/// Three grids: costs (with wall time and status), COM displacement, energy.
inline void emit_comparison(const ComparisonReport& rep, const std::filesystem::path& dir) {
    ensure_dir(dir);
    {
        CsvWriter w(dir / "costs.csv");
        w.cell("target").cell("strategy").cell("total_power_squared_J2").cell("final_com_squared_m2");
        w.cell("wall_time_s").cell("status").end();
        for (const auto& c : rep.cells) {
            w.cell(c.target).cell(std::string(to_string(c.strategy)));
            if (c.ok) w.cell(c.summary.total_power_squared).cell(c.summary.final_com_squared).cell(c.wall_time);
            else w.cell("").cell("").cell("");
            w.cell(csv_text(c.ok ? c.note : "failed: " + c.note)).end();
        }
    }
    {
        CsvWriter w(dir / "com_displacement.csv");
        w.cell("target").cell("strategy").cell("dx_mm").cell("dy_mm").cell("dz_mm").end();
        for (const auto& c : rep.cells) {
            w.cell(c.target).cell(std::string(to_string(c.strategy)));
            for (int k = 0; k < 3; ++k) c.ok ? w.cell(1e3 * c.summary.final_com_displacement[k]) : w.cell("");
            w.end();
        }
    }
    {
        CsvWriter w(dir / "energy.csv");
        w.cell("target").cell("strategy").cell("total_energy_J").cell("final_error_m").end();
        for (const auto& c : rep.cells) {
            w.cell(c.target).cell(std::string(to_string(c.strategy)));
            if (c.ok) w.cell(c.summary.total_energy).cell(c.summary.final_error);
            else w.cell("").cell("");
            w.end();
        }
    }
}

} // namespace reach
