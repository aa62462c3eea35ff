#pragma once

// Recorded joint-angle series: CSV parsing, smoothing, numerical
// differentiation and inverse dynamics on the same model as the simulations.
//
// File layout:
//   # key: value            metadata lines (optional, before the header)
//   t,theta:<dof>,...       header; <dof> as in BodyModel::dof_name
//   0,12.5,...              one row per sample, angles in deg
// DoF absent from the header stay at their neutral angle.

#include "reach/dynamics.hpp"
#include "reach/outputs.hpp"
#include "reach/savgol.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace reach {

struct MocapSeries {
    std::vector<double> time;                 // s
    std::vector<std::string> dofs;            // DoF names, column order
    std::vector<std::vector<double>> angles;  // [column][sample], deg
    std::map<std::string, std::string> metadata;

    std::size_t samples() const { return time.size(); }
    double rate() const { return time.size() > 1 ? (time.size() - 1) / (time.back() - time.front()) : 0.0; }
};

namespace mocap_detail {

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto& s : out) {
        auto b = s.find_first_not_of(" \t");
        auto e = s.find_last_not_of(" \t");
        s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
    }
    return out;
}

inline double to_double(const std::string& s, int line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw ParseError("mocap: '" + s + "' is not a finite number", line);
    return v;
}

} // namespace mocap_detail

/// Relative tolerance on sample spacing (absorbs text rounding of t).
inline constexpr double kSpacingTolerance = 1e-4;

inline MocapSeries parse_mocap(std::istream& in) {
    using namespace mocap_detail;
    MocapSeries s;
    std::string line;
    int lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line[0] == '#') {
            auto body = line.substr(1);
            auto colon = body.find(':');
            if (colon != std::string::npos) {
                auto kv = split(body.substr(0, colon) + "," + body.substr(colon + 1));
                s.metadata[kv[0]] = kv.size() > 1 ? kv[1] : "";
            }
            continue;
        }
        auto cells = split(line);
        if (!header) {
            if (cells.empty() || cells[0] != "t") throw ParseError("mocap: header must start with 't'", lineno);
            for (std::size_t c = 1; c < cells.size(); ++c) {
                if (cells[c].rfind("theta:", 0) != 0 || cells[c].size() == 6)
                    throw ParseError("mocap: column '" + cells[c] + "' is not of the form theta:<dof>", lineno);
                s.dofs.push_back(cells[c].substr(6));
            }
            s.angles.resize(s.dofs.size());
            header = true;
            continue;
        }
        if (cells.size() != s.dofs.size() + 1)
            throw ParseError("mocap: expected " + std::to_string(s.dofs.size() + 1) + " fields, found " +
                                 std::to_string(cells.size()),
                             lineno);
        const double t = to_double(cells[0], lineno);
        if (!s.time.empty() && !(t > s.time.back())) throw ParseError("mocap: time is not increasing", lineno);
        if (s.time.size() >= 2) {
            const double dt0 = s.time[1] - s.time[0];
            if (std::abs((t - s.time.back()) - dt0) > kSpacingTolerance * dt0)
                throw ParseError("mocap: sampling is not uniform", lineno);
        }
        s.time.push_back(t);
        for (std::size_t c = 0; c < s.dofs.size(); ++c) s.angles[c].push_back(to_double(cells[c + 1], lineno));
    }
    if (!header) throw ParseError("mocap: file is empty", lineno);
    if (s.time.size() < 2) throw ParseError("mocap: need at least two samples", lineno);
    return s;
}

inline MocapSeries load_mocap(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    try {
        return parse_mocap(in);
    } catch (const ParseError& e) {
        throw ParseError("'" + path.string() + "': " + e.message(), e.line());
    }
}

inline void write_mocap(const std::filesystem::path& path, const MocapSeries& s) {
    CsvWriter w(path);
    for (const auto& [k, v] : s.metadata) w.comment(k + ": " + v);
    w.cell("t");
    for (const auto& d : s.dofs) w.cell("theta:" + d);
    w.end();
    for (std::size_t i = 0; i < s.samples(); ++i) {
        w.cell(s.time[i]);
        for (const auto& col : s.angles) w.cell(col[i]);
        w.end();
    }
}

/// Central differences inside, one-sided first differences at both ends.
inline std::vector<double> differentiate(const std::vector<double>& t, const std::vector<double>& y) {
    const std::size_t n = y.size();
    if (n < 2 || t.size() != n) throw ContractError("differentiate: need matching series of length >= 2");
    std::vector<double> d(n);
    d[0] = (y[1] - y[0]) / (t[1] - t[0]);
    d[n - 1] = (y[n - 1] - y[n - 2]) / (t[n - 1] - t[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i - 1]) / (t[i + 1] - t[i - 1]);
    return d;
}

struct IngestOptions {
    int window = 61;
    int order = 4;
    DynamicsOptions dynamics;
};

struct IngestResult {
    JointTrajectory trajectory;  // smoothed angles and their derivatives, all DoF
    DynamicsOutput dynamics;
};

inline IngestResult ingest(const Skeleton& sk, const MocapSeries& s, const IngestOptions& opt = {}) {
    const auto& m = sk.model();
    std::vector<std::size_t> cols;
    for (const auto& name : s.dofs) {
        std::optional<std::size_t> k;
        for (std::size_t i = 0; i < m.dof_count(); ++i)
            if (m.dof_name(i) == name) k = i;
        if (!k) throw ConfigError("mocap: unknown DoF '" + name + "'");
        cols.push_back(*k);
    }
    IngestResult r;
    auto& tr = r.trajectory;
    tr.time = s.time;
    const auto n = static_cast<Eigen::Index>(s.samples());
    tr.angle = m.neutral_posture().transpose().replicate(n, 1);
    tr.velocity = RowMatrix::Zero(n, static_cast<Eigen::Index>(m.dof_count()));
    tr.acceleration = tr.velocity;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        auto smooth = savgol_filter(s.angles[c], opt.window, opt.order);
        auto vel = differentiate(s.time, smooth);
        auto acc = differentiate(s.time, vel);
        const auto k = static_cast<Eigen::Index>(cols[c]);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto u = static_cast<std::size_t>(i);
            tr.angle(i, k) = smooth[u];
            tr.velocity(i, k) = vel[u];
            tr.acceleration(i, k) = acc[u];
        }
    }
    r.dynamics = evaluate_movement(sk, tr, opt.dynamics);
    return r;
}

} // namespace reach
