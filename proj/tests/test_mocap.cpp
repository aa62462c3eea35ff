#include "reach/mocap.hpp"
#include "reach/scenario.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace reach;

namespace {

MocapSeries parse(const std::string& text) {
    std::istringstream in(text);
    return parse_mocap(in);
}

int error_line(const std::string& text) {
    try {
        parse(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return -1;
}

// Simulated planar reach sampled at 120 Hz for 5 s, at rest before and
// after. Angles and their exact derivatives come from the closure polynomials.
struct Recording {
    MocapSeries series;
    JointTrajectory exact;
    double t0 = 2.0, T = 0.0;
};

Recording synthetic_recording(const SimulationResult& sim) {
    const auto& m = sim.skeleton->model();
    const auto& layout = sim.layout;
    const VecX& p = sim.optimization.params;
    Recording r;
    r.T = layout.duration;
    const int n = 600;
    r.exact.time.resize(n);
    r.exact.angle = m.neutral_posture().transpose().replicate(n, 1);
    r.exact.velocity = RowMatrix::Zero(n, static_cast<Eigen::Index>(m.dof_count()));
    r.exact.acceleration = r.exact.velocity;
    for (int i = 0; i < n; ++i) r.exact.time[static_cast<std::size_t>(i)] = i / 120.0;
    r.series.time = r.exact.time;
    r.series.metadata["rate_hz"] = "120";
    for (std::size_t a = 0; a < layout.active.size(); ++a) {
        const auto k = static_cast<Eigen::Index>(layout.active[a]);
        auto c = closure_coefficients(layout.start[k], p[2 * a], p[2 * a + 1], r.T);
        r.series.dofs.push_back(m.dof_name(layout.active[a]));
        r.series.angles.emplace_back();
        for (int i = 0; i < n; ++i) {
            const double t = std::clamp(r.exact.time[static_cast<std::size_t>(i)] - r.t0, 0.0, r.T);
            r.exact.angle(i, k) = c.position(t);
            r.exact.velocity(i, k) = c.velocity(t);
            r.exact.acceleration(i, k) = c.acceleration(t);
            r.series.angles.back().push_back(c.position(t));
        }
    }
    return r;
}

const SimulationResult& middle_reach() {
    static const SimulationResult sim = [] {
        ScenarioConfig c;
        c.preset = kPresetPlanar6;
        c.trunk_flexion = 30.0;
        return run_scenario(c);
    }();
    return sim;
}

// RMS torque error over the movement window, relative to the RMS torque.
double torque_round_trip(const IngestOptions& opt) {
    const auto& sim = middle_reach();
    auto rec = synthetic_recording(sim);
    auto ref = evaluate_movement(*sim.skeleton, rec.exact);
    auto got = ingest(*sim.skeleton, rec.series, opt);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < rec.exact.time.size(); ++i) {
        const double t = rec.exact.time[i];
        if (t < rec.t0 || t > rec.t0 + rec.T) continue;
        const auto r = static_cast<Eigen::Index>(i);
        num += (got.dynamics.torque.row(r) - ref.torque.row(r)).squaredNorm();
        den += ref.torque.row(r).squaredNorm();
    }
    return std::sqrt(num / den);
}

} // namespace

TEST(MocapParse, EmptyFile) {
    EXPECT_THROW(parse(""), ParseError);
    EXPECT_THROW(parse("# only: metadata\n\n"), ParseError);
}

TEST(MocapParse, ErrorLines) {
    EXPECT_EQ(error_line("x,theta:a.flexion\n"), 1);
    EXPECT_EQ(error_line("# a: b\nt,theta:a.flexion\n0,1\n0.1,2,3\n"), 4);
    EXPECT_EQ(error_line("t,theta:a.flexion\n0,1\n0.1,abc\n"), 3);
    EXPECT_EQ(error_line("t,theta:a.flexion\n0,1\n0.1,1\n0.1,1\n"), 4);
    EXPECT_EQ(error_line("t,theta:a.flexion\n0,1\n0.1,1\n0.25,1\n"), 4);
    EXPECT_EQ(error_line("t,theta:\n0,1\n"), 1);
    EXPECT_EQ(error_line("t,theta:a.flexion\n0,1\n"), 2);
}

TEST(MocapParse, MetadataAndColumns) {
    auto s = parse("# subject: s01\n# rate_hz: 120\nt,theta:r_elbow.flexion,theta:lumbar.flexion\n0,1,2\n0.5,3,4\n");
    EXPECT_EQ(s.metadata.at("subject"), "s01");
    ASSERT_EQ(s.dofs.size(), 2u);
    EXPECT_EQ(s.dofs[1], "lumbar.flexion");
    EXPECT_EQ(s.angles[0][1], 3.0);
    EXPECT_DOUBLE_EQ(s.rate(), 2.0);
}

TEST(MocapParse, FiveSecondsAt120Hz) {
    auto rec = synthetic_recording(middle_reach());
    auto dir = std::filesystem::temp_directory_path() / "reach_tests";
    std::filesystem::create_directories(dir);
    write_mocap(dir / "rec.csv", rec.series);
    auto s = load_mocap(dir / "rec.csv");
    EXPECT_EQ(s.samples(), 600u);
    EXPECT_NEAR(s.rate(), 120.0, 1e-6);
    EXPECT_EQ(s.dofs, rec.series.dofs);
}

TEST(MocapIngest, UnknownDof) {
    Skeleton sk(default_model());
    auto s = parse("t,theta:tail.flexion\n" + [] {
        std::string rows;
        for (int i = 0; i < 80; ++i) rows += std::to_string(i * 0.0125) + ",0\n";
        return rows;
    }());
    EXPECT_THROW(ingest(sk, s), ConfigError);
}

TEST(MocapIngest, DifferentiateExactOnQuadratics) {
    std::vector<double> t, y;
    for (int i = 0; i < 20; ++i) {
        t.push_back(0.1 * i);
        y.push_back(3.0 * t.back() * t.back() - t.back());
    }
    auto d = differentiate(t, y);
    for (int i = 1; i < 19; ++i) EXPECT_NEAR(d[i], 6.0 * t[i] - 1.0, 1e-12);
}

TEST(MocapIngest, RoundTripTorques) {
    const double rel = torque_round_trip({});
    RecordProperty("relative_rms", std::to_string(rel));
    EXPECT_LE(rel, 0.02);
}

TEST(MocapIngest, RoundTripTorquesShortWindow) {
    IngestOptions opt;
    opt.window = 11;
    EXPECT_LE(torque_round_trip(opt), 0.02);
}
