#pragma once

// Small models and independent reference computations for the tests. The
// oracles here use plain trigonometry and hand-written linear algebra so that
// they share no code with the library kernels they check.

#include "reach/body_model.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace fx {

using reach::Vec3;

struct Link {
    double mass = 1.0;
    double length = 1.0;
    double com = 0.5;   // distance of the COM from the joint
    double iyy = 0.0;   // inertia about the COM, flexion axis
};

inline reach::DofSpec locked() { return {-0.01, 0.01, 0.0, 0.0, 0.0}; }

/// Serial chain of hinges about y, all DoF other than flexion locked. Links
/// point along `dir` at zero angle. Ranges default to +/-180 deg.
inline reach::BodyModel planar_chain(const std::vector<Link>& links, Vec3 dir = Vec3(0, 0, -1),
                                     std::vector<std::pair<double, double>> ranges = {}) {
    reach::BodyModel m;
    m.name = "chain";
    for (std::size_t i = 0; i < links.size(); ++i) {
        reach::Segment s;
        s.name = "s" + std::to_string(i);
        s.mass = links[i].mass;
        s.length = links[i].length;
        s.axis = dir;
        s.com_offset = dir * links[i].com;
        s.inertia = reach::Mat3::Zero();
        s.inertia(1, 1) = links[i].iyy;
        s.inertia(0, 0) = s.inertia(2, 2) = links[i].iyy;
        m.segments.push_back(s);
        reach::JointSpec j;
        j.name = "j" + std::to_string(i);
        j.parent = i == 0 ? reach::kGround : "s" + std::to_string(i - 1);
        j.child = s.name;
        j.origin = i == 0 ? Vec3::Zero() : Vec3(dir * links[i - 1].length);
        auto [lo, hi] = i < ranges.size() ? ranges[i] : std::pair{-180.0, 180.0};
        j.dof = {reach::DofSpec{lo, hi, 0.0, 0.0, 0.0}, locked(), locked()};
        m.joints.push_back(j);
    }
    m.end_effector = m.segments.back().name;
    return m;
}

/// Tip of a hanging planar chain (links along -z at zero angle, hinges about
/// +y), relative angles in degrees. x = -sum L sin(phi), z = -sum L cos(phi).
inline Vec3 hanging_tip(const std::vector<double>& lengths, const std::vector<double>& deg) {
    double phi = 0.0, x = 0.0, z = 0.0;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        phi += deg[i] * M_PI / 180.0;
        x -= lengths[i] * std::sin(phi);
        z -= lengths[i] * std::cos(phi);
    }
    return {x, 0.0, z};
}

/// Mechanical energy of a hanging planar chain. Angles in rad, rates in rad/s.
inline double chain_energy(const std::vector<Link>& links, const std::vector<double>& q,
                           const std::vector<double>& qd, double g) {
    double phi = 0.0, phid = 0.0, x = 0.0, z = 0.0, vx = 0.0, vz = 0.0, e = 0.0;
    for (std::size_t i = 0; i < links.size(); ++i) {
        phi += q[i];
        phid += qd[i];
        const double s = std::sin(phi), c = std::cos(phi);
        const double cz = z - links[i].com * c;
        const double cvx = vx - links[i].com * c * phid, cvz = vz + links[i].com * s * phid;
        e += 0.5 * links[i].mass * (cvx * cvx + cvz * cvz) + 0.5 * links[i].iyy * phid * phid;
        e += links[i].mass * g * cz;
        x -= links[i].length * s;
        z -= links[i].length * c;
        vx -= links[i].length * c * phid;
        vz += links[i].length * s * phid;
    }
    return e;
}

/// Closed-form torques of a hanging two-link arm (relative angles, rad).
inline std::array<double, 2> two_link_torque(const Link& a, const Link& b, double q1, double q2, double d1,
                                             double d2, double dd1, double dd2, double g) {
    const double c2 = std::cos(q2);
    const double m11 = a.iyy + b.iyy + a.mass * a.com * a.com +
                       b.mass * (a.length * a.length + b.com * b.com + 2 * a.length * b.com * c2);
    const double m12 = b.iyy + b.mass * (b.com * b.com + a.length * b.com * c2);
    const double m22 = b.iyy + b.mass * b.com * b.com;
    const double h = -b.mass * a.length * b.com * std::sin(q2);
    const double g1 = a.mass * g * a.com * std::sin(q1) + b.mass * g * (a.length * std::sin(q1) + b.com * std::sin(q1 + q2));
    const double g2 = b.mass * g * b.com * std::sin(q1 + q2);
    return {m11 * dd1 + m12 * dd2 + h * (2 * d1 * d2 + d2 * d2) + g1, m12 * dd1 + m22 * dd2 - h * d1 * d1 + g2};
}

/// Sixth-order reach polynomial written out term by term: value and first
/// two derivatives at t.
struct Poly6 {
    double c[7]{};
    Poly6(double th0, double thf, double p6, double tf) {
        const double d = thf - th0;
        c[0] = th0;
        c[3] = 10 * d / std::pow(tf, 3) - p6 * std::pow(tf, 3);
        c[4] = -15 * d / std::pow(tf, 4) + 3 * p6 * std::pow(tf, 2);
        c[5] = 6 * d / std::pow(tf, 5) - 3 * p6 * tf;
        c[6] = p6;
    }
    double x(double t) const {
        double v = 0;
        for (int k = 0; k < 7; ++k) v += c[k] * std::pow(t, k);
        return v;
    }
    double v(double t) const {
        double s = 0;
        for (int k = 1; k < 7; ++k) s += k * c[k] * std::pow(t, k - 1);
        return s;
    }
    double a(double t) const {
        double s = 0;
        for (int k = 2; k < 7; ++k) s += k * (k - 1) * c[k] * std::pow(t, k - 2);
        return s;
    }
};

/// Five-point central stencil.
inline double stencil5(const std::function<double(double)>& f, double x, double h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

/// Savitzky-Golay convolution weights for the centre of a window from the
/// normal equations (A^T A) c = A^T e, solved by Gaussian elimination in long
/// double on abscissae scaled to [-1, 1].
inline std::vector<double> savgol_normal_equations(int window, int order, int at) {
    const int n = order + 1;
    const int half = window / 2;
    const long double scale = half > 0 ? static_cast<long double>(half) : 1.0L;
    std::vector<std::vector<long double>> a(window, std::vector<long double>(n));
    for (int i = 0; i < window; ++i)
        for (int k = 0; k < n; ++k) a[i][k] = std::pow(static_cast<long double>(i - at) / scale, k);
    // ata | at^T
    std::vector<std::vector<long double>> m(n, std::vector<long double>(n + window, 0.0L));
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c)
            for (int i = 0; i < window; ++i) m[r][c] += a[i][r] * a[i][c];
        for (int i = 0; i < window; ++i) m[r][n + i] = a[i][r];
    }
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
        std::swap(m[col], m[piv]);
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const long double f = m[r][col] / m[col][col];
            for (int c = col; c < n + window; ++c) m[r][c] -= f * m[col][c];
        }
    }
    std::vector<double> w(window);
    for (int i = 0; i < window; ++i) w[i] = static_cast<double>(m[0][n + i] / m[0][0]);
    return w;
}

} // namespace fx
