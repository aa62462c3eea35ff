#pragma once

// Savitzky-Golay smoothing. Interior samples use the symmetric window;
// near the ends the window is truncated to the available samples and a
// polynomial of degree min(order, count - 1) is fitted there instead.

#include "reach/common.hpp"

#include <vector>

namespace reach {

/// Weights w such that sum_j w[j] * y[j] is the value at sample `at` of the
/// least-squares polynomial of the given order through samples 0..count-1.
inline VecX savgol_weights(int count, int order, int at) {
    if (count < 1 || order < 0 || at < 0 || at >= count) throw ContractError("savgol_weights: bad arguments");
    const int deg = std::min(order, count - 1);
    MatX vander(count, deg + 1);
    for (int i = 0; i < count; ++i) {
        double x = static_cast<double>(i - at);
        double v = 1.0;
        for (int k = 0; k <= deg; ++k, v *= x) vander(i, k) = v;
    }
    // Row 0 of the pseudo-inverse: the fitted constant term at x = 0.
    Eigen::ColPivHouseholderQR<MatX> qr(vander);
    MatX pinv = qr.solve(MatX::Identity(count, count));
    return pinv.row(0).transpose();
}

/// Convolution coefficients of the centred window.
inline VecX savgol_coefficients(int window, int order) {
    if (window < 1 || window % 2 == 0) throw ContractError("savgol: window must be odd");
    if (order < 0 || order >= window) throw ContractError("savgol: order must be < window");
    return savgol_weights(window, order, window / 2);
}

inline std::vector<double> savgol_filter(const std::vector<double>& y, int window = 61, int order = 4) {
    const VecX centre = savgol_coefficients(window, order);
    const int n = static_cast<int>(y.size());
    if (n < window) throw ContractError("savgol_filter: series shorter than the window");
    const int half = window / 2;
    std::vector<double> out(y.size());
    for (int i = half; i < n - half; ++i) {
        double s = 0.0;
        for (int j = 0; j < window; ++j) s += centre[j] * y[i - half + j];
        out[i] = s;
    }
    for (int i = 0; i < half; ++i) {
        // truncated windows at both ends
        const int count_lo = i + half + 1;
        VecX w = savgol_weights(count_lo, order, i);
        double s = 0.0;
        for (int j = 0; j < count_lo; ++j) s += w[j] * y[j];
        out[i] = s;

        const int k = n - 1 - i;
        const int start = k - half;
        VecX wh = savgol_weights(count_lo, order, half);
        double sh = 0.0;
        for (int j = 0; j < count_lo; ++j) sh += wh[j] * y[start + j];
        out[k] = sh;
    }
    return out;
}

} // namespace reach
