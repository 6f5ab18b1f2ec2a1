#pragma once

// Independent reference computations used only by tests.

#include "switchgame/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracles {

/// Mean exit time from (a, b) by solving (1/2)v^2 T'' + b T' = -1,
/// T(a) = T(b) = 0 with central differences (Thomas algorithm) and one
/// Richardson extrapolation step.
inline double exit_time_fd_n(const switchgame::Diffusion& d, double x, double a, double b, int n) {
    double h = (b - a) / n;
    std::vector<double> lo(n + 1), di(n + 1), up(n + 1), rhs(n + 1);
    di[0] = di[n] = 1.0;
    for (int i = 1; i < n; ++i) {
        double xi = a + i * h;
        double v = d.vol(xi), m = d.drift(xi);
        lo[i] = 0.5 * v * v / (h * h) - m / (2 * h);
        di[i] = -v * v / (h * h);
        up[i] = 0.5 * v * v / (h * h) + m / (2 * h);
        rhs[i] = -1.0;
    }
    for (int i = 1; i <= n; ++i) {
        double w = lo[i] / di[i - 1];
        di[i] -= w * up[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> t(n + 1);
    t[n] = rhs[n] / di[n];
    for (int i = n - 1; i >= 0; --i) t[i] = (rhs[i] - up[i] * t[i + 1]) / di[i];
    double pos = (x - a) / h;
    int k = std::min(n - 1, static_cast<int>(pos));
    double w = pos - k;
    // cubic Lagrange interpolation through neighbouring nodes
    int k0 = std::clamp(k - 1, 0, n - 3);
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
        double li = 1.0;
        for (int j = 0; j < 4; ++j)
            if (j != i) li *= (pos - (k0 + j)) / double(i - j);
        s += li * t[k0 + i];
    }
    (void)w;
    return s;
}

inline double exit_time_fd(const switchgame::Diffusion& d, double x, double a, double b) {
    double t1 = exit_time_fd_n(d, x, a, b, 20000);
    double t2 = exit_time_fd_n(d, x, a, b, 40000);
    return t2 + (t2 - t1) / 3.0;
}

} // namespace oracles
