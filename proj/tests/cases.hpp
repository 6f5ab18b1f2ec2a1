#pragma once

// Game specifications shared by the test suites.

#include "switchgame/gamespec.hpp"

namespace cases {

/// Symmetric OU market on {lo, ..., hi}: profit ladder 0, 1.5, 2.8, 4, 5.1, 5.9, 6
/// for P1 on regimes -3..3, mirrored for P2; exponential costs of level c.
inline switchgame::GameSpec ou(int lo, int hi, double c = 0.5) {
    using namespace switchgame;
    const double ladder[] = {0.0, 1.5, 2.8, 4.0, 5.1, 5.9, 6.0};
    GameSpec s;
    s.diffusion = Diffusion::ou(0.15, 1.5, 0.0);
    s.r = 0.1;
    s.m_low = lo;
    s.m_high = hi;
    for (int m = lo; m <= hi; ++m) {
        s.pi1.push_back(ladder[m + 3]);
        s.pi2.push_back(ladder[3 - m]);
        s.cost1.push_back(CostFunction::exponential(c, 0.5, -1.0));
        s.cost2.push_back(CostFunction::exponential(c, 0.5, 1.0));
    }
    s.validate();
    return s;
}

/// Long-run advantage market: GBM factor, three regimes, hinge costs.
inline switchgame::GameSpec gbm(double mu = 0.08, double sigma = 0.25) {
    using namespace switchgame;
    GameSpec s;
    s.diffusion = Diffusion::gbm(mu, sigma);
    s.r = 0.1;
    s.m_low = -1;
    s.m_high = 1;
    s.reference_state = 5.0;
    s.pi1 = {0.0, 3.0, 5.0};
    s.pi2 = {5.0, 3.0, 0.0};
    s.cost1.assign(3, CostFunction::hinge(10.0, -1.0));
    s.cost2.assign(3, CostFunction::hinge(-2.0, 1.0));
    s.validate();
    return s;
}

} // namespace cases
