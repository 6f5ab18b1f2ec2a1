#pragma once

#include "switchgame/diffusion.hpp"
#include "switchgame/gamespec.hpp"

#include <vector>

namespace switchgame {

/// P1 stops by moving up (stop region [s, inf)); P2 stops by moving down.
enum class Side { P1Up, P2Down };

struct StoppingSolution {
    double s_tilde = 0.0;
    double omega = 0.0;
    double nu = 0.0;
    bool preemption_ok = true;
    std::vector<double> roots;  ///< all isolated roots found; s_tilde is the selected one
    double foc_residual = 0.0;  ///< threshold-equation residual normalized by W(s, s)
};

/// W(x1, x2) = F'(x1)G(x2) - F(x2)G'(x1) (derivatives at the stopping point
/// x1, so that W(x, x) is the classical Wronskian) and
/// calW(x1, x2) = F(x1)G(x2) - F(x2)G(x1).
struct Wronskians {
    double W;
    double calW;
};
Wronskians wronskians(const FG& at1, const FG& at2);

struct SearchOptions {
    double reference = 1.0;  ///< GBM anchor of the search interval
    int grid = 400;
    int widenings = 3;
};

/// Local stopping problem against a rival who switches at s_rival: find the
/// threshold solving h W(s, s_r) - l(s_r) W(s, s) - h'(s) calW(s, s_r) = 0 on
/// the side away from the rival, with coefficients from value matching at
/// both ends. Throws PreemptionIncentive if h(s_r) >= l(s_r), NoBracket if no
/// sign change is found after widening.
StoppingSolution solve_constrained(const PayoffFn& h, const PayoffFn& l, double s_rival, Side side,
                                   const Fundamentals& fg, const SearchOptions& opt = {});

/// One-sided problem (no rival switching): h F' - h' F = 0 for P1 (nu = 0),
/// h G' - h' G = 0 for P2 (omega = 0).
StoppingSolution solve_unconstrained(const PayoffFn& h, Side side, const Fundamentals& fg,
                                     const SearchOptions& opt = {});

} // namespace switchgame
