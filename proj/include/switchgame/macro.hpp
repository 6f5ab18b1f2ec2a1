#pragma once

#include "switchgame/bestresponse.hpp"
#include "switchgame/gamespec.hpp"

#include <string>
#include <vector>

namespace switchgame {

/// State of the extended jump chain: the regime entered and the direction
/// of the move that entered it. Absorbing states carry `absorbing = true`.
struct ChainState {
    int m = 0;
    char dir = '+';  ///< '+' up move, '-' down move, 'a' absorbing
    std::string label() const;
};

struct ExtendedChain {
    int m_low = 0;
    int m_high = 0;
    std::vector<ChainState> states;
    std::vector<std::vector<double>> P;
    std::vector<double> xi;  ///< 0 for absorbing states
    bool absorbing_low = false;
    bool absorbing_high = false;
    double absorb_prob_low = 0.0;   ///< P(never leaving m_low after entering it from above)
    double absorb_prob_high = 0.0;  ///< P(never leaving m_high after entering it from below)

    int index(int m, char dir) const;  ///< -1 if absent
    bool transient() const { return absorbing_low || absorbing_high; }
};

/// Requires s_m increasing in m for both players and every sojourn start
/// point inside its continuation interval; throws OutOfOrderThresholds otherwise.
ExtendedChain build_chain(const GameSpec& spec, const ThresholdProfile& profile);

struct Occupation {
    std::vector<double> Pi;   ///< invariant law of the chain
    std::vector<double> rho;  ///< long-run time share per regime, indexed by m - m_low
};

/// Recurrent chains only (AbsorbingChain otherwise).
Occupation stationary_occupation(const ExtendedChain& chain);

struct SwitchCounts {
    double n1 = 0.0;
    double n2 = 0.0;
};

/// Expected lifetime switch counts from (x, m). Transient chains only.
SwitchCounts expected_switches(const ExtendedChain& chain, const GameSpec& spec, const ThresholdProfile& profile,
                               double x, int m);

/// Expected time until absorption from (x, m). Transient chains only.
double absorption_time(const ExtendedChain& chain, const GameSpec& spec, const ThresholdProfile& profile, double x,
                       int m);

} // namespace switchgame
