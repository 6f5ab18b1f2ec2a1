#pragma once

#include "switchgame/errors.hpp"
#include "switchgame/gamespec.hpp"
#include "switchgame/stopping.hpp"
#include "switchgame/value.hpp"

#include <limits>
#include <memory>
#include <vector>

namespace switchgame {

constexpr double kUpperSentinel = std::numeric_limits<double>::infinity();
constexpr double kLowerSentinel = -std::numeric_limits<double>::infinity();

/// Strategy pair (s1_m, s2_m) indexed by m - m_low. s1 at m_high and s2 at
/// m_low are boundary sentinels (+inf / -inf).
struct ThresholdProfile {
    int m_low = 0;
    int m_high = 0;
    std::vector<double> s1;
    std::vector<double> s2;

    static ThresholdProfile sentinels(int m_low, int m_high);
    int size() const { return m_high - m_low + 1; }
    double& p1(int m) { return s1[m - m_low]; }
    double& p2(int m) { return s2[m - m_low]; }
    double p1(int m) const { return s1[m - m_low]; }
    double p2(int m) const { return s2[m - m_low]; }
    /// Empty string if admissible, else a description of the violation.
    std::string admissibility() const;
};

/// Per (n, m) threshold and coefficients of a finite-control best response,
/// plus the linked value graph (node(n, m) gives the n-control value).
struct BestResponseLadder {
    int player = 1;
    int budget = 0;
    int m_low = 0;
    std::vector<std::vector<double>> threshold;  ///< [n][m - m_low]; sentinel if no control
    std::vector<std::vector<double>> omega;
    std::vector<std::vector<double>> nu;
    std::shared_ptr<ValueGraph> values;
    std::vector<std::vector<int>> node_index;  ///< [n][m - m_low]

    int node(int n, int m) const { return node_index[n][m - m_low]; }
    double value(int n, int m, double x) const { return values->eval(node(n, m), x).v; }
    /// Top-layer thresholds as a strategy vector.
    std::vector<double> top_thresholds() const { return threshold[budget]; }
};

/// Zero-control value of player i against rival thresholds: the n = 0 layer.
BestResponseLadder zero_control_value(const GameSpec& spec, const Fundamentals& fg,
                                      const ThresholdProfile& rival, int player);

/// Finite-control best response ladder with up to N controls.
BestResponseLadder best_response_finite(const GameSpec& spec, const Fundamentals& fg,
                                        const ThresholdProfile& rival, int player, int N);

struct TatonnementRound {
    int round;
    int player;
    std::vector<double> thresholds;
    double max_change;
};

struct TatonnementResult {
    ThresholdProfile profile;
    std::vector<double> omega1, nu1, omega2, nu2;  ///< top-layer coefficients
    std::vector<TatonnementRound> history;
    bool converged = false;
};

/// NoConvergence carrying the last iterate.
class TatonnementNoConvergence : public NoConvergence {
public:
    TatonnementNoConvergence(const std::string& what, TatonnementResult partial)
        : NoConvergence(what), partial_(std::move(partial)) {}
    const TatonnementResult& partial() const { return partial_; }

private:
    TatonnementResult partial_;
};

/// Alternating best responses seeded by player 2's monopoly thresholds.
/// Throws TatonnementNoConvergence after A rounds.
TatonnementResult tatonnement(const GameSpec& spec, const Fundamentals& fg, int N = 30, int A = 30,
                              double tol = 1e-6);

} // namespace switchgame
