#pragma once

#include "switchgame/diffusion.hpp"

#include <functional>
#include <string>
#include <vector>

namespace switchgame {

/// Switching cost K(x). Exponential: c(1 + e^{s beta x}); LinearHinge: (c + beta x)_+;
/// Constant: c.
struct CostFunction {
    enum class Kind { Exponential, LinearHinge, Constant };
    Kind kind = Kind::Constant;
    double c = 0.0;
    double beta = 0.0;
    double sign = 1.0;  ///< exponent sign for the exponential family

    static CostFunction exponential(double c, double beta, double sign);
    static CostFunction hinge(double c, double beta);
    static CostFunction constant(double c);

    double value(double x) const;
    double deriv(double x) const;
    double second(double x) const;
    /// Location of the hinge kink, NaN for smooth families.
    double kink() const;
};

/// Game data: regimes [m_low, m_high], constant profit ladders, switching
/// costs per player and regime, discount rate and the driving diffusion.
struct GameSpec {
    Diffusion diffusion = Diffusion::ou(1.0, 1.0, 0.0);
    double r = 0.1;
    int m_low = -1;
    int m_high = 1;
    std::vector<double> pi1;  ///< indexed by m - m_low
    std::vector<double> pi2;
    std::vector<CostFunction> cost1;
    std::vector<CostFunction> cost2;
    /// Anchor of GBM probe grids and search intervals.
    double reference_state = 1.0;

    int size() const { return m_high - m_low + 1; }
    int index(int m) const { return m - m_low; }
    bool contains(int m) const { return m >= m_low && m <= m_high; }

    double pi(int player, int m) const;
    const CostFunction& cost(int player, int m) const;

    /// Throws ConfigError when an invariant fails.
    void validate() const;
};

/// Static discounted cashflow D^i_m = pi^i_m / r.
double dcf(const GameSpec& spec, int player, int m);

/// Value and first derivative of a payoff function.
struct ValueD {
    double v;
    double dv;
};
using PayoffFn = std::function<ValueD(double)>;

class ValueGraph;

/// Leader payoff h (with derivative) and follower payoff l of player i at m,
/// built from the adjacent-regime value nodes. Missing directions are empty.
struct LeaderFollower {
    PayoffFn h;
    PayoffFn l;
};
LeaderFollower leader_follower(const GameSpec& spec, const ValueGraph& values, int player, int m,
                               int up_node, int down_node);

struct HClassReport {
    bool pass = false;
    double sign_change_point = 0.0;
    int sign_changes = 0;
    bool lower_decay = false;
    bool upper_decay = false;
    std::string detail;
};
enum class HClass { Inc, Dec };

/// Checks that (L - r)f changes sign exactly once on the probe grid with
/// the orientation of the target class, plus the tail-decay heuristics.
HClassReport hclass_check(const GameSpec& spec, const Fundamentals& fg,
                          const std::function<double(double)>& f, HClass target);

} // namespace switchgame
