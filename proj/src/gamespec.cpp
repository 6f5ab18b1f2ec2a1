#include "switchgame/gamespec.hpp"

#include "switchgame/errors.hpp"
#include "switchgame/value.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace switchgame {

CostFunction CostFunction::exponential(double c, double beta, double sign) {
    return {Kind::Exponential, c, beta, sign};
}
CostFunction CostFunction::hinge(double c, double beta) { return {Kind::LinearHinge, c, beta, 1.0}; }
CostFunction CostFunction::constant(double c) { return {Kind::Constant, c, 0.0, 1.0}; }

double CostFunction::value(double x) const {
    switch (kind) {
    case Kind::Exponential: return c * (1.0 + std::exp(sign * beta * x));
    case Kind::LinearHinge: return std::max(0.0, c + beta * x);
    case Kind::Constant: return c;
    }
    return c;
}

double CostFunction::deriv(double x) const {
    switch (kind) {
    case Kind::Exponential: return c * sign * beta * std::exp(sign * beta * x);
    case Kind::LinearHinge: return c + beta * x > 0.0 ? beta : 0.0;
    case Kind::Constant: return 0.0;
    }
    return 0.0;
}

double CostFunction::second(double x) const {
    if (kind == Kind::Exponential) return c * beta * beta * std::exp(sign * beta * x);
    return 0.0;
}

double CostFunction::kink() const {
    if (kind == Kind::LinearHinge && beta != 0.0) return -c / beta;
    return std::numeric_limits<double>::quiet_NaN();
}

double GameSpec::pi(int player, int m) const {
    return player == 1 ? pi1.at(index(m)) : pi2.at(index(m));
}

const CostFunction& GameSpec::cost(int player, int m) const {
    return player == 1 ? cost1.at(index(m)) : cost2.at(index(m));
}

void GameSpec::validate() const {
    if (!(m_low < m_high)) throw ConfigError("regime set needs m_low < m_high");
    std::size_t n = static_cast<std::size_t>(size());
    if (pi1.size() != n || pi2.size() != n) throw ConfigError("profit ladders must have one entry per regime");
    if (cost1.size() != n || cost2.size() != n) throw ConfigError("cost tables must have one entry per regime");
    if (!(r > 0.0)) throw ConfigError("discount rate must be positive");
    for (std::size_t k = 1; k < n; ++k) {
        if (!(pi1[k] > pi1[k - 1])) throw ConfigError("player 1 profit must increase in m");
        if (!(pi2[k] < pi2[k - 1])) throw ConfigError("player 2 profit must decrease in m");
    }
    auto grid = diffusion.probe_grid(reference_state);
    for (int p = 1; p <= 2; ++p) {
        for (const auto& k : p == 1 ? cost1 : cost2) {
            if (k.kind == CostFunction::Kind::Exponential && !(k.c > 0.0))
                throw ConfigError("exponential cost level must be positive");
            if (k.kind == CostFunction::Kind::Constant && !(k.c > 0.0))
                throw ConfigError("constant cost must be positive");
            for (double x : grid)
                if (k.value(x) < 0.0) throw ConfigError("switching cost must be nonnegative");
        }
    }
}

double dcf(const GameSpec& spec, int player, int m) {
    if (!spec.contains(m)) throw MissingNeighbor("regime outside the regime set");
    return spec.pi(player, m) / spec.r;
}

LeaderFollower leader_follower(const GameSpec& spec, const ValueGraph& values, int player, int m,
                               int up_node, int down_node) {
    LeaderFollower out;
    double d = dcf(spec, player, m);
    const CostFunction* k = &spec.cost(player, m);
    // P1 leads by moving up, P2 by moving down
    int lead = player == 1 ? up_node : down_node;
    int follow = player == 1 ? down_node : up_node;
    bool can_lead = player == 1 ? m < spec.m_high : m > spec.m_low;
    bool can_follow = player == 1 ? m > spec.m_low : m < spec.m_high;
    if (can_lead) {
        if (lead < 0) throw MissingNeighbor("leader neighbour value missing");
        out.h = [&values, lead, d, k](double x) {
            ValueD v = values.eval(lead, x);
            return ValueD{v.v - d - k->value(x), v.dv - k->deriv(x)};
        };
    }
    if (can_follow) {
        if (follow < 0) throw MissingNeighbor("follower neighbour value missing");
        out.l = [&values, follow, d](double x) {
            ValueD v = values.eval(follow, x);
            return ValueD{v.v - d, v.dv};
        };
    }
    return out;
}

HClassReport hclass_check(const GameSpec& spec, const Fundamentals& fg,
                          const std::function<double(double)>& f, HClass target) {
    HClassReport rep;
    auto grid = spec.diffusion.probe_grid(spec.reference_state);
    std::vector<double> lf(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double x = grid[i];
        double h = 1e-4 * std::max(1.0, std::abs(x));
        if (spec.diffusion.kind() == DiffusionKind::GBM) h = 1e-4 * x;
        double fp = f(x + h), f0 = f(x), fm = f(x - h);
        lf[i] = spec.diffusion.generator(x, f0, (fp - fm) / (2 * h), (fp - 2 * f0 + fm) / (h * h), spec.r);
    }
    double first_sign = target == HClass::Inc ? 1.0 : -1.0;
    int changes = 0;
    double prev = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double s = lf[i] > 0.0 ? 1.0 : (lf[i] < 0.0 ? -1.0 : 0.0);
        if (s == 0.0) continue;
        if (prev != 0.0 && s != prev) {
            ++changes;
            rep.sign_change_point = 0.5 * (grid[i] + grid[i - 1]);
        }
        if (prev == 0.0 && s != first_sign) {
            rep.detail = "wrong sign at the lower probe extreme";
        }
        prev = s;
    }
    rep.sign_changes = changes;
    bool oriented = rep.detail.empty();

    // tail decay of |f/G| toward the lower end and |f/F| toward the upper end,
    // sampled on points marching outward from the probe range
    const Diffusion& d = spec.diffusion;
    auto outward = [&](bool upper, int k) {
        if (d.kind() == DiffusionKind::GBM) {
            double f = 8.0 * std::pow(2.0, k);
            return upper ? spec.reference_state * f : spec.reference_state / f;
        }
        double w = (4.0 + 2.0 * k) * d.sigma() / std::sqrt(2.0 * d.mu());
        return upper ? d.theta() + w : d.theta() - w;
    };
    auto decays = [&](bool upper) {
        const int n = 9;
        std::vector<double> q(n);
        for (int k = 0; k < n; ++k) {
            double x = outward(upper, k);
            FG v = fg(x);
            q[k] = std::abs(f(x)) / (upper ? v.F : v.G);
            if (!std::isfinite(q[k])) return false;
        }
        return q[n - 1] < q[n - 2] && q[n - 2] < q[n - 3] && q[n - 1] < q[0];
    };
    rep.lower_decay = decays(false);
    rep.upper_decay = decays(true);
    rep.pass = oriented && changes == 1 && rep.lower_decay && rep.upper_decay;
    if (changes != 1) {
        std::ostringstream os;
        os << "(L-r)f has " << changes << " sign changes on the probe grid";
        rep.detail = os.str();
    } else if (!rep.lower_decay || !rep.upper_decay) {
        rep.detail = "tail ratio not decaying at the probe extremes";
    }
    return rep;
}

} // namespace switchgame
