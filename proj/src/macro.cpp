#include "switchgame/macro.hpp"

#include "switchgame/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace switchgame {

namespace {

constexpr double kAbsorbCutoff = 1e-12;

std::string num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

struct Interval {
    double a;
    double b;
};

Interval continuation(const Diffusion& d, const ThresholdProfile& p, int m) {
    return {m > p.m_low ? p.p2(m) : d.lower(), m < p.m_high ? p.p1(m) : d.upper()};
}

void require_ordered(const Diffusion& d, const ThresholdProfile& p) {
    auto fail = [](const std::string& what) {
        throw OutOfOrderThresholds(what + "; the chain needs strictly ordered thresholds, use simulate instead");
    };
    for (int m = p.m_low; m < p.m_high; ++m) {
        if (!d.in_domain(p.p1(m))) fail("s1_" + std::to_string(m) + " is outside the state space");
        if (m + 1 < p.m_high && !(p.p1(m) < p.p1(m + 1)))
            fail("s1_" + std::to_string(m) + " = " + num(p.p1(m)) + " >= s1_" + std::to_string(m + 1) + " = " +
                 num(p.p1(m + 1)));
    }
    for (int m = p.m_low + 1; m <= p.m_high; ++m) {
        if (!d.in_domain(p.p2(m))) fail("s2_" + std::to_string(m) + " is outside the state space");
        if (m > p.m_low + 1 && !(p.p2(m - 1) < p.p2(m)))
            fail("s2_" + std::to_string(m - 1) + " = " + num(p.p2(m - 1)) + " >= s2_" + std::to_string(m) + " = " +
                 num(p.p2(m)));
    }
    // every sojourn must start strictly inside its continuation interval
    for (int m = p.m_low; m <= p.m_high; ++m) {
        Interval c = continuation(d, p, m);
        if (m > p.m_low) {
            double x = p.p1(m - 1);
            if (!(c.a < x && x < c.b))
                fail("s1_" + std::to_string(m - 1) + " = " + num(x) + " is not inside regime " + std::to_string(m) +
                     "'s continuation interval");
        }
        if (m < p.m_high) {
            double x = p.p2(m + 1);
            if (!(c.a < x && x < c.b))
                fail("s2_" + std::to_string(m + 1) + " = " + num(x) + " is not inside regime " + std::to_string(m) +
                     "'s continuation interval");
        }
    }
}

/// Mass arriving in regime `target` by a move, split by the entry coin toss.
void deposit(const ExtendedChain& c, std::vector<double>& row, int target, char dir, double mass) {
    if (mass == 0.0) return;
    if (dir == '+' && target == c.m_high && c.absorbing_high) {
        row[c.index(target, 'a')] += mass * c.absorb_prob_high;
        row[c.index(target, '+')] += mass * (1.0 - c.absorb_prob_high);
    } else if (dir == '-' && target == c.m_low && c.absorbing_low) {
        row[c.index(target, 'a')] += mass * c.absorb_prob_low;
        row[c.index(target, '-')] += mass * (1.0 - c.absorb_prob_low);
    } else {
        row[c.index(target, dir)] += mass;
    }
}

double start_point(const ThresholdProfile& p, const ChainState& s) {
    return s.dir == '+' ? p.p1(s.m - 1) : p.p2(s.m + 1);
}

Eigen::MatrixXd to_eigen(const std::vector<std::vector<double>>& P, const std::vector<int>& keep) {
    Eigen::MatrixXd Q(keep.size(), keep.size());
    for (size_t i = 0; i < keep.size(); ++i)
        for (size_t j = 0; j < keep.size(); ++j) Q(i, j) = P[keep[i]][keep[j]];
    return Q;
}

struct Transient {
    std::vector<int> keep;       ///< non-absorbing state indices
    std::vector<double> up, dn;  ///< expected future up/down moves per state (0 for absorbing)
    std::vector<double> time;    ///< expected time to absorption per state
};

Transient fundamental(const ExtendedChain& c) {
    if (!c.transient()) throw RecurrentChain("the chain has no absorbing state; switch counts are infinite");
    Transient t;
    int n = static_cast<int>(c.states.size());
    for (int i = 0; i < n; ++i)
        if (c.states[i].dir != 'a') t.keep.push_back(i);
    int k = static_cast<int>(t.keep.size());
    Eigen::MatrixXd Q = to_eigen(c.P, t.keep);
    Eigen::VectorXd pu(k), pd(k), xi(k);
    for (int i = 0; i < k; ++i) {
        int e = t.keep[i];
        pu(i) = pd(i) = 0.0;
        for (int f = 0; f < n; ++f) {
            const ChainState& s = c.states[f];
            bool up = s.dir == '+' || (s.dir == 'a' && s.m == c.m_high);
            (up ? pu(i) : pd(i)) += c.P[e][f];
        }
        xi(i) = c.xi[e];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd::Identity(k, k) - Q);
    Eigen::VectorXd vu = lu.solve(pu), vd = lu.solve(pd), tt = lu.solve(xi);
    t.up.assign(n, 0.0);
    t.dn.assign(n, 0.0);
    t.time.assign(n, 0.0);
    for (int i = 0; i < k; ++i) {
        t.up[t.keep[i]] = vu(i);
        t.dn[t.keep[i]] = vd(i);
        t.time[t.keep[i]] = tt(i);
    }
    return t;
}

/// First transition out of (x, m): probability per state, whether it was
/// reached by an up or down move, and the first sojourn on its finite event.
struct FirstStep {
    std::vector<double> up_mass, dn_mass, stay_mass;  ///< per state
    double sojourn = 0.0;
};

FirstStep first_step(const ExtendedChain& c, const GameSpec& spec, const ThresholdProfile& p, double x, int m) {
    const Diffusion& d = spec.diffusion;
    d.require_domain(x);
    if (m < c.m_low || m > c.m_high) throw DomainError("regime " + std::to_string(m) + " is outside the game");
    Interval iv = continuation(d, p, m);
    if (x > iv.b || x < iv.a)
        throw DomainError("start state x = " + num(x) + " lies inside a switching region of regime " +
                          std::to_string(m));
    size_t n = c.states.size();
    FirstStep f;
    f.up_mass.assign(n, 0.0);
    f.dn_mass.assign(n, 0.0);
    f.stay_mass.assign(n, 0.0);
    if (m == c.m_high || m == c.m_low) {
        bool top = m == c.m_high;
        double reach = 1.0;
        double s = top ? iv.a : iv.b;
        if (x != s) {
            reach = top ? d.exit_prob_down(x, iv.a, d.upper()) : d.exit_prob_up(x, d.lower(), iv.b);
            if (1.0 - reach <= kAbsorbCutoff) reach = 1.0;
            f.sojourn = d.conditional_passage_time(x, s).time * reach;
        }
        if (reach < 1.0) {
            int a = c.index(m, 'a');
            if (a < 0) throw DomainError("absorption from the start state has no matching chain state");
            f.stay_mass[a] = 1.0 - reach;
        }
        std::vector<double> row(n, 0.0);
        deposit(c, row, top ? m - 1 : m + 1, top ? '-' : '+', reach);
        (top ? f.dn_mass : f.up_mass) = row;
        return f;
    }
    double pu = x >= iv.b ? 1.0 : x <= iv.a ? 0.0 : d.exit_prob_up(x, iv.a, iv.b);
    if (x > iv.a && x < iv.b) f.sojourn = d.expected_exit_time(x, iv.a, iv.b);
    deposit(c, f.up_mass, m + 1, '+', pu);
    deposit(c, f.dn_mass, m - 1, '-', 1.0 - pu);
    return f;
}

} // namespace

std::string ChainState::label() const {
    std::string s = "(" + std::string(m > 0 ? "+" : "") + std::to_string(m) + ")";
    return s + dir;
}

int ExtendedChain::index(int m, char dir) const {
    for (size_t i = 0; i < states.size(); ++i)
        if (states[i].m == m && states[i].dir == dir) return static_cast<int>(i);
    return -1;
}

ExtendedChain build_chain(const GameSpec& spec, const ThresholdProfile& p) {
    const Diffusion& d = spec.diffusion;
    if (p.m_low != spec.m_low || p.m_high != spec.m_high)
        throw ConfigError("profile regimes do not match the game");
    std::string bad = p.admissibility();
    if (!bad.empty()) throw OutOfOrderThresholds("inadmissible profile: " + bad);
    require_ordered(d, p);

    ExtendedChain c;
    c.m_low = p.m_low;
    c.m_high = p.m_high;
    c.states.push_back({p.m_low, '-'});
    for (int m = p.m_low + 1; m < p.m_high; ++m) {
        c.states.push_back({m, '+'});
        c.states.push_back({m, '-'});
    }
    c.states.push_back({p.m_high, '+'});

    c.absorb_prob_high = d.exit_prob_up(p.p1(p.m_high - 1), p.p2(p.m_high), d.upper());
    c.absorb_prob_low = d.exit_prob_down(p.p2(p.m_low + 1), d.lower(), p.p1(p.m_low));
    c.absorbing_low = c.absorb_prob_low > kAbsorbCutoff;
    c.absorbing_high = c.absorb_prob_high > kAbsorbCutoff;
    if (!c.absorbing_low) c.absorb_prob_low = 0.0;
    if (!c.absorbing_high) c.absorb_prob_high = 0.0;
    if (c.absorbing_low) c.states.push_back({p.m_low, 'a'});
    if (c.absorbing_high) c.states.push_back({p.m_high, 'a'});

    size_t n = c.states.size();
    c.P.assign(n, std::vector<double>(n, 0.0));
    c.xi.assign(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        const ChainState& s = c.states[i];
        auto& row = c.P[i];
        if (s.dir == 'a') {
            row[i] = 1.0;
            continue;
        }
        double x0 = start_point(p, s);
        Interval iv = continuation(d, p, s.m);
        if (s.m == p.m_high) {
            deposit(c, row, s.m - 1, '-', 1.0);
            c.xi[i] = d.conditional_passage_time(x0, iv.a).time;
        } else if (s.m == p.m_low) {
            deposit(c, row, s.m + 1, '+', 1.0);
            c.xi[i] = d.conditional_passage_time(x0, iv.b).time;
        } else {
            double pu = d.exit_prob_up(x0, iv.a, iv.b);
            deposit(c, row, s.m + 1, '+', pu);
            deposit(c, row, s.m - 1, '-', 1.0 - pu);
            c.xi[i] = d.expected_exit_time(x0, iv.a, iv.b);
        }
    }
    return c;
}

Occupation stationary_occupation(const ExtendedChain& c) {
    if (c.transient()) throw AbsorbingChain("the chain has absorbing states; use expected_switches/absorption_time");
    int n = static_cast<int>(c.states.size());
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = c.P[j][i] - (i == j ? 1.0 : 0.0);
    A.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    Eigen::VectorXd pi = A.partialPivLu().solve(b);

    Occupation o;
    o.Pi.assign(pi.data(), pi.data() + n);
    o.rho.assign(c.m_high - c.m_low + 1, 0.0);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        double w = pi(i) * c.xi[i];
        o.rho[c.states[i].m - c.m_low] += w;
        total += w;
    }
    for (double& r : o.rho) r /= total;
    double s = 0.0;
    for (double r : o.rho) s += r;
    for (double& r : o.rho) r /= s;
    return o;
}

SwitchCounts expected_switches(const ExtendedChain& c, const GameSpec& spec, const ThresholdProfile& p, double x,
                               int m) {
    Transient t = fundamental(c);
    FirstStep f = first_step(c, spec, p, x, m);
    SwitchCounts out;
    for (size_t k = 0; k < c.states.size(); ++k) {
        double reach = f.up_mass[k] + f.dn_mass[k] + f.stay_mass[k];
        out.n1 += f.up_mass[k] + reach * t.up[k];
        out.n2 += f.dn_mass[k] + reach * t.dn[k];
    }
    return out;
}

double absorption_time(const ExtendedChain& c, const GameSpec& spec, const ThresholdProfile& p, double x, int m) {
    Transient t = fundamental(c);
    FirstStep f = first_step(c, spec, p, x, m);
    double T = f.sojourn;
    for (size_t k = 0; k < c.states.size(); ++k) T += (f.up_mass[k] + f.dn_mass[k] + f.stay_mass[k]) * t.time[k];
    return T;
}

} // namespace switchgame
