#include "switchgame/bestresponse.hpp"

#include "switchgame/errors.hpp"

#include <cmath>
#include <sstream>

namespace switchgame {

ThresholdProfile ThresholdProfile::sentinels(int m_low, int m_high) {
    ThresholdProfile p;
    p.m_low = m_low;
    p.m_high = m_high;
    p.s1.assign(m_high - m_low + 1, kUpperSentinel);
    p.s2.assign(m_high - m_low + 1, kLowerSentinel);
    return p;
}

std::string ThresholdProfile::admissibility() const {
    std::ostringstream os;
    os.precision(10);
    for (int m = m_low; m <= m_high; ++m) {
        if (m > m_low && m < m_high && !(p1(m) > p2(m))) {
            os << "s1[" << m << "]=" << p1(m) << " not above s2[" << m << "]=" << p2(m);
            return os.str();
        }
        if (m < m_high && !(p1(m) > p2(m + 1))) {
            os << "loop: s1[" << m << "]=" << p1(m) << " not above s2[" << m + 1 << "]=" << p2(m + 1);
            return os.str();
        }
    }
    return {};
}

namespace {

std::string at(int m, int n) {
    std::ostringstream os;
    os << " (regime " << m << ", control " << n << ")";
    return os.str();
}

BestResponseLadder build_ladder(const GameSpec& spec, const Fundamentals& fg, const ThresholdProfile& rival,
                                int player, int N) {
    BestResponseLadder L;
    L.player = player;
    L.budget = N;
    L.m_low = spec.m_low;
    L.values = std::make_shared<ValueGraph>(fg);
    int K = spec.size();
    L.threshold.assign(N + 1, std::vector<double>(K, player == 1 ? kUpperSentinel : kLowerSentinel));
    L.omega.assign(N + 1, std::vector<double>(K, 0.0));
    L.nu.assign(N + 1, std::vector<double>(K, 0.0));
    L.node_index.assign(N + 1, std::vector<int>(K, -1));
    ValueGraph& g = *L.values;
    SearchOptions opt;
    opt.reference = spec.reference_state;

    // player 1 leads upward and follows downward; player 2 the reverse
    int lead_dir = player == 1 ? +1 : -1;
    int first = player == 1 ? spec.m_low : spec.m_high;
    int last = player == 1 ? spec.m_high : spec.m_low;
    Side side = player == 1 ? Side::P1Up : Side::P2Down;

    for (int n = 0; n <= N; ++n) {
        for (int m = first;; m += lead_dir) {
            int k = spec.index(m);
            double rival_s = player == 1 ? rival.p2(m) : rival.p1(m);
            bool rival_acts = m != first && std::isfinite(rival_s);
            int follow_node = m != first ? L.node(n, m - lead_dir) : -1;

            ValueNode node;
            node.d = dcf(spec, player, m);
            const CostFunction* cost = &spec.cost(player, m);
            if (player == 1) {
                node.up_cost = cost;
                node.s_down = rival_acts ? rival_s : kLowerSentinel;
                node.down = rival_acts ? follow_node : -1;
            } else {
                node.down_cost = cost;
                node.s_up = rival_acts ? rival_s : kUpperSentinel;
                node.up = rival_acts ? follow_node : -1;
            }

            if (n == 0 || m == last) {
                // no own control: value is the rival-driven annuity matched at the rival threshold
                if (rival_acts) {
                    FG f = fg(rival_s);
                    double target = g.eval(follow_node, rival_s).v - node.d;
                    if (player == 1)
                        node.nu = target / f.G;
                    else
                        node.omega = target / f.F;
                }
            } else {
                int lead_node = L.node(n - 1, m + lead_dir);
                double d = node.d;
                PayoffFn h = [&g, lead_node, d, cost](double x) {
                    ValueD v = g.eval(lead_node, x);
                    return ValueD{v.v - d - cost->value(x), v.dv - cost->deriv(x)};
                };
                StoppingSolution sol;
                try {
                    if (rival_acts) {
                        PayoffFn l = [&g, follow_node, d](double x) {
                            ValueD v = g.eval(follow_node, x);
                            return ValueD{v.v - d, v.dv};
                        };
                        sol = solve_constrained(h, l, rival_s, side, fg, opt);
                    } else {
                        sol = solve_unconstrained(h, side, fg, opt);
                    }
                } catch (const PreemptionIncentive& e) {
                    throw PreemptionIncentive(e.what() + at(m, n));
                } catch (const NoBracket& e) {
                    throw NoBracket(e.what() + at(m, n));
                }
                node.omega = sol.omega;
                node.nu = sol.nu;
                if (player == 1) {
                    node.s_up = sol.s_tilde;
                    node.up = lead_node;
                } else {
                    node.s_down = sol.s_tilde;
                    node.down = lead_node;
                }
                L.threshold[n][k] = sol.s_tilde;
            }
            L.omega[n][k] = node.omega;
            L.nu[n][k] = node.nu;
            L.node_index[n][k] = g.add(node);
            if (m == last) break;
        }
    }
    return L;
}

} // namespace

BestResponseLadder zero_control_value(const GameSpec& spec, const Fundamentals& fg,
                                      const ThresholdProfile& rival, int player) {
    return build_ladder(spec, fg, rival, player, 0);
}

BestResponseLadder best_response_finite(const GameSpec& spec, const Fundamentals& fg,
                                        const ThresholdProfile& rival, int player, int N) {
    return build_ladder(spec, fg, rival, player, N);
}

TatonnementResult tatonnement(const GameSpec& spec, const Fundamentals& fg, int N, int A, double tol) {
    TatonnementResult res;
    res.profile = ThresholdProfile::sentinels(spec.m_low, spec.m_high);
    auto change = [](const std::vector<double>& a, const std::vector<double>& b) {
        double c = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (std::isinf(a[k]) && std::isinf(b[k]) && a[k] == b[k]) continue;
            c = std::max(c, std::abs(a[k] - b[k]));
        }
        return c;
    };
    double last_change[3] = {0.0, INFINITY, INFINITY};
    // seed: player 2 against a passive player 1
    for (int a = 1; a <= A; ++a) {
        int player = a % 2 == 1 ? 2 : 1;
        auto br = best_response_finite(spec, fg, res.profile, player, N);
        auto next = br.top_thresholds();
        auto& cur = player == 1 ? res.profile.s1 : res.profile.s2;
        double c = change(next, cur);
        last_change[player] = c;
        cur = next;
        if (player == 1) {
            res.omega1 = br.omega[N];
            res.nu1 = br.nu[N];
        } else {
            res.omega2 = br.omega[N];
            res.nu2 = br.nu[N];
        }
        res.history.push_back({a, player, next, c});
        if (last_change[1] < tol && last_change[2] < tol) {
            res.converged = true;
            return res;
        }
    }
    std::ostringstream os;
    os << "no best-response fixed point after " << A << " rounds; last changes " << last_change[1] << ", "
       << last_change[2];
    throw TatonnementNoConvergence(os.str(), std::move(res));
}

} // namespace switchgame
