#include "switchgame/equilibrium.hpp"

#include "switchgame/errors.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace switchgame {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

std::string loc(int player, int m) {
    return "(" + std::to_string(player) + ", " + std::to_string(m) + ")";
}

// Unknown layout per regime k: s1, w1 (m < top); n1 (m > bottom); s2, n2 (m > bottom); w2 (m < top).
std::vector<double> pack(const EquilibriumSolution& s) {
    std::vector<double> u;
    for (int m = s.profile.m_low; m <= s.profile.m_high; ++m) {
        int k = m - s.profile.m_low;
        bool top = m == s.profile.m_high, bottom = m == s.profile.m_low;
        if (!top && !s.at_kink(1, m)) u.push_back(s.profile.s1[k]);
        if (!top) u.push_back(s.omega1[k]);
        if (!bottom) u.push_back(s.nu1[k]);
        if (!bottom && !s.at_kink(2, m)) u.push_back(s.profile.s2[k]);
        if (!bottom) u.push_back(s.nu2[k]);
        if (!top) u.push_back(s.omega2[k]);
    }
    return u;
}

void unpack(const std::vector<double>& u, EquilibriumSolution& s) {
    std::size_t j = 0;
    for (int m = s.profile.m_low; m <= s.profile.m_high; ++m) {
        int k = m - s.profile.m_low;
        bool top = m == s.profile.m_high, bottom = m == s.profile.m_low;
        if (!top && !s.at_kink(1, m)) s.profile.s1[k] = u[j++];
        if (!top) s.omega1[k] = u[j++];
        if (!bottom) s.nu1[k] = u[j++];
        if (!bottom && !s.at_kink(2, m)) s.profile.s2[k] = u[j++];
        if (!bottom) s.nu2[k] = u[j++];
        if (!top) s.omega2[k] = u[j++];
    }
}

bool profile_ok(const GameSpec& spec, const ThresholdProfile& p) {
    for (int m = p.m_low; m <= p.m_high; ++m) {
        double a = p.p1(m), b = p.p2(m);
        if (std::isnan(a) || std::isnan(b)) return false;
        if (std::isfinite(a) && !spec.diffusion.in_domain(a)) return false;
        if (std::isfinite(b) && !spec.diffusion.in_domain(b)) return false;
    }
    return p.admissibility().empty();
}

double max_abs(const std::vector<double>& v) {
    double r = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) return INFINITY;
        r = std::max(r, std::abs(x));
    }
    return r;
}

struct Labelled {
    std::vector<double> r;
    std::vector<std::string> label;
};

Labelled residuals_labelled(const GameSpec& spec, const Fundamentals& fg, const EquilibriumSolution& sol) {
    Labelled out;
    auto vals = build_values(spec, fg, sol);
    auto push = [&](double v, std::string l) {
        out.r.push_back(v);
        out.label.push_back(std::move(l));
    };
    for (int m = spec.m_low; m <= spec.m_high; ++m) {
        bool top = m == spec.m_high, bottom = m == spec.m_low;
        double s1 = sol.profile.p1(m), s2 = sol.profile.p2(m);
        for (int i = 1; i <= 2; ++i) {
            double d = dcf(spec, i, m), w = sol.omega(i, m), n = sol.nu(i, m);
            auto cont = [&](double x) {
                FG f = fg(x);
                return ValueD{d + w * f.F + n * f.G, w * f.dF + n * f.dG};
            };
            const CostFunction& K = spec.cost(i, m);
            bool owns = i == 1 ? !top : !bottom;
            bool rival = i == 1 ? !bottom : !top;
            double s_own = i == 1 ? s1 : s2, s_riv = i == 1 ? s2 : s1;
            int lead_m = i == 1 ? m + 1 : m - 1, follow_m = i == 1 ? m - 1 : m + 1;
            if (owns) {
                ValueD c = cont(s_own);
                ValueD v = vals.eval(i, lead_m, s_own);
                push(c.v - (v.v - K.value(s_own)), "value matching " + loc(i, m));
                if (!sol.at_kink(i, m)) push(c.dv - (v.dv - K.deriv(s_own)), "smooth pasting " + loc(i, m));
            }
            if (rival) {
                ValueD c = cont(s_riv);
                push(c.v - vals.eval(i, follow_m, s_riv).v, "rival matching " + loc(i, m));
            }
        }
    }
    return out;
}

} // namespace

std::vector<std::string> VerificationReport::failures() const {
    std::vector<std::string> f;
    for (const auto& c : checks)
        if (!c.pass) f.push_back(c.name);
    return f;
}

EquilibriumSolution EquilibriumSolution::zeros(int m_low, int m_high) {
    EquilibriumSolution s;
    s.profile = ThresholdProfile::sentinels(m_low, m_high);
    std::size_t n = m_high - m_low + 1;
    s.omega1.assign(n, 0.0);
    s.nu1.assign(n, 0.0);
    s.omega2.assign(n, 0.0);
    s.nu2.assign(n, 0.0);
    return s;
}

double EquilibriumSolution::omega(int player, int m) const {
    return (player == 1 ? omega1 : omega2)[m - profile.m_low];
}

double EquilibriumSolution::nu(int player, int m) const {
    return (player == 1 ? nu1 : nu2)[m - profile.m_low];
}

bool EquilibriumSolution::at_kink(int player, int m) const {
    const auto& k = player == 1 ? kink1 : kink2;
    return !k.empty() && k[m - profile.m_low];
}

ValueFunctionSet build_values(const GameSpec& spec, const Fundamentals& fg, const EquilibriumSolution& sol) {
    ValueFunctionSet vs;
    vs.graph = std::make_shared<ValueGraph>(fg);
    vs.m_low = spec.m_low;
    vs.count = spec.size();
    for (int i = 1; i <= 2; ++i) {
        for (int m = spec.m_low; m <= spec.m_high; ++m) {
            ValueNode n;
            n.d = dcf(spec, i, m);
            n.omega = sol.omega(i, m);
            n.nu = sol.nu(i, m);
            if (m < spec.m_high) {
                n.s_up = sol.profile.p1(m);
                n.up = vs.node(i, m + 1);
                if (i == 1) n.up_cost = &spec.cost(1, m);
            }
            if (m > spec.m_low) {
                n.s_down = sol.profile.p2(m);
                n.down = vs.node(i, m - 1);
                if (i == 2) n.down_cost = &spec.cost(2, m);
            }
            vs.graph->add(n);
        }
    }
    return vs;
}

std::vector<double> system_residuals(const GameSpec& spec, const Fundamentals& fg, const EquilibriumSolution& sol) {
    return residuals_labelled(spec, fg, sol).r;
}

EquilibriumSolution refine_system(const GameSpec& spec, const Fundamentals& fg, const EquilibriumSolution& initial,
                                  const RefineOptions& opt) {
    EquilibriumSolution cur = initial;
    cur.verification.reset();
    if (!profile_ok(spec, cur.profile))
        throw OrderingViolated("initial guess is not an admissible profile: " + cur.profile.admissibility());
    // a seed sitting on a cost kink stays there
    cur.kink1.assign(spec.size(), 0);
    cur.kink2.assign(spec.size(), 0);
    for (int m = spec.m_low; m <= spec.m_high; ++m) {
        for (int i = 1; i <= 2; ++i) {
            if ((i == 1 && m == spec.m_high) || (i == 2 && m == spec.m_low)) continue;
            double k = spec.cost(i, m).kink();
            double& s = i == 1 ? cur.profile.p1(m) : cur.profile.p2(m);
            if (std::isfinite(k) && std::abs(s - k) <= 1e-7 * std::max(1.0, std::abs(k))) {
                s = k;
                (i == 1 ? cur.kink1 : cur.kink2)[m - spec.m_low] = 1;
            }
        }
    }
    std::vector<double> u = pack(cur);
    const int n = static_cast<int>(u.size());
    auto eval = [&](const std::vector<double>& x, bool& ok) {
        EquilibriumSolution s = cur;
        unpack(x, s);
        ok = profile_ok(spec, s.profile);
        if (!ok) return std::vector<double>{};
        return system_residuals(spec, fg, s);
    };
    bool ok = true;
    std::vector<double> R = eval(u, ok);
    double norm = max_abs(R);
    std::ostringstream trace;
    for (int it = 0; it < opt.max_iterations; ++it) {
        if (norm < opt.tol) {
            unpack(u, cur);
            cur.residual_norm = norm;
            cur.newton_iterations = it;
            return cur;
        }
        if (!std::isfinite(norm)) throw Diverged("non-finite residual" + trace.str());
        Eigen::MatrixXd J(n, n);
        for (int j = 0; j < n; ++j) {
            double h = 1e-6 * std::max(1.0, std::abs(u[j]));
            auto up = u, dn = u;
            up[j] += h;
            dn[j] -= h;
            bool ok1 = true, ok2 = true;
            auto Ru = eval(up, ok1), Rd = eval(dn, ok2);
            if (!ok1 || !ok2) {
                // one-sided difference next to the admissibility boundary
                if (ok1)
                    for (int i = 0; i < n; ++i) J(i, j) = (Ru[i] - R[i]) / h;
                else if (ok2)
                    for (int i = 0; i < n; ++i) J(i, j) = (R[i] - Rd[i]) / h;
                else
                    throw OrderingViolated("finite-difference probe leaves the admissible set");
            } else {
                for (int i = 0; i < n; ++i) J(i, j) = (Ru[i] - Rd[i]) / (2.0 * h);
            }
        }
        Eigen::VectorXd scale(n);
        for (int j = 0; j < n; ++j) {
            double c = J.col(j).cwiseAbs().maxCoeff();
            scale[j] = c > 0.0 ? 1.0 / c : 1.0;
            J.col(j) *= scale[j];
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        lu.setThreshold(1e-13);
        if (lu.rank() < n) throw SingularJacobian("Jacobian rank " + std::to_string(lu.rank()) + " < " + std::to_string(n));
        Eigen::VectorXd rhs = Eigen::Map<Eigen::VectorXd>(R.data(), n);
        Eigen::VectorXd step = -(lu.solve(rhs).cwiseProduct(scale));

        double lambda = 1.0;
        bool accepted = false, any_admissible = false;
        std::vector<double> best_u, best_R;
        for (int h = 0; h <= opt.max_halvings; ++h, lambda *= 0.5) {
            std::vector<double> trial(n);
            for (int j = 0; j < n; ++j) trial[j] = u[j] + lambda * step[j];
            bool tok = true;
            auto Rt = eval(trial, tok);
            if (!tok) continue;
            any_admissible = true;
            double tn = max_abs(Rt);
            best_u = trial;
            best_R = Rt;
            if (tn < norm) {
                accepted = true;
                break;
            }
        }
        if (!any_admissible)
            throw OrderingViolated("Newton step leaves the admissible set after " +
                                   std::to_string(opt.max_halvings) + " halvings at iteration " +
                                   std::to_string(it));
        double step_size = 0.0;
        for (int j = 0; j < n; ++j) step_size = std::max(step_size, std::abs(best_u[j] - u[j]) / std::max(1.0, std::abs(u[j])));
        u = best_u;
        R = best_R;
        double prev = norm;
        norm = max_abs(R);
        trace << "\n  iteration " << it << ": residual " << num(norm) << (accepted ? "" : " (not decreasing)");
        if (step_size < opt.step_tol) {
            if (norm < std::max(opt.tol, 1e3 * opt.tol) || norm <= prev) {
                unpack(u, cur);
                cur.residual_norm = norm;
                cur.newton_iterations = it + 1;
                if (norm < 1e3 * opt.tol) return cur;
            }
            throw Diverged("Newton stagnated with residual " + num(norm) + trace.str());
        }
    }
    if (norm < opt.tol) {
        unpack(u, cur);
        cur.residual_norm = norm;
        cur.newton_iterations = opt.max_iterations;
        return cur;
    }
    throw Diverged("no convergence after " + std::to_string(opt.max_iterations) + " iterations" + trace.str());
}

double value_at(const GameSpec& spec, const Fundamentals& fg, const EquilibriumSolution& sol, int player, int m,
                double x) {
    spec.diffusion.require_domain(x);
    auto vals = build_values(spec, fg, sol);
    return vals.eval(player, m, x).v;
}

EquilibriumSolution seed_from_tatonnement(const TatonnementResult& t) {
    EquilibriumSolution s = EquilibriumSolution::zeros(t.profile.m_low, t.profile.m_high);
    s.profile = t.profile;
    if (!t.omega1.empty()) s.omega1 = t.omega1, s.nu1 = t.nu1;
    if (!t.omega2.empty()) s.omega2 = t.omega2, s.nu2 = t.nu2;
    return s;
}

// ---------------------------------------------------------------- verify

namespace {

std::vector<double> vi_grid(const GameSpec& spec, const EquilibriumSolution& sol, int n) {
    const Diffusion& d = spec.diffusion;
    auto probe = d.probe_grid(spec.reference_state);
    double lo = probe.front(), hi = probe.back();
    for (double s : sol.profile.s1)
        if (std::isfinite(s)) lo = std::min(lo, s), hi = std::max(hi, s);
    for (double s : sol.profile.s2)
        if (std::isfinite(s)) lo = std::min(lo, s), hi = std::max(hi, s);
    std::vector<double> g(n);
    if (d.kind() == DiffusionKind::GBM) {
        lo = std::min(lo, probe.front()) / 1.25;
        hi *= 1.25;
        for (int i = 0; i < n; ++i) g[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
    } else {
        double pad = 0.1 * (hi - lo);
        lo -= pad;
        hi += pad;
        for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
    }
    return g;
}

double fd_scale(const Diffusion& d, double x) {
    return d.kind() == DiffusionKind::GBM ? x : d.sigma() / std::sqrt(2.0 * d.mu());
}

} // namespace

VerificationReport verify(const GameSpec& spec, const Fundamentals& fg, const EquilibriumSolution& sol) {
    VerificationReport rep;
    auto add = [&](std::string name, bool pass, std::string detail) {
        rep.checks.push_back({std::move(name), pass, std::move(detail)});
    };
    const Diffusion& dif = spec.diffusion;
    const auto& P = sol.profile;

    // ordering first: everything below assumes a well-formed profile
    std::string adm = P.admissibility();
    bool bounds = P.s1.size() == std::size_t(spec.size()) && std::isinf(P.p1(spec.m_high)) &&
                  P.p1(spec.m_high) > 0 && std::isinf(P.p2(spec.m_low)) && P.p2(spec.m_low) < 0;
    bool domain = true;
    for (int m = spec.m_low; m <= spec.m_high; ++m) {
        if (m < spec.m_high && !dif.in_domain(P.p1(m))) domain = false;
        if (m > spec.m_low && !dif.in_domain(P.p2(m))) domain = false;
    }
    add("ordering", adm.empty() && domain, adm.empty() ? (domain ? "" : "threshold outside the state space") : adm);
    if (!adm.empty() || !domain || !bounds) {
        add("boundary", bounds, bounds ? "" : "boundary thresholds are not the domain ends");
        rep.pass = false;
        return rep;
    }

    Labelled res;
    try {
        res = residuals_labelled(spec, fg, sol);
    } catch (const Error& e) {
        add("residual", false, e.what());
        rep.pass = false;
        return rep;
    }
    std::size_t worst = 0;
    for (std::size_t i = 0; i < res.r.size(); ++i)
        if (std::abs(res.r[i]) > std::abs(res.r[worst])) worst = i;
    rep.residual_norm = max_abs(res.r);
    add("residual", rep.residual_norm <= 1e-9,
        res.r.empty() ? "" : "max " + num(rep.residual_norm) + " at " + res.label[worst]);

    std::string sign_fail;
    for (int m = spec.m_low; m <= spec.m_high && sign_fail.empty(); ++m) {
        if (sol.omega(1, m) < 0.0) sign_fail = "omega " + loc(1, m) + " = " + num(sol.omega(1, m));
        else if (sol.nu(1, m) > 0.0) sign_fail = "nu " + loc(1, m) + " = " + num(sol.nu(1, m));
        else if (sol.omega(2, m) > 0.0) sign_fail = "omega " + loc(2, m) + " = " + num(sol.omega(2, m));
        else if (sol.nu(2, m) < 0.0) sign_fail = "nu " + loc(2, m) + " = " + num(sol.nu(2, m));
    }
    add("sign", sign_fail.empty(), sign_fail);

    bool bzero = sol.omega(1, spec.m_high) == 0.0 && sol.nu(1, spec.m_low) == 0.0 &&
                 sol.omega(2, spec.m_high) == 0.0 && sol.nu(2, spec.m_low) == 0.0;
    add("boundary", bzero, bzero ? "" : "nonzero coefficient at a boundary regime");

    for (int m = spec.m_low; m <= spec.m_high; ++m) {
        if (m < spec.m_high) {
            double dd = dcf(spec, 1, m + 1) - dcf(spec, 1, m);
            const CostFunction& K = spec.cost(1, m);
            auto h = hclass_check(spec, fg, [dd, &K](double x) { return dd - K.value(x); }, HClass::Inc);
            add("hclass " + loc(1, m), h.pass, h.detail);
        }
        if (m > spec.m_low) {
            double dd = dcf(spec, 2, m - 1) - dcf(spec, 2, m);
            const CostFunction& K = spec.cost(2, m);
            auto h = hclass_check(spec, fg, [dd, &K](double x) { return dd - K.value(x); }, HClass::Dec);
            add("hclass " + loc(2, m), h.pass, h.detail);
        }
    }

    auto vals = build_values(spec, fg, sol);
    for (int m = spec.m_low + 1; m < spec.m_high; ++m) {
        double s2 = P.p2(m), s1 = P.p1(m);
        double a = vals.eval(1, m - 1, s2).v, b = vals.eval(1, m + 1, s2).v - spec.cost(1, m).value(s2);
        add("no-skip " + loc(1, m), a >= b - 1e-9, "follow " + num(a) + " vs leap " + num(b) + " at " + num(s2));
        double c = vals.eval(2, m + 1, s1).v, e = vals.eval(2, m - 1, s1).v - spec.cost(2, m).value(s1);
        add("no-skip " + loc(2, m), c >= e - 1e-9, "follow " + num(c) + " vs leap " + num(e) + " at " + num(s1));
    }

    // smoothness at the owner threshold and continuity at the rival threshold
    for (int m = spec.m_low; m <= spec.m_high; ++m) {
        for (int i = 1; i <= 2; ++i) {
            double d = dcf(spec, i, m), w = sol.omega(i, m), nu = sol.nu(i, m);
            auto cont = [&](double x) {
                FG f = fg(x);
                return d + w * f.F + nu * f.G;
            };
            bool owns = i == 1 ? m < spec.m_high : m > spec.m_low;
            bool rival = i == 1 ? m > spec.m_low : m < spec.m_high;
            double s_own = i == 1 ? P.p1(m) : P.p2(m), s_riv = i == 1 ? P.p2(m) : P.p1(m);
            if (owns) {
                double h = 1e-6 * fd_scale(dif, s_own);
                double dir = i == 1 ? 1.0 : -1.0;  // into the switching region
                auto V = [&](double x) { return vals.eval(i, m, x).v; };
                // one-sided second-order differences of each piece
                double sw = (-3.0 * V(s_own) + 4.0 * V(s_own + dir * h) - V(s_own + 2 * dir * h)) / (2.0 * h) * dir;
                double ct = (3.0 * cont(s_own) - 4.0 * cont(s_own - dir * h) + cont(s_own - 2 * dir * h)) / (2.0 * h) * dir;
                if (sol.at_kink(i, m)) {
                    // leader payoff has a concave kink; V' on the continuation side must lie between its one-sided slopes
                    int lead = i == 1 ? m + 1 : m - 1;
                    const CostFunction& K = spec.cost(i, m);
                    auto H = [&](double x) { return vals.eval(i, lead, x).v - K.value(x); };
                    double hc = (3.0 * H(s_own) - 4.0 * H(s_own - dir * h) + H(s_own - 2 * dir * h)) / (2.0 * h) * dir;
                    double right = i == 1 ? sw : hc, left = i == 1 ? hc : sw;
                    double tol = 1e-4 * std::max({std::abs(left), std::abs(right), 1e-12});
                    bool ok = right <= left + tol && ct >= right - tol && ct <= left + tol;
                    add("kink " + loc(i, m), ok,
                        "slopes " + num(right) + " <= " + num(ct) + " <= " + num(left) + " at " + num(s_own));
                } else {
                    double rel = std::abs(sw - ct) / std::max({std::abs(sw), std::abs(ct), 1e-12});
                    add("C1 " + loc(i, m), rel <= 1e-4, "relative derivative jump " + num(rel) + " at " + num(s_own));
                }
            }
            if (rival) {
                int follow = i == 1 ? m - 1 : m + 1;
                double gap = std::abs(cont(s_riv) - vals.eval(i, follow, s_riv).v);
                add("C0 " + loc(i, m), gap <= 1e-9, "jump " + num(gap) + " at " + num(s_riv));
            }
        }
    }

    // variational inequalities on a grid
    auto grid = vi_grid(spec, sol, 201);
    std::vector<double> kinks;
    for (int m = spec.m_low; m <= spec.m_high; ++m) {
        if (std::isfinite(P.p1(m))) kinks.push_back(P.p1(m));
        if (std::isfinite(P.p2(m))) kinks.push_back(P.p2(m));
        for (int i = 1; i <= 2; ++i)
            if (std::isfinite(spec.cost(i, m).kink())) kinks.push_back(spec.cost(i, m).kink());
    }
    for (int m = spec.m_low; m <= spec.m_high; ++m) {
        for (int i = 1; i <= 2; ++i) {
            double pi = spec.pi(i, m);
            double tol = 1e-6 * (1.0 + std::abs(pi));
            bool owns = i == 1 ? m < spec.m_high : m > spec.m_low;
            int lead = i == 1 ? m + 1 : m - 1;
            double worst_gen = 0.0, worst_obs = -INFINITY;
            std::string where;
            bool pass = true;
            for (double x : grid) {
                double h = 1e-4 * fd_scale(dif, x);
                bool near = false;
                for (double k : kinks)
                    if (std::abs(x - k) <= 3.0 * h) near = true;
                bool in_own = i == 1 ? x >= P.p1(m) : x <= P.p2(m);
                bool in_rival = i == 1 ? x <= P.p2(m) : x >= P.p1(m);
                if (owns) {
                    double obs = vals.eval(i, lead, x).v - spec.cost(i, m).value(x) - vals.eval(i, m, x).v;
                    worst_obs = std::max(worst_obs, obs);
                    if (obs > 1e-8) {
                        pass = false;
                        where = "obstacle " + num(obs) + " at " + num(x);
                    }
                }
                if (near || in_rival || !dif.in_domain(x - h)) continue;
                double v0 = vals.eval(i, m, x).v, vp = vals.eval(i, m, x + h).v, vm = vals.eval(i, m, x - h).v;
                double gen = dif.generator(x, v0, (vp - vm) / (2 * h), (vp - 2 * v0 + vm) / (h * h), spec.r) + pi;
                if (in_own) {
                    if (gen > tol) {
                        pass = false;
                        where = "(L - r)V + pi = " + num(gen) + " in switching region at " + num(x);
                    }
                } else {
                    worst_gen = std::max(worst_gen, std::abs(gen));
                    if (std::abs(gen) > tol) {
                        pass = false;
                        where = "(L - r)V + pi = " + num(gen) + " in continuation region at " + num(x);
                    }
                }
            }
            std::string detail = pass ? "max continuation defect " + num(worst_gen) +
                                            (owns ? ", max obstacle " + num(worst_obs) : std::string())
                                      : where;
            add("VI " + loc(i, m), pass, detail);
        }
    }

    rep.pass = true;
    for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
    return rep;
}

// ---------------------------------------------------------------- induction

namespace {

struct Stage {
    int k2 = 0;
    int node1 = -1, node2 = -1;
    double s1 = kUpperSentinel, s2 = kLowerSentinel;
    double w1 = 0, n1 = 0, w2 = 0, n2 = 0;
};

std::vector<double> scan_grid(const Diffusion& d, double ref, int n) {
    std::vector<double> g(n);
    const double a = 3.0;
    for (int i = 0; i < n; ++i) {
        double u = -1.0 + 2.0 * i / (n - 1);
        double t = std::sinh(a * u) / std::sinh(a);
        if (d.kind() == DiffusionKind::GBM)
            g[i] = ref * std::exp(t * std::log(16.0));
        else
            g[i] = d.theta() + t * 8.0 * d.sigma() / std::sqrt(2.0 * d.mu());
    }
    return g;
}

} // namespace

InductionResult equilibrium_induction(const GameSpec& spec, const Fundamentals& fg, int anchor, int N,
                                      Selection selection) {
    if (!spec.contains(anchor)) throw ConfigError("induction anchor regime " + std::to_string(anchor) + " outside M");
    if (N < 1) throw ConfigError("induction budget must be at least 1");
    InductionResult out;
    auto graph = std::make_shared<ValueGraph>(fg);
    std::map<std::pair<int, int>, Stage> stages;  // (m, k1)

    // stages (m, k1, k2 = k1 + m - anchor) with min(k1, k2) <= N, by total controls
    std::vector<std::tuple<int, int, int>> order;
    for (int m = spec.m_low; m <= spec.m_high; ++m) {
        int delta = m - anchor;
        for (int k1 = std::max(0, -delta);; ++k1) {
            int k2 = k1 + delta;
            if (std::min(k1, k2) > N) break;
            order.emplace_back(k1 + k2, m, k1);
        }
    }
    std::sort(order.begin(), order.end());

    SearchOptions full;
    full.reference = spec.reference_state;
    SearchOptions coarse = full;
    coarse.grid = 100;

    for (auto [total, m, k1] : order) {
        int k2 = k1 + m - anchor;
        Stage st;
        st.k2 = k2;
        bool a1 = k1 >= 1 && m < spec.m_high, a2 = k2 >= 1 && m > spec.m_low;
        int up1 = -1, up2 = -1, dn1 = -1, dn2 = -1;
        if (m < spec.m_high && k1 >= 1) {
            const Stage& u = stages.at({m + 1, k1 - 1});
            up1 = u.node1;
            up2 = u.node2;
        }
        if (m > spec.m_low && k2 >= 1) {
            const Stage& dn = stages.at({m - 1, k1});
            dn1 = dn.node1;
            dn2 = dn.node2;
        }
        double d1 = dcf(spec, 1, m), d2 = dcf(spec, 2, m);
        const CostFunction* K1 = &spec.cost(1, m);
        const CostFunction* K2 = &spec.cost(2, m);
        ValueGraph& G = *graph;
        PayoffFn h1 = [&G, up1, d1, K1](double x) {
            ValueD v = G.eval(up1, x);
            return ValueD{v.v - d1 - K1->value(x), v.dv - K1->deriv(x)};
        };
        PayoffFn l1 = [&G, dn1, d1](double x) {
            ValueD v = G.eval(dn1, x);
            return ValueD{v.v - d1, v.dv};
        };
        PayoffFn h2 = [&G, dn2, d2, K2](double x) {
            ValueD v = G.eval(dn2, x);
            return ValueD{v.v - d2 - K2->value(x), v.dv - K2->deriv(x)};
        };
        PayoffFn l2 = [&G, up2, d2](double x) {
            ValueD v = G.eval(up2, x);
            return ValueD{v.v - d2, v.dv};
        };
        std::string where = " at stage (" + std::to_string(m) + ", " + std::to_string(k1) + ", " +
                            std::to_string(k2) + ")";
        int local_count = 1;
        try {
            if (a1 && a2) {
                auto br1 = [&](double s2, const SearchOptions& o) { return solve_constrained(h1, l1, s2, Side::P1Up, fg, o); };
                auto br2 = [&](double s1, const SearchOptions& o) { return solve_constrained(h2, l2, s1, Side::P2Down, fg, o); };
                auto phi = [&](double s2, const SearchOptions& o) {
                    try {
                        double s1 = br1(s2, o).s_tilde;
                        return br2(s1, o).s_tilde - s2;
                    } catch (const Error&) {
                        return std::numeric_limits<double>::quiet_NaN();
                    }
                };
                auto grid = scan_grid(spec.diffusion, spec.reference_state, 121);
                std::vector<double> vals(grid.size());
                for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = phi(grid[i], coarse);
                std::vector<std::pair<double, double>> eqs;
                auto fine = [&](double s) { return phi(s, full); };
                for (std::size_t i = 1; i < grid.size(); ++i) {
                    if (!std::isfinite(vals[i - 1]) || !std::isfinite(vals[i])) continue;
                    if ((vals[i - 1] < 0) == (vals[i] < 0)) continue;
                    double a = grid[i - 1], b = grid[i], fa = fine(a), fb = fine(b);
                    if (!std::isfinite(fa) || !std::isfinite(fb) || (fa < 0) == (fb < 0)) continue;
                    std::uintmax_t iters = 100;
                    auto tol = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(x)); };
                    auto r = boost::math::tools::toms748_solve(fine, a, b, fa, fb, tol, iters);
                    double s2 = 0.5 * (r.first + r.second);
                    double res = fine(s2);
                    if (!std::isfinite(res) || std::abs(res) > 1e-8 * std::max(1.0, std::abs(s2))) continue;
                    eqs.emplace_back(br1(s2, full).s_tilde, s2);
                }
                if (eqs.empty()) {
                    // fall back to alternating best responses from the one-sided thresholds
                    double s1 = solve_unconstrained(h1, Side::P1Up, fg, full).s_tilde, s2 = 0.0;
                    bool conv = false;
                    for (int it = 0; it < 200 && !conv; ++it) {
                        s2 = br2(s1, full).s_tilde;
                        double n1 = br1(s2, full).s_tilde;
                        conv = std::abs(n1 - s1) < 1e-10 * std::max(1.0, std::abs(s1));
                        s1 = n1;
                    }
                    if (!conv) throw NoConvergence("no local equilibrium found" + where);
                    eqs.emplace_back(s1, s2);
                }
                local_count = static_cast<int>(eqs.size());
                if (local_count > 1) ++out.multiple_equilibria_stages;
                auto pick = eqs.front();
                for (auto& e : eqs) {
                    double spread = e.first - e.second, best = pick.first - pick.second;
                    if (selection == Selection::Later ? spread > best : spread < best) pick = e;
                }
                auto p1 = br1(pick.second, full);
                auto p2 = br2(pick.first, full);
                st.s1 = pick.first;
                st.s2 = pick.second;
                st.w1 = p1.omega;
                st.n1 = p1.nu;
                st.w2 = p2.omega;
                st.n2 = p2.nu;
            } else if (a1) {
                auto p1 = solve_unconstrained(h1, Side::P1Up, fg, full);
                st.s1 = p1.s_tilde;
                st.w1 = p1.omega;
                st.w2 = l2(st.s1).v / fg(st.s1).F;
            } else if (a2) {
                auto p2 = solve_unconstrained(h2, Side::P2Down, fg, full);
                st.s2 = p2.s_tilde;
                st.n2 = p2.nu;
                st.n1 = l1(st.s2).v / fg(st.s2).G;
            }
        } catch (const PreemptionIncentive& e) {
            throw PreemptionIncentive(e.what() + where);
        } catch (const NoBracket& e) {
            throw NoBracket(e.what() + where);
        }

        ValueNode v1, v2;
        v1.d = d1;
        v2.d = d2;
        v1.omega = st.w1;
        v1.nu = st.n1;
        v2.omega = st.w2;
        v2.nu = st.n2;
        if (a1) {
            v1.s_up = v2.s_up = st.s1;
            v1.up = up1;
            v2.up = up2;
            v1.up_cost = K1;
        }
        if (a2) {
            v1.s_down = v2.s_down = st.s2;
            v1.down = dn1;
            v2.down = dn2;
            v2.down_cost = K2;
        }
        st.node1 = G.add(v1);
        st.node2 = G.add(v2);
        stages[{m, k1}] = st;
        out.stages.push_back({m, k1, k2, st.s1, st.s2, local_count});
    }

    out.guess = EquilibriumSolution::zeros(spec.m_low, spec.m_high);
    for (int m = spec.m_low; m <= spec.m_high; ++m) {
        int delta = m - anchor;
        int k1 = delta >= 0 ? N : N - delta;
        const Stage& st = stages.at({m, k1});
        int k = spec.index(m);
        out.guess.profile.s1[k] = m < spec.m_high ? st.s1 : kUpperSentinel;
        out.guess.profile.s2[k] = m > spec.m_low ? st.s2 : kLowerSentinel;
        out.guess.omega1[k] = st.w1;
        out.guess.nu1[k] = st.n1;
        out.guess.omega2[k] = st.w2;
        out.guess.nu2[k] = st.n2;
    }
    return out;
}

// ---------------------------------------------------------------- two regimes

SymmetricResult symmetric_two_regime(const GameSpec& spec, const Fundamentals& fg) {
    const Diffusion& d = spec.diffusion;
    if (spec.size() != 2) throw NotSymmetric("two-regime reduction needs exactly two regimes");
    if (d.kind() != DiffusionKind::OU || d.theta() != 0.0)
        throw NotSymmetric("two-regime reduction needs an OU factor with theta = 0");
    const int lo = spec.m_low, hi = spec.m_high;
    auto same = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); };
    if (!same(spec.pi(1, lo), spec.pi(2, hi)) || !same(spec.pi(1, hi), spec.pi(2, lo)))
        throw NotSymmetric("profit ladders are not mirror images");
    for (double x : d.probe_grid(1.0, 21))
        if (!same(spec.cost(1, lo).value(x), spec.cost(2, hi).value(-x)))
            throw NotSymmetric("switching costs are not mirror images at x = " + num(x));

    const double Dlo = dcf(spec, 1, lo), Dhi = dcf(spec, 1, hi);
    const CostFunction& K = spec.cost(1, lo);
    auto Q = [&](double s, const FG& p, const FG& n) {
        double rho = p.G / n.G, phi = n.F / p.F;
        return (Dhi - rho * ((Dlo + K.value(s)) * phi + Dhi - Dlo)) / (1.0 - rho * phi);
    };
    auto Z = [&](double s) {
        FG p = fg(s), n = fg(-s);
        double q0 = Q(s, p, n);
        double q1 = p.dG / n.G * ((q0 - Dlo - K.value(s)) * n.F / p.F + Dlo - Dhi);
        return (q0 - Dlo - K.value(s)) * p.dF - (q1 - K.deriv(s)) * p.F;
    };

    double L = 16.0 * d.sigma() / std::sqrt(2.0 * d.mu());
    const int n = 800;
    double a = 0.0, za = -INFINITY, root = NAN;
    std::ostringstream trace;
    for (int i = 1; i <= n; ++i) {
        double s = L * i / n, z = Z(s);
        if (i % 100 == 0) trace << " Z(" << num(s) << ")=" << num(z);
        if (za < 0.0 && z >= 0.0) {
            if (z == 0.0) {
                root = s;
            } else if (std::isfinite(za)) {
                std::uintmax_t iters = 200;
                auto tol = [](double x, double y) { return std::abs(x - y) <= 4e-16 * std::max(1.0, std::abs(x)); };
                auto r = boost::math::tools::toms748_solve(Z, a, s, za, z, tol, iters);
                root = 0.5 * (r.first + r.second);
            }
            break;
        }
        a = s;
        za = z;
    }
    if (std::isnan(root)) throw NoBracket("no positive root of Z:" + trace.str());

    SymmetricResult out;
    out.root = root;
    out.z_residual = Z(root);
    FG p = fg(root), m = fg(-root);
    double w1 = (Q(root, p, m) - Dlo - K.value(root)) / p.F;
    double n1 = (Dlo + w1 * m.F - Dhi) / m.G;
    auto& sol = out.solution;
    sol = EquilibriumSolution::zeros(lo, hi);
    sol.profile.p1(lo) = root;
    sol.profile.p2(hi) = -root;
    sol.omega1[0] = w1;
    sol.nu1[1] = n1;
    // mirror image: G(x) = F(-x) when theta = 0
    sol.nu2[1] = w1;
    sol.omega2[0] = n1;
    sol.residual_norm = max_abs(system_residuals(spec, fg, sol));
    return out;
}

} // namespace switchgame
