#include "switchgame/stopping.hpp"

#include "switchgame/errors.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace switchgame {

namespace {

constexpr double kZCap = 36.0;  // standardized OU state beyond which F overflows soon

struct Interval {
    double lo;
    double hi;
};

// k-th search interval on the far side of `anchor` (rival threshold or none).
Interval search_interval(const Diffusion& d, double ref, Side side, double anchor, bool has_anchor, int k) {
    double scale = std::ldexp(1.0, k);
    if (d.kind() == DiffusionKind::OU) {
        double w = 8.0 * d.sigma() / std::sqrt(2.0 * d.mu());
        double cap = kZCap * d.sigma() / std::sqrt(2.0 * d.mu());
        double lo = d.theta() - std::min(scale * w, cap);
        double hi = d.theta() + std::min(scale * w, cap);
        if (has_anchor) {
            if (side == Side::P1Up) return {anchor, std::max(hi, anchor + 0.5 * scale * w)};
            return {std::min(lo, anchor - 0.5 * scale * w), anchor};
        }
        return {lo, hi};
    }
    double lo = ref / (8.0 * scale), hi = ref * 8.0 * scale;
    if (has_anchor) {
        if (side == Side::P1Up) return {anchor, std::max(hi, 2.0 * scale * anchor)};
        return {std::min(lo, anchor / (2.0 * scale)), anchor};
    }
    return {lo, hi};
}

std::vector<double> grid_points(const Diffusion& d, Interval iv, int n) {
    std::vector<double> g(n + 1);
    bool logspace = d.kind() == DiffusionKind::GBM;
    for (int i = 0; i <= n; ++i) {
        double t = double(i) / n;
        g[i] = logspace ? std::exp(std::log(iv.lo) + t * (std::log(iv.hi) - std::log(iv.lo)))
                        : iv.lo + t * (iv.hi - iv.lo);
    }
    g.front() = iv.lo;
    g.back() = iv.hi;
    return g;
}

double polish(const std::function<double(double)>& f, double a, double b, double fa, double fb) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    std::uintmax_t iters = 200;
    auto tol = [](double x, double y) { return std::abs(x - y) <= 1e-14 * std::max(1.0, std::abs(x)); };
    auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
    return 0.5 * (r.first + r.second);
}

// Finds all sign changes of f over the interval family; returns isolated roots.
std::vector<double> find_roots(const std::function<double(double)>& f, const Diffusion& d,
                               const SearchOptions& opt, Side side, double anchor, bool has_anchor,
                               std::vector<double>& trace) {
    for (int k = 0; k <= opt.widenings; ++k) {
        Interval iv = search_interval(d, opt.reference, side, anchor, has_anchor, k);
        auto g = grid_points(d, iv, opt.grid);
        std::vector<double> v(g.size());
        double vmax = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            v[i] = f(g[i]);
            if (std::isfinite(v[i])) vmax = std::max(vmax, std::abs(v[i]));
        }
        trace = v;
        std::vector<double> roots;
        if (vmax == 0.0) return roots;  // identically zero: no isolated root
        for (std::size_t i = 1; i < g.size(); ++i) {
            if (!std::isfinite(v[i]) || !std::isfinite(v[i - 1])) continue;
            if (v[i] == 0.0 && i + 1 < g.size()) continue;  // picked up by the next pair
            if ((v[i - 1] < 0.0 && v[i] >= 0.0) || (v[i - 1] > 0.0 && v[i] <= 0.0)) {
                if (v[i - 1] == 0.0) continue;
                roots.push_back(polish(f, g[i - 1], g[i], v[i - 1], v[i]));
            }
        }
        if (!roots.empty()) return roots;
    }
    return {};
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

} // namespace

Wronskians wronskians(const FG& a, const FG& b) {
    return {a.dF * b.G - b.F * a.dG, a.F * b.G - b.F * a.G};
}

StoppingSolution solve_constrained(const PayoffFn& h, const PayoffFn& l, double s_rival, Side side,
                                   const Fundamentals& fg, const SearchOptions& opt) {
    const Diffusion& d = fg.diffusion();
    d.require_domain(s_rival);
    double l_r = l(s_rival).v;
    double h_r = h(s_rival).v;
    if (!(h_r < l_r))
        throw PreemptionIncentive("leader payoff " + fmt(h_r) + " >= follower payoff " + fmt(l_r) +
                                  " at rival threshold " + fmt(s_rival));
    FG fr = fg(s_rival);
    auto residual = [&](double s) {
        if (s == s_rival) return (h_r - l_r) * wronskians(fr, fr).W;
        FG fs = fg(s);
        ValueD hv = h(s);
        Wronskians wr = wronskians(fs, fr);
        double wss = wronskians(fs, fs).W;
        return hv.v * wr.W - l_r * wss - hv.dv * wr.calW;
    };
    std::vector<double> trace;
    auto roots = find_roots(residual, d, opt, side, s_rival, true, trace);
    if (roots.empty())
        throw NoBracket("threshold equation has no sign change beyond rival threshold " + fmt(s_rival));

    auto coeffs = [&](double s) {
        FG fs = fg(s);
        double hs = h(s).v;
        double cw = wronskians(fs, fr).calW;
        return std::pair{(hs * fr.G - l_r * fs.G) / cw, (l_r * fs.F - hs * fr.F) / cw};
    };
    // choose the root whose continuation value is largest at a common point
    double nearest = side == Side::P1Up ? roots.front() : roots.back();
    double probe = 0.5 * (nearest + s_rival);
    FG fp = fg(probe);
    StoppingSolution best;
    double best_v = -std::numeric_limits<double>::infinity();
    for (double s : roots) {
        auto [w, n] = coeffs(s);
        double v = w * fp.F + n * fp.G;
        if (v > best_v) {
            best_v = v;
            best.s_tilde = s;
            best.omega = w;
            best.nu = n;
        }
    }
    best.roots = roots;
    FG fs = fg(best.s_tilde);
    best.foc_residual = residual(best.s_tilde) / wronskians(fs, fs).W;
    best.preemption_ok = true;
    return best;
}

StoppingSolution solve_unconstrained(const PayoffFn& h, Side side, const Fundamentals& fg,
                                     const SearchOptions& opt) {
    const Diffusion& d = fg.diffusion();
    auto residual = [&](double s) {
        FG fs = fg(s);
        ValueD hv = h(s);
        if (side == Side::P1Up) return hv.v * fs.dF - hv.dv * fs.F;
        return hv.v * fs.dG - hv.dv * fs.G;
    };
    std::vector<double> trace;
    auto roots = find_roots(residual, d, opt, side, 0.0, false, trace);
    if (roots.empty()) throw NoBracket("one-sided threshold equation has no isolated root");

    StoppingSolution best;
    double best_c = -std::numeric_limits<double>::infinity();
    for (double s : roots) {
        FG fs = fg(s);
        double hs = h(s).v;
        double c = side == Side::P1Up ? hs / fs.F : hs / fs.G;
        if (c > best_c) {
            best_c = c;
            best.s_tilde = s;
            best.omega = side == Side::P1Up ? c : 0.0;
            best.nu = side == Side::P1Up ? 0.0 : c;
        }
    }
    best.roots = roots;
    FG fs = fg(best.s_tilde);
    best.foc_residual = residual(best.s_tilde) / wronskians(fs, fs).W;
    return best;
}

} // namespace switchgame
