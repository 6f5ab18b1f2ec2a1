#include <doctest.h>

#include "switchgame/errors.hpp"
#include "switchgame/stopping.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>

using namespace switchgame;

namespace {

// Direct maximization of the stopping payoff over the threshold, used as
// the oracle for the first-order-condition solver.
double argmax(const std::function<double(double)>& J, double lo, double hi) {
    int n = 400;
    double best = lo, vbest = -INFINITY;
    for (int i = 0; i <= n; ++i) {
        double s = lo + (hi - lo) * i / n;
        double v = J(s);
        if (v > vbest) vbest = v, best = s;
    }
    double h = (hi - lo) / n;
    auto r = boost::math::tools::brent_find_minima([&](double s) { return -J(s); }, best - h, best + h, 50);
    return r.first;
}

} // namespace

TEST_CASE("Wronskians reduce to the classical one on the diagonal") {
    auto d = Diffusion::gbm(0.08, 0.25);
    Fundamentals fg(d, 0.1);
    double a = fg.eta_plus(), b = fg.eta_minus();
    for (double x : {0.5, 2.0, 9.0}) {
        auto w = wronskians(fg(x), fg(x));
        CHECK(w.W == doctest::Approx((a - b) * std::pow(x, a + b - 1.0)).epsilon(1e-12));
        CHECK(std::abs(w.calW) < 1e-12);
    }
    auto w = wronskians(fg(2.0), fg(3.0));
    CHECK(w.calW == doctest::Approx(std::pow(2.0, a) * std::pow(3.0, b) - std::pow(3.0, a) * std::pow(2.0, b)));
}

TEST_CASE("one-sided stopping matches direct maximization of h/F") {
    auto d = Diffusion::ou(0.15, 1.5, 0.0);
    Fundamentals fg(d, 0.1);
    PayoffFn h = [](double x) { return ValueD{x - 1.0, 1.0}; };
    auto sol = solve_unconstrained(h, Side::P1Up, fg);
    double s = argmax([&](double s) { return (s - 1.0) / fg(s).F; }, 1.0, 12.0);
    CHECK(sol.s_tilde == doctest::Approx(s).epsilon(1e-6));
    CHECK(sol.omega == doctest::Approx((s - 1.0) / fg(s).F).epsilon(1e-8));
    CHECK(sol.nu == 0.0);

    PayoffFn h2 = [](double x) { return ValueD{-x - 1.0, -1.0}; };
    auto sol2 = solve_unconstrained(h2, Side::P2Down, fg);
    CHECK(sol2.s_tilde == doctest::Approx(-sol.s_tilde).epsilon(1e-9));
    CHECK(sol2.nu == doctest::Approx(sol.omega).epsilon(1e-9));
    CHECK(sol2.omega == 0.0);
}

TEST_CASE("constrained stopping matches direct maximization of the two-sided payoff") {
    auto d = Diffusion::ou(0.15, 1.5, 0.0);
    Fundamentals fg(d, 0.1);
    const double sr = -1.0, lval = 2.0;
    PayoffFn h = [](double x) { return ValueD{x - 1.0, 1.0}; };
    PayoffFn l = [&](double) { return ValueD{lval, 0.0}; };
    auto sol = solve_constrained(h, l, sr, Side::P1Up, fg);

    FG r = fg(sr), x0 = fg(0.0);
    auto J = [&](double s) {
        FG q = fg(s);
        double den = q.F * r.G - r.F * q.G;
        return (s - 1.0) * (x0.F * r.G - r.F * x0.G) / den + lval * (q.F * x0.G - x0.F * q.G) / den;
    };
    double s = argmax(J, 0.5, 12.0);
    CHECK(sol.s_tilde == doctest::Approx(s).epsilon(1e-6));
    CHECK(sol.omega * x0.F + sol.nu * x0.G == doctest::Approx(J(s)).epsilon(1e-9));
    // value matching at both ends
    FG q = fg(sol.s_tilde);
    CHECK(sol.omega * q.F + sol.nu * q.G == doctest::Approx(sol.s_tilde - 1.0).epsilon(1e-10));
    CHECK(sol.omega * r.F + sol.nu * r.G == doctest::Approx(lval).epsilon(1e-10));
    CHECK(std::abs(sol.foc_residual) < 1e-8);
}

TEST_CASE("a leader payoff above the follower payoff at the rival threshold is a preemption incentive") {
    auto d = Diffusion::ou(0.15, 1.5, 0.0);
    Fundamentals fg(d, 0.1);
    PayoffFn h = [](double x) { return ValueD{x - 1.0, 1.0}; };
    PayoffFn l = [](double) { return ValueD{-5.0, 0.0}; };
    CHECK_THROWS_AS(solve_constrained(h, l, -1.0, Side::P1Up, fg), PreemptionIncentive);
}

TEST_CASE("GBM one-sided threshold has the closed form") {
    auto d = Diffusion::gbm(0.08, 0.25);
    Fundamentals fg(d, 0.1);
    // h(x) = x - 2: s = a * 2 / (a - 1)
    PayoffFn h = [](double x) { return ValueD{x - 2.0, 1.0}; };
    SearchOptions opt;
    opt.reference = 5.0;
    auto sol = solve_unconstrained(h, Side::P1Up, fg, opt);
    double a = fg.eta_plus();
    CHECK(sol.s_tilde == doctest::Approx(2.0 * a / (a - 1.0)).epsilon(1e-9));
}
