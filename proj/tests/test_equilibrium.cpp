#include "cases.hpp"

#include <doctest.h>

#include "switchgame/equilibrium.hpp"
#include "switchgame/errors.hpp"

#include <algorithm>
#include <cmath>

using namespace switchgame;

namespace {

EquilibriumSolution solve(const GameSpec& s, const Fundamentals& fg) {
    EquilibriumSolution seed;
    try {
        seed = seed_from_tatonnement(tatonnement(s, fg, 30, 80, 1e-6));
    } catch (const TatonnementNoConvergence& e) {
        seed = seed_from_tatonnement(e.partial());
    }
    return refine_system(s, fg, seed);
}

bool has_failure(const VerificationReport& v, const std::string& prefix) {
    auto f = v.failures();
    return std::any_of(f.begin(), f.end(), [&](const std::string& n) { return n.rfind(prefix, 0) == 0; });
}

} // namespace

TEST_CASE("refining an exact solution takes no Newton step") {
    auto s = cases::ou(-1, 1);
    Fundamentals fg(s.diffusion, s.r);
    auto eq = solve(s, fg);
    CHECK(eq.residual_norm < 1e-9);
    auto again = refine_system(s, fg, eq);
    CHECK(again.newton_iterations == 0);
    CHECK(again.profile.p1(0) == eq.profile.p1(0));
}

TEST_CASE("verification accepts the equilibrium and rejects perturbed ones") {
    auto s = cases::ou(-1, 1);
    Fundamentals fg(s.diffusion, s.r);
    auto eq = solve(s, fg);
    auto ok = verify(s, fg, eq);
    CHECK(ok.pass);
    CHECK(ok.failures().empty());

    auto moved = eq;
    moved.profile.p1(0) += 0.1;
    auto bad = verify(s, fg, moved);
    CHECK_FALSE(bad.pass);
    CHECK(has_failure(bad, "residual"));

    auto neg = eq;
    neg.omega1[s.index(0)] = -std::abs(neg.omega1[s.index(0)]);
    CHECK(has_failure(verify(s, fg, neg), "sign"));
}

TEST_CASE("smooth pasting holds at every owner threshold by one-sided differences") {
    for (auto s : {cases::ou(-1, 1), cases::ou(-2, 2)}) {
        Fundamentals fg(s.diffusion, s.r);
        auto eq = solve(s, fg);
        auto vals = build_values(s, fg, eq);
        const double h = 1e-6;
        for (int m = s.m_low; m <= s.m_high; ++m) {
            if (m < s.m_high) {
                double x = eq.profile.p1(m);
                double inside = (vals.eval(1, m, x - h).v - vals.eval(1, m, x - 2 * h).v) / h;
                double lead = (vals.eval(1, m + 1, x + h).v - s.cost(1, m).value(x + h) -
                               vals.eval(1, m + 1, x).v + s.cost(1, m).value(x)) / h;
                CHECK(std::abs(inside - lead) <= 1e-4 * std::max(1.0, std::abs(lead)));
            }
            if (m > s.m_low) {
                double x = eq.profile.p2(m);
                double inside = (vals.eval(2, m, x + 2 * h).v - vals.eval(2, m, x + h).v) / h;
                double lead = (vals.eval(2, m - 1, x).v - s.cost(2, m).value(x) -
                               vals.eval(2, m - 1, x - h).v + s.cost(2, m).value(x - h)) / h;
                CHECK(std::abs(inside - lead) <= 1e-4 * std::max(1.0, std::abs(lead)));
            }
        }
    }
}

TEST_CASE("symmetric games have antisymmetric equilibria") {
    auto s = cases::ou(-2, 2);
    Fundamentals fg(s.diffusion, s.r);
    auto eq = solve(s, fg);
    for (int m = -2; m < 2; ++m) {
        CHECK(std::abs(eq.profile.p1(m) + eq.profile.p2(-m)) < 1e-8);
        CHECK(std::abs(eq.omega(1, m) - eq.nu(2, -m)) < 1e-8 * std::max(1.0, std::abs(eq.omega(1, m))));
    }
    CHECK(value_at(s, fg, eq, 1, 0, 0.0) == doctest::Approx(value_at(s, fg, eq, 2, 0, 0.0)).epsilon(1e-10));
}

TEST_CASE("two-regime reduction agrees with the general system") {
    GameSpec s = cases::ou(-1, 1);
    s.m_high = 0;
    s.pi1 = {2.8, 5.1};
    s.pi2 = {5.1, 2.8};
    s.cost1.resize(2);
    s.cost2.resize(2);
    s.validate();
    Fundamentals fg(s.diffusion, s.r);
    auto red = symmetric_two_regime(s, fg);
    auto gen = solve(s, fg);
    CHECK(std::abs(red.solution.profile.p1(-1) - gen.profile.p1(-1)) < 1e-8);
    CHECK(std::abs(red.solution.profile.p2(0) - gen.profile.p2(0)) < 1e-8);
    CHECK(std::abs(red.solution.omega(1, -1) - gen.omega(1, -1)) < 1e-8);

    auto asym = s;
    asym.pi1[0] = 2.7;
    CHECK_THROWS_AS(symmetric_two_regime(asym, fg), NotSymmetric);
}

TEST_CASE("a threshold at the cost kink is held there and checked one-sidedly") {
    auto s = cases::gbm(0.08, 0.32);
    Fundamentals fg(s.diffusion, s.r);
    auto eq = solve(s, fg);
    CHECK(eq.at_kink(1, 0));
    CHECK(eq.profile.p1(0) == 10.0);
    auto v = verify(s, fg, eq);
    bool found = false;
    for (const auto& c : v.checks)
        if (c.name.rfind("kink", 0) == 0) {
            found = true;
            CHECK(c.pass);
        }
    CHECK(found);
    for (const auto& f : v.failures()) CHECK(f.rfind("hclass", 0) == 0);
}

TEST_CASE("induction with sooner selection gives the aggressive equilibrium") {
    auto s = cases::ou(-2, 2);
    Fundamentals fg(s.diffusion, s.r);
    auto later = solve(s, fg);
    auto ir = equilibrium_induction(s, fg, 0, 8, Selection::Sooner);
    CHECK(ir.multiple_equilibria_stages > 0);
    auto sooner = refine_system(s, fg, ir.guess);
    CHECK(verify(s, fg, sooner).pass);
    CHECK(sooner.profile.p1(0) > later.profile.p1(0));
    CHECK(sooner.profile.p1(0) > sooner.profile.p1(1));
    CHECK(value_at(s, fg, sooner, 1, 0, 0.0) < value_at(s, fg, later, 1, 0, 0.0));
}
