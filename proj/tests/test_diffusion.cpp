#include "oracles.hpp"

#include <doctest.h>

#include "switchgame/diffusion.hpp"
#include "switchgame/errors.hpp"

#include <cmath>
#include <random>

using namespace switchgame;

namespace {

// Reference values from 30-digit adaptive quadrature (mpmath) of the
// integral representation, OU(0.15, 1.5, 0), r = 0.1.
struct RefFG {
    double x, F, G, dF, dG;
};
const RefFG kOuRef[] = {
    {0, 1.6876255256264091, 1.6876255256264091, 0.36720595280179057, -0.36720595280179057},
    {0.94861, 2.1171579391810447, 1.3967495921553144, 0.55540479206787479, -0.25519099218979485},
    {-2.5, 1.0887046417073505, 3.4226717883649805, 0.15374383109051211, -1.2435382279670881},
    {5.0, 11.353336480258933, 0.8094207881846595, 6.9734102120165515, -0.080824944008239473},
    {13.16216, 155702.42803585279, 0.46506381346329903, 269028.9915981872, -0.022107628401007685},
};

} // namespace

TEST_CASE("GBM exponents match the quadratic formula") {
    auto d = Diffusion::gbm(0.08, 0.25);
    Fundamentals fg(d, 0.1);
    double a = 0.5 * 0.0625, b = 0.08 - 0.5 * 0.0625, c = -0.1;
    double disc = std::sqrt(b * b - 4 * a * c);
    CHECK(fg.eta_plus() == doctest::Approx((-b + disc) / (2 * a)).epsilon(1e-14));
    CHECK(fg.eta_minus() == doctest::Approx((-b - disc) / (2 * a)).epsilon(1e-14));
    CHECK(fg.eta_plus() == doctest::Approx(1.17152).epsilon(1e-5));
    CHECK(fg.eta_minus() == doctest::Approx(-2.73152).epsilon(1e-5));
    auto v = fg(1.0);
    CHECK(v.F == 1.0);
    CHECK(v.G == 1.0);
    CHECK_THROWS_AS(fg(-1.0), DomainError);
}

TEST_CASE("OU fundamentals agree with high-precision quadrature") {
    auto d = Diffusion::ou(0.15, 1.5, 0.0);
    Fundamentals fg(d, 0.1);
    for (const auto& ref : kOuRef) {
        auto v = fg(ref.x);
        CHECK(v.F == doctest::Approx(ref.F).epsilon(1e-11));
        CHECK(v.G == doctest::Approx(ref.G).epsilon(1e-11));
        CHECK(v.dF == doctest::Approx(ref.dF).epsilon(1e-11));
        CHECK(v.dG == doctest::Approx(ref.dG).epsilon(1e-11));
    }
    auto c = fg(0.0);
    CHECK(c.F == doctest::Approx(c.G).epsilon(1e-15));
}

TEST_CASE("tabulated OU values match direct quadrature off the nodes") {
    auto d = Diffusion::ou(0.15, 1.5, 0.0);
    Fundamentals fg(d, 0.1);
    double kappa = std::sqrt(0.3) / 1.5;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (int i = 0; i < 40; ++i) {
        double x = u(rng);
        auto v = fg(x);
        double z = kappa * x;
        CHECK(std::log(v.F) == doctest::Approx(Fundamentals::ou_log_integral(2.0 / 3.0, 0, z)).epsilon(1e-12));
        CHECK(std::log(v.dF / kappa) == doctest::Approx(Fundamentals::ou_log_integral(2.0 / 3.0, 1, z)).epsilon(1e-12));
    }
}

TEST_CASE("fundamental solutions solve (L-r)u = 0 and are monotone") {
    for (auto d : {Diffusion::ou(0.15, 1.5, 0.0), Diffusion::ou(0.4, 0.7, 1.0), Diffusion::gbm(0.08, 0.25)}) {
        Fundamentals fg(d, 0.1);
        auto grid = d.probe_grid(5.0);
        for (double x : grid) {
            auto v = fg(x);
            CHECK(v.dF > 0.0);
            CHECK(v.dG < 0.0);
            double h = 1e-5 * std::max(1.0, std::abs(x));
            auto p = fg(x + h), m = fg(x - h);
            double d2F = (p.dF - m.dF) / (2 * h);
            double d2G = (p.dG - m.dG) / (2 * h);
            double lF = d.generator(x, v.F, v.dF, d2F, 0.1);
            double lG = d.generator(x, v.G, v.dG, d2G, 0.1);
            CHECK(std::abs(lF) <= 1e-6 * (0.1 * v.F));
            CHECK(std::abs(lG) <= 1e-6 * (0.1 * v.G));
        }
        for (std::size_t i = 1; i < grid.size(); ++i) {
            auto hi = fg(grid[i]), lo = fg(grid[i - 1]);
            CHECK(hi.F * lo.G - lo.F * hi.G > 0.0);
        }
    }
}

TEST_CASE("scale function") {
    auto g = Diffusion::gbm(0.08, 0.25);
    CHECK(1.0 - 2 * 0.08 / 0.0625 == doctest::Approx(-1.56));
    // sign-adjusted power x^{-1.56}
    CHECK(g.scale(2.0).value == doctest::Approx(-std::pow(2.0, -1.56)).epsilon(1e-14));
    CHECK_FALSE(g.scale(2.0).logarithmic);
    auto flat = Diffusion::gbm(0.5 * 0.0625, 0.25);
    CHECK(flat.scale(3.0).logarithmic);
    CHECK(flat.scale(3.0).value == doctest::Approx(std::log(3.0)));

    auto o = Diffusion::ou(0.15, 1.5, 0.0);
    // independent trapezoid oracle for the Dawson-based closed form
    auto trap = [](double x) {
        int n = 200000;
        double h = x / n, s = 0.5 * (1.0 + std::exp(0.15 / 2.25 * x * x));
        for (int i = 1; i < n; ++i) s += std::exp(0.15 / 2.25 * (i * h) * (i * h));
        return s * h;
    };
    CHECK(o.scale(1.7).value == doctest::Approx(trap(1.7)).epsilon(1e-9));
    CHECK(o.scale(-3.1).value == doctest::Approx(trap(-3.1)).epsilon(1e-9));
    for (double dlt : {0.3, 1.0, 4.0})
        CHECK(o.scale(dlt).value - o.scale(0.0).value == doctest::Approx(-(o.scale(-dlt).value - o.scale(0.0).value)));
    for (auto d : {o, g}) {
        auto grid = d.probe_grid(5.0);
        for (std::size_t i = 1; i < grid.size(); ++i) CHECK(d.scale(grid[i]).value > d.scale(grid[i - 1]).value);
    }
}

TEST_CASE("exit probabilities") {
    auto o = Diffusion::ou(0.15, 1.5, 0.0);
    CHECK(o.exit_prob_up(0.0, -2.0, 2.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(o.exit_prob_up(-2.0 + 1e-9, -2.0, 2.0) < 1e-8);
    double p = o.exit_prob_up(0.56688, -0.94861, 0.94861);
    CHECK(p == doctest::Approx(0.795).epsilon(1e-3 / 0.795));
    CHECK(o.exit_prob_up(0.3, -1.0, 2.0) + o.exit_prob_down(0.3, -1.0, 2.0) == 1.0);
    CHECK_THROWS_AS(o.exit_prob_up(1.0, 1.0, 2.0), OrderingError);
    CHECK_THROWS_AS(o.exit_prob_up(3.0, 1.0, 2.0), OrderingError);

    auto g = Diffusion::gbm(0.08, 0.25);
    // taboo probability of never returning down to 5.9574 from 8.9594
    double pa = g.exit_prob_up(8.9594, 5.9574, g.upper());
    CHECK(pa == doctest::Approx(1.0 - std::pow(8.9594 / 5.9574, -1.56)).epsilon(1e-12));
    CHECK(pa == doctest::Approx(0.4709).epsilon(1e-4 / 0.4709));
}

TEST_CASE("expected exit time agrees with a finite-difference Dynkin solve") {
    auto o = Diffusion::ou(0.15, 1.5, 0.0);
    auto g = Diffusion::gbm(0.08, 0.25);
    struct Case {
        Diffusion d;
        double a, x, b;
    };
    Case cases[] = {{o, -0.94861, 0.56688, 0.94861}, {o, -3.0, 1.0, 0.5 + 4.0}, {o, 0.5, 2.0, 6.0},
                    {g, 4.1296, 5.9796, 8.9594}, {g, 1.0, 2.0, 20.0}};
    for (auto& c : cases) {
        double fd = oracles::exit_time_fd(c.d, c.x, c.a, c.b);
        CHECK(c.d.expected_exit_time(c.x, c.a, c.b) == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK(o.expected_exit_time(0.56688, -0.94861, 0.94861) == doctest::Approx(0.264).epsilon(0.5e-3 / 0.264));
    CHECK(o.expected_exit_time(-0.94861 + 1e-10, -0.94861, 0.94861) < 1e-8);
}

TEST_CASE("one-sided passage times") {
    auto o = Diffusion::ou(0.15, 1.5, 0.0);
    auto pt = o.conditional_passage_time(0.94861, -0.56688);
    CHECK(pt.reach_probability == 1.0);
    CHECK(pt.time == doctest::Approx(4.431).epsilon(0.5e-3 / 4.431));
    // one-sided passage is the limit of a two-sided exit with a far barrier
    CHECK(pt.time == doctest::Approx(oracles::exit_time_fd(o, 0.94861, -0.56688, 25.0)).epsilon(1e-6));
    CHECK(o.conditional_passage_time(1.0, 1.0).time == 0.0);

    auto g = Diffusion::gbm(0.08, 0.25);
    auto down = g.conditional_passage_time(8.9594, 5.9574);
    double nu = 0.08 - 0.5 * 0.0625;
    double d = std::log(8.9594 / 5.9574);
    CHECK(down.reach_probability == doctest::Approx(std::pow(8.9594 / 5.9574, -1.56)).epsilon(1e-13));
    CHECK(down.time * down.reach_probability == doctest::Approx(d / nu * std::pow(8.9594 / 5.9574, -1.56)).epsilon(1e-13));
    auto up = g.conditional_passage_time(5.0, 9.0);
    CHECK(up.reach_probability == 1.0);
    CHECK(up.time == doctest::Approx(std::log(9.0 / 5.0) / nu));
}

TEST_CASE("exact transition sampling") {
    auto o = Diffusion::ou(0.15, 1.5, 0.3);
    CHECK(o.sample_transition(2.0, 0.5, 0.0) == doctest::Approx(0.3 + 1.7 * std::exp(-0.075)).epsilon(1e-15));
    auto g = Diffusion::gbm(0.08, 0.25);
    CHECK(g.sample_transition(2.0, 0.5, 0.0) == doctest::Approx(2.0 * std::exp((0.08 - 0.03125) * 0.5)).epsilon(1e-15));

    std::mt19937_64 rng(11);
    std::normal_distribution<double> n01;
    const int n = 1000000;
    double dt = 0.7, x = 2.0;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        double y = o.sample_transition(x, dt, n01(rng));
        s += y;
        s2 += y * y;
    }
    double mean = s / n, var = s2 / n - mean * mean;
    double m_ref = 0.3 + 1.7 * std::exp(-0.15 * dt);
    double v_ref = 2.25 * (1 - std::exp(-0.3 * dt)) / 0.3;
    CHECK(std::abs(mean - m_ref) < 4.0 * std::sqrt(v_ref / n));
    CHECK(std::abs(var - v_ref) < 4.0 * v_ref * std::sqrt(2.0 / n));
}

TEST_CASE("Monte Carlo exit time oracle") {
    auto o = Diffusion::ou(0.15, 1.5, 0.0);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    const int paths = 20000;
    double dt = 1e-3, sum = 0, sum2 = 0;
    for (int p = 0; p < paths; ++p) {
        double x = 0.56688, t = 0;
        while (x > -0.94861 && x < 0.94861) {
            x = o.sample_transition(x, dt, n01(rng));
            t += dt;
        }
        sum += t;
        sum2 += t * t;
    }
    double mean = sum / paths;
    double se = std::sqrt((sum2 / paths - mean * mean) / paths);
    // grid monitoring overshoots by roughly 0.58 sigma sqrt(dt); allow for it
    double exact = o.expected_exit_time(0.56688, -0.94861, 0.94861);
    double widened = o.expected_exit_time(0.56688, -0.94861 - 0.5826 * 1.5 * std::sqrt(dt),
                                          0.94861 + 0.5826 * 1.5 * std::sqrt(dt));
    CHECK(mean > exact - 3 * se);
    CHECK(std::abs(mean - widened) < 3 * se);
}
