#include "cases.hpp"

#include <doctest.h>

#include "switchgame/errors.hpp"
#include "switchgame/montecarlo.hpp"

#include <boost/random/normal_distribution.hpp>

#include <cmath>
#include <random>

using namespace switchgame;

namespace {

ThresholdProfile case1_profile() {
    auto p = ThresholdProfile::sentinels(-1, 1);
    p.p1(-1) = 0.5668751;
    p.p1(0) = 0.9486110;
    p.p2(0) = -0.9486110;
    p.p2(1) = -0.5668751;
    return p;
}

SimConfig small(double horizon, double dt, std::int64_t n) {
    SimConfig c;
    c.horizon = horizon;
    c.dt = dt;
    c.n_paths = n;
    c.seed = 11;
    c.buckets = 10;
    c.threads = 1;
    return c;
}

} // namespace

TEST_CASE("nobody switching gives the deterministic annuity on every path") {
    auto s = cases::ou(-1, 1);
    auto cfg = small(30.0, 0.1, 50);
    auto r = simulate(s, ThresholdProfile::sentinels(-1, 1), cfg);
    double annuity = 4.0 * (1.0 - std::exp(-0.1 * 30.0)) / 0.1;
    CHECK(r.payoff[0].mean == doctest::Approx(annuity).epsilon(1e-12));
    CHECK(r.payoff[0].se < 1e-12);
    CHECK(r.switches[0].mean == 0.0);
    CHECK(r.rho[1].mean == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("the stepper reproduces exact transitions from the same normals") {
    for (auto s : {cases::ou(-1, 1), cases::gbm()}) {
        auto cfg = small(5.0, 0.05, 1);
        cfg.x0 = s.diffusion.kind() == DiffusionKind::GBM ? 5.0 : 0.3;
        cfg.record_path = true;
        cfg.record_stride = 1;
        auto r = simulate(s, ThresholdProfile::sentinels(s.m_low, s.m_high), cfg);
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), 0u, 0u, 0u};
        std::mt19937_64 eng(seq);
        boost::random::normal_distribution<double> normal;
        double x = cfg.x0;
        REQUIRE(r.sample_path.size() == 101);
        for (std::size_t k = 1; k < r.sample_path.size(); ++k) {
            x = s.diffusion.sample_transition(x, cfg.dt, normal(eng));
            CHECK(r.sample_path[k].x == doctest::Approx(x).epsilon(1e-12));
        }
    }
}

TEST_CASE("same seed, same result; occupation shares sum to one") {
    auto s = cases::ou(-1, 1);
    auto cfg = small(50.0, 0.05, 400);
    auto a = simulate(s, case1_profile(), cfg);
    auto b = simulate(s, case1_profile(), cfg);
    CHECK(a.payoff[0].mean == b.payoff[0].mean);
    CHECK(a.payoff[1].se == b.payoff[1].se);
    CHECK(a.switches[1].mean == b.switches[1].mean);
    double sum = 0.0;
    for (const auto& e : a.rho) sum += e.mean;
    CHECK(std::abs(sum - 1.0) < 1e-12);
    cfg.threads = 3;
    auto c = simulate(s, case1_profile(), cfg);
    CHECK(c.payoff[0].mean == a.payoff[0].mean);
}

TEST_CASE("payoffs respect the static bounds") {
    auto s = cases::ou(-1, 1);
    auto r = simulate(s, case1_profile(), small(100.0, 0.1, 2000));
    CHECK(r.payoff[0].mean <= dcf(s, 1, 1) + 3 * r.payoff[0].se);
    CHECK(r.payoff[0].mean >= dcf(s, 1, -1) - 3 * r.payoff[0].se);
}

TEST_CASE("halving the step leaves the payoff within noise") {
    auto s = cases::ou(-1, 1);
    auto coarse = simulate(s, case1_profile(), small(100.0, 0.1, 10000));
    auto cfg = small(100.0, 0.05, 10000);
    cfg.seed = 12;
    auto fine = simulate(s, case1_profile(), cfg);
    double se = std::hypot(coarse.payoff[0].se, fine.payoff[0].se);
    CHECK(std::abs(coarse.payoff[0].mean - fine.payoff[0].mean) < 2 * se);
}

TEST_CASE("deviation gains: zero for no change, positive when moving back to equilibrium") {
    auto s = cases::ou(-1, 1);
    auto cfg = small(100.0, 0.1, 4000);
    auto g0 = deviation_gain(s, case1_profile(), 1, 0, 0.0, cfg);
    CHECK(g0.mean == 0.0);
    CHECK(g0.se == 0.0);

    auto bad = case1_profile();
    bad.p1(0) += 1.0;
    auto back = deviation_gain(s, bad, 1, 0, -1.0, cfg);
    CHECK(back.mean > 3 * back.se);

    CHECK_THROWS_AS(deviation_gain(s, case1_profile(), 1, 0, -2.0, cfg), InadmissiblePerturbation);
    CHECK_THROWS_AS(deviation_gain(s, case1_profile(), 1, 1, 0.1, cfg), InadmissiblePerturbation);
}

TEST_CASE("GBM occupation drifts into the top regime") {
    auto s = cases::gbm();
    auto p = ThresholdProfile::sentinels(-1, 1);
    p.p1(-1) = 5.979639;
    p.p1(0) = 8.959442;
    p.p2(0) = 4.129649;
    p.p2(1) = 5.957422;
    auto cfg = small(200.0, 0.1, 2000);
    cfg.x0 = 5.0;
    auto r = simulate(s, p, cfg);
    CHECK(r.has_absorption);
    CHECK(r.absorbing_regime == 1);
    CHECK(r.bucket_prob.back()[2].mean > r.bucket_prob.front()[2].mean);
    CHECK(r.bucket_prob.back()[2].mean > 0.9);
}

TEST_CASE("invalid simulation settings are configuration errors") {
    auto s = cases::ou(-1, 1);
    auto cfg = small(1.0, 2.0, 10);
    CHECK_THROWS_AS(simulate(s, case1_profile(), cfg), ConfigError);
    cfg = small(1.0, 0.1, 0);
    CHECK_THROWS_AS(simulate(s, case1_profile(), cfg), ConfigError);
}
