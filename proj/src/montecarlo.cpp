#include "switchgame/montecarlo.hpp"

#include "switchgame/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <random>
#include <thread>

#include <boost/random/normal_distribution.hpp>

namespace switchgame {

namespace {

constexpr int kMaxEvents = 64;

// splitmix64 finalizer; keys the bridge uniforms by (seed, path, step, event)
std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

/// Working coordinate: x for OU, ln x for GBM (a Brownian motion with drift).
struct Coord {
    bool log = false;
    double to(double x) const {
        if (!log) return x;
        if (x == kUpperSentinel) return x;
        return x <= 0.0 ? kLowerSentinel : std::log(x);
    }
    double from(double y) const { return log ? std::exp(y) : y; }
};

struct Lane {
    std::vector<double> up, dn;  ///< thresholds in the working coordinate, by m - m_low
};

struct State {
    int m = 0;
    double cost[2] = {0.0, 0.0};
    int nsw[2] = {0, 0};
    double last_switch = 0.0;
    std::int64_t cascades = 0;
    std::vector<double> dtime;  ///< r * int e^{-rt} dt spent per regime
    std::vector<double> occ;
    std::vector<int> bucket_m;

    double payoff(const GameSpec& spec, int player) const {
        double v = 0.0;
        for (int k = 0; k < static_cast<int>(dtime.size()); ++k) v += spec.pi(player, spec.m_low + k) * dtime[k];
        return v / spec.r - cost[player - 1];
    }
};

class Engine {
public:
    Engine(const GameSpec& spec, const std::vector<ThresholdProfile>& profiles, const SimConfig& cfg)
        : spec_(spec), cfg_(cfg) {
        cfg.validate();
        const Diffusion& d = spec.diffusion;
        d.require_domain(cfg.x0);
        if (!spec.contains(cfg.m0)) throw ConfigError("sim.m0 is outside the regime set");
        coord_.log = d.kind() == DiffusionKind::GBM;
        steps_ = std::max<std::int64_t>(1, std::llround(cfg.horizon / cfg.dt));
        h_ = cfg.horizon / static_cast<double>(steps_);
        if (d.kind() == DiffusionKind::OU) {
            double e = std::exp(-d.mu() * h_);
            a_ = d.theta() * (1.0 - e);
            b_ = e;
            c_ = d.sigma() * std::sqrt((1.0 - e * e) / (2.0 * d.mu()));
        } else {
            a_ = (d.mu() - 0.5 * d.sigma() * d.sigma()) * h_;
            b_ = 1.0;
            c_ = d.sigma() * std::sqrt(h_);
        }
        var_rate_ = d.sigma() * d.sigma();
        edt_ = std::exp(-spec.r * h_);
        for (const auto& p : profiles) {
            if (p.m_low != spec.m_low || p.m_high != spec.m_high)
                throw ConfigError("profile regimes do not match the game");
            std::string bad = p.admissibility();
            if (!bad.empty()) throw OrderingError("inadmissible profile: " + bad);
            Lane l;
            for (int m = p.m_low; m <= p.m_high; ++m) {
                l.up.push_back(m < p.m_high ? coord_.to(p.p1(m)) : kUpperSentinel);
                l.dn.push_back(m > p.m_low ? coord_.to(p.p2(m)) : kLowerSentinel);
            }
            lanes_.push_back(std::move(l));
        }
        for (int b = 1; b <= cfg.buckets; ++b)
            bucket_step_.push_back(std::llround(static_cast<double>(b) * steps_ / cfg.buckets));
    }

    std::int64_t steps() const { return steps_; }
    double step() const { return h_; }

    using Sink = std::function<void(std::int64_t, const std::vector<State>&)>;

    /// Runs all paths; `sink` sees every finished path (from worker threads,
    /// each path index exactly once).
    void run(const Sink& sink, bool buckets, std::vector<PathSample>* record) const {
        std::int64_t n = cfg_.n_paths;
        unsigned nt = cfg_.threads ? cfg_.threads : std::max(1u, std::thread::hardware_concurrency());
        nt = static_cast<unsigned>(std::min<std::int64_t>(nt, n));
        auto work = [&](std::int64_t lo, std::int64_t hi) {
            std::vector<State> st(lanes_.size());
            for (std::int64_t i = lo; i < hi; ++i) {
                path(i, st, buckets, i == 0 ? record : nullptr);
                sink(i, st);
            }
        };
        if (nt <= 1) {
            work(0, n);
            return;
        }
        std::vector<std::thread> pool;
        std::int64_t chunk = (n + nt - 1) / nt;
        for (unsigned t = 0; t < nt; ++t) {
            std::int64_t lo = t * chunk, hi = std::min(n, lo + chunk);
            if (lo < hi) pool.emplace_back(work, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

private:
    void path(std::int64_t index, std::vector<State>& st, bool buckets, std::vector<PathSample>* record) const {
        std::seed_seq seq{static_cast<std::uint32_t>(cfg_.seed), static_cast<std::uint32_t>(cfg_.seed >> 32),
                          static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
        std::mt19937_64 eng(seq);
        boost::random::normal_distribution<double> normal;
        std::uint64_t key = mix(cfg_.seed ^ mix(static_cast<std::uint64_t>(index)));

        int count = spec_.size();
        for (auto& s : st) {
            s = State{};
            s.m = cfg_.m0;
            s.dtime.assign(count, 0.0);
            s.occ.assign(count, 0.0);
            if (buckets) s.bucket_m.assign(bucket_step_.size(), 0);
        }
        double y = coord_.to(cfg_.x0);
        for (size_t p = 0; p < st.size(); ++p) advance(lanes_[p], st[p], 0.0, y, y, 1.0, 1.0, 0.0, key);
        if (record) record->push_back({0.0, cfg_.x0, st[0].m});

        double disc = 1.0;
        size_t next_bucket = 0;
        for (std::int64_t k = 0; k < steps_; ++k) {
            double t0 = static_cast<double>(k) * h_;
            double y1 = a_ + b_ * y + c_ * normal(eng);
            double disc1 = disc * edt_;
            std::uint64_t sk = mix(key + static_cast<std::uint64_t>(k + 1));
            for (size_t p = 0; p < st.size(); ++p) advance(lanes_[p], st[p], t0, y, y1, disc, disc1, h_, sk);
            y = y1;
            disc = disc1;
            while (next_bucket < bucket_step_.size() && bucket_step_[next_bucket] == k + 1) {
                if (buckets)
                    for (auto& s : st) s.bucket_m[next_bucket] = s.m;
                ++next_bucket;
            }
            if (record && (k + 1) % cfg_.record_stride == 0)
                record->push_back({t0 + h_, coord_.from(y), st[0].m});
        }
    }

    void advance(const Lane& lane, State& s, double t0, double y0, double y1, double d0, double d1, double h,
                 std::uint64_t key) const {
        double t1 = t0 + h;
        double cur_t = t0, cur_y = y0, cur_d = d0;
        bool moved = false;
        for (int it = 0;; ++it) {
            if (it >= kMaxEvents) throw CascadeLoop("more than 64 switches within one time step");
            int k = s.m - spec_.m_low;
            double up = lane.up[k], dn = lane.dn[k];
            int dir = 0;
            bool immediate = false;
            if (cur_y >= up) {
                dir = 1;
                immediate = true;
            } else if (cur_y <= dn) {
                dir = -1;
                immediate = true;
            } else if (y1 >= up) {
                dir = 1;
            } else if (y1 <= dn) {
                dir = -1;
            } else if (cfg_.bridge && t1 > cur_t) {
                double v = 2.0 / (var_rate_ * (t1 - cur_t));
                double eu = (up - cur_y) * (up - y1) * v;
                double ed = (cur_y - dn) * (y1 - dn) * v;
                if (eu < 40.0 && unit(mix(key + 2 * it)) < std::exp(-eu))
                    dir = 1;
                else if (ed < 40.0 && unit(mix(key + 2 * it + 1)) < std::exp(-ed))
                    dir = -1;
            }
            if (dir == 0) break;
            double te = cur_t, de = cur_d, ye = cur_y;
            if (!immediate) {
                te = 0.5 * (cur_t + t1);
                de = cur_d * std::exp(-spec_.r * (te - cur_t));
                ye = dir > 0 ? up : dn;
            }
            s.dtime[k] += cur_d - de;
            s.occ[k] += te - cur_t;
            int player = dir > 0 ? 1 : 2;
            s.cost[player - 1] += de * spec_.cost(player, s.m).value(coord_.from(ye));
            s.nsw[player - 1] += 1;
            if (moved && immediate) ++s.cascades;
            moved = true;
            s.m += dir;
            s.last_switch = te;
            cur_t = te;
            cur_d = de;
            cur_y = ye;
        }
        int k = s.m - spec_.m_low;
        s.dtime[k] += cur_d - d1;
        s.occ[k] += t1 - cur_t;
    }

    const GameSpec& spec_;
    SimConfig cfg_;
    Coord coord_;
    std::vector<Lane> lanes_;
    std::int64_t steps_ = 0;
    double h_ = 0.0;
    double a_ = 0.0, b_ = 1.0, c_ = 0.0;
    double var_rate_ = 0.0;
    double edt_ = 1.0;
    std::vector<std::int64_t> bucket_step_;
};

Estimate summarize(const std::vector<double>& v) {
    Estimate e;
    double n = static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += x;
    e.mean = s / n;
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - e.mean) * (x - e.mean);
        e.se = std::sqrt(ss / (n - 1.0) / n);
    }
    return e;
}

} // namespace

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw ConfigError("sim.dt must be positive");
    if (!(horizon > 0.0) || dt > horizon) throw ConfigError("sim.dt must not exceed sim.horizon");
    if (n_paths < 1) throw ConfigError("sim.n_paths must be at least 1");
    if (buckets < 1) throw ConfigError("sim.buckets must be at least 1");
    if (record_stride < 1) throw ConfigError("sim.record_stride must be at least 1");
}

SimResult simulate(const GameSpec& spec, const ThresholdProfile& profile, const SimConfig& cfg) {
    Engine engine(spec, {profile}, cfg);
    std::int64_t n = cfg.n_paths;
    int count = spec.size();
    std::vector<double> pay1(n), pay2(n), sw1(n), sw2(n), last(n);
    std::vector<int> final_m(n);
    std::vector<std::vector<double>> occ(count, std::vector<double>(n));
    std::vector<std::vector<std::int64_t>> hits(cfg.buckets, std::vector<std::int64_t>(count, 0));
    std::vector<std::int64_t> cascades(n);
    std::mutex mu;

    SimResult r;
    engine.run(
        [&](std::int64_t i, const std::vector<State>& st) {
            const State& s = st[0];
            pay1[i] = s.payoff(spec, 1);
            pay2[i] = s.payoff(spec, 2);
            sw1[i] = s.nsw[0];
            sw2[i] = s.nsw[1];
            last[i] = s.last_switch;
            final_m[i] = s.m;
            cascades[i] = s.cascades;
            double tot = 0.0;
            for (double o : s.occ) tot += o;
            for (int k = 0; k < count; ++k) occ[k][i] = s.occ[k] / tot;
            std::lock_guard<std::mutex> lock(mu);
            for (size_t b = 0; b < s.bucket_m.size(); ++b) ++hits[b][s.bucket_m[b] - spec.m_low];
        },
        true, cfg.record_path ? &r.sample_path : nullptr);

    r.payoff[0] = summarize(pay1);
    r.payoff[1] = summarize(pay2);
    r.switches[0] = summarize(sw1);
    r.switches[1] = summarize(sw2);
    for (int k = 0; k < count; ++k) r.rho.push_back(summarize(occ[k]));
    for (std::int64_t c : cascades) r.cascades += c;
    double nn = static_cast<double>(n);
    for (int b = 0; b < cfg.buckets; ++b) {
        r.bucket_times.push_back(cfg.horizon * (b + 1) / cfg.buckets);
        std::vector<Estimate> row;
        for (int k = 0; k < count; ++k) {
            double p = static_cast<double>(hits[b][k]) / nn;
            row.push_back({p, n > 1 ? std::sqrt(p * (1.0 - p) / (nn - 1.0)) : 0.0});
        }
        r.bucket_prob.push_back(std::move(row));
    }

    const Diffusion& d = spec.diffusion;
    bool top = std::isfinite(d.scale_upper_limit());
    bool bottom = std::isfinite(d.scale_lower_limit());
    if (top != bottom) {
        r.has_absorption = true;
        r.absorbing_regime = top ? spec.m_high : spec.m_low;
        std::vector<double> t;
        for (std::int64_t i = 0; i < n; ++i) {
            if (final_m[i] == r.absorbing_regime)
                t.push_back(last[i]);
            else
                ++r.censored_paths;
        }
        r.absorbed_paths = static_cast<std::int64_t>(t.size());
        if (!t.empty()) r.absorption_time = summarize(t);
    }
    return r;
}

std::vector<std::vector<double>> paired_payoffs(const GameSpec& spec, const std::vector<ThresholdProfile>& profiles,
                                                int player, const SimConfig& cfg) {
    Engine engine(spec, profiles, cfg);
    std::vector<std::vector<double>> out(profiles.size(), std::vector<double>(cfg.n_paths));
    engine.run(
        [&](std::int64_t i, const std::vector<State>& st) {
            for (size_t p = 0; p < st.size(); ++p) out[p][i] = st[p].payoff(spec, player);
        },
        false, nullptr);
    return out;
}

std::vector<Estimate> deviation_gains(const GameSpec& spec, const ThresholdProfile& profile,
                                      const std::vector<Perturbation>& perturbations, const SimConfig& cfg) {
    std::vector<ThresholdProfile> profiles{profile};
    for (const auto& q : perturbations) {
        if (q.player != 1 && q.player != 2) throw ConfigError("player must be 1 or 2");
        if (!spec.contains(q.m) || (q.player == 1 && q.m == spec.m_high) || (q.player == 2 && q.m == spec.m_low))
            throw InadmissiblePerturbation("player " + std::to_string(q.player) + " has no threshold in regime " +
                                           std::to_string(q.m));
        ThresholdProfile p = profile;
        (q.player == 1 ? p.p1(q.m) : p.p2(q.m)) += q.delta;
        std::string bad = p.admissibility();
        if (!bad.empty()) throw InadmissiblePerturbation("perturbed profile is inadmissible: " + bad);
        if (!spec.diffusion.in_domain(q.player == 1 ? p.p1(q.m) : p.p2(q.m)))
            throw InadmissiblePerturbation("perturbed threshold leaves the state space");
        profiles.push_back(std::move(p));
    }
    Engine engine(spec, profiles, cfg);
    std::int64_t n = cfg.n_paths;
    std::vector<std::vector<double>> diff(perturbations.size(), std::vector<double>(n));
    engine.run(
        [&](std::int64_t i, const std::vector<State>& st) {
            for (size_t q = 0; q < perturbations.size(); ++q) {
                int pl = perturbations[q].player;
                diff[q][i] = st[q + 1].payoff(spec, pl) - st[0].payoff(spec, pl);
            }
        },
        false, nullptr);
    std::vector<Estimate> out;
    for (const auto& d : diff) out.push_back(summarize(d));
    return out;
}

Estimate deviation_gain(const GameSpec& spec, const ThresholdProfile& profile, int player, int m, double delta,
                        const SimConfig& cfg) {
    return deviation_gains(spec, profile, {{player, m, delta}}, cfg).front();
}

} // namespace switchgame
