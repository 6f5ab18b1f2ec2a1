#pragma once

#include "switchgame/bestresponse.hpp"
#include "switchgame/gamespec.hpp"

#include <cstdint>
#include <vector>

namespace switchgame {

struct SimConfig {
    double x0 = 0.0;
    int m0 = 0;
    double horizon = 400.0;
    double dt = 0.01;
    std::int64_t n_paths = 10000;
    std::uint64_t seed = 0;
    int buckets = 50;  ///< time points for the distribution of M_t
    /// Detect threshold crossings between grid points with the Brownian
    /// bridge of the (log-)state. Off means grid-point detection only.
    bool bridge = true;
    bool record_path = false;  ///< keep path 0 as (t, X, M) samples
    int record_stride = 10;
    unsigned threads = 0;  ///< 0: hardware concurrency

    void validate() const;
};

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
};

struct PathSample {
    double t;
    double x;
    int m;
};

struct SimResult {
    Estimate payoff[2];
    Estimate switches[2];
    std::vector<Estimate> rho;  ///< time share over [0, horizon], indexed by m - m_low
    std::vector<double> bucket_times;
    std::vector<std::vector<Estimate>> bucket_prob;  ///< [bucket][m - m_low], P(M_t = m)
    /// Time of the last switch for paths ending in a regime the state drifts
    /// into for good; only for transient diffusions.
    bool has_absorption = false;
    int absorbing_regime = 0;
    Estimate absorption_time;
    std::int64_t absorbed_paths = 0;
    std::int64_t censored_paths = 0;
    std::int64_t cascades = 0;  ///< switches triggered on arrival in a new regime
    std::vector<PathSample> sample_path;
};

SimResult simulate(const GameSpec& spec, const ThresholdProfile& profile, const SimConfig& cfg);

/// Payoff of player i under several profiles on common paths; returns
/// per-profile per-path discounted payoffs ([profile][path]).
std::vector<std::vector<double>> paired_payoffs(const GameSpec& spec, const std::vector<ThresholdProfile>& profiles,
                                                int player, const SimConfig& cfg);

struct Perturbation {
    int player;
    int m;
    double delta;
};

/// J^i(perturbed) - J^i(profile) on paired paths. The perturbation moves
/// the threshold of `player` in regime `m`; InadmissiblePerturbation if the
/// result breaks the no-loop conditions.
Estimate deviation_gain(const GameSpec& spec, const ThresholdProfile& profile, int player, int m, double delta,
                        const SimConfig& cfg);

/// Several one-threshold perturbations of the same profile in one pass;
/// gains are measured for the perturbed player.
std::vector<Estimate> deviation_gains(const GameSpec& spec, const ThresholdProfile& profile,
                                      const std::vector<Perturbation>& perturbations, const SimConfig& cfg);

} // namespace switchgame
