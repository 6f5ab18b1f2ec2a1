#pragma once

#include "switchgame/bestresponse.hpp"
#include "switchgame/gamespec.hpp"
#include "switchgame/value.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace switchgame {

struct Check {
    std::string name;
    bool pass;
    std::string detail;
};

struct VerificationReport {
    double residual_norm = 0.0;
    std::vector<Check> checks;
    bool pass = false;
    /// Names of checks that failed.
    std::vector<std::string> failures() const;
};

struct EquilibriumSolution {
    ThresholdProfile profile;
    std::vector<double> omega1, nu1, omega2, nu2;  ///< indexed by m - m_low
    double residual_norm = 0.0;
    int newton_iterations = 0;
    std::optional<VerificationReport> verification;
    /// Owner thresholds held at a kink of the switching cost, where smooth
    /// pasting is replaced by the one-sided kink condition. Indexed by m - m_low; empty means none.
    std::vector<char> kink1, kink2;

    static EquilibriumSolution zeros(int m_low, int m_high);
    double omega(int player, int m) const;
    double nu(int player, int m) const;
    bool at_kink(int player, int m) const;
};

/// Value functions of both players under a solution. Node of (i, m) is
/// (i - 1) * |M| + (m - m_low).
struct ValueFunctionSet {
    std::shared_ptr<ValueGraph> graph;
    int m_low = 0;
    int count = 0;
    int node(int player, int m) const { return (player - 1) * count + (m - m_low); }
    ValueD eval(int player, int m, double x) const { return graph->eval(node(player, m), x); }
};

ValueFunctionSet build_values(const GameSpec& spec, const Fundamentals& fg, const EquilibriumSolution& sol);

/// Stacked residuals (value matching and smooth pasting at every owner
/// threshold, value matching at every rival threshold).
std::vector<double> system_residuals(const GameSpec& spec, const Fundamentals& fg, const EquilibriumSolution& sol);

struct RefineOptions {
    int max_iterations = 60;
    double tol = 1e-9;
    double step_tol = 1e-13;
    int max_halvings = 5;
};

/// Damped Newton on the full system with a central-difference Jacobian.
EquilibriumSolution refine_system(const GameSpec& spec, const Fundamentals& fg, const EquilibriumSolution& initial,
                                  const RefineOptions& opt = {});

VerificationReport verify(const GameSpec& spec, const Fundamentals& fg, const EquilibriumSolution& sol);

enum class Selection { Later, Sooner };

struct StageRecord {
    int m, k1, k2;
    double s1, s2;
    int local_equilibria;
};

struct InductionResult {
    EquilibriumSolution guess;
    std::vector<StageRecord> stages;
    int multiple_equilibria_stages = 0;
};

/// Equilibrium induction over sub-stages (m, k1, k2) with k2 = k1 + (m - anchor).
/// The top stage of each regime has min(k1, k2) = N.
InductionResult equilibrium_induction(const GameSpec& spec, const Fundamentals& fg, int anchor, int N,
                                      Selection selection);

struct SymmetricResult {
    EquilibriumSolution solution;
    double root = 0.0;
    double z_residual = 0.0;
};

/// Two-regime symmetric game M = {-1, +1} reduced to one root of Z(s).
SymmetricResult symmetric_two_regime(const GameSpec& spec, const Fundamentals& fg);

/// Equilibrium payoff of player i in regime m at x.
double value_at(const GameSpec& spec, const Fundamentals& fg, const EquilibriumSolution& sol, int player, int m,
                double x);

/// Seed assembled from a tatonnement result.
EquilibriumSolution seed_from_tatonnement(const TatonnementResult& t);

} // namespace switchgame
