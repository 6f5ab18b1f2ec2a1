#pragma once

#include "switchgame/config.hpp"
#include "switchgame/equilibrium.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace switchgame::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kSolveFailure = 2, kVerifyFailure = 3, kChainPrecondition = 4 };

/// Solver failure with the diagnostic document written by cmd_solve.
class SolveFailed : public std::runtime_error {
public:
    SolveFailed(const std::string& what, json diagnostics)
        : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}
    const json& diagnostics() const { return diagnostics_; }

private:
    json diagnostics_;
};

struct SolveOutcome {
    EquilibriumSolution solution;
    VerificationReport report;
    json diagnostics;  ///< seed scheme details
};

/// Seed scheme(s), refine_system, verify. With `continuation`, refinement
/// starts from it and the configured scheme is the fallback.
SolveOutcome solve_game(const GameSpec& spec, const MethodConfig& method,
                        const EquilibriumSolution* continuation = nullptr);

json solution_to_json(const GameSpec& spec, const EquilibriumSolution& sol, const VerificationReport& report);
EquilibriumSolution solution_from_json(const json& j, const GameSpec& spec);

/// Writes to a temporary sibling and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);

/// Six significant digits.
std::string fmt6(double x);

int cmd_solve(const RunConfig& rc, std::ostream& log);
int cmd_verify(const RunConfig& rc, std::ostream& log);
int cmd_macro(const RunConfig& rc, std::ostream& log);
int cmd_simulate(const RunConfig& rc, std::ostream& log);
int cmd_sweep(const RunConfig& rc, std::ostream& log);

/// Full command line: `solve|verify|macro|simulate|sweep --config <path> [--out <dir>] [--seed <u64>]`.
int run(int argc, char** argv, std::ostream& log);

} // namespace switchgame::cli
