#pragma once

#include "switchgame/equilibrium.hpp"
#include "switchgame/gamespec.hpp"
#include "switchgame/montecarlo.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace switchgame {

using json = nlohmann::json;

enum class Scheme { Tatonnement, Induction, Both };

struct MethodConfig {
    Scheme scheme = Scheme::Tatonnement;
    int N = 30;  ///< control budget of each best response / induction depth
    int A = 80;  ///< tatonnement rounds
    double tol = 1e-6;
    int anchor = 0;  ///< induction regime where k1 = k2
    Selection selection = Selection::Later;
    RefineOptions refine;
};

struct MonotoneCheck {
    std::string metric;
    bool increasing = false;  ///< nondecreasing if true, nonincreasing otherwise
};

struct SweepConfig {
    std::vector<std::string> axes;  ///< JSON pointers into the config, all set to the grid value
    std::vector<double> values;
    std::vector<MonotoneCheck> checks;
};

struct OutputConfig {
    std::string dir = "out";
    bool sample_path = false;
};

struct RunConfig {
    json document;  ///< config as loaded, after overrides
    std::string hash;
    GameSpec game;
    MethodConfig method;
    SimConfig sim;
    OutputConfig output;
    std::optional<SweepConfig> sweep;
    std::optional<ThresholdProfile> profile;  ///< inline strategy profile for simulate
};

GameSpec game_from_json(const json& j);
json game_to_json(const GameSpec& spec);

/// Profile document: {"s1": {"m": x, ...}, "s2": {...}}; missing entries are sentinels.
ThresholdProfile profile_from_json(const json& j, int m_low, int m_high);
json profile_to_json(const ThresholdProfile& p);

/// Parses and validates every section; throws ConfigError.
RunConfig parse_config(const json& document);
/// Reads the file, applies the seed override, parses.
RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed = std::nullopt);

/// 64-bit FNV-1a of the compact dump, as 16 hex digits.
std::string config_hash(const json& document);

} // namespace switchgame
