#include "switchgame/cli.hpp"

#include "switchgame/errors.hpp"
#include "switchgame/macro.hpp"
#include "switchgame/montecarlo.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <unistd.h>

namespace fs = std::filesystem;

namespace switchgame::cli {

namespace {

double number_from(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json estimate_json(const Estimate& e) { return {{"mean", e.mean}, {"se", e.se}, {"display", fmt6(e.mean)}}; }

json profile_json(const ThresholdProfile& p) { return profile_to_json(p); }

/// Key of the inputs that determine an equilibrium.
std::string solve_key(const RunConfig& rc) {
    json j = {{"game", rc.document.at("game")}, {"method", rc.document.value("method", json::object())}};
    return config_hash(j);
}

fs::path out_dir(const RunConfig& rc) {
    fs::path dir(rc.output.dir);
    fs::create_directories(dir);
    return dir;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json verification_json(const VerificationReport& v) {
    json checks = json::array();
    for (const auto& c : v.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return {{"pass", v.pass}, {"residual_norm", v.residual_norm}, {"failures", v.failures()}, {"checks", checks}};
}

void write_thresholds_csv(const fs::path& path, const GameSpec& spec, const EquilibriumSolution& sol) {
    std::ostringstream os;
    os << "regime,player,threshold,omega,nu\n";
    for (int m = spec.m_low; m <= spec.m_high; ++m) {
        if (m < spec.m_high)
            os << m << ",1," << fmt6(sol.profile.p1(m)) << ',' << fmt6(sol.omega(1, m)) << ',' << fmt6(sol.nu(1, m))
               << '\n';
        if (m > spec.m_low)
            os << m << ",2," << fmt6(sol.profile.p2(m)) << ',' << fmt6(sol.omega(2, m)) << ',' << fmt6(sol.nu(2, m))
               << '\n';
    }
    write_atomic(path.string(), os.str());
}

EquilibriumSolution refine_from(const GameSpec& spec, const Fundamentals& fg, const EquilibriumSolution& seed,
                                const MethodConfig& method, const std::string& scheme, json& diag) {
    try {
        return refine_system(spec, fg, seed, method.refine);
    } catch (const Error& e) {
        diag["error"] = {{"stage", "refine"}, {"scheme", scheme}, {"kind", e.kind()}, {"message", e.what()}};
        diag["seed"] = profile_json(seed.profile);
        throw SolveFailed(std::string("refinement from the ") + scheme + " seed failed: " + e.what(), diag);
    }
}

EquilibriumSolution tatonnement_seed(const GameSpec& spec, const Fundamentals& fg, const MethodConfig& method,
                                     json& diag) {
    json t;
    EquilibriumSolution seed;
    try {
        auto res = tatonnement(spec, fg, method.N, method.A, method.tol);
        t = {{"converged", true}, {"rounds", res.history.empty() ? 0 : res.history.back().round}};
        seed = seed_from_tatonnement(res);
    } catch (const TatonnementNoConvergence& e) {
        const auto& part = e.partial();
        t = {{"converged", false},
             {"rounds", part.history.empty() ? 0 : part.history.back().round},
             {"message", e.what()}};
        seed = seed_from_tatonnement(part);
    } catch (const Error& e) {
        diag["error"] = {{"stage", "tatonnement"}, {"kind", e.kind()}, {"message", e.what()}};
        throw SolveFailed(std::string("tatonnement failed: ") + e.what(), diag);
    }
    t["seed"] = profile_json(seed.profile);
    diag["tatonnement"] = t;
    return seed;
}

EquilibriumSolution induction_seed(const GameSpec& spec, const Fundamentals& fg, const MethodConfig& method,
                                   json& diag) {
    try {
        auto res = equilibrium_induction(spec, fg, method.anchor, method.N, method.selection);
        diag["induction"] = {{"anchor", method.anchor},
                             {"N", method.N},
                             {"selection", method.selection == Selection::Later ? "later" : "sooner"},
                             {"stages", res.stages.size()},
                             {"multiple_equilibria_stages", res.multiple_equilibria_stages},
                             {"seed", profile_json(res.guess.profile)}};
        return res.guess;
    } catch (const Error& e) {
        diag["error"] = {{"stage", "induction"}, {"kind", e.kind()}, {"message", e.what()}};
        throw SolveFailed(std::string("equilibrium induction failed: ") + e.what(), diag);
    }
}

double max_threshold_gap(const ThresholdProfile& a, const ThresholdProfile& b) {
    double gap = 0.0;
    for (int m = a.m_low; m <= a.m_high; ++m) {
        if (std::isfinite(a.p1(m))) gap = std::max(gap, std::abs(a.p1(m) - b.p1(m)));
        if (std::isfinite(a.p2(m))) gap = std::max(gap, std::abs(a.p2(m) - b.p2(m)));
    }
    return gap;
}

struct Loaded {
    EquilibriumSolution solution;
    bool verified = false;
};

/// Equilibrium artifact from the output directory when it was produced by
/// the same game and method; otherwise solves and writes it.
Loaded equilibrium_for(const RunConfig& rc, std::ostream& log) {
    fs::path path = out_dir(rc) / "equilibrium.json";
    if (fs::exists(path)) {
        std::ifstream in(path);
        json j = json::parse(in);
        if (j.value("solve_key", "") == solve_key(rc)) {
            return {solution_from_json(j, rc.game), j.value("verified", false)};
        }
        log << "equilibrium.json was produced by a different game or method; solving again\n";
    }
    auto outcome = solve_game(rc.game, rc.method);
    json j = solution_to_json(rc.game, outcome.solution, outcome.report);
    j["config_hash"] = rc.hash;
    j["solve_key"] = solve_key(rc);
    j["diagnostics"] = outcome.diagnostics;
    write_atomic(path.string(), dump(j));
    write_thresholds_csv(path.parent_path() / "thresholds.csv", rc.game, outcome.solution);
    return {outcome.solution, outcome.report.pass};
}

int report_failure(const RunConfig& rc, const SolveFailed& e, std::ostream& log) {
    json d = e.diagnostics();
    d["config_hash"] = rc.hash;
    d["message"] = e.what();
    fs::path path = out_dir(rc) / "diagnostics.json";
    write_atomic(path.string(), dump(d));
    log << "solve failed: " << e.what() << "\ndiagnostics written to " << path.string() << "\n";
    return kSolveFailure;
}

/// Metric map of one solved sweep point.
std::map<std::string, double> point_metrics(const RunConfig& rc, const SolveOutcome& o, json& notes) {
    std::map<std::string, double> out;
    const GameSpec& g = rc.game;
    for (int m = g.m_low; m <= g.m_high; ++m) {
        if (m < g.m_high) out["s1[" + std::to_string(m) + "]"] = o.solution.profile.p1(m);
        if (m > g.m_low) out["s2[" + std::to_string(m) + "]"] = o.solution.profile.p2(m);
    }
    Fundamentals fg(g.diffusion, g.r);
    try {
        out["V1"] = value_at(g, fg, o.solution, 1, rc.sim.m0, rc.sim.x0);
        out["V2"] = value_at(g, fg, o.solution, 2, rc.sim.m0, rc.sim.x0);
    } catch (const Error& e) {
        notes["value_error"] = e.what();
    }
    out["verified"] = o.report.pass ? 1.0 : 0.0;
    out["residual_norm"] = o.solution.residual_norm;
    try {
        auto chain = build_chain(g, o.solution.profile);
        if (chain.transient()) {
            auto n = expected_switches(chain, g, o.solution.profile, rc.sim.x0, rc.sim.m0);
            out["N1"] = n.n1;
            out["N2"] = n.n2;
            out["T"] = absorption_time(chain, g, o.solution.profile, rc.sim.x0, rc.sim.m0);
        } else {
            auto occ = stationary_occupation(chain);
            for (int m = g.m_low; m <= g.m_high; ++m) out["rho[" + std::to_string(m) + "]"] = occ.rho[g.index(m)];
        }
    } catch (const Error& e) {
        notes["macro_error"] = e.what();
    }
    return out;
}

} // namespace

std::string fmt6(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

SolveOutcome solve_game(const GameSpec& spec, const MethodConfig& method, const EquilibriumSolution* continuation) {
    Fundamentals fg(spec.diffusion, spec.r);
    SolveOutcome out;
    json& diag = out.diagnostics;
    diag = json::object();
    if (continuation) {
        try {
            out.solution = refine_system(spec, fg, *continuation, method.refine);
            diag["scheme"] = "continuation";
        } catch (const Error& e) {
            diag["continuation_error"] = e.what();
            continuation = nullptr;
        }
    }
    if (!continuation) {
        switch (method.scheme) {
        case Scheme::Tatonnement:
            diag["scheme"] = "tatonnement";
            out.solution = refine_from(spec, fg, tatonnement_seed(spec, fg, method, diag), method, "tatonnement", diag);
            break;
        case Scheme::Induction:
            diag["scheme"] = "induction";
            out.solution = refine_from(spec, fg, induction_seed(spec, fg, method, diag), method, "induction", diag);
            break;
        case Scheme::Both: {
            diag["scheme"] = "both";
            std::optional<EquilibriumSolution> a, b;
            std::string why;
            try {
                a = refine_from(spec, fg, tatonnement_seed(spec, fg, method, diag), method, "tatonnement", diag);
            } catch (const SolveFailed& e) {
                why = e.what();
            }
            try {
                b = refine_from(spec, fg, induction_seed(spec, fg, method, diag), method, "induction", diag);
            } catch (const SolveFailed& e) {
                why += (why.empty() ? "" : "; ") + std::string(e.what());
            }
            if (!a && !b) throw SolveFailed(why, diag);
            if (a && b) {
                double gap = max_threshold_gap(a->profile, b->profile);
                diag["scheme_gap"] = gap;
                diag["schemes_agree"] = gap < 1e-6;
            }
            if (a && b) {
                bool take_a = verify(spec, fg, *a).pass || !verify(spec, fg, *b).pass;
                out.solution = take_a ? *a : *b;
                diag["selected"] = take_a ? "tatonnement" : "induction";
            } else {
                out.solution = a ? *a : *b;
                diag["selected"] = a ? "tatonnement" : "induction";
            }
            break;
        }
        }
    }
    diag["newton_iterations"] = out.solution.newton_iterations;
    out.report = verify(spec, fg, out.solution);
    return out;
}

json solution_to_json(const GameSpec& spec, const EquilibriumSolution& sol, const VerificationReport& report) {
    json rows = json::array();
    for (int m = spec.m_low; m <= spec.m_high; ++m) {
        for (int player : {1, 2}) {
            if ((player == 1 && m == spec.m_high) || (player == 2 && m == spec.m_low)) continue;
            double s = player == 1 ? sol.profile.p1(m) : sol.profile.p2(m);
            rows.push_back({{"regime", m},
                            {"player", player},
                            {"threshold", s},
                            {"omega", sol.omega(player, m)},
                            {"nu", sol.nu(player, m)},
                            {"at_kink", sol.at_kink(player, m)},
                            {"display", {{"threshold", fmt6(s)},
                                         {"omega", fmt6(sol.omega(player, m))},
                                         {"nu", fmt6(sol.nu(player, m))}}}});
        }
    }
    Fundamentals fg(spec.diffusion, spec.r);
    auto res = system_residuals(spec, fg, sol);
    std::vector<char> k1 = sol.kink1, k2 = sol.kink2;
    k1.resize(spec.size(), 0);
    k2.resize(spec.size(), 0);
    return {{"game", game_to_json(spec)},
            {"verified", report.pass},
            {"thresholds", rows},
            {"profile", profile_to_json(sol.profile)},
            {"coefficients",
             {{"omega1", sol.omega1},
              {"nu1", sol.nu1},
              {"omega2", sol.omega2},
              {"nu2", sol.nu2},
              {"kink1", std::vector<int>(k1.begin(), k1.end())},
              {"kink2", std::vector<int>(k2.begin(), k2.end())}}},
            {"residuals",
             {{"norm", sol.residual_norm}, {"values", res}, {"newton_iterations", sol.newton_iterations}}},
            {"verification", verification_json(report)}};
}

EquilibriumSolution solution_from_json(const json& j, const GameSpec& spec) {
    try {
        EquilibriumSolution s = EquilibriumSolution::zeros(spec.m_low, spec.m_high);
        s.profile = profile_from_json(j.at("profile"), spec.m_low, spec.m_high);
        const json& c = j.at("coefficients");
        auto vec = [&](const char* key) {
            std::vector<double> v;
            for (const auto& x : c.at(key)) v.push_back(number_from(x));
            if (v.size() != static_cast<std::size_t>(spec.size())) throw ConfigError(std::string(key) + " has the wrong length");
            return v;
        };
        s.omega1 = vec("omega1");
        s.nu1 = vec("nu1");
        s.omega2 = vec("omega2");
        s.nu2 = vec("nu2");
        for (const auto& x : c.at("kink1")) s.kink1.push_back(static_cast<char>(x.get<int>()));
        for (const auto& x : c.at("kink2")) s.kink2.push_back(static_cast<char>(x.get<int>()));
        s.residual_norm = j.at("residuals").at("norm").get<double>();
        s.newton_iterations = j.at("residuals").at("newton_iterations").get<int>();
        return s;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed equilibrium artifact: ") + e.what());
    }
}

int cmd_solve(const RunConfig& rc, std::ostream& log) {
    fs::path dir = out_dir(rc);
    SolveOutcome o;
    try {
        o = solve_game(rc.game, rc.method);
    } catch (const SolveFailed& e) {
        return report_failure(rc, e, log);
    }
    json j = solution_to_json(rc.game, o.solution, o.report);
    j["config_hash"] = rc.hash;
    j["solve_key"] = solve_key(rc);
    j["diagnostics"] = o.diagnostics;
    write_atomic((dir / "equilibrium.json").string(), dump(j));
    write_thresholds_csv(dir / "thresholds.csv", rc.game, o.solution);
    for (int m = rc.game.m_low; m <= rc.game.m_high; ++m) {
        if (m < rc.game.m_high) log << "s1[" << m << "] = " << fmt6(o.solution.profile.p1(m)) << "\n";
        if (m > rc.game.m_low) log << "s2[" << m << "] = " << fmt6(o.solution.profile.p2(m)) << "\n";
    }
    if (!o.report.pass) {
        log << "verification failed:";
        for (const auto& f : o.report.failures()) log << " " << f << ";";
        log << "\nsolution written, marked unverified\n";
        return kVerifyFailure;
    }
    log << "verified, residual " << fmt6(o.solution.residual_norm) << "\n";
    return kOk;
}

int cmd_verify(const RunConfig& rc, std::ostream& log) {
    fs::path path = out_dir(rc) / "equilibrium.json";
    if (!fs::exists(path)) {
        log << "no equilibrium.json in " << rc.output.dir << "; run solve first\n";
        return kConfigError;
    }
    json j;
    {
        std::ifstream in(path);
        j = json::parse(in);
    }
    EquilibriumSolution sol = solution_from_json(j, rc.game);
    Fundamentals fg(rc.game.diffusion, rc.game.r);
    VerificationReport v = verify(rc.game, fg, sol);
    j["verification"] = verification_json(v);
    j["verified"] = v.pass;
    write_atomic(path.string(), dump(j));
    json report = verification_json(v);
    report["config_hash"] = rc.hash;
    write_atomic((path.parent_path() / "verification.json").string(), dump(report));
    for (const auto& c : v.checks)
        if (!c.pass) log << "FAIL " << c.name << ": " << c.detail << "\n";
    log << (v.pass ? "verified" : "not verified") << " (" << v.checks.size() << " checks)\n";
    return v.pass ? kOk : kVerifyFailure;
}

int cmd_macro(const RunConfig& rc, std::ostream& log) {
    Loaded eq;
    try {
        eq = equilibrium_for(rc, log);
    } catch (const SolveFailed& e) {
        return report_failure(rc, e, log);
    }
    if (!eq.verified) log << "warning: the equilibrium is not verified\n";
    const GameSpec& g = rc.game;
    const ThresholdProfile& p = eq.solution.profile;
    ExtendedChain chain;
    try {
        chain = build_chain(g, p);
    } catch (const OutOfOrderThresholds& e) {
        log << e.what() << "\nrun `switchgame simulate` for the occupation of this profile\n";
        return kChainPrecondition;
    }
    json states = json::array();
    for (const auto& s : chain.states) states.push_back(s.label());
    json j = {{"config_hash", rc.hash},
              {"equilibrium_verified", eq.verified},
              {"states", states},
              {"P", chain.P},
              {"xi", chain.xi},
              {"absorbing", {{"low", chain.absorbing_low},
                             {"high", chain.absorbing_high},
                             {"P_low", chain.absorb_prob_low},
                             {"P_high", chain.absorb_prob_high}}}};
    std::ostringstream occ;
    occ << "t_bucket,m,probability,stderr\n";
    if (!chain.transient()) {
        auto o = stationary_occupation(chain);
        j["pi"] = o.Pi;
        json rho = json::object();
        for (int m = g.m_low; m <= g.m_high; ++m) {
            rho[std::to_string(m)] = o.rho[g.index(m)];
            occ << "inf," << m << ',' << fmt6(o.rho[g.index(m)]) << ",0\n";
        }
        j["rho"] = rho;
        log << "rho:";
        for (int m = g.m_low; m <= g.m_high; ++m) log << " " << fmt6(o.rho[g.index(m)]);
        log << "\n";
    } else {
        const double x = rc.sim.x0;
        const int m = rc.sim.m0;
        SwitchCounts n;
        double T;
        try {
            n = expected_switches(chain, g, p, x, m);
            T = absorption_time(chain, g, p, x, m);
        } catch (const DomainError& e) {
            log << e.what() << "\n";
            return kChainPrecondition;
        }
        j["pi"] = nullptr;
        j["start"] = {{"x0", x}, {"m0", m}};
        j["N1"] = n.n1;
        j["N2"] = n.n2;
        j["T"] = T;
        j["display"] = {{"N1", fmt6(n.n1)}, {"N2", fmt6(n.n2)}, {"T", fmt6(T)}};
        if (chain.absorbing_low != chain.absorbing_high) {
            int ma = chain.absorbing_high ? g.m_high : g.m_low;
            for (int k = g.m_low; k <= g.m_high; ++k) occ << "inf," << k << ',' << (k == ma ? 1 : 0) << ",0\n";
        }
        log << "N1 = " << fmt6(n.n1) << ", N2 = " << fmt6(n.n2) << ", T = " << fmt6(T) << "\n";
    }
    fs::path dir = out_dir(rc);
    write_atomic((dir / "chain.json").string(), dump(j));
    write_atomic((dir / "occupation.csv").string(), occ.str());
    return kOk;
}

int cmd_simulate(const RunConfig& rc, std::ostream& log) {
    const GameSpec& g = rc.game;
    ThresholdProfile profile;
    std::optional<EquilibriumSolution> sol;
    std::string source;
    if (rc.profile) {
        profile = *rc.profile;
        source = "config";
    } else {
        try {
            auto eq = equilibrium_for(rc, log);
            sol = eq.solution;
            profile = eq.solution.profile;
            source = eq.verified ? "equilibrium" : "equilibrium (unverified)";
        } catch (const SolveFailed& e) {
            return report_failure(rc, e, log);
        }
    }
    SimConfig cfg = rc.sim;
    cfg.record_path = rc.output.sample_path;
    SimResult r = simulate(g, profile, cfg);

    json rho = json::object();
    for (int m = g.m_low; m <= g.m_high; ++m) rho[std::to_string(m)] = estimate_json(r.rho[g.index(m)]);
    json j = {{"config_hash", rc.hash},
              {"profile_source", source},
              {"profile", profile_to_json(profile)},
              {"sim", {{"x0", cfg.x0}, {"m0", cfg.m0}, {"horizon", cfg.horizon}, {"dt", cfg.dt},
                       {"n_paths", cfg.n_paths}, {"seed", cfg.seed}, {"bridge", cfg.bridge}}},
              {"payoff", {estimate_json(r.payoff[0]), estimate_json(r.payoff[1])}},
              {"switches", {estimate_json(r.switches[0]), estimate_json(r.switches[1])}},
              {"rho", rho},
              {"cascades", r.cascades}};
    if (r.has_absorption)
        j["absorption"] = {{"regime", r.absorbing_regime},
                           {"time", estimate_json(r.absorption_time)},
                           {"absorbed_paths", r.absorbed_paths},
                           {"censored_paths", r.censored_paths}};
    if (sol) {
        Fundamentals fg(g.diffusion, g.r);
        try {
            j["analytic_payoff"] = {value_at(g, fg, *sol, 1, cfg.m0, cfg.x0), value_at(g, fg, *sol, 2, cfg.m0, cfg.x0)};
        } catch (const Error&) {
        }
    }
    std::ostringstream occ;
    occ << "t_bucket,m,probability,stderr\n";
    for (std::size_t b = 0; b < r.bucket_times.size(); ++b)
        for (int m = g.m_low; m <= g.m_high; ++m)
            occ << fmt6(r.bucket_times[b]) << ',' << m << ',' << fmt6(r.bucket_prob[b][g.index(m)].mean) << ','
                << fmt6(r.bucket_prob[b][g.index(m)].se) << '\n';
    fs::path dir = out_dir(rc);
    write_atomic((dir / "simresult.json").string(), dump(j));
    write_atomic((dir / "occupation.csv").string(), occ.str());
    if (rc.output.sample_path) {
        std::ostringstream sp;
        sp << "t,X_t,M_t\n";
        for (const auto& s : r.sample_path) sp << fmt6(s.t) << ',' << fmt6(s.x) << ',' << s.m << '\n';
        write_atomic((dir / "sample_path.csv").string(), sp.str());
    }
    log << "payoff P1 " << fmt6(r.payoff[0].mean) << " (se " << fmt6(r.payoff[0].se) << "), P2 "
        << fmt6(r.payoff[1].mean) << " (se " << fmt6(r.payoff[1].se) << ")\n";
    return kOk;
}

int cmd_sweep(const RunConfig& rc, std::ostream& log) {
    if (!rc.sweep) {
        log << "config has no sweep section\n";
        return kConfigError;
    }
    const SweepConfig& sw = *rc.sweep;
    std::ostringstream csv;
    csv << "point,axis_value,status,metric,value\n";
    json points = json::array();
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    std::optional<EquilibriumSolution> prev;
    int failed = 0;
    for (std::size_t k = 0; k < sw.values.size(); ++k) {
        const double v = sw.values[k];
        json doc = rc.document;
        json note = {{"point", k}, {"axis_value", v}};
        try {
            for (const auto& ptr : sw.axes) {
                json::json_pointer jp(ptr);
                if (!doc.contains(jp)) throw ConfigError("sweep axis " + ptr + " does not exist");
                doc[jp] = v;
            }
            doc.erase("sweep");
            RunConfig point = parse_config(doc);
            SolveOutcome o = solve_game(point.game, point.method, prev ? &*prev : nullptr);
            prev = o.solution;
            std::string status = o.report.pass ? "ok" : "unverified";
            note["status"] = status;
            note["scheme"] = o.diagnostics.value("scheme", "");
            if (!o.report.pass) note["failures"] = o.report.failures();
            for (const auto& [name, value] : point_metrics(point, o, note)) {
                csv << k << ',' << fmt6(v) << ',' << status << ',' << name << ',' << fmt6(value) << '\n';
                series[name].push_back({v, value});
                note["metrics"][name] = value;
            }
            log << "point " << k << " (" << fmt6(v) << "): " << status << "\n";
        } catch (const std::exception& e) {
            ++failed;
            prev.reset();
            note["status"] = "failed";
            note["error"] = e.what();
            csv << k << ',' << fmt6(v) << ",failed,,\n";
            log << "point " << k << " (" << fmt6(v) << "): failed: " << e.what() << "\n";
        }
        points.push_back(note);
    }
    json checks = json::array();
    bool all_pass = true;
    for (const auto& c : sw.checks) {
        const auto& s = series[c.metric];
        json viol = json::array();
        for (std::size_t k = 1; k < s.size(); ++k) {
            double a = s[k - 1].second, b = s[k].second;
            double slack = 1e-8 * std::max(1.0, std::abs(a));
            if (c.increasing ? b < a - slack : b > a + slack)
                viol.push_back({{"from", s[k - 1].first}, {"to", s[k].first}, {"values", {a, b}}});
        }
        bool pass = s.size() >= 2 && viol.empty();
        all_pass = all_pass && pass;
        checks.push_back({{"metric", c.metric},
                          {"direction", c.increasing ? "nondecreasing" : "nonincreasing"},
                          {"points", s.size()},
                          {"pass", pass},
                          {"violations", viol}});
        log << "monotone " << c.metric << " " << (c.increasing ? "nondecreasing" : "nonincreasing") << ": "
            << (pass ? "pass" : "FAIL") << " over " << s.size() << " points\n";
    }
    json diag = {{"config_hash", rc.hash}, {"axis", sw.axes}, {"failed_points", failed},
                 {"points", points}, {"monotonicity", checks}};
    fs::path dir = out_dir(rc);
    write_atomic((dir / "sweep.csv").string(), csv.str());
    write_atomic((dir / "sweep_diagnostics.json").string(), dump(diag));
    if (failed == static_cast<int>(sw.values.size())) return kSolveFailure;
    return all_pass ? kOk : kVerifyFailure;
}

int run(int argc, char** argv, std::ostream& log) {
    CLI::App app{"Threshold equilibria of two-player stochastic switching games"};
    app.require_subcommand(1);
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    std::map<std::string, int (*)(const RunConfig&, std::ostream&)> commands = {
        {"solve", cmd_solve}, {"verify", cmd_verify}, {"macro", cmd_macro},
        {"simulate", cmd_simulate}, {"sweep", cmd_sweep}};
    const std::map<std::string, std::string> help = {
        {"solve", "compute and verify an equilibrium"},
        {"verify", "re-run the verification of a stored equilibrium"},
        {"macro", "extended-chain analytics of the equilibrium"},
        {"simulate", "Monte Carlo run of a threshold profile"},
        {"sweep", "solve over a parameter grid"}};
    std::map<std::string, CLI::Option*> seed_opts;
    for (const auto& [name, fn] : commands) {
        auto* sub = app.add_subcommand(name, help.at(name));
        sub->add_option("--config", config, "config file")->required();
        sub->add_option("--out", out, "output directory");
        seed_opts[name] = sub->add_option("--seed", seed, "simulation seed");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }
    std::string name = app.get_subcommands().front()->get_name();
    try {
        std::optional<std::uint64_t> s;
        if (seed_opts[name]->count()) s = seed;
        RunConfig rc = load_config(config, s);
        if (!out.empty()) rc.output.dir = out;
        return commands.at(name)(rc, log);
    } catch (const ConfigError& e) {
        log << e.what() << "\n";
        return kConfigError;
    } catch (const Error& e) {
        log << e.what() << "\n";
        return kSolveFailure;
    }
}

} // namespace switchgame::cli
