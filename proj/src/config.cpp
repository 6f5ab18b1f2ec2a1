#include "switchgame/config.hpp"

#include "switchgame/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace switchgame {

namespace {

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

double number(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + "." + key + " is required");
    const json& v = j.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where + "." + key + " must be finite");
    return x;
}

double number_or(const json& j, const std::string& key, double fallback, const std::string& where) {
    return j.contains(key) ? number(j, key, where) : fallback;
}

int integer(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + "." + key + " is required");
    if (!j.at(key).is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
    return j.at(key).get<int>();
}

int integer_or(const json& j, const std::string& key, int fallback, const std::string& where) {
    return j.contains(key) ? integer(j, key, where) : fallback;
}

bool flag_or(const json& j, const std::string& key, bool fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) throw ConfigError(where + "." + key + " must be true or false");
    return j.at(key).get<bool>();
}

std::string text_or(const json& j, const std::string& key, const std::string& fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_string()) throw ConfigError(where + "." + key + " must be a string");
    return j.at(key).get<std::string>();
}

std::vector<double> ladder(const json& j, const std::string& key, std::size_t n) {
    const std::string where = "game." + key;
    if (!j.contains(key) || !j.at(key).is_array()) throw ConfigError(where + " must be an array");
    std::vector<double> out;
    for (const auto& v : j.at(key)) {
        if (!v.is_number()) throw ConfigError(where + " must contain numbers");
        out.push_back(v.get<double>());
    }
    if (out.size() != n)
        throw ConfigError(where + " has " + std::to_string(out.size()) + " entries for " + std::to_string(n) +
                          " regimes");
    return out;
}

CostFunction cost_from_json(const json& j, const std::string& where) {
    allow_keys(j, where, {"kind", "c", "beta", "sign"});
    std::string kind = text_or(j, "kind", "", where);
    if (kind == "exponential") {
        double sign = number(j, "sign", where);
        if (sign != 1.0 && sign != -1.0) throw ConfigError(where + ".sign must be +1 or -1");
        return CostFunction::exponential(number(j, "c", where), number(j, "beta", where), sign);
    }
    if (kind == "hinge") return CostFunction::hinge(number(j, "c", where), number(j, "beta", where));
    if (kind == "constant") return CostFunction::constant(number(j, "c", where));
    throw ConfigError(where + ".kind must be exponential, hinge or constant");
}

std::vector<CostFunction> cost_table(const json& j, const std::string& key, std::size_t n) {
    const std::string where = "game." + key;
    if (!j.contains(key)) throw ConfigError(where + " is required");
    const json& c = j.at(key);
    if (c.is_object()) return std::vector<CostFunction>(n, cost_from_json(c, where));
    if (!c.is_array() || c.size() != n) throw ConfigError(where + " must be one cost or one per regime");
    std::vector<CostFunction> out;
    for (std::size_t k = 0; k < n; ++k) out.push_back(cost_from_json(c[k], where + "[" + std::to_string(k) + "]"));
    return out;
}

json cost_to_json(const CostFunction& c) {
    switch (c.kind) {
    case CostFunction::Kind::Exponential: return {{"kind", "exponential"}, {"c", c.c}, {"beta", c.beta}, {"sign", c.sign}};
    case CostFunction::Kind::LinearHinge: return {{"kind", "hinge"}, {"c", c.c}, {"beta", c.beta}};
    case CostFunction::Kind::Constant: break;
    }
    return {{"kind", "constant"}, {"c", c.c}};
}

MethodConfig method_from_json(const json& j) {
    const std::string w = "method";
    allow_keys(j, w, {"scheme", "N", "A", "tol", "anchor", "selection", "refine"});
    MethodConfig m;
    std::string scheme = text_or(j, "scheme", "tatonnement", w);
    if (scheme == "tatonnement") m.scheme = Scheme::Tatonnement;
    else if (scheme == "induction") m.scheme = Scheme::Induction;
    else if (scheme == "both") m.scheme = Scheme::Both;
    else throw ConfigError("method.scheme must be tatonnement, induction or both");
    m.N = integer_or(j, "N", m.N, w);
    m.A = integer_or(j, "A", m.A, w);
    m.tol = number_or(j, "tol", m.tol, w);
    m.anchor = integer_or(j, "anchor", m.anchor, w);
    std::string sel = text_or(j, "selection", "later", w);
    if (sel == "later") m.selection = Selection::Later;
    else if (sel == "sooner") m.selection = Selection::Sooner;
    else throw ConfigError("method.selection must be later or sooner");
    if (j.contains("refine")) {
        const json& r = j.at("refine");
        allow_keys(r, "method.refine", {"max_iterations", "tol"});
        m.refine.max_iterations = integer_or(r, "max_iterations", m.refine.max_iterations, "method.refine");
        m.refine.tol = number_or(r, "tol", m.refine.tol, "method.refine");
    }
    if (m.N < 1) throw ConfigError("method.N must be at least 1");
    if (m.A < 1) throw ConfigError("method.A must be at least 1");
    if (!(m.tol > 0.0)) throw ConfigError("method.tol must be positive");
    return m;
}

SimConfig sim_from_json(const json& j) {
    const std::string w = "sim";
    allow_keys(j, w,
               {"x0", "m0", "horizon", "dt", "n_paths", "seed", "buckets", "bridge", "record_stride", "threads"});
    SimConfig s;
    s.x0 = number_or(j, "x0", s.x0, w);
    s.m0 = integer_or(j, "m0", s.m0, w);
    s.horizon = number_or(j, "horizon", s.horizon, w);
    s.dt = number_or(j, "dt", s.dt, w);
    if (j.contains("n_paths")) {
        if (!j.at("n_paths").is_number_integer()) throw ConfigError("sim.n_paths must be an integer");
        s.n_paths = j.at("n_paths").get<std::int64_t>();
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) throw ConfigError("sim.seed must be a nonnegative integer");
        s.seed = j.at("seed").get<std::uint64_t>();
    }
    s.buckets = integer_or(j, "buckets", s.buckets, w);
    s.bridge = flag_or(j, "bridge", s.bridge, w);
    s.record_stride = integer_or(j, "record_stride", s.record_stride, w);
    int threads = integer_or(j, "threads", 0, w);
    if (threads < 0) throw ConfigError("sim.threads must be nonnegative");
    s.threads = static_cast<unsigned>(threads);
    s.validate();
    return s;
}

SweepConfig sweep_from_json(const json& j) {
    const std::string w = "sweep";
    allow_keys(j, w, {"axis", "values", "from", "to", "count", "monotone"});
    SweepConfig s;
    if (!j.contains("axis")) throw ConfigError("sweep.axis is required");
    const json& a = j.at("axis");
    if (a.is_string()) s.axes.push_back(a.get<std::string>());
    else if (a.is_array())
        for (const auto& p : a) {
            if (!p.is_string()) throw ConfigError("sweep.axis entries must be JSON pointers");
            s.axes.push_back(p.get<std::string>());
        }
    if (s.axes.empty()) throw ConfigError("sweep.axis must name at least one field");
    if (j.contains("values")) {
        for (const auto& v : j.at("values")) {
            if (!v.is_number()) throw ConfigError("sweep.values must contain numbers");
            s.values.push_back(v.get<double>());
        }
    } else {
        double from = number(j, "from", w), to = number(j, "to", w);
        int count = integer(j, "count", w);
        if (count < 2) throw ConfigError("sweep.count must be at least 2");
        for (int k = 0; k < count; ++k) s.values.push_back(from + (to - from) * k / (count - 1));
    }
    if (s.values.empty()) throw ConfigError("sweep grid is empty");
    if (j.contains("monotone")) {
        for (const auto& c : j.at("monotone")) {
            allow_keys(c, "sweep.monotone[]", {"metric", "direction"});
            MonotoneCheck m;
            m.metric = text_or(c, "metric", "", "sweep.monotone[]");
            std::string d = text_or(c, "direction", "", "sweep.monotone[]");
            if (d == "nondecreasing") m.increasing = true;
            else if (d != "nonincreasing") throw ConfigError("sweep.monotone direction must be nonincreasing or nondecreasing");
            s.checks.push_back(m);
        }
    }
    return s;
}

} // namespace

GameSpec game_from_json(const json& j) {
    const std::string w = "game";
    allow_keys(j, w, {"diffusion", "r", "m_low", "m_high", "pi1", "pi2", "cost1", "cost2", "reference_state"});
    GameSpec s;
    if (!j.contains("diffusion")) throw ConfigError("game.diffusion is required");
    const json& d = j.at("diffusion");
    allow_keys(d, "game.diffusion", {"kind", "mu", "sigma", "theta"});
    std::string kind = text_or(d, "kind", "", "game.diffusion");
    double mu = number(d, "mu", "game.diffusion"), sigma = number(d, "sigma", "game.diffusion");
    if (!(sigma > 0.0)) throw ConfigError("game.diffusion.sigma must be positive");
    if (kind == "ou") {
        if (!(mu > 0.0)) throw ConfigError("game.diffusion.mu must be positive for OU");
        s.diffusion = Diffusion::ou(mu, sigma, number_or(d, "theta", 0.0, "game.diffusion"));
    } else if (kind == "gbm") {
        if (d.contains("theta")) throw ConfigError("game.diffusion.theta is not a GBM parameter");
        s.diffusion = Diffusion::gbm(mu, sigma);
    } else {
        throw ConfigError("game.diffusion.kind must be ou or gbm");
    }
    s.r = number(j, "r", w);
    s.m_low = integer(j, "m_low", w);
    s.m_high = integer(j, "m_high", w);
    if (!(s.m_low < s.m_high)) throw ConfigError("regime set needs m_low < m_high");
    std::size_t n = static_cast<std::size_t>(s.size());
    s.pi1 = ladder(j, "pi1", n);
    s.pi2 = ladder(j, "pi2", n);
    s.cost1 = cost_table(j, "cost1", n);
    s.cost2 = cost_table(j, "cost2", n);
    s.reference_state = number_or(j, "reference_state", s.diffusion.kind() == DiffusionKind::GBM ? 1.0 : 0.0, w);
    if (s.diffusion.kind() == DiffusionKind::GBM && !(s.reference_state > 0.0))
        throw ConfigError("game.reference_state must be positive for GBM");
    s.validate();
    return s;
}

json game_to_json(const GameSpec& s) {
    json d;
    if (s.diffusion.kind() == DiffusionKind::OU)
        d = {{"kind", "ou"}, {"mu", s.diffusion.mu()}, {"sigma", s.diffusion.sigma()}, {"theta", s.diffusion.theta()}};
    else
        d = {{"kind", "gbm"}, {"mu", s.diffusion.mu()}, {"sigma", s.diffusion.sigma()}};
    json c1 = json::array(), c2 = json::array();
    for (const auto& c : s.cost1) c1.push_back(cost_to_json(c));
    for (const auto& c : s.cost2) c2.push_back(cost_to_json(c));
    return {{"diffusion", d}, {"r", s.r}, {"m_low", s.m_low}, {"m_high", s.m_high}, {"pi1", s.pi1},
            {"pi2", s.pi2}, {"cost1", c1}, {"cost2", c2}, {"reference_state", s.reference_state}};
}

ThresholdProfile profile_from_json(const json& j, int m_low, int m_high) {
    allow_keys(j, "profile", {"s1", "s2"});
    ThresholdProfile p = ThresholdProfile::sentinels(m_low, m_high);
    for (int player : {1, 2}) {
        std::string key = player == 1 ? "s1" : "s2";
        if (!j.contains(key)) continue;
        const json& t = j.at(key);
        if (!t.is_object()) throw ConfigError("profile." + key + " must map regimes to thresholds");
        for (auto it = t.begin(); it != t.end(); ++it) {
            int m;
            try {
                std::size_t used = 0;
                m = std::stoi(it.key(), &used);
                if (used != it.key().size()) throw std::invalid_argument(it.key());
            } catch (const std::exception&) {
                throw ConfigError("profile." + key + " has a non-integer regime '" + it.key() + "'");
            }
            if (m < m_low || m > m_high) throw ConfigError("profile." + key + " regime " + it.key() + " out of range");
            if (!it.value().is_number()) throw ConfigError("profile." + key + "[" + it.key() + "] must be a number");
            (player == 1 ? p.p1(m) : p.p2(m)) = it.value().get<double>();
        }
    }
    std::string bad = p.admissibility();
    if (!bad.empty()) throw ConfigError("profile is not admissible: " + bad);
    return p;
}

json profile_to_json(const ThresholdProfile& p) {
    json s1 = json::object(), s2 = json::object();
    for (int m = p.m_low; m <= p.m_high; ++m) {
        if (std::isfinite(p.p1(m))) s1[std::to_string(m)] = p.p1(m);
        if (std::isfinite(p.p2(m))) s2[std::to_string(m)] = p.p2(m);
    }
    return {{"s1", s1}, {"s2", s2}};
}

RunConfig parse_config(const json& document) {
    allow_keys(document, "config", {"game", "method", "sim", "output", "sweep", "profile"});
    RunConfig rc;
    rc.document = document;
    rc.hash = config_hash(document);
    if (!document.contains("game")) throw ConfigError("config.game is required");
    rc.game = game_from_json(document.at("game"));
    rc.method = method_from_json(document.value("method", json::object()));
    rc.sim = sim_from_json(document.value("sim", json::object()));
    if (!rc.game.contains(rc.sim.m0)) throw ConfigError("sim.m0 is outside the regime set");
    if (!rc.game.diffusion.in_domain(rc.sim.x0)) throw ConfigError("sim.x0 is outside the state space");
    if (rc.method.scheme != Scheme::Tatonnement && !rc.game.contains(rc.method.anchor))
        throw ConfigError("method.anchor is outside the regime set");
    const json out = document.value("output", json::object());
    allow_keys(out, "output", {"dir", "sample_path"});
    rc.output.dir = text_or(out, "dir", rc.output.dir, "output");
    rc.output.sample_path = flag_or(out, "sample_path", false, "output");
    if (document.contains("sweep")) rc.sweep = sweep_from_json(document.at("sweep"));
    if (document.contains("profile")) rc.profile = profile_from_json(document.at("profile"), rc.game.m_low, rc.game.m_high);
    return rc;
}

RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("cannot parse '" + path + "': " + e.what());
    }
    if (seed) doc["sim"]["seed"] = *seed;
    return parse_config(doc);
}

std::string config_hash(const json& document) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : document.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace switchgame
