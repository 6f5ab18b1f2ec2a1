#include <doctest.h>

#include "switchgame/cli.hpp"
#include "switchgame/config.hpp"
#include "switchgame/errors.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

using namespace switchgame;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = SWITCHGAME_CONFIG_DIR;

json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("switchgame_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path write_config(const fs::path& dir, const json& doc) {
    fs::path p = dir / "config.json";
    std::ofstream(p) << doc.dump(2);
    return p;
}

int run(std::vector<std::string> args, std::string* log = nullptr) {
    args.insert(args.begin(), "switchgame");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream os;
    int code = cli::run(static_cast<int>(argv.size()), argv.data(), os);
    if (log) *log = os.str();
    return code;
}

} // namespace

TEST_CASE("bundled configs parse") {
    for (const char* name : {"ou_case1", "ou_case2", "ou_case3", "ou_case4", "gbm_la", "ou_case2_sooner",
                             "ou_cost_sweep", "gbm_mu_sweep", "gbm_sigma_sweep"}) {
        CAPTURE(name);
        RunConfig rc = load_config((kConfigs / (std::string(name) + ".json")).string());
        CHECK(rc.hash.size() == 16);
        CHECK(game_from_json(game_to_json(rc.game)).pi1 == rc.game.pi1);
    }
}

TEST_CASE("configuration errors exit with code 1") {
    auto dir = scratch("config");
    json doc = read_json(kConfigs / "ou_case1.json");
    doc["game"]["m_high"] = doc["game"]["m_low"];
    std::string log;
    CHECK(run({"solve", "--config", write_config(dir, doc).string(), "--out", dir.string()}, &log) == 1);
    CHECK(log.find("ConfigError") != std::string::npos);

    doc = read_json(kConfigs / "ou_case1.json");
    doc["method"]["sheme"] = "induction";
    CHECK(run({"solve", "--config", write_config(dir, doc).string(), "--out", dir.string()}) == 1);
    CHECK(run({"solve", "--config", (dir / "missing.json").string()}) == 1);
    CHECK(run({"verify", "--config", (kConfigs / "ou_case1.json").string(), "--out", (dir / "empty").string()}) == 1);
}

TEST_CASE("solve writes thresholds and a verified equilibrium") {
    auto dir = scratch("solve");
    CHECK(run({"solve", "--config", (kConfigs / "ou_case1.json").string(), "--out", dir.string()}) == 0);
    std::string csv = read_text(dir / "thresholds.csv");
    CHECK(csv.rfind("regime,player,threshold,omega,nu\n", 0) == 0);
    CHECK(csv.find("0,1,0.948611,") != std::string::npos);
    json eq = read_json(dir / "equilibrium.json");
    CHECK(eq["verified"] == true);
    CHECK(eq["config_hash"].get<std::string>().size() == 16);
    CHECK(eq["verification"]["pass"] == true);
    for (const auto& e : fs::directory_iterator(dir)) CHECK(e.path().string().find(".tmp") == std::string::npos);

    RunConfig rc = load_config((kConfigs / "ou_case1.json").string());
    auto sol = cli::solution_from_json(eq, rc.game);
    CHECK(sol.profile.p1(0) == eq["profile"]["s1"]["0"].get<double>());
    CHECK(run({"verify", "--config", (kConfigs / "ou_case1.json").string(), "--out", dir.string()}) == 0);
}

TEST_CASE("an unverified solution is written and exits with code 3") {
    auto dir = scratch("gbm");
    CHECK(run({"solve", "--config", (kConfigs / "gbm_la.json").string(), "--out", dir.string()}) == 3);
    json eq = read_json(dir / "equilibrium.json");
    CHECK(eq["verified"] == false);
    CHECK(eq["profile"]["s1"]["0"].get<double>() == doctest::Approx(8.9594).epsilon(1e-4));
    CHECK(run({"macro", "--config", (kConfigs / "gbm_la.json").string(), "--out", dir.string()}) == 0);
    json chain = read_json(dir / "chain.json");
    CHECK(chain["N1"].get<double>() - chain["N2"].get<double>() == doctest::Approx(1.0));
    CHECK(chain["equilibrium_verified"] == false);
}

TEST_CASE("solver failures exit with code 2 and leave a diagnostic dump") {
    auto dir = scratch("fail");
    json doc = read_json(kConfigs / "ou_case1.json");
    doc["method"]["refine"] = {{"max_iterations", 1}, {"tol", 1e-300}};
    CHECK(run({"solve", "--config", write_config(dir, doc).string(), "--out", dir.string()}) == 2);
    json d = read_json(dir / "diagnostics.json");
    CHECK(d["error"]["stage"] == "refine");
    CHECK(d.contains("seed"));
}

TEST_CASE("macro on out-of-order thresholds exits with code 4") {
    auto dir = scratch("sooner");
    std::string log;
    CHECK(run({"macro", "--config", (kConfigs / "ou_case2_sooner.json").string(), "--out", dir.string()}, &log) == 4);
    CHECK(log.find("simulate") != std::string::npos);
}

TEST_CASE("simulate is byte-for-byte reproducible for a seed") {
    auto dir = scratch("sim");
    json doc = read_json(kConfigs / "ou_case1.json");
    doc["sim"]["n_paths"] = 300;
    doc["sim"]["horizon"] = 40.0;
    doc["output"]["sample_path"] = true;
    doc["profile"] = {{"s1", {{"-1", 0.566875}, {"0", 0.948611}}}, {"s2", {{"0", -0.948611}, {"1", -0.566875}}}};
    auto cfg = write_config(dir, doc).string();
    CHECK(run({"simulate", "--config", cfg, "--out", (dir / "a").string(), "--seed", "5"}) == 0);
    CHECK(run({"simulate", "--config", cfg, "--out", (dir / "b").string(), "--seed", "5"}) == 0);
    for (const char* f : {"simresult.json", "occupation.csv", "sample_path.csv"})
        CHECK(read_text(dir / "a" / f) == read_text(dir / "b" / f));
    CHECK(read_text(dir / "a" / "occupation.csv").rfind("t_bucket,m,probability,stderr\n", 0) == 0);
    CHECK(read_text(dir / "a" / "sample_path.csv").rfind("t,X_t,M_t\n", 0) == 0);
    CHECK(run({"simulate", "--config", cfg, "--out", (dir / "c").string(), "--seed", "6"}) == 0);
    CHECK(read_text(dir / "a" / "simresult.json") != read_text(dir / "c" / "simresult.json"));
}

TEST_CASE("sweep records failed points and keeps going") {
    auto dir = scratch("sweep");
    json doc = read_json(kConfigs / "ou_cost_sweep.json");
    doc["sweep"].erase("from");
    doc["sweep"].erase("to");
    doc["sweep"].erase("count");
    doc["sweep"]["values"] = {0.3, -1.0, 0.5};
    CHECK(run({"sweep", "--config", write_config(dir, doc).string(), "--out", dir.string()}) == 0);
    json diag = read_json(dir / "sweep_diagnostics.json");
    CHECK(diag["failed_points"] == 1);
    CHECK(diag["points"][1]["status"] == "failed");
    CHECK(diag["points"][2]["status"] == "ok");
    CHECK(diag["monotonicity"][0]["pass"] == true);
    CHECK(read_text(dir / "sweep.csv").rfind("point,axis_value,status,metric,value\n", 0) == 0);
}

TEST_CASE("six significant digits") {
    CHECK(cli::fmt6(0.94861034) == "0.94861");
    CHECK(cli::fmt6(13.16215941) == "13.1622");
    CHECK(cli::fmt6(-std::numeric_limits<double>::infinity()) == "-inf");
}
