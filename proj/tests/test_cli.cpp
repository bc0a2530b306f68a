// Drives the akmc executable end to end.

#include <catch_amalgamated.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    const fs::path log = fs::temp_directory_path() / "akmc_cli_test_stdout.txt";
    const std::string cmd = std::string(AKMC_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream is(log);
    std::stringstream ss;
    ss << is.rdbuf();
    r.out = ss.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("akmc_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("search happy path") {
    const fs::path dir = scratch("search");
    const RunResult r = run("search --potential two-saddle --c 0.2 --beta-hi 2.5 --epsilon 0.05 --seed 42 --out " + dir.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("stopping time") != std::string::npos);
    CHECK(r.out.find("R_tilde=") != std::string::npos);
    CHECK(r.out.find("R_hat=") != std::string::npos);
    for (const char* f : {"events.csv", "trace.csv", "rates.csv", "metadata.json"}) CHECK(fs::exists(dir / f));
    CHECK(slurp(dir / "events.csv").rfind("t_event,pathway\n", 0) == 0);
    CHECK(slurp(dir / "trace.csv").rfind("t,R,R_bar,R_tilde,R_hat", 0) == 0);
    const json meta = json::parse(slurp(dir / "metadata.json"));
    CHECK(meta["seed"] == 42);
    CHECK(meta["config"]["epsilon"] == 0.05);
    CHECK(meta.contains("horizon"));
}

TEST_CASE("search without epsilon is a usage error") {
    const RunResult r = run("search --seed 1 --out " + scratch("noeps").string());
    CHECK(r.code == 2);
    CHECK(r.out.find("epsilon") != std::string::npos);
}

TEST_CASE("usage errors") {
    CHECK(run("").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("search --epsilon 1.5").code == 2);
    CHECK(run("search --epsilon 0.1 --dt -1").code == 2);
    CHECK(run("search --epsilon 0.1 --potential mexican-hat").code == 2);
    const RunResult bad_beta = run("search --epsilon 0.1 --beta-lo 1");
    CHECK(bad_beta.code == 2);
    CHECK(bad_beta.out.find("sde.beta-lo") != std::string::npos);
    CHECK(run("testsystem --replicas 1").code == 2);
    CHECK(run("verify --source magic").code == 2);
    CHECK(run("--help").code == 0);
}

TEST_CASE("runtime errors exit 3") {
    const RunResult r = run("search --max-cycles 1 --out " + scratch("cap").string() + " --epsilon 1e-12");
    CHECK(r.code == 3);
    CHECK(r.out.find("MaxCyclesExceeded") != std::string::npos);
}

TEST_CASE("search is deterministic") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    REQUIRE(run("search --epsilon 0.01 --seed 7 --out " + a.string()).code == 0);
    REQUIRE(run("search --epsilon 0.01 --seed 7 --out " + b.string()).code == 0);
    CHECK(slurp(a / "events.csv") == slurp(b / "events.csv"));
    CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));
}

TEST_CASE("metadata round-trips as a config file") {
    const fs::path a = scratch("rt_a"), b = scratch("rt_b");
    REQUIRE(run("search --epsilon 0.02 --seed 9 --estimator hat --labels geometric --dt 5e-4 --out " + a.string()).code == 0);
    REQUIRE(run("search --config " + (a / "metadata.json").string() + " --out " + b.string()).code == 0);
    CHECK(slurp(a / "events.csv") == slurp(b / "events.csv"));
    CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));
    const json ma = json::parse(slurp(a / "metadata.json"));
    const json mb = json::parse(slurp(b / "metadata.json"));
    CHECK(ma["config"]["estimator"] == mb["config"]["estimator"]);
    CHECK(mb["config"]["dt"] == 5e-4);
}

TEST_CASE("command-line flags override the config file") {
    const fs::path dir = scratch("override");
    fs::create_directories(dir);
    {
        std::ofstream os(dir / "cfg.json");
        os << R"({"epsilon": 0.3, "seed": 5})";
    }
    const fs::path out = dir / "run";
    REQUIRE(run("search --config " + (dir / "cfg.json").string() + " --seed 6 --out " + out.string()).code == 0);
    const json meta = json::parse(slurp(out / "metadata.json"));
    CHECK(meta["seed"] == 6);
    CHECK(meta["config"]["epsilon"] == 0.3);

    {
        std::ofstream os(dir / "bad.json");
        os << R"({"epsilon": 0.3, "replicas": 5})";
    }
    CHECK(run("search --config " + (dir / "bad.json").string()).code == 2);
    {
        std::ofstream os(dir / "broken.json");
        os << "{ not json";
    }
    CHECK(run("search --config " + (dir / "broken.json").string()).code == 2);
    CHECK(run("search --config " + (dir / "missing.json").string()).code == 2);
}

TEST_CASE("testsystem quick mode") {
    const fs::path dir = scratch("testsystem");
    const auto t0 = std::chrono::steady_clock::now();
    const RunResult r = run("testsystem --n 0 --replicas 100 --out " + dir.string());
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    REQUIRE(r.code == 0);
    CHECK(seconds < 10.0);
    REQUIRE(fs::exists(dir / "figure_n0.csv"));
    CHECK(slurp(dir / "figure_n0.csv").rfind("time,exact,chill_1,chill_2\n", 0) == 0);
    CHECK(fs::exists(dir / "metadata.json"));
}

TEST_CASE("testsystem default exponents") {
    const fs::path dir = scratch("testsystem_all");
    REQUIRE(run("testsystem --replicas 50 --grid-points 8 --out " + dir.string()).code == 0);
    for (const char* f : {"figure_n-0.5.csv", "figure_n0.csv", "figure_n0.5.csv"}) CHECK(fs::exists(dir / f));
}

TEST_CASE("rates dump") {
    const RunResult r = run("rates --system test --n 0.5");
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("pathway,barrier,k_lo,k_hi,kappa\n", 0) == 0);
    const RunResult sde = run("rates --system two-saddle");
    REQUIRE(sde.code == 0);
    CHECK(std::count(sde.out.begin(), sde.out.end(), '\n') == 3);
    const fs::path dir = scratch("rates");
    fs::create_directories(dir);
    REQUIRE(run("rates --system double-well --out " + (dir / "dw.csv").string()).code == 0);
    CHECK(slurp(dir / "dw.csv").rfind("pathway,", 0) == 0);
}

TEST_CASE("verify on a direct Poisson source") {
    const fs::path dir = scratch("verify");
    const RunResult r = run("verify --source testsystem --rate-samples 20000 --bound-replicas 2000 --out " + dir.string());
    CHECK(r.code == 0);
    REQUIRE(fs::exists(dir / "report.json"));
    REQUIRE(fs::exists(dir / "bounds.csv"));
    const json report = json::parse(slurp(dir / "report.json"));
    CHECK(report["passed"] == true);
    REQUIRE(report["tests"].is_array());
    CHECK(report["tests"].size() > 5);
    for (const auto& t : report["tests"]) {
        CHECK(t.contains("test"));
        CHECK(t.contains("p_value"));
        CHECK(t.contains("passed"));
    }
}

TEST_CASE("verify negative control fails and is named") {
    const fs::path dir = scratch("verify_neg");
    const RunResult r = run("verify --source testsystem --negative-control --events 2000 --dt 1e-3 --rate-samples 2000 "
                            "--bound-replicas 200 --bootstrap 500 --out " +
                            dir.string());
    CHECK(r.code == 1);
    CHECK(r.out.find("negative_control.ks_exponential") != std::string::npos);
    const json report = json::parse(slurp(dir / "report.json"));
    bool named = false;
    for (const auto& t : report["tests"])
        if (t["group"] == "negative_control" && t["test"] == "ks_exponential" && t["passed"] == false) named = true;
    CHECK(named);
}
