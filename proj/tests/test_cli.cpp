#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("MSPDE_CLI_PATH");
    REQUIRE(p != nullptr);
    return p;
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd =
        cli_path() + " " + args + " > " + log.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

fs::path sandbox() {
    const fs::path dir = fs::temp_directory_path() / "mspde_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_config(const fs::path& path, nlohmann::json overrides = {}) {
    nlohmann::json j = {
        {"grid", {{"n", 16}, {"d", 2}, {"pad_factor", 2}}},
        {"physics", {{"mu", 1.0}, {"beta", 0.5}, {"p", 2.0}, {"r", 4.0}}},
        {"noise",
         {{"kind", "additive_diagonal"},
          {"k_max", 4},
          {"c_decay", 0.5},
          {"a", 1.0},
          {"b", 0.0}}},
        {"time", {{"T", 0.02}, {"dt", 0.001}}},
        {"ldp",
         {{"eps_list", {0.5, 0.4}},
          {"delta", 1e-4},
          {"M", 2.0},
          {"n_paths", 40}}},
        {"output", {{"dir", (path.parent_path() / "out").string()},
                    {"formats", {"csv", "bin"}}}},
        {"seed", 7},
        {"init", {{"kind", "random"}, {"amplitude", 0.3}, {"decay", 3.0}}},
        {"checks", {{"n_samples", 120}, {"tol", 1e-9}}},
        {"varadhan",
         {{"t_list", {0.5}}, {"rho1", 0.0}, {"rho2", 0.5}, {"offset", 0.1}}}};
    for (auto& [k, v] : overrides.items()) {
        for (auto& [k2, v2] : v.items()) j[k][k2] = v2;
    }
    std::ofstream(path) << j.dump(2) << "\n";
}

}  // namespace

TEST_CASE("simulate is byte-identical across reruns and worker counts") {
    auto dir = sandbox();
    write_config(dir / "config.json");
    const std::string base = "--config " + (dir / "config.json").string();

    REQUIRE(run_cli(base + " --out " + (dir / "a").string() + " simulate",
                    dir / "log_a.txt") == 0);
    REQUIRE(run_cli(base + " --out " + (dir / "b").string() +
                        " --workers 3 simulate",
                    dir / "log_b.txt") == 0);
    REQUIRE(slurp(dir / "a" / "trajectory.csv") ==
            slurp(dir / "b" / "trajectory.csv"));
    REQUIRE(slurp(dir / "a" / "trajectory.bin") ==
            slurp(dir / "b" / "trajectory.bin"));
    REQUIRE(!slurp(dir / "a" / "trajectory.bin").empty());

    // manifests agree except for wall time, worker cap, and the output dir
    auto ma = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
    auto mb = nlohmann::json::parse(slurp(dir / "b" / "manifest.json"));
    for (auto* m : {&ma, &mb}) {
        m->erase("wall_time_seconds");
        m->erase("workers");
        (*m)["config"]["output"].erase("dir");
    }
    REQUIRE(ma == mb);
    REQUIRE(ma["tool_version"] == "0.1.0");
}

TEST_CASE("missing config fields produce a structured error and exit 2") {
    auto dir = sandbox();
    nlohmann::json j = {
        {"grid", {{"d", 2}}},  // n missing
        {"physics", {{"mu", 1.0}, {"beta", 0.5}, {"p", 2.0}, {"r", 4.0}}},
        {"noise",
         {{"kind", "additive_diagonal"}, {"k_max", 4}, {"c_decay", 0.5}}},
        {"time", {{"T", 0.02}, {"dt", 0.001}}}};
    std::ofstream(dir / "bad.json") << j.dump(2);
    const int rc = run_cli("--config " + (dir / "bad.json").string() +
                               " simulate",
                           dir / "log.txt");
    REQUIRE(rc == 2);
    REQUIRE(slurp(dir / "log.txt").find("grid.n") != std::string::npos);
}

TEST_CASE("verify-inequalities exits 0 at the r = 4 boundary") {
    auto dir = sandbox();
    write_config(dir / "config.json");  // mu = 1, beta = 0.5, r = 4
    const int rc = run_cli("--config " + (dir / "config.json").string() +
                               " --out " + (dir / "v").string() +
                               " verify-inequalities",
                           dir / "log.txt");
    REQUIRE(rc == 0);
    auto checks = nlohmann::json::parse(slurp(dir / "v" / "checks.json"));
    REQUIRE(checks.is_array());
    bool saw_global = false;
    for (const auto& c : checks) {
        REQUIRE(c["pass"].get<bool>());
        if (c["name"].get<std::string>().rfind("global_monotonicity", 0) == 0)
            saw_global = true;
    }
    REQUIRE(saw_global);
    REQUIRE(!slurp(dir / "v" / "checks.csv").empty());
}

TEST_CASE("validate-noise reports hypothesis constants") {
    auto dir = sandbox();
    write_config(dir / "config.json",
                 {{"noise", {{"kind", "projected_multiplicative"}, {"b", 0.5}}}});
    const int rc = run_cli("--config " + (dir / "config.json").string() +
                               " --out " + (dir / "n").string() +
                               " validate-noise --samples 150",
                           dir / "log.txt");
    REQUIRE(rc == 0);
    auto rep = nlohmann::json::parse(slurp(dir / "n" / "noise_report.json"));
    REQUIRE(rep["pass"].get<bool>());
    REQUIRE(rep["entries"].size() == 5);
}

TEST_CASE("rate-function round trip via a control file") {
    auto dir = sandbox();
    write_config(dir / "config.json");
    {
        std::ofstream c(dir / "control.csv");
        c << "t,h_1,h_2,h_3,h_4\n";
        c << "0,0,0,0,0\n";
        c << "0.5,0.5,-0.25,0.1,0\n";
        c << "1,1,0,0.3,-0.2\n";
    }
    const int rc = run_cli("--config " + (dir / "config.json").string() +
                               " --out " + (dir / "r").string() +
                               " rate-function --control " +
                               (dir / "control.csv").string(),
                           dir / "log.txt");
    REQUIRE(rc == 0);
    auto j = nlohmann::json::parse(slurp(dir / "r" / "rate.json"));
    REQUIRE(j["rate_finite"].get<bool>());
    REQUIRE(j["abs_diff"].get<double>() <= 1e-8);
}

TEST_CASE("ldp-scan and varadhan emit the pinned CSV schema") {
    auto dir = sandbox();
    write_config(dir / "config.json",
                 {{"init", {{"kind", "zero"}}},
                  {"noise", {{"kind", "projected_multiplicative"}, {"b", 0.5}}}});
    const std::string base = "--config " + (dir / "config.json").string();
    REQUIRE(run_cli(base + " --out " + (dir / "l").string() + " ldp-scan",
                    dir / "log1.txt") == 0);
    const std::string gap = slurp(dir / "l" / "gap.csv");
    REQUIRE(gap.rfind("eps,n,hits,p_hat,ci_lo,ci_hi,eps_log_p\n", 0) == 0);
    REQUIRE(!slurp(dir / "l" / "exit.csv").empty());

    REQUIRE(run_cli(base + " --out " + (dir / "w").string() + " varadhan",
                    dir / "log2.txt") == 0);
    REQUIRE(slurp(dir / "w" / "varadhan.csv")
                .rfind("eps,n,hits,p_hat,ci_lo,ci_hi,eps_log_p\n", 0) == 0);
}

TEST_CASE("--set overrides config fields") {
    auto dir = sandbox();
    write_config(dir / "config.json");
    const int rc = run_cli("--config " + (dir / "config.json").string() +
                               " --set time.T=0.004 --out " +
                               (dir / "s").string() + " simulate",
                           dir / "log.txt");
    REQUIRE(rc == 0);
    const std::string log = slurp(dir / "log.txt");
    REQUIRE(log.find("simulate: 4 steps") != std::string::npos);

    // an override that breaks validation is a config error
    const int rc2 = run_cli("--config " + (dir / "config.json").string() +
                                " --set grid.n=13 simulate",
                            dir / "log2.txt");
    REQUIRE(rc2 == 2);
}

TEST_CASE("environment seed is the lowest-priority source") {
    auto dir = sandbox();
    nlohmann::json no_seed_overrides;
    write_config(dir / "config.json");
    // drop the seed from the config
    auto j = nlohmann::json::parse(slurp(dir / "config.json"));
    j.erase("seed");
    std::ofstream(dir / "noseed.json") << j.dump(2);

    const std::string base = "--config " + (dir / "noseed.json").string();
    const std::string env = "MONOTONE_SPDE_SEED=99 ";
    const std::string cmd1 = env + cli_path() + " " + base + " --out " +
                             (dir / "e1").string() + " simulate > " +
                             (dir / "l1").string() + " 2>&1";
    const std::string cmd2 = env + cli_path() + " " + base + " --seed 99 --out " +
                             (dir / "e2").string() + " simulate > " +
                             (dir / "l2").string() + " 2>&1";
    REQUIRE(WEXITSTATUS(std::system(cmd1.c_str())) == 0);
    REQUIRE(WEXITSTATUS(std::system(cmd2.c_str())) == 0);
    REQUIRE(slurp(dir / "e1" / "trajectory.csv") ==
            slurp(dir / "e2" / "trajectory.csv"));
}

TEST_CASE("numerical blow-up exits with code 3") {
    auto dir = sandbox();
    write_config(dir / "config.json",
                 {{"init", {{"amplitude", 1e150}}},
                  {"physics", {{"p", 3.0}}}});
    const int rc = run_cli("--config " + (dir / "config.json").string() +
                               " --out " + (dir / "x").string() + " simulate",
                           dir / "log.txt");
    REQUIRE(rc == 3);
    REQUIRE(slurp(dir / "log.txt").find("numerical failure") !=
            std::string::npos);
}
