// Command-line driver: simulation, inequality certification, energy audit,
// and the small-time large-deviation estimators, with reproducible-run
// manifests. Exit codes: 0 success, 2 config error, 3 numerical failure,
// 4 inequality/hypothesis violation.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <mspde/io.hpp>

using namespace mspde;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitViolation = 4;

struct CliState {
    std::string config_path;
    std::vector<std::string> overrides;  // section.field=json_value
    std::optional<std::uint64_t> seed_flag;
    unsigned workers = default_workers();
    std::string out_dir_flag;
    std::string control_path;
    std::size_t noise_samples = 1000;
    bool run_canaries = false;
};

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<config>", "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("<config>", e.what());
    }
    return j;
}

void apply_override(nlohmann::json& j, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
        throw ConfigError("<override>", "expected section.field=value: " + spec);
    const std::string key = spec.substr(0, eq);
    const std::string value = spec.substr(eq + 1);
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(value);
    } catch (...) {
        parsed = value;  // bare strings allowed
    }
    nlohmann::json* cursor = &j;
    std::size_t start = 0;
    for (;;) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(
            start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty())
            throw ConfigError("<override>", "bad key: " + key);
        if (dot == std::string::npos) {
            (*cursor)[part] = parsed;
            return;
        }
        cursor = &(*cursor)[part];
        start = dot + 1;
    }
}

RunConfig load_config(const CliState& st) {
    nlohmann::json j = load_json(st.config_path);
    for (const auto& ov : st.overrides) apply_override(j, ov);
    RunConfig cfg = parse_config(j);
    if (!st.out_dir_flag.empty()) cfg.output_dir = st.out_dir_flag;
    return cfg;
}

std::uint64_t resolve_seed(const CliState& st, const RunConfig& cfg) {
    if (st.seed_flag) return *st.seed_flag;
    if (cfg.seed) return *cfg.seed;
    if (const char* env = std::getenv("MONOTONE_SPDE_SEED"))
        return std::strtoull(env, nullptr, 10);
    return 1;
}

class RunWriter {
  public:
    RunWriter(const RunConfig& cfg, std::uint64_t seed, unsigned workers)
        : cfg_(cfg), seed_(seed), workers_(workers),
          start_(std::chrono::steady_clock::now()) {}

    void write(const std::string& name, const std::string& content) {
        atomic_write(fs::path(cfg_.output_dir) / name, content);
        outputs_.push_back(name);
    }

    void finish() {
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start_)
                .count();
        auto manifest = make_manifest(cfg_, seed_, workers_, outputs_, wall);
        atomic_write(fs::path(cfg_.output_dir) / "manifest.json",
                     manifest.dump(2) + "\n");
    }

  private:
    const RunConfig& cfg_;
    std::uint64_t seed_;
    unsigned workers_;
    std::vector<std::string> outputs_;
    std::chrono::steady_clock::time_point start_;
};

bool wants_format(const RunConfig& cfg, const std::string& f) {
    return std::find(cfg.output_formats.begin(), cfg.output_formats.end(), f) !=
           cfg.output_formats.end();
}

int cmd_simulate(const CliState& st) {
    RunConfig cfg = load_config(st);
    const std::uint64_t seed = resolve_seed(st, cfg);
    RunWriter out(cfg, seed, st.workers);
    auto sim = cfg.make_sim();
    auto u0 = cfg.make_initial_field(seed);
    auto traj = simulate_path(u0, sim, seed);
    if (wants_format(cfg, "csv"))
        out.write("trajectory.csv", trajectory_csv(traj, cfg.physics));
    if (wants_format(cfg, "bin"))
        out.write("trajectory.bin", field_dump(traj, sim.noise.k_max()));
    out.finish();
    std::cout << "simulate: " << traj.increments.size() << " steps, |u(T)|_H = "
              << fmt_double(norm_h(traj.fields.back())) << "\n";
    return kExitOk;
}

int cmd_verify_inequalities(const CliState& st) {
    RunConfig cfg = load_config(st);
    const std::uint64_t seed = resolve_seed(st, cfg);
    RunWriter out(cfg, seed, st.workers);

    SuiteConfig suite;
    suite.grid = cfg.grid;
    suite.n_samples = cfg.checks_n_samples;
    suite.seed = seed;
    suite.tol = cfg.checks_tol;
    suite.workers = st.workers;

    PhysParams par = cfg.physics;
    par.d = cfg.grid.d;
    const auto regime = par.regime();

    std::vector<CheckReport> reports;
    reports.push_back(run_coercivity_check(suite, par.p));
    reports.push_back(run_a_monotonicity_check(suite, par.p));
    reports.push_back(run_c_monotonicity_check(suite, par.r));
    reports.push_back(run_c_lipschitz_check(suite, par.r));
    if (par.r > 4)
        reports.push_back(run_b_interpolation_check(suite, par.r));
    if (regime == MonotonicityRegime::Global) {
        reports.push_back(run_global_monotonicity_check(suite, par));
    } else if (regime == MonotonicityRegime::Local) {
        auto gn = estimate_gn_constant(cfg.grid, par.p, 64, 400, seed);
        reports.push_back(
            run_local_monotonicity_check(suite, par, 1.5 * gn.constant));
    }
    {
        SuiteConfig hemi = suite;
        hemi.n_samples = std::max<std::size_t>(1, suite.n_samples / 100);
        reports.push_back(run_hemicontinuity_check(
            hemi, par, {0.5, 0.25, 0.125, 0.0625, 0.03125}));
    }

    nlohmann::json jreports = nlohmann::json::array();
    for (const auto& r : reports) jreports.push_back(check_report_json(r));

    if (st.run_canaries) {
        SuiteConfig canary_cfg = suite;
        canary_cfg.n_samples = std::min<std::size_t>(suite.n_samples, 2000);
        auto canaries = run_canary_catalog(canary_cfg);
        nlohmann::json jc = nlohmann::json::array();
        for (const auto& c : canaries)
            jc.push_back({{"name", c.name},
                          {"violation_fraction", c.violation_fraction},
                          {"samples", c.samples},
                          {"expected_feasible", c.expected_feasible},
                          {"tripped", c.tripped()}});
        out.write("canaries.json", jc.dump(2) + "\n");
    }

    out.write("checks.json", jreports.dump(2) + "\n");
    out.write("checks.csv", checks_csv(reports));
    out.finish();

    std::size_t violations = 0;
    for (const auto& r : reports) {
        std::cout << (r.pass ? "pass " : "FAIL ") << r.name
                  << "  worst_margin=" << fmt_double(r.worst_margin)
                  << "  violations=" << r.violations << "/" << r.samples
                  << "\n";
        violations += r.violations;
    }
    return violations == 0 ? kExitOk : kExitViolation;
}

int cmd_energy_audit(const CliState& st) {
    RunConfig cfg = load_config(st);
    const std::uint64_t seed = resolve_seed(st, cfg);
    RunWriter out(cfg, seed, st.workers);
    auto sim = cfg.make_sim();
    auto u0 = cfg.make_initial_field(seed);

    std::vector<EnergyBudget> budgets(cfg.ldp_n_paths);
    parallel_for(cfg.ldp_n_paths, st.workers, [&](std::size_t i) {
        EnergyAuditor aud(u0, sim.params, sim.noise, sim.forcing, sim.dt);
        run_path(u0, sim, seed, i, 1.0, true, true, nullptr, nullptr,
                 [&](std::size_t s, double, const SpectralField& u,
                     const std::vector<double>& dW) { aud.on_step(s, u, dW); });
        budgets[i] = aud.finish();
    });
    out.write("budget.csv", budget_csv(budgets));

    double mres = 0, mmart = 0;
    for (const auto& b : budgets) {
        mres += b.residual;
        mmart += b.martingale_total;
    }
    mres /= budgets.size();
    mmart /= budgets.size();
    double vres = 0, vmart = 0;
    for (const auto& b : budgets) {
        vres += (b.residual - mres) * (b.residual - mres);
        vmart += (b.martingale_total - mmart) * (b.martingale_total - mmart);
    }
    const double n = static_cast<double>(budgets.size());
    nlohmann::json summary{
        {"n_paths", budgets.size()},
        {"residual_mean", mres},
        {"residual_se", std::sqrt(vres / std::max(1.0, n - 1) / n)},
        {"martingale_mean", mmart},
        {"martingale_se", std::sqrt(vmart / std::max(1.0, n - 1) / n)}};
    out.write("budget_summary.json", summary.dump(2) + "\n");
    out.finish();
    std::cout << "energy-audit: residual mean " << fmt_double(mres)
              << ", martingale mean " << fmt_double(mmart) << "\n";
    return kExitOk;
}

int cmd_ldp_scan(const CliState& st) {
    RunConfig cfg = load_config(st);
    const std::uint64_t seed = resolve_seed(st, cfg);
    RunWriter out(cfg, seed, st.workers);
    auto sim = cfg.make_sim();
    auto u0 = cfg.make_initial_field(seed);

    auto gap = estimate_equivalence_gap(cfg.ldp_eps_list, cfg.ldp_delta,
                                        cfg.ldp_n_paths, u0, sim, seed,
                                        st.workers);
    out.write("gap.csv", ldp_csv(gap));
    auto exit_est = estimate_energy_exit(cfg.ldp_eps_list, cfg.ldp_M,
                                         cfg.ldp_n_paths, u0, sim, seed,
                                         st.workers);
    out.write("exit.csv", ldp_csv(exit_est));
    out.finish();
    for (const auto& r : gap.rows)
        std::cout << "gap eps=" << fmt_double(r.eps)
                  << " p=" << fmt_double(r.p_hat)
                  << (r.defined
                          ? " eps_log_p=" + fmt_double(r.log_scaled)
                          : std::string(" eps_log_p=undefined (no hits)"))
                  << "\n";
    return kExitOk;
}

ControlPath load_control_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<control>", "cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError("<control>", "empty control file");
    std::vector<double> times;
    std::vector<std::vector<double>> nodes;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() < 2)
            throw ConfigError("<control>", "row needs t plus >= 1 component");
        times.push_back(row.front());
        nodes.emplace_back(row.begin() + 1, row.end());
    }
    if (nodes.size() < 2)
        throw ConfigError("<control>", "need at least two nodes");
    for (const auto& rw : nodes)
        if (rw.size() != nodes.front().size())
            throw ConfigError("<control>", "ragged rows");
    if (std::abs(times.front()) > 1e-12)
        throw ConfigError("<control>", "first node must be at t = 0");
    for (double h : nodes.front())
        if (h != 0.0) throw ConfigError("<control>", "h(0) must vanish");

    ControlPath h;
    h.T = times.back();
    const double dt = times[1] - times[0];
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        if (std::abs(times[i + 1] - times[i] - dt) > 1e-9 * std::max(1.0, h.T))
            throw ConfigError("<control>", "time grid must be uniform");
        std::vector<double> hd(nodes[i].size());
        for (std::size_t k = 0; k < hd.size(); ++k)
            hd[k] = (nodes[i + 1][k] - nodes[i][k]) / dt;
        h.hdot.push_back(std::move(hd));
    }
    return h;
}

int cmd_rate_function(const CliState& st) {
    RunConfig cfg = load_config(st);
    const std::uint64_t seed = resolve_seed(st, cfg);
    RunWriter out(cfg, seed, st.workers);
    auto noise = cfg.make_noise();
    auto u0 = cfg.make_initial_field(seed);
    auto h = load_control_csv(st.control_path);
    if (h.k_max() != noise.k_max())
        throw ConfigError("<control>",
                          "control width " + std::to_string(h.k_max()) +
                              " does not match noise.k_max " +
                              std::to_string(noise.k_max()));
    auto path = skeleton_solve(h, u0, noise, cfg.time_dt);
    const double action = action_functional(h);
    auto rate = rate_function_diagonal(path, h.T, u0, noise);
    nlohmann::json j{{"action", action},
                     {"rate_finite", rate.finite},
                     {"rate", rate.finite ? rate.value : 0.0},
                     {"abs_diff",
                      rate.finite ? std::abs(rate.value - action) : -1.0}};
    if (!rate.reason.empty()) j["reason"] = rate.reason;
    out.write("rate.json", j.dump(2) + "\n");
    out.finish();
    std::cout << "rate-function: action=" << fmt_double(action);
    if (rate.finite)
        std::cout << " rate=" << fmt_double(rate.value)
                  << " |diff|=" << fmt_double(std::abs(rate.value - action));
    else
        std::cout << " rate=+inf (" << rate.reason << ")";
    std::cout << "\n";
    return kExitOk;
}

int cmd_varadhan(const CliState& st) {
    RunConfig cfg = load_config(st);
    const std::uint64_t seed = resolve_seed(st, cfg);
    RunWriter out(cfg, seed, st.workers);
    auto sim = cfg.make_sim();
    auto u0 = cfg.make_initial_field(seed);
    SpectralField center2 = u0;
    {
        std::vector<double> w(sim.noise.k_max(), 0.0);
        w[0] = cfg.varadhan_offset / (sim.noise.modes[0].c * sim.noise.a);
        sim.noise.add_noise(center2, u0, w, 1.0);
    }
    auto est = estimate_varadhan(cfg.varadhan_t_list, u0, cfg.varadhan_rho1,
                                 center2, cfg.varadhan_rho2, cfg.ldp_n_paths,
                                 sim, seed, st.workers);
    out.write("varadhan.csv", ldp_csv(est));
    out.finish();
    for (const auto& r : est.rows)
        std::cout << "t=" << fmt_double(r.eps) << " p=" << fmt_double(r.p_hat)
                  << (r.defined ? " 2t_log_p=" + fmt_double(r.log_scaled)
                                : std::string(" 2t_log_p=undefined"))
                  << "\n";
    return kExitOk;
}

int cmd_validate_noise(const CliState& st) {
    RunConfig cfg = load_config(st);
    const std::uint64_t seed = resolve_seed(st, cfg);
    RunWriter out(cfg, seed, st.workers);
    auto noise = cfg.make_noise();
    auto rep = validate_hypotheses(noise, st.noise_samples, cfg.physics.p,
                                   cfg.physics.r, seed);
    nlohmann::json j;
    j["pass"] = rep.pass;
    j["samples"] = st.noise_samples;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : rep.entries)
        j["entries"].push_back({{"hypothesis", e.name},
                                {"empirical", e.empirical},
                                {"declared", e.declared},
                                {"pass", e.pass}});
    out.write("noise_report.json", j.dump(2) + "\n");
    out.finish();
    for (const auto& e : rep.entries)
        std::cout << (e.pass ? "pass " : "FAIL ") << e.name
                  << "  empirical=" << fmt_double(e.empirical)
                  << "  declared=" << fmt_double(e.declared) << "\n";
    if (!rep.pass) {
        std::cerr << "hypothesis violated: " << rep.first_failure() << "\n";
        return kExitViolation;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CliState st;
    CLI::App app{"pseudo-spectral laboratory for stochastic "
                 "shear-thickening flow with damping"};
    app.require_subcommand(1);

    app.add_option("--config", st.config_path, "JSON config path")->required();
    app.add_option("--seed", st.seed_flag,
                   "master seed (overrides config and MONOTONE_SPDE_SEED)");
    app.add_option("--workers", st.workers, "worker thread cap");
    app.add_option("--out", st.out_dir_flag, "output directory override");
    app.add_option("--set", st.overrides,
                   "config override section.field=value (repeatable)");

    auto* simulate = app.add_subcommand("simulate", "integrate one path");
    auto* verify = app.add_subcommand("verify-inequalities",
                                      "randomized inequality certification");
    verify->add_flag("--canaries", st.run_canaries,
                     "also run the falsified-constant canary catalog");
    auto* audit =
        app.add_subcommand("energy-audit", "ensemble balance statistics");
    auto* ldp = app.add_subcommand("ldp-scan",
                                   "equivalence-gap and energy-exit scans");
    auto* rate = app.add_subcommand("rate-function",
                                    "skeleton/action/rate round trip");
    rate->add_option("--control", st.control_path,
                     "control CSV (t, h_1..h_K node values)")
        ->required();
    auto* vara = app.add_subcommand("varadhan", "two-ball small-time scan");
    auto* noise = app.add_subcommand("validate-noise",
                                     "hypothesis constants report");
    noise->add_option("--samples", st.noise_samples, "sample count");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(st);
        if (verify->parsed()) return cmd_verify_inequalities(st);
        if (audit->parsed()) return cmd_energy_audit(st);
        if (ldp->parsed()) return cmd_ldp_scan(st);
        if (rate->parsed()) return cmd_rate_function(st);
        if (vara->parsed()) return cmd_varadhan(st);
        if (noise->parsed()) return cmd_validate_noise(st);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IntegrationFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
