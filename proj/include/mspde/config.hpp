#pragma once

#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "ldp.hpp"

namespace mspde {

struct ConfigError : std::runtime_error {
    ConfigError(const std::string& field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_path(field) {}
    std::string field_path;
};

// Whole-run configuration. The canonical serialized form (sorted keys,
// two-space indent, trailing newline) is normative: parse followed by
// re-serialization is the identity on canonical inputs.
struct RunConfig {
    GridSpec grid;                          // grid.n/d/pad_factor
    PhysParams physics;                     // physics.mu/beta/p/r (d mirrors grid)
    NoiseKind noise_kind = NoiseKind::AdditiveDiagonal;
    int noise_k_max = 4;
    double noise_c_decay = 0.5;
    double noise_a = 1.0;
    double noise_b = 0.0;
    double time_T = 1.0;
    double time_dt = 1e-3;
    std::vector<double> ldp_eps_list{0.2, 0.15, 0.12};
    double ldp_delta = 2e-3;
    double ldp_M = 4.0;
    std::size_t ldp_n_paths = 1000;
    std::string output_dir = "out";
    std::vector<std::string> output_formats{"csv"};
    std::optional<std::uint64_t> seed;  // falls back to MONOTONE_SPDE_SEED, then 1

    // initial field: "zero" or "random" with (decay, amplitude)
    std::string init_kind = "zero";
    double init_amplitude = 0.5;
    double init_decay = 3.0;

    std::size_t checks_n_samples = 10000;
    double checks_tol = 1e-9;

    std::vector<double> varadhan_t_list{0.5, 0.4};
    double varadhan_rho1 = 0.0;
    double varadhan_rho2 = 0.2;
    double varadhan_offset = 0.4;

    NoiseModel make_noise() const {
        return NoiseModel::from_decay(grid, noise_kind, noise_k_max,
                                      noise_c_decay, noise_a, noise_b);
    }
    SimConfig make_sim() const {
        SimConfig cfg;
        cfg.grid = grid;
        cfg.params = physics;
        cfg.noise = make_noise();
        cfg.T = time_T;
        cfg.dt = time_dt;
        return cfg;
    }
    SpectralField make_initial_field(std::uint64_t seed_value) const {
        if (init_kind == "zero") return SpectralField(grid);
        return random_field(grid, seed_value ^ 0xF1E1D, init_decay,
                            init_amplitude);
    }

    void validate() const {
        try {
            grid.validate();
        } catch (const std::exception& e) {
            throw ConfigError("grid", e.what());
        }
        try {
            PhysParams p = physics;
            p.d = grid.d;
            p.validate();
        } catch (const std::exception& e) {
            throw ConfigError("physics", e.what());
        }
        if (noise_k_max < 1) throw ConfigError("noise.k_max", "must be >= 1");
        if (noise_c_decay <= 0)
            throw ConfigError("noise.c_decay", "must be > 0");
        if (noise_kind == NoiseKind::AdditiveDiagonal && noise_b != 0)
            throw ConfigError("noise.b", "must be 0 for additive_diagonal");
        if (time_T < 0) throw ConfigError("time.T", "must be >= 0");
        if (time_dt <= 0) throw ConfigError("time.dt", "must be > 0");
        if (ldp_delta <= 0) throw ConfigError("ldp.delta", "must be > 0");
        if (ldp_n_paths == 0) throw ConfigError("ldp.n_paths", "must be >= 1");
        for (double e : ldp_eps_list)
            if (e < 0) throw ConfigError("ldp.eps_list", "entries must be >= 0");
        if (init_kind != "zero" && init_kind != "random")
            throw ConfigError("init.kind", "must be 'zero' or 'random'");
        if (checks_n_samples == 0)
            throw ConfigError("checks.n_samples", "must be >= 1");
        if (checks_tol <= 0) throw ConfigError("checks.tol", "must be > 0");
        if (varadhan_rho2 <= 0)
            throw ConfigError("varadhan.rho2", "must be > 0");
    }
};

namespace cfgdetail {

using nlohmann::json;

inline const json& need(const json& obj, const std::string& section,
                        const std::string& field) {
    if (!obj.contains(field))
        throw ConfigError(section.empty() ? field : section + "." + field,
                          "missing required field");
    return obj.at(field);
}

template <typename T>
T get(const json& obj, const std::string& section, const std::string& field) {
    const json& v = need(obj, section, field);
    try {
        return v.get<T>();
    } catch (const std::exception&) {
        throw ConfigError(section + "." + field, "wrong type");
    }
}

template <typename T>
T get_or(const json& obj, const std::string& section, const std::string& field,
         T fallback) {
    if (!obj.contains(field)) return fallback;
    try {
        return obj.at(field).get<T>();
    } catch (const std::exception&) {
        throw ConfigError(section + "." + field, "wrong type");
    }
}

inline void reject_unknown(const json& obj, const std::string& section,
                           const std::set<std::string>& known) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError(section.empty() ? it.key()
                                              : section + "." + it.key(),
                              "unknown field");
}

}  // namespace cfgdetail

inline RunConfig parse_config(const nlohmann::json& j) {
    using namespace cfgdetail;
    RunConfig c;
    reject_unknown(j, "",
                   {"grid", "physics", "noise", "time", "ldp", "output",
                    "seed", "init", "checks", "varadhan"});

    const auto& grid = need(j, "", "grid");
    reject_unknown(grid, "grid", {"n", "d", "pad_factor"});
    c.grid.n = get<int>(grid, "grid", "n");
    c.grid.d = get_or<int>(grid, "grid", "d", 2);
    c.grid.pad_factor = get_or<int>(grid, "grid", "pad_factor", 2);

    const auto& phys = need(j, "", "physics");
    reject_unknown(phys, "physics", {"mu", "beta", "p", "r"});
    c.physics.mu = get<double>(phys, "physics", "mu");
    c.physics.beta = get<double>(phys, "physics", "beta");
    c.physics.p = get<double>(phys, "physics", "p");
    c.physics.r = get<double>(phys, "physics", "r");
    c.physics.d = c.grid.d;

    const auto& noise = need(j, "", "noise");
    reject_unknown(noise, "noise", {"kind", "k_max", "c_decay", "a", "b"});
    const std::string kind = get<std::string>(noise, "noise", "kind");
    if (kind == "additive_diagonal")
        c.noise_kind = NoiseKind::AdditiveDiagonal;
    else if (kind == "projected_multiplicative")
        c.noise_kind = NoiseKind::ProjectedMultiplicative;
    else
        throw ConfigError("noise.kind", "unknown kind '" + kind + "'");
    c.noise_k_max = get<int>(noise, "noise", "k_max");
    c.noise_c_decay = get<double>(noise, "noise", "c_decay");
    c.noise_a = get_or<double>(noise, "noise", "a", 1.0);
    c.noise_b = get_or<double>(noise, "noise", "b", 0.0);

    const auto& time = need(j, "", "time");
    reject_unknown(time, "time", {"T", "dt"});
    c.time_T = get<double>(time, "time", "T");
    c.time_dt = get<double>(time, "time", "dt");

    if (j.contains("ldp")) {
        const auto& ldp = j.at("ldp");
        reject_unknown(ldp, "ldp", {"eps_list", "delta", "M", "n_paths"});
        c.ldp_eps_list =
            get_or<std::vector<double>>(ldp, "ldp", "eps_list", c.ldp_eps_list);
        c.ldp_delta = get_or<double>(ldp, "ldp", "delta", c.ldp_delta);
        c.ldp_M = get_or<double>(ldp, "ldp", "M", c.ldp_M);
        c.ldp_n_paths =
            get_or<std::size_t>(ldp, "ldp", "n_paths", c.ldp_n_paths);
    }
    if (j.contains("output")) {
        const auto& out = j.at("output");
        reject_unknown(out, "output", {"dir", "formats"});
        c.output_dir = get_or<std::string>(out, "output", "dir", c.output_dir);
        c.output_formats = get_or<std::vector<std::string>>(
            out, "output", "formats", c.output_formats);
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("init")) {
        const auto& init = j.at("init");
        reject_unknown(init, "init", {"kind", "amplitude", "decay"});
        c.init_kind = get_or<std::string>(init, "init", "kind", c.init_kind);
        c.init_amplitude =
            get_or<double>(init, "init", "amplitude", c.init_amplitude);
        c.init_decay = get_or<double>(init, "init", "decay", c.init_decay);
    }
    if (j.contains("checks")) {
        const auto& ch = j.at("checks");
        reject_unknown(ch, "checks", {"n_samples", "tol"});
        c.checks_n_samples = get_or<std::size_t>(ch, "checks", "n_samples",
                                                 c.checks_n_samples);
        c.checks_tol = get_or<double>(ch, "checks", "tol", c.checks_tol);
    }
    if (j.contains("varadhan")) {
        const auto& va = j.at("varadhan");
        reject_unknown(va, "varadhan", {"t_list", "rho1", "rho2", "offset"});
        c.varadhan_t_list = get_or<std::vector<double>>(va, "varadhan",
                                                        "t_list",
                                                        c.varadhan_t_list);
        c.varadhan_rho1 =
            get_or<double>(va, "varadhan", "rho1", c.varadhan_rho1);
        c.varadhan_rho2 =
            get_or<double>(va, "varadhan", "rho2", c.varadhan_rho2);
        c.varadhan_offset =
            get_or<double>(va, "varadhan", "offset", c.varadhan_offset);
    }
    c.validate();
    return c;
}

inline RunConfig parse_config_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError("<json>", e.what());
    }
    return parse_config(j);
}

inline nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json j;
    j["grid"] = {{"n", c.grid.n},
                 {"d", c.grid.d},
                 {"pad_factor", c.grid.pad_factor}};
    j["physics"] = {{"mu", c.physics.mu},
                    {"beta", c.physics.beta},
                    {"p", c.physics.p},
                    {"r", c.physics.r}};
    j["noise"] = {{"kind", noise_kind_name(c.noise_kind)},
                  {"k_max", c.noise_k_max},
                  {"c_decay", c.noise_c_decay},
                  {"a", c.noise_a},
                  {"b", c.noise_b}};
    j["time"] = {{"T", c.time_T}, {"dt", c.time_dt}};
    j["ldp"] = {{"eps_list", c.ldp_eps_list},
                {"delta", c.ldp_delta},
                {"M", c.ldp_M},
                {"n_paths", c.ldp_n_paths}};
    j["output"] = {{"dir", c.output_dir}, {"formats", c.output_formats}};
    if (c.seed) j["seed"] = *c.seed;
    j["init"] = {{"kind", c.init_kind},
                 {"amplitude", c.init_amplitude},
                 {"decay", c.init_decay}};
    j["checks"] = {{"n_samples", c.checks_n_samples}, {"tol", c.checks_tol}};
    j["varadhan"] = {{"t_list", c.varadhan_t_list},
                     {"rho1", c.varadhan_rho1},
                     {"rho2", c.varadhan_rho2},
                     {"offset", c.varadhan_offset}};
    return j;
}

// canonical form: nlohmann sorts object keys; two-space indent, newline at end
inline std::string canonical_config(const RunConfig& c) {
    return config_to_json(c).dump(2) + "\n";
}

}  // namespace mspde
