#pragma once

#include <cinttypes>
#include <cstring>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "inequalities.hpp"

namespace mspde {

// shortest round-trip-exact decimal form
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    double back = 0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char s[40];
            std::snprintf(s, sizeof s, "%.*g", prec, v);
            double b2 = 0;
            std::sscanf(s, "%lf", &b2);
            if (b2 == v) return s;
        }
    }
    return buf;
}

// write-to-temp then rename: partial outputs are never visible
inline void atomic_write(const std::filesystem::path& path,
                         const std::string& content) {
    namespace fs = std::filesystem;
    fs::create_directories(path.parent_path().empty() ? "."
                                                      : path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open " + tmp.string() +
                                     " for writing");
        out.write(content.data(),
                  static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

// ---- CSV schemas (versioned; golden tests pin the headers) --------------------

inline constexpr int kTrajectoryCsvVersion = 1;
inline constexpr int kLdpCsvVersion = 1;
inline constexpr int kChecksCsvVersion = 1;
inline constexpr int kBudgetCsvVersion = 1;

inline std::string trajectory_csv(const Trajectory& traj,
                                  const PhysParams& par) {
    std::ostringstream out;
    out << "t,norm_H,norm_V2,norm_Vp,norm_Lr\n";
    for (std::size_t i = 0; i < traj.fields.size(); ++i) {
        const auto& u = traj.fields[i];
        out << fmt_double(traj.times[i]) << ',' << fmt_double(norm_h(u)) << ','
            << fmt_double(norm_v2(u)) << ',' << fmt_double(norm_vp(u, par.p))
            << ',' << fmt_double(norm_lr(u, par.r)) << '\n';
    }
    return out.str();
}

inline std::string ldp_csv(const LdpEstimate& est) {
    std::ostringstream out;
    out << "eps,n,hits,p_hat,ci_lo,ci_hi,eps_log_p\n";
    for (const auto& r : est.rows) {
        out << fmt_double(r.eps) << ',' << r.n << ',' << r.hits << ','
            << fmt_double(r.p_hat) << ',' << fmt_double(r.ci_lo) << ','
            << fmt_double(r.ci_hi) << ','
            << (r.defined ? fmt_double(r.log_scaled) : std::string("nan"))
            << '\n';
    }
    return out.str();
}

inline std::string checks_csv(const std::vector<CheckReport>& reports) {
    std::ostringstream out;
    out << "name,samples,tol,worst_margin,worst_seed,violations,pass\n";
    for (const auto& r : reports) {
        out << r.name << ',' << r.samples << ',' << fmt_double(r.tol) << ','
            << fmt_double(r.worst_margin) << ',' << r.worst_seed << ','
            << r.violations << ',' << (r.pass ? 1 : 0) << '\n';
    }
    return out.str();
}

inline nlohmann::json check_report_json(const CheckReport& r) {
    nlohmann::json j;
    j["name"] = r.name;
    j["samples"] = r.samples;
    j["tol"] = r.tol;
    j["worst_margin"] = r.worst_margin;
    j["worst_seed"] = r.worst_seed;
    j["violations"] = r.violations;
    j["pass"] = r.pass;
    if (r.homogeneity_degree) j["homogeneity_degree"] = *r.homogeneity_degree;
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j;
}

inline std::string budget_csv(const std::vector<EnergyBudget>& budgets) {
    std::ostringstream out;
    out << "path,energy_initial,energy_final,dissipation,damping,forcing,ito,"
           "martingale,residual\n";
    for (std::size_t i = 0; i < budgets.size(); ++i) {
        const auto& b = budgets[i];
        out << i << ',' << fmt_double(b.h_sq.empty() ? 0.0 : b.h_sq.front())
            << ',' << fmt_double(b.h_sq.empty() ? 0.0 : b.h_sq.back()) << ','
            << fmt_double(b.dissipation_total) << ','
            << fmt_double(b.damping_total) << ',' << fmt_double(b.forcing_total)
            << ',' << fmt_double(b.ito_total) << ','
            << fmt_double(b.martingale_total) << ',' << fmt_double(b.residual)
            << '\n';
    }
    return out.str();
}

// ---- binary field dump ----------------------------------------------------------
//
// Little-endian layout:
//   u64 n, u64 d, u64 k_max, u64 n_steps
//   fields: (n_steps + 1) x d x n^d complex coefficients (re, im doubles),
//           component-major, flat spectral index in row-major k order
//   increments: n_steps x k_max doubles
inline std::string field_dump(const Trajectory& traj, int k_max) {
    std::string out;
    auto put_u64 = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
    };
    auto put_f64 = [&](double d) {
        std::uint64_t v;
        std::memcpy(&v, &d, 8);
        put_u64(v);
    };
    put_u64(traj.grid.n);
    put_u64(traj.grid.d);
    put_u64(k_max);
    put_u64(traj.increments.size());
    for (const auto& f : traj.fields)
        for (const auto& c : f.coeffs) {
            put_f64(c.real());
            put_f64(c.imag());
        }
    for (const auto& row : traj.increments)
        for (double v : row) put_f64(v);
    return out;
}

// ---- run manifest ----------------------------------------------------------------

inline constexpr const char* kToolVersion = "0.1.0";

inline nlohmann::json make_manifest(const RunConfig& cfg,
                                    std::uint64_t seed_used, unsigned workers,
                                    const std::vector<std::string>& outputs,
                                    double wall_seconds) {
    nlohmann::json m;
    m["config"] = config_to_json(cfg);
    m["seed_used"] = seed_used;
    m["workers"] = workers;
    m["tool_version"] = kToolVersion;
    m["wall_time_seconds"] = wall_seconds;
    m["outputs"] = outputs;
    m["csv_schemas"] = {{"trajectory", kTrajectoryCsvVersion},
                        {"ldp", kLdpCsvVersion},
                        {"checks", kChecksCsvVersion},
                        {"budget", kBudgetCsvVersion}};
    return m;
}

}  // namespace mspde
