#pragma once

#include "parallel.hpp"
#include "simulator.hpp"

namespace mspde {

// Piecewise-linear control h(t) in l^2, h(0) = 0, with constant derivative
// per segment on a uniform grid over [0, T].
struct ControlPath {
    double T = 1.0;
    std::vector<std::vector<double>> hdot;  // [segment][mode]

    std::size_t segments() const { return hdot.size(); }
    int k_max() const {
        return hdot.empty() ? 0 : static_cast<int>(hdot.front().size());
    }
    double segment_dt() const { return T / static_cast<double>(segments()); }

    // h_k at grid node i (cumulative integral of hdot)
    std::vector<double> node_value(std::size_t i) const {
        std::vector<double> h(k_max(), 0.0);
        const double dt = segment_dt();
        for (std::size_t s = 0; s < i && s < segments(); ++s)
            for (int k = 0; k < k_max(); ++k) h[k] += hdot[s][k] * dt;
        return h;
    }
};

// I(h) = 1/2 sum_k int_0^T hdot_k(t)^2 dt, exact for piecewise-constant hdot
inline double action_functional(const ControlPath& h) {
    if (h.segments() == 0) return 0.0;
    const double dt = h.segment_dt();
    double acc = 0.0;
    for (const auto& seg : h.hdot)
        for (double v : seg) acc += v * v;
    return 0.5 * acc * dt;
}

// Skeleton dynamics du/dt = sum_k sigma_k(t, u) hdot_k(t), integrated by
// classical RK4 with steps aligned to control segments (the right-hand side
// is smooth inside each segment). Returns the path at segment nodes.
inline std::vector<SpectralField> skeleton_solve(const ControlPath& h,
                                                 const SpectralField& u0,
                                                 const NoiseModel& noise,
                                                 double dt) {
    if (h.k_max() != noise.k_max())
        throw std::invalid_argument(
            "skeleton_solve: control width does not match the noise model");
    std::vector<SpectralField> path;
    path.push_back(u0);
    SpectralField u = u0;
    const double seg_dt = h.segment_dt();
    const int n_sub = std::max(1, static_cast<int>(std::ceil(seg_dt / dt)));
    const double hstep = seg_dt / n_sub;

    std::vector<double> scaled(noise.k_max());
    auto rhs = [&](const SpectralField& state,
                   const std::vector<double>& hd) {
        SpectralField out(state.grid);
        for (int k = 0; k < noise.k_max(); ++k) scaled[k] = hd[k];
        noise.add_noise(out, state, scaled, 1.0);
        return out;
    };

    for (std::size_t s = 0; s < h.segments(); ++s) {
        const auto& hd = h.hdot[s];
        for (int sub = 0; sub < n_sub; ++sub) {
            const SpectralField k1 = rhs(u, hd);
            SpectralField u2 = u;
            {
                SpectralField t = k1;
                t *= 0.5 * hstep;
                u2 += t;
            }
            const SpectralField k2 = rhs(u2, hd);
            SpectralField u3 = u;
            {
                SpectralField t = k2;
                t *= 0.5 * hstep;
                u3 += t;
            }
            const SpectralField k3 = rhs(u3, hd);
            SpectralField u4 = u;
            {
                SpectralField t = k3;
                t *= hstep;
                u4 += t;
            }
            const SpectralField k4 = rhs(u4, hd);
            for (std::size_t i = 0; i < u.coeffs.size(); ++i)
                u.coeffs[i] += hstep / 6.0 *
                               (k1.coeffs[i] + 2.0 * k2.coeffs[i] +
                                2.0 * k3.coeffs[i] + k4.coeffs[i]);
            if (!detail::finite(u)) throw IntegrationFailure(s * n_sub + sub);
        }
        path.push_back(u);
    }
    return path;
}

// R(g) = inf over controls steering the additive-diagonal diffusion along g.
// On the span of the noise modes the control is unique,
// hdot_k = d/dt <g, phi_k> / c_k, so the infimum is computable in closed
// form; paths leaving the span (or starting away from u0) have R = +infinity.
struct RateResult {
    double value = std::numeric_limits<double>::infinity();
    bool finite = false;
    std::string reason;
};

inline RateResult rate_function_diagonal(const std::vector<SpectralField>& g,
                                         double T, const SpectralField& u0,
                                         const NoiseModel& noise,
                                         double tol = 1e-9) {
    RateResult res;
    if (noise.kind != NoiseKind::AdditiveDiagonal || noise.b != 0.0)
        throw std::invalid_argument(
            "rate_function_diagonal: requires additive diagonal noise");
    if (noise.a == 0)
        throw std::invalid_argument(
            "rate_function_diagonal: degenerate noise (a = 0)");
    if (g.size() < 2) {
        res.value = 0;
        res.finite = true;
        return res;
    }
    const double scale0 = std::max(norm_h(u0), 1.0);
    if (norm_h(g.front() - u0) > tol * scale0) {
        res.reason = "path does not start at u0";
        return res;
    }
    const double dt = T / static_cast<double>(g.size() - 1);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        SpectralField delta = g[i + 1] - g[i];
        const double dnorm = norm_h(delta);
        SpectralField span_part(delta.grid);
        double rate_step = 0.0;
        for (int k = 0; k < noise.k_max(); ++k) {
            const double yk = noise.mode_coefficient(delta, k);
            const double hdot = yk / noise.modes[k].c / dt;
            rate_step += hdot * hdot;
            std::vector<double> w(noise.k_max(), 0.0);
            w[k] = yk / (noise.modes[k].c * noise.a);
            noise.add_noise(span_part, SpectralField(delta.grid), w, 1.0);
        }
        if (norm_h(delta - span_part) > tol * std::max(dnorm, scale0)) {
            res.reason = "increment leaves the span of the noise modes at step " +
                         std::to_string(i);
            return res;
        }
        acc += rate_step * dt;
    }
    res.value = 0.5 * acc;
    res.finite = true;
    return res;
}

// Minimal action steering the drift-free diffusion from u0 to the sphere
// ||v - u0||_H = rho by time T: the cheapest direction is the largest c_k.
inline double gaussian_reference_rate(double rho, double T,
                                      const NoiseModel& noise) {
    if (rho < 0) throw std::invalid_argument("gaussian_reference_rate: rho >= 0");
    if (T <= 0) throw std::invalid_argument("gaussian_reference_rate: T > 0");
    return rho * rho / (2.0 * T * noise.max_c_sq());
}

// ---- Monte Carlo estimators -----------------------------------------------------

struct LdpRow {
    double eps = 0;          // epsilon (or small time t for the two-ball scan)
    std::size_t n = 0;
    std::size_t hits = 0;
    double p_hat = 0;
    double ci_lo = 0, ci_hi = 0;  // Wilson 95% interval
    double log_scaled = 0;        // eps log p (or 2t log p); see the estimate
    bool defined = false;         // false when hits == 0
};

struct LdpEstimate {
    std::string event;
    std::vector<LdpRow> rows;
};

inline LdpRow make_row(double eps, std::size_t n, std::size_t hits,
                       double log_factor) {
    LdpRow row;
    row.eps = eps;
    row.n = n;
    row.hits = hits;
    row.p_hat = n ? double(hits) / double(n) : 0.0;
    const double z = 1.959963984540054;  // 97.5% normal quantile
    const double nf = static_cast<double>(n);
    const double denom = 1.0 + z * z / nf;
    const double center = (row.p_hat + z * z / (2 * nf)) / denom;
    const double half =
        z *
        std::sqrt(row.p_hat * (1 - row.p_hat) / nf + z * z / (4 * nf * nf)) /
        denom;
    row.ci_lo = std::max(0.0, center - half);
    row.ci_hi = std::min(1.0, center + half);
    if (hits > 0) {
        row.log_scaled = log_factor * std::log(row.p_hat);
        row.defined = true;
    }
    return row;
}

// master-seed/stream layout: stream id = (eps index << 32) | path index,
// so results are independent of worker count and eps-batch order
inline std::uint64_t ldp_stream(std::size_t eps_index, std::size_t path) {
    return (static_cast<std::uint64_t>(eps_index) << 32) |
           static_cast<std::uint64_t>(path);
}

// P{ sup_t ||u^eps(t) - v^eps(t)||_H^2 > delta } with the two processes
// coupled through the same Brownian increments
inline LdpEstimate estimate_equivalence_gap(
    const std::vector<double>& eps_list, double delta, std::size_t n_paths,
    const SpectralField& u0, const SimConfig& cfg, std::uint64_t seed,
    unsigned workers = 1) {
    if (delta <= 0)
        throw std::invalid_argument("estimate_equivalence_gap: delta > 0");
    LdpEstimate est;
    est.event = "sup_t |u^eps - v^eps|_H^2 > " + std::to_string(delta);
    const std::size_t n_steps = cfg.n_steps();
    const int k_max = cfg.noise.k_max();
    const double sqrt_dt = std::sqrt(cfg.dt);
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        const double eps = eps_list[e];
        std::vector<char> hits(n_paths, 0);
        parallel_for(n_paths, workers, [&](std::size_t i) {
            Rng rng(seed, ldp_stream(e, i));
            SpectralField u = u0, v = u0;
            std::vector<double> dW(k_max);
            double sup = 0;
            for (std::size_t s = 0; s < n_steps; ++s) {
                for (int k = 0; k < k_max; ++k)
                    dW[k] = sqrt_dt * rng.gaussian();
                u = step(u, s * cfg.dt, cfg.dt, dW, cfg.params, cfg.noise,
                         cfg.forcing, eps, true, true);
                v = step(v, s * cfg.dt, cfg.dt, dW, cfg.params, cfg.noise, {},
                         eps, false, false);
                sup = std::max(sup, norm_h_sq(u - v));
            }
            hits[i] = sup > delta ? 1 : 0;
        });
        std::size_t h = 0;
        for (char c : hits) h += c;
        est.rows.push_back(make_row(eps, n_paths, h, eps));
    }
    return est;
}

// P{ energy functional of u^eps over [0,T] exceeds M }, with the functional
//   sup_t ||u||_H^2 + eps mu int ||u||_V2^2 + (eps mu / 2) int ||u||_Vp^p
//   + eps beta int ||u||_Lr^r
inline LdpEstimate estimate_energy_exit(const std::vector<double>& eps_list,
                                        double M, std::size_t n_paths,
                                        const SpectralField& u0,
                                        const SimConfig& cfg,
                                        std::uint64_t seed,
                                        unsigned workers = 1) {
    LdpEstimate est;
    est.event = "energy functional > " + std::to_string(M);
    const PhysParams& par = cfg.params;
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        const double eps = eps_list[e];
        std::vector<char> hits(n_paths, 0);
        parallel_for(n_paths, workers, [&](std::size_t i) {
            double sup_h2 = norm_h_sq(u0);
            double int_v2 = 0, int_vp = 0, int_lr = 0;
            SpectralField prev = u0;
            auto account = [&](const SpectralField& state) {
                int_v2 += norm_v2_sq(state) * cfg.dt;
                int_vp += raw_power_vp(state, par.p) * cfg.dt;
                if (par.beta != 0)
                    int_lr += raw_power_lr(state, par.r) * cfg.dt;
            };
            run_path(u0, cfg, seed, ldp_stream(e, i), eps, true, true, nullptr,
                     nullptr,
                     [&](std::size_t, double, const SpectralField& u,
                         const std::vector<double>&) {
                         account(prev);
                         prev = u;
                         sup_h2 = std::max(sup_h2, norm_h_sq(u));
                     });
            const double functional = sup_h2 + eps * par.mu * int_v2 +
                                      0.5 * eps * par.mu * int_vp +
                                      eps * par.beta * int_lr;
            hits[i] = functional > M ? 1 : 0;
        });
        std::size_t h = 0;
        for (char c : hits) h += c;
        est.rows.push_back(make_row(eps, n_paths, h, eps));
    }
    return est;
}

// P{ ||v^eps(T) - u0||_H >= rho } for the drift-free comparison process;
// with additive noise this is the exactly-Gaussian benchmark whose rate is
// gaussian_reference_rate(rho, T, noise)
inline LdpEstimate estimate_comparison_exit(const std::vector<double>& eps_list,
                                            double rho, std::size_t n_paths,
                                            const SpectralField& u0,
                                            const SimConfig& cfg,
                                            std::uint64_t seed,
                                            unsigned workers = 1) {
    if (rho <= 0)
        throw std::invalid_argument("estimate_comparison_exit: rho > 0");
    LdpEstimate est;
    est.event = "|v^eps(T) - u0|_H >= " + std::to_string(rho);
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        const double eps = eps_list[e];
        std::vector<char> hits(n_paths, 0);
        parallel_for(n_paths, workers, [&](std::size_t i) {
            const SpectralField final_v = run_path(
                u0, cfg, seed, ldp_stream(e, i), eps, false, false, nullptr,
                nullptr,
                [](std::size_t, double, const SpectralField&,
                   const std::vector<double>&) {});
            hits[i] = norm_h(final_v - u0) >= rho ? 1 : 0;
        });
        std::size_t h = 0;
        for (char c : hits) h += c;
        est.rows.push_back(make_row(eps, n_paths, h, eps));
    }
    return est;
}

// exploratory two-ball small-time scan: 2t log P{u(0) in B, u(t) in C},
// realized through the rescaled process at eps = t on [0, 1]. B is a point
// mass at center1 when rho1 = 0, otherwise uniform over center1 + ball in
// the span of the noise modes.
inline LdpEstimate estimate_varadhan(const std::vector<double>& t_list,
                                     const SpectralField& center1, double rho1,
                                     const SpectralField& center2, double rho2,
                                     std::size_t n_paths, const SimConfig& cfg,
                                     std::uint64_t seed, unsigned workers = 1) {
    if (rho2 <= 0)
        throw std::invalid_argument("estimate_varadhan: rho2 must be > 0");
    LdpEstimate est;
    est.event = "u(0) in B(rho1=" + std::to_string(rho1) + "), u(t) in C(rho2=" +
                std::to_string(rho2) + ")";
    const int k_max = cfg.noise.k_max();
    for (std::size_t e = 0; e < t_list.size(); ++e) {
        const double t = t_list[e];
        std::vector<char> hits(n_paths, 0);
        parallel_for(n_paths, workers, [&](std::size_t i) {
            Rng init_rng(seed ^ 0x5eedb411, ldp_stream(e, i));
            SpectralField start = center1;
            if (rho1 > 0) {
                // uniform radius^d direction sample in the mode span
                std::vector<double> dir(k_max);
                double nrm = 0;
                for (auto& x : dir) {
                    x = init_rng.gaussian();
                    nrm += x * x;
                }
                nrm = std::sqrt(std::max(nrm, 1e-300));
                const double radius =
                    rho1 * std::pow(init_rng.uniform(), 1.0 / k_max);
                std::vector<double> w(k_max);
                for (int k = 0; k < k_max; ++k)
                    w[k] = radius * dir[k] / nrm /
                           (cfg.noise.modes[k].c * cfg.noise.a);
                cfg.noise.add_noise(start, SpectralField(cfg.grid), w, 1.0);
            }
            const SpectralField final_u =
                run_path(start, cfg, seed, ldp_stream(e, i), t, true, true,
                         nullptr, nullptr,
                         [](std::size_t, double, const SpectralField&,
                            const std::vector<double>&) {});
            hits[i] = norm_h(final_u - center2) <= rho2 ? 1 : 0;
        });
        std::size_t h = 0;
        for (char c : hits) h += c;
        est.rows.push_back(make_row(t, n_paths, h, 2.0 * t));
    }
    return est;
}

}  // namespace mspde
