#pragma once

#include <functional>
#include <optional>

#include "noise.hpp"
#include "operators.hpp"

namespace mspde {

// deterministic forcing; empty = zero
using Forcing = std::function<SpectralField(double)>;

struct SimConfig {
    GridSpec grid;
    PhysParams params;
    NoiseModel noise;
    double T = 1.0;
    double dt = 1e-3;
    Forcing forcing;  // evaluated at the rescaled time

    std::size_t n_steps() const {
        return static_cast<std::size_t>(std::llround(T / dt));
    }
};

struct IntegrationFailure : std::runtime_error {
    explicit IntegrationFailure(std::size_t step)
        : std::runtime_error("non-finite state at step " + std::to_string(step)),
          step_index(step) {}
    std::size_t step_index;
};

// time-gridded path with the Brownian increments that produced it
struct Trajectory {
    GridSpec grid;
    PhysParams params;
    double dt = 0;
    std::uint64_t seed = 0;
    double eps = 1.0;
    std::vector<double> times;
    std::vector<SpectralField> fields;            // n_steps + 1
    std::vector<std::vector<double>> increments;  // n_steps x k_max
};

namespace detail {

inline bool finite(const SpectralField& u) {
    for (const auto& c : u.coeffs)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

}  // namespace detail

// One IMEX-tamed Euler-Maruyama step of the rescaled dynamics
//   du = -eps [mu A(u) + B(u) + beta C(u) - f(eps s)] ds
//        + sqrt(eps) sum_k sigma_k(eps s, u) dW_k.
// The Stokes part is implicit (diagonal), the superlinear remainder is tamed
// explicit, and the noise enters after the implicit solve so that coupled
// drift-free processes cancel increments exactly:
//   u+ = S [u - eps dt tamed(R(u)) + eps dt f] + sqrt(eps) sum sigma_k dW_k,
//   S = (1 + eps dt mu |k|^2)^{-1},  tamed(R) = R / (1 + dt ||R||_H).
inline SpectralField step(const SpectralField& u, double t, double dt,
                          const std::vector<double>& dW,
                          const PhysParams& params, const NoiseModel& noise,
                          const Forcing& forcing = {}, double eps = 1.0,
                          bool drift_enabled = true,
                          bool implicit_enabled = true) {
    const GridSpec& g = u.grid;
    SpectralField next = u;

    if (drift_enabled) {
        SpectralField rem = drift_remainder(u, params);
        const double tame = 1.0 / (1.0 + dt * norm_h(rem));
        const double coef = eps * dt * tame;
        for (std::size_t i = 0; i < next.coeffs.size(); ++i)
            next.coeffs[i] -= coef * rem.coeffs[i];
        if (forcing) {
            SpectralField f = forcing(eps * t);
            check_same_grid(f.grid, g);
            for (std::size_t i = 0; i < next.coeffs.size(); ++i)
                next.coeffs[i] += eps * dt * f.coeffs[i];
        }
        if (implicit_enabled) {
            const std::size_t s = g.spectral_size();
            for (std::size_t flat = 0; flat < s; ++flat) {
                const double k2 = g.k_squared(g.wavevector(flat));
                const double fac = 1.0 / (1.0 + eps * dt * params.mu * k2);
                for (int c = 0; c < g.d; ++c) next.coeffs[c * s + flat] *= fac;
            }
        }
    }
    noise.add_noise(next, u, dW, std::sqrt(eps));
    return next;
}

// Streaming driver shared by the path simulators and the Monte Carlo
// estimators. on_step(i, t_{i+1}, u_{i+1}, dW_i) observes the path; the
// Brownian increments either come from the stream RNG or are replayed from
// shared_increments (coupling).
template <typename OnStep>
SpectralField run_path(const SpectralField& u0, const SimConfig& cfg,
                       std::uint64_t seed, std::uint64_t stream, double eps,
                       bool drift_enabled, bool implicit_enabled,
                       const std::vector<std::vector<double>>* shared_increments,
                       std::vector<std::vector<double>>* store_increments,
                       OnStep&& on_step) {
    const std::size_t n = cfg.n_steps();
    const int k_max = cfg.noise.k_max();
    Rng rng(seed, stream);
    const double sqrt_dt = std::sqrt(cfg.dt);
    SpectralField u = u0;
    std::vector<double> dW(k_max);
    for (std::size_t i = 0; i < n; ++i) {
        if (shared_increments) {
            dW = (*shared_increments)[i];
        } else {
            for (int k = 0; k < k_max; ++k) dW[k] = sqrt_dt * rng.gaussian();
        }
        if (store_increments) store_increments->push_back(dW);
        u = step(u, i * cfg.dt, cfg.dt, dW, cfg.params, cfg.noise, cfg.forcing,
                 eps, drift_enabled, implicit_enabled);
        if (!detail::finite(u)) throw IntegrationFailure(i);
        on_step(i, (i + 1) * cfg.dt, u, dW);
    }
    return u;
}

// rescaled process u^eps (eps = 1 recovers the base dynamics bit-for-bit)
inline Trajectory simulate_rescaled(double eps, const SpectralField& u0,
                                    const SimConfig& cfg, std::uint64_t seed,
                                    std::uint64_t stream = 0) {
    if (eps < 0)
        throw std::invalid_argument("simulate_rescaled: eps must be >= 0");
    Trajectory traj;
    traj.grid = cfg.grid;
    traj.params = cfg.params;
    traj.dt = cfg.dt;
    traj.seed = seed;
    traj.eps = eps;
    traj.times.push_back(0.0);
    traj.fields.push_back(u0);
    run_path(u0, cfg, seed, stream, eps, true, true, nullptr, &traj.increments,
             [&](std::size_t, double t, const SpectralField& u,
                 const std::vector<double>&) {
                 traj.times.push_back(t);
                 traj.fields.push_back(u);
             });
    return traj;
}

inline Trajectory simulate_path(const SpectralField& u0, const SimConfig& cfg,
                                std::uint64_t seed, std::uint64_t stream = 0) {
    return simulate_rescaled(1.0, u0, cfg, seed, stream);
}

// drift-free comparison process dv = sqrt(eps) sum sigma_k(eps s, v) dW_k,
// optionally coupled to a rescaled trajectory through its stored increments
inline Trajectory simulate_comparison(
    double eps, const SpectralField& u0, const SimConfig& cfg,
    const std::vector<std::vector<double>>* shared_increments,
    std::uint64_t seed = 0, std::uint64_t stream = 0) {
    if (eps < 0)
        throw std::invalid_argument("simulate_comparison: eps must be >= 0");
    if (shared_increments && shared_increments->size() != cfg.n_steps())
        throw std::invalid_argument(
            "simulate_comparison: increment count does not match the grid");
    if (shared_increments)
        for (const auto& row : *shared_increments)
            if (static_cast<int>(row.size()) != cfg.noise.k_max())
                throw std::invalid_argument(
                    "simulate_comparison: increment width mismatch");
    Trajectory traj;
    traj.grid = cfg.grid;
    traj.params = cfg.params;
    traj.dt = cfg.dt;
    traj.seed = seed;
    traj.eps = eps;
    traj.times.push_back(0.0);
    traj.fields.push_back(u0);
    run_path(u0, cfg, seed, stream, eps, false, false, shared_increments,
             &traj.increments,
             [&](std::size_t, double t, const SpectralField& u,
                 const std::vector<double>&) {
                 traj.times.push_back(t);
                 traj.fields.push_back(u);
             });
    return traj;
}

// ---- pathwise energy audit ---------------------------------------------------
//
// Discrete balance of   ||u(t)||^2 + 2 mu int <(1+|grad u|^2)^{(p-2)/2} grad u,
// grad u> + 2 beta int ||u||_Lr^r  =  ||u0||^2 + 2 int <f, u>
// + sum_k int ||sigma_k(u)||_H^2 + 2 sum_k int (sigma_k(u), u) dW_k,
// with left-endpoint quadrature in time. The residual measures the weak
// discretization error of the stepper.
struct EnergyBudget {
    std::vector<double> h_sq;         // ||u_i||^2, i = 0..N
    std::vector<double> dissipation;  // per step: 2 mu D(u_i) dt
    std::vector<double> damping;      // per step: 2 beta ||u_i||_r^r dt
    std::vector<double> forcing;      // per step: 2 <f_i, u_i> dt
    std::vector<double> ito;          // per step: sum_k ||sigma_k(u_i)||^2 dt
    std::vector<double> martingale;   // per step: 2 sum_k (sigma_k(u_i),u_i) dWk

    double dissipation_total = 0, damping_total = 0, forcing_total = 0,
           ito_total = 0, martingale_total = 0;
    double residual = 0;  // LHS - RHS of the telescoped identity

    std::size_t steps() const { return dissipation.size(); }
};

// incremental auditor usable from streaming observers
class EnergyAuditor {
  public:
    EnergyAuditor(const SpectralField& u0, const PhysParams& params,
                  const NoiseModel& noise, const Forcing& forcing, double dt)
        : params_(params), noise_(noise), forcing_(forcing), dt_(dt) {
        budget_.h_sq.push_back(norm_h_sq(u0));
        prev_ = u0;
    }

    void on_step(std::size_t i, const SpectralField& u_next,
                 const std::vector<double>& dW) {
        const double t = static_cast<double>(i) * dt_;
        // p = 2: the pairing form collapses to the spectral V2 norm
        const double diss =
            params_.p == 2.0
                ? 2 * params_.mu * norm_v2_sq(prev_) * dt_
                : 2 * params_.mu * dissipation_form(prev_, params_.p) * dt_;
        const double damp =
            params_.beta != 0
                ? 2 * params_.beta * raw_power_lr(prev_, params_.r) * dt_
                : 0.0;
        double force = 0;
        if (forcing_) force = 2 * pairing(forcing_(t), prev_) * dt_;
        const double ito = noise_.sum_sigma_h_sq(prev_) * dt_;
        const double mart = 2 * noise_.sigma_pairing_sum(prev_, dW);
        budget_.dissipation.push_back(diss);
        budget_.damping.push_back(damp);
        budget_.forcing.push_back(force);
        budget_.ito.push_back(ito);
        budget_.martingale.push_back(mart);
        budget_.dissipation_total += diss;
        budget_.damping_total += damp;
        budget_.forcing_total += force;
        budget_.ito_total += ito;
        budget_.martingale_total += mart;
        budget_.h_sq.push_back(norm_h_sq(u_next));
        prev_ = u_next;
    }

    EnergyBudget finish() {
        budget_.residual = budget_.h_sq.back() + budget_.dissipation_total +
                           budget_.damping_total - budget_.h_sq.front() -
                           budget_.forcing_total - budget_.ito_total -
                           budget_.martingale_total;
        return budget_;
    }

  private:
    PhysParams params_;
    const NoiseModel& noise_;
    Forcing forcing_;
    double dt_;
    SpectralField prev_;
    EnergyBudget budget_;
};

inline EnergyBudget energy_audit(const Trajectory& traj,
                                 const PhysParams& params,
                                 const NoiseModel& noise,
                                 const Forcing& forcing = {}) {
    if (traj.fields.empty()) return {};
    EnergyAuditor aud(traj.fields.front(), params, noise, forcing, traj.dt);
    for (std::size_t i = 0; i + 1 < traj.fields.size(); ++i)
        aud.on_step(i, traj.fields[i + 1], traj.increments[i]);
    return aud.finish();
}

}  // namespace mspde
