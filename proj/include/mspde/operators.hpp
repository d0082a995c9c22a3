#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "field.hpp"

namespace mspde {

enum class MonotonicityRegime { Global, Local, None };

inline const char* regime_name(MonotonicityRegime r) {
    switch (r) {
        case MonotonicityRegime::Global: return "global";
        case MonotonicityRegime::Local: return "local";
        case MonotonicityRegime::None: return "none";
    }
    return "?";
}

// Physical parameters: viscosity mu, damping strength beta with exponent r,
// shear-thickening exponent p. The linear damping coefficient alpha is
// identically zero in this model family.
struct PhysParams {
    double mu = 1.0;
    double beta = 0.0;
    double p = 2.0;
    double r = 2.0;
    int d = 2;
    static constexpr double alpha = 0.0;

    void validate() const {
        if (mu <= 0) throw std::invalid_argument("PhysParams: mu must be > 0");
        if (beta < 0) throw std::invalid_argument("PhysParams: beta must be >= 0");
        if (p < 2) throw std::invalid_argument("PhysParams: p must be >= 2");
        if (r < 2) throw std::invalid_argument("PhysParams: r must be >= 2");
        if (d != 2 && d != 3) throw std::invalid_argument("PhysParams: d must be 2 or 3");
    }

    MonotonicityRegime regime() const {
        if ((p >= 2 && r > 4) || (r == 4 && 2 * beta * mu >= 1))
            return MonotonicityRegime::Global;
        if (p >= 0.5 * d + 1 && r >= 2) return MonotonicityRegime::Local;
        return MonotonicityRegime::None;
    }
};

namespace detail {

// shared padded-physical evaluations behind the nonlinear operators
struct PaddedState {
    std::vector<std::vector<double>> vel;   // d arrays, empty if unused
    std::vector<std::vector<double>> grad;  // d*d arrays, empty if unused
};

inline PaddedState padded_state(const SpectralField& u, bool need_vel,
                                bool need_grad) {
    PaddedState st;
    if (need_vel) st.vel = velocity_padded(u);
    if (need_grad) st.grad = gradient_padded(u);
    return st;
}

// spectral divergence of the band-limited tensor T_ij: out_j = sum_i i k_i T_ij
inline void add_divergence(const GridSpec& g,
                           const std::vector<std::vector<Complex>>& t_hat,
                           double scale, SpectralField& acc) {
    const std::size_t s = g.spectral_size();
    for (std::size_t flat = 0; flat < s; ++flat) {
        const auto k = g.wavevector(flat);
        for (int j = 0; j < g.d; ++j) {
            Complex div{0, 0};
            for (int i = 0; i < g.d; ++i)
                div += Complex(0, double(k[i])) * t_hat[i * g.d + j][flat];
            acc.coeffs[j * s + flat] += scale * div;
        }
    }
}

// stress tensor (1+|grad u|^2)^{(p-2)/2} grad u, transformed to the n-band
inline std::vector<std::vector<Complex>> stress_band(
    const GridSpec& g, const std::vector<std::vector<double>>& grad, double p) {
    const std::size_t m = g.padded_size();
    const int dd = g.d * g.d;
    std::vector<double> coeff(m);
    const double q = 0.5 * (p - 2.0);
    for (std::size_t x = 0; x < m; ++x) {
        double g2 = 0.0;
        for (int e = 0; e < dd; ++e) g2 += grad[e][x] * grad[e][x];
        coeff[x] = pow_fast(1.0 + g2, q);
    }
    std::vector<std::vector<Complex>> t_hat(dd);
    std::vector<double> work(m);
    for (int e = 0; e < dd; ++e) {
        for (std::size_t x = 0; x < m; ++x) work[x] = coeff[x] * grad[e][x];
        t_hat[e].resize(g.spectral_size());
        padded_to_band(g, work, t_hat[e].data());
    }
    return t_hat;
}

// advection (u . grad) v on the padded grid, transformed to the n-band
inline std::vector<std::vector<Complex>> advection_band(
    const GridSpec& g, const std::vector<std::vector<double>>& vel,
    const std::vector<std::vector<double>>& gradv) {
    const std::size_t m = g.padded_size();
    std::vector<std::vector<Complex>> w_hat(g.d);
    std::vector<double> work(m);
    for (int j = 0; j < g.d; ++j) {
        for (std::size_t x = 0; x < m; ++x) {
            double acc = 0.0;
            for (int i = 0; i < g.d; ++i) acc += vel[i][x] * gradv[i * g.d + j][x];
            work[x] = acc;
        }
        w_hat[j].resize(g.spectral_size());
        padded_to_band(g, work, w_hat[j].data());
    }
    return w_hat;
}

// |u|^{r-2} u on the padded grid, transformed to the n-band
inline std::vector<std::vector<Complex>> damping_band(
    const GridSpec& g, const std::vector<std::vector<double>>& vel, double r) {
    const std::size_t m = g.padded_size();
    std::vector<double> coeff(m);
    const double q = 0.5 * (r - 2.0);
    for (std::size_t x = 0; x < m; ++x) {
        double u2 = 0.0;
        for (int i = 0; i < g.d; ++i) u2 += vel[i][x] * vel[i][x];
        coeff[x] = pow_fast(u2, q);
    }
    std::vector<std::vector<Complex>> c_hat(g.d);
    std::vector<double> work(m);
    for (int j = 0; j < g.d; ++j) {
        for (std::size_t x = 0; x < m; ++x) work[x] = coeff[x] * vel[j][x];
        c_hat[j].resize(g.spectral_size());
        padded_to_band(g, work, c_hat[j].data());
    }
    return c_hat;
}

}  // namespace detail

// A(u) = -P div((1+|grad u|^2)^{(p-2)/2} grad u). For p = 2 this is the
// Stokes operator, u_hat(k) -> |k|^2 u_hat(k).
inline SpectralField op_A(const SpectralField& u, double p) {
    if (p < 2) throw std::invalid_argument("op_A: p must be >= 2");
    const GridSpec& g = u.grid;
    auto st = detail::padded_state(u, false, true);
    auto t_hat = detail::stress_band(g, st.grad, p);
    SpectralField out(g);
    detail::add_divergence(g, t_hat, -1.0, out);
    return leray_project(out);
}

// Phi(u) = (1/p) int (1+|grad u|^2)^{p/2} dx; its directional derivative in a
// divergence-free direction w is pairing(op_A(u), w).
inline double potential_A(const SpectralField& u, double p) {
    if (p < 2) throw std::invalid_argument("potential_A: p must be >= 2");
    const GridSpec& g = u.grid;
    const auto grad = gradient_padded(u);
    const std::size_t m = g.padded_size();
    double acc = 0.0;
    for (std::size_t x = 0; x < m; ++x) {
        double g2 = 0.0;
        for (const auto& e : grad) g2 += e[x] * e[x];
        acc += pow_fast(1.0 + g2, 0.5 * p);
    }
    return acc * g.cell_volume_padded() / p;
}

// <A(u), u> = int (1+|grad u|^2)^{(p-2)/2} |grad u|^2 dx
inline double dissipation_form(const SpectralField& u, double p) {
    if (p < 2) throw std::invalid_argument("dissipation_form: p must be >= 2");
    const GridSpec& g = u.grid;
    const auto grad = gradient_padded(u);
    const std::size_t m = g.padded_size();
    double acc = 0.0;
    const double q = 0.5 * (p - 2.0);
    for (std::size_t x = 0; x < m; ++x) {
        double g2 = 0.0;
        for (const auto& e : grad) g2 += e[x] * e[x];
        acc += pow_fast(1.0 + g2, q) * g2;
    }
    return acc * g.cell_volume_padded();
}

// B(u, v) = P[(u . grad) v], dealiased on the padded grid
inline SpectralField op_B(const SpectralField& u, const SpectralField& v) {
    check_same_grid(u.grid, v.grid);
    const GridSpec& g = u.grid;
    const auto vel = velocity_padded(u);
    const auto gradv = gradient_padded(v);
    auto w_hat = detail::advection_band(g, vel, gradv);
    SpectralField out(g);
    const std::size_t s = g.spectral_size();
    for (int j = 0; j < g.d; ++j)
        for (std::size_t flat = 0; flat < s; ++flat)
            out.coeffs[j * s + flat] = w_hat[j][flat];
    return leray_project(out);
}

inline SpectralField op_B(const SpectralField& u) { return op_B(u, u); }

// b(u, v, w) = int (u . grad) v . w dx, evaluated by padded quadrature
// (exact for the retained band with pad_factor >= 2)
inline double trilinear_b(const SpectralField& u, const SpectralField& v,
                          const SpectralField& w) {
    check_same_grid(u.grid, v.grid);
    check_same_grid(u.grid, w.grid);
    const GridSpec& g = u.grid;
    const auto uu = velocity_padded(u);
    const auto gv = gradient_padded(v);
    const auto ww = velocity_padded(w);
    const std::size_t m = g.padded_size();
    double acc = 0.0;
    for (std::size_t x = 0; x < m; ++x) {
        for (int j = 0; j < g.d; ++j) {
            double adv = 0.0;
            for (int i = 0; i < g.d; ++i) adv += uu[i][x] * gv[i * g.d + j][x];
            acc += adv * ww[j][x];
        }
    }
    return acc * g.cell_volume_padded();
}

// C(u) = P(|u|^{r-2} u)
inline SpectralField op_C(const SpectralField& u, double r) {
    if (r < 2) throw std::invalid_argument("op_C: r must be >= 2");
    const GridSpec& g = u.grid;
    const auto vel = velocity_padded(u);
    auto c_hat = detail::damping_band(g, vel, r);
    SpectralField out(g);
    const std::size_t s = g.spectral_size();
    for (int j = 0; j < g.d; ++j)
        for (std::size_t flat = 0; flat < s; ++flat)
            out.coeffs[j * s + flat] = c_hat[j][flat];
    return leray_project(out);
}

// Combined dissipative drift mu A(u) + B(u) + beta C(u); the evolution is
// du = -drift_G(u) dt + f dt + noise. Shares padded transforms between the
// three terms and projects once.
inline SpectralField drift_G(const SpectralField& u, const PhysParams& par) {
    par.validate();
    const GridSpec& g = u.grid;
    const std::size_t s = g.spectral_size();
    const bool need_c = par.beta != 0.0;
    auto st = detail::padded_state(u, true, true);

    SpectralField acc(g);

    if (par.p == 2.0) {
        // Stokes multiplier, exact for p = 2
        for (std::size_t flat = 0; flat < s; ++flat) {
            const double k2 = g.k_squared(g.wavevector(flat));
            for (int j = 0; j < g.d; ++j)
                acc.coeffs[j * s + flat] = par.mu * k2 * u.coeffs[j * s + flat];
        }
    } else {
        auto t_hat = detail::stress_band(g, st.grad, par.p);
        detail::add_divergence(g, t_hat, -par.mu, acc);
    }

    auto b_hat = detail::advection_band(g, st.vel, st.grad);
    for (int j = 0; j < g.d; ++j)
        for (std::size_t flat = 0; flat < s; ++flat)
            acc.coeffs[j * s + flat] += b_hat[j][flat];

    if (need_c) {
        auto c_hat = detail::damping_band(g, st.vel, par.r);
        for (int j = 0; j < g.d; ++j)
            for (std::size_t flat = 0; flat < s; ++flat)
                acc.coeffs[j * s + flat] += par.beta * c_hat[j][flat];
    }
    return leray_project(acc);
}

// drift_G(u) minus the Stokes part mu |k|^2 u; this is the explicitly
// integrated remainder in the IMEX stepper. Identically zero A-contribution
// for p = 2.
inline SpectralField drift_remainder(const SpectralField& u,
                                     const PhysParams& par) {
    par.validate();
    const GridSpec& g = u.grid;
    const std::size_t s = g.spectral_size();
    const bool need_c = par.beta != 0.0;
    auto st = detail::padded_state(u, true, true);

    SpectralField acc(g);
    if (par.p != 2.0) {
        auto t_hat = detail::stress_band(g, st.grad, par.p);
        detail::add_divergence(g, t_hat, -par.mu, acc);
        for (std::size_t flat = 0; flat < s; ++flat) {
            const double k2 = g.k_squared(g.wavevector(flat));
            for (int j = 0; j < g.d; ++j)
                acc.coeffs[j * s + flat] -= par.mu * k2 * u.coeffs[j * s + flat];
        }
    }
    auto b_hat = detail::advection_band(g, st.vel, st.grad);
    for (int j = 0; j < g.d; ++j)
        for (std::size_t flat = 0; flat < s; ++flat)
            acc.coeffs[j * s + flat] += b_hat[j][flat];
    if (need_c) {
        auto c_hat = detail::damping_band(g, st.vel, par.r);
        for (int j = 0; j < g.d; ++j)
            for (std::size_t flat = 0; flat < s; ++flat)
                acc.coeffs[j * s + flat] += par.beta * c_hat[j][flat];
    }
    return leray_project(acc);
}

// Monotonicity shift for the r > 4 regime,
//   eta = (r-4)/(2 mu (r-2)) * (2/(beta mu (r-2)))^(2/(r-4)).
// The exponent is the damping exponent r: the constant comes from the Young
// step that splits |v|^2|u-v|^2 against the |v|^{r-2}|u-v|^2 damping term.
inline double constant_eta(const PhysParams& par) {
    if (par.r <= 4)
        throw std::invalid_argument(
            "constant_eta: defined for r > 4 only (r = 4 needs 2*beta*mu >= 1 "
            "and no shift)");
    if (par.beta <= 0 || par.mu <= 0)
        throw std::invalid_argument("constant_eta: requires beta > 0 and mu > 0");
    const double r = par.r;
    return (r - 4) / (2 * par.mu * (r - 2)) *
           std::pow(2.0 / (par.beta * par.mu * (r - 2)), 2.0 / (r - 4));
}

// Local-monotonicity shift,
//   eta_tilde = C^(2p/(2p-d)) * ((2p-d)/(2p)) * (d/(mu p))^(d/(2p-d)),
// with C the Gagliardo-Nirenberg interpolation constant.
inline double constant_eta_tilde(const PhysParams& par, double c_gn) {
    if (par.p <= 0.5 * par.d)
        throw std::invalid_argument("constant_eta_tilde: requires p > d/2");
    if (c_gn <= 0)
        throw std::invalid_argument("constant_eta_tilde: requires C_GN > 0");
    const double p = par.p, d = par.d;
    return std::pow(c_gn, 2 * p / (2 * p - d)) * ((2 * p - d) / (2 * p)) *
           std::pow(d / (par.mu * p), d / (2 * p - d));
}

// Aliasing diagnostic for the pointwise nonlinear evaluations: the powers
// (1+|grad u|^2)^((p-2)/2) and |u|^(r-2) are not trigonometric polynomials
// for non-integer exponents, so their padded-grid products alias into the
// retained band. This re-evaluates the operators with the band embedded in a
// twice-refined grid and reports the relative H-norm discrepancy of the
// shared coefficients.
struct RefinementReport {
    double op_a_rel_diff = 0;
    double op_c_rel_diff = 0;
};

inline SpectralField embed_refined(const SpectralField& u) {
    GridSpec fine(2 * u.grid.n, u.grid.d, u.grid.pad_factor);
    SpectralField out(fine);
    const std::size_t s = u.grid.spectral_size();
    for (int c = 0; c < u.grid.d; ++c)
        for (std::size_t flat = 0; flat < s; ++flat) {
            const auto k = u.grid.wavevector(flat);
            if (u.grid.on_nyquist(k)) continue;
            out.at(c, k) = u.coeffs[c * s + flat];
        }
    return out;
}

inline RefinementReport refinement_diagnostic(const SpectralField& u,
                                              const PhysParams& par) {
    RefinementReport rep;
    auto fine_u = embed_refined(u);
    auto diff_on_band = [&](const SpectralField& coarse,
                            const SpectralField& fine) {
        const std::size_t s = u.grid.spectral_size();
        double num = 0, den = 0;
        for (int c = 0; c < u.grid.d; ++c)
            for (std::size_t flat = 0; flat < s; ++flat) {
                const auto k = u.grid.wavevector(flat);
                if (u.grid.on_nyquist(k)) continue;
                const Complex a = coarse.coeffs[c * s + flat];
                const Complex b = fine.at(c, k);
                num += std::norm(a - b);
                den += std::norm(b);
            }
        return den > 0 ? std::sqrt(num / den) : 0.0;
    };
    rep.op_a_rel_diff = diff_on_band(op_A(u, par.p), op_A(fine_u, par.p));
    rep.op_c_rel_diff = diff_on_band(op_C(u, par.r), op_C(fine_u, par.r));
    return rep;
}

}  // namespace mspde
