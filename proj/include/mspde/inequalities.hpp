#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "operators.hpp"
#include "parallel.hpp"

namespace mspde {

// Outcome of one randomized inequality check. Margins are normalized by the
// check's natural magnitude (documented per check below); pass means every
// sampled margin stayed above -tol.
struct CheckReport {
    std::string name;
    std::size_t samples = 0;
    double tol = 1e-9;
    double worst_margin = std::numeric_limits<double>::infinity();
    std::uint64_t worst_seed = 0;  // sample stream id of the worst margin
    std::size_t violations = 0;
    bool pass = true;
    std::optional<double> homogeneity_degree;  // of the raw margin, if exact
    std::string notes;

    void absorb(double normalized_margin, std::uint64_t sample_id) {
        ++samples;
        if (normalized_margin < worst_margin) {
            worst_margin = normalized_margin;
            worst_seed = sample_id;
        }
        if (normalized_margin < -tol) ++violations;
        pass = violations == 0;
    }
};

// Field ensemble for the randomized checks: spectrum decay alternates over
// {2, 3}, amplitudes log-uniform in [1e-2, 1e1]. Every sample is keyed by
// (master seed, sample index, salt) so batches parallelize reproducibly.
struct FieldEnsemble {
    GridSpec grid;
    std::uint64_t master_seed = 1;
    double amp_lo = 1e-2;
    double amp_hi = 1e1;

    SpectralField draw(std::uint64_t sample, std::uint64_t salt) const {
        Rng rng(master_seed ^ (0x9e3779b97f4a7c15ULL * (salt + 1)), sample);
        const double decay = (rng.next_u64() & 1) ? 2.0 : 3.0;
        const double amp = rng.log_uniform(amp_lo, amp_hi);
        const std::uint64_t field_seed = rng.next_u64();
        return random_field(grid, field_seed, decay, amp);
    }
};

namespace ineq {

inline double guard(double scale) { return std::max(scale, 1e-30); }

// ---- single-sample margin evaluators ----------------------------------------
// Each returns the list of normalized margins for one sampled configuration.
// falsify > 1 inflates the bound side (canary mode); the default 1 is the
// honest inequality.

// 2 <(1+|grad u|^2)^{(p-2)/2} grad u, grad u> >= |grad u|_H^2 + |grad u|_Lp^p
// scale = max(LHS, RHS)
inline std::vector<double> coercivity_margins(const SpectralField& u, double p,
                                              double falsify = 1.0) {
    const GridSpec& g = u.grid;
    const auto grad = gradient_padded(u);
    const std::size_t m = g.padded_size();
    const double q = 0.5 * (p - 2.0);
    double diss = 0, v2 = 0, vp = 0;
    for (std::size_t x = 0; x < m; ++x) {
        double g2 = 0;
        for (const auto& e : grad) g2 += e[x] * e[x];
        diss += pow_fast(1.0 + g2, q) * g2;
        v2 += g2;
        vp += pow_fast(g2, 0.5 * p);
    }
    const double w = g.cell_volume_padded();
    const double lhs = 2 * diss * w;
    const double rhs = falsify * (v2 + vp) * w;
    return {(lhs - rhs) / guard(std::max(std::abs(lhs), std::abs(rhs)))};
}

// strong monotonicity of A (mu = 1 raw operator):
//   S := <A(u)-A(v), u-v>
//   m1: S >= 1/2 |grad w|^2 + 1/4 || |grad u|^{(p-2)/2} grad w ||^2
//                           + 1/4 || |grad v|^{(p-2)/2} grad w ||^2
//   m2: S >= 1/2 ||w||_V2^2 + c_p ||w||_Vp^p,  c_p = 2^{1-p} (p>=3), 1/4 else
// scale = max(LHS, RHS) per margin
inline std::vector<double> a_monotonicity_margins(const SpectralField& u,
                                                  const SpectralField& v,
                                                  double p,
                                                  double falsify = 1.0) {
    check_same_grid(u.grid, v.grid);
    const GridSpec& g = u.grid;
    const auto gu = gradient_padded(u);
    const auto gv = gradient_padded(v);
    const std::size_t m = g.padded_size();
    const int dd = g.d * g.d;
    const double q = 0.5 * (p - 2.0);
    double S = 0, w_v2 = 0, w_vp = 0, xu = 0, xv = 0;
    for (std::size_t x = 0; x < m; ++x) {
        double gu2 = 0, gv2 = 0, gw2 = 0;
        for (int e = 0; e < dd; ++e) {
            const double a = gu[e][x], b = gv[e][x], w = a - b;
            gu2 += a * a;
            gv2 += b * b;
            gw2 += w * w;
        }
        const double cu = pow_fast(1.0 + gu2, q);
        const double cv = pow_fast(1.0 + gv2, q);
        double dot = 0;
        for (int e = 0; e < dd; ++e) {
            const double a = gu[e][x], b = gv[e][x];
            dot += (cu * a - cv * b) * (a - b);
        }
        S += dot;
        w_v2 += gw2;
        w_vp += pow_fast(gw2, 0.5 * p);
        xu += pow_fast(gu2, q) * gw2;
        xv += pow_fast(gv2, q) * gw2;
    }
    const double w = g.cell_volume_padded();
    S *= w;
    w_v2 *= w;
    w_vp *= w;
    xu *= w;
    xv *= w;
    const double cp = (p >= 3) ? std::pow(2.0, 1.0 - p) : 0.25;
    const double rhs1 = falsify * (0.5 * w_v2 + 0.25 * xu + 0.25 * xv);
    const double rhs2 = falsify * (0.5 * w_v2 + cp * w_vp);
    return {(S - rhs1) / guard(std::max(std::abs(S), std::abs(rhs1))),
            (S - rhs2) / guard(std::max(std::abs(S), std::abs(rhs2)))};
}

// monotonicity of C:
//   D := <C(u)-C(v), u-v>  (padded quadrature; test fields divergence-free)
//   m1: D >= 1/2 X + 1/2 Y with X = || |u|^{(r-2)/2} w ||^2, Y likewise in v
//   m2: D >= 2^{-(r-2)} ||w||_Lr^r
//   m3: kappa (X+Y) >= ||w||_Lr^r with kappa = 2^{r-3} (r>=3), 1 else
// scale = max(LHS, RHS) per margin; the raw margins are homogeneous of
// degree r under (u,v) -> (cu, cv)
inline std::vector<double> c_monotonicity_margins(const SpectralField& u,
                                                  const SpectralField& v,
                                                  double r,
                                                  double falsify = 1.0) {
    check_same_grid(u.grid, v.grid);
    const GridSpec& g = u.grid;
    const auto vu = velocity_padded(u);
    const auto vv = velocity_padded(v);
    const std::size_t m = g.padded_size();
    const double q = 0.5 * (r - 2.0);
    double D = 0, X = 0, Y = 0, wr = 0;
    for (std::size_t x = 0; x < m; ++x) {
        double u2 = 0, v2 = 0, w2 = 0;
        for (int c = 0; c < g.d; ++c) {
            const double a = vu[c][x], b = vv[c][x], w = a - b;
            u2 += a * a;
            v2 += b * b;
            w2 += w * w;
        }
        const double cu = pow_fast(u2, q), cv = pow_fast(v2, q);
        double dot = 0;
        for (int c = 0; c < g.d; ++c)
            dot += (cu * vu[c][x] - cv * vv[c][x]) * (vu[c][x] - vv[c][x]);
        D += dot;
        X += cu * w2;
        Y += cv * w2;
        wr += pow_fast(w2, 0.5 * r);
    }
    const double w = g.cell_volume_padded();
    D *= w;
    X *= w;
    Y *= w;
    wr *= w;
    const double kappa = (r >= 3) ? std::pow(2.0, r - 3.0) : 1.0;
    const double rhs1 = falsify * 0.5 * (X + Y);
    const double rhs2 = falsify * std::pow(2.0, -(r - 2.0)) * wr;
    const double lhs3 = kappa * (X + Y);
    const double rhs3 = falsify * wr;
    return {(D - rhs1) / guard(std::max(std::abs(D), std::abs(rhs1))),
            (D - rhs2) / guard(std::max(std::abs(D), std::abs(rhs2))),
            (lhs3 - rhs3) / guard(std::max(std::abs(lhs3), std::abs(rhs3)))};
}

// <C(u)-C(v), w> <= (r-1)(|u|_r + |v|_r)^{r-2} |u-v|_r |w|_r
// scale = max(LHS, RHS); raw margin homogeneous of degree r
inline std::vector<double> c_lipschitz_margins(const SpectralField& u,
                                               const SpectralField& v,
                                               const SpectralField& w, double r,
                                               double falsify = 1.0) {
    check_same_grid(u.grid, v.grid);
    check_same_grid(u.grid, w.grid);
    const GridSpec& g = u.grid;
    const auto vu = velocity_padded(u);
    const auto vv = velocity_padded(v);
    const auto vw = velocity_padded(w);
    const std::size_t m = g.padded_size();
    const double q = 0.5 * (r - 2.0);
    double lhs_acc = 0, ur = 0, vr = 0, dr = 0, wr = 0;
    for (std::size_t x = 0; x < m; ++x) {
        double u2 = 0, v2 = 0, d2 = 0, w2 = 0;
        for (int c = 0; c < g.d; ++c) {
            const double a = vu[c][x], b = vv[c][x], ww = vw[c][x];
            u2 += a * a;
            v2 += b * b;
            d2 += (a - b) * (a - b);
            w2 += ww * ww;
        }
        const double cu = pow_fast(u2, q), cv = pow_fast(v2, q);
        double dot = 0;
        for (int c = 0; c < g.d; ++c)
            dot += (cu * vu[c][x] - cv * vv[c][x]) * vw[c][x];
        lhs_acc += dot;
        ur += pow_fast(u2, 0.5 * r);
        vr += pow_fast(v2, 0.5 * r);
        dr += pow_fast(d2, 0.5 * r);
        wr += pow_fast(w2, 0.5 * r);
    }
    const double cell = g.cell_volume_padded();
    const double lhs = std::abs(lhs_acc * cell);
    const double inv_r = 1.0 / r;
    const double nu = std::pow(ur * cell, inv_r), nv = std::pow(vr * cell, inv_r);
    const double nd = std::pow(dr * cell, inv_r), nw = std::pow(wr * cell, inv_r);
    const double rhs =
        falsify * (r - 1) * std::pow(nu + nv, r - 2.0) * nd * nw;
    return {(rhs - lhs) / guard(std::max(lhs, std::abs(rhs)))};
}

// |b(u, v, u)| <= |u|_Lr^{r/(r-2)} |u|_H^{(r-4)/(r-2)} |v|_V2   (r > 4)
// scale = max(LHS, RHS); raw margin homogeneous of degree 3
inline std::vector<double> b_interpolation_margins(const SpectralField& u,
                                                   const SpectralField& v,
                                                   double r,
                                                   double falsify = 1.0) {
    if (r <= 4)
        throw std::invalid_argument("b_interpolation: requires r > 4");
    const double lhs = std::abs(trilinear_b(u, v, u));
    const double rhs = falsify * std::pow(norm_lr(u, r), r / (r - 2.0)) *
                       std::pow(norm_h(u), (r - 4.0) / (r - 2.0)) * norm_v2(v);
    return {(rhs - lhs) / guard(std::max(lhs, std::abs(rhs)))};
}

// Quadrature route for the drift difference pairing,
//   <G(u)-G(v), u-v> = mu S + beta D - b(w, w, v),   w = u - v,
// evaluated in one sweep over the shared padded data. Exactly equal (to
// roundoff) to pairing(drift_G(u)-drift_G(v), u-v); the identity is asserted
// on a subsample by the suite drivers and in the unit tests.
struct DriftGapTerms {
    double S = 0;       // <A(u)-A(v), w>
    double D = 0;       // <C(u)-C(v), w>
    double b_www_v = 0; // b(w, w, v)
    double w_h2 = 0;    // ||w||_H^2
    double w_v22 = 0;   // ||w||_V2^2
    double v_vp_raw = 0; // int |grad v|^p
    double pairing(const PhysParams& par) const {
        return par.mu * S + par.beta * D - b_www_v;
    }
};

inline DriftGapTerms drift_gap_terms(const SpectralField& u,
                                     const SpectralField& v,
                                     const PhysParams& par) {
    check_same_grid(u.grid, v.grid);
    const GridSpec& g = u.grid;
    const auto gu = gradient_padded(u);
    const auto gv = gradient_padded(v);
    const auto vu = velocity_padded(u);
    const auto vv = velocity_padded(v);
    const std::size_t m = g.padded_size();
    const int d = g.d, dd = d * d;
    const double qa = 0.5 * (par.p - 2.0);
    const double qc = 0.5 * (par.r - 2.0);
    DriftGapTerms t;
    for (std::size_t x = 0; x < m; ++x) {
        double gu2 = 0, gv2 = 0, gw2 = 0;
        for (int e = 0; e < dd; ++e) {
            const double a = gu[e][x], b = gv[e][x], w = a - b;
            gu2 += a * a;
            gv2 += b * b;
            gw2 += w * w;
        }
        const double cu = pow_fast(1.0 + gu2, qa);
        const double cv = pow_fast(1.0 + gv2, qa);
        double sdot = 0;
        for (int e = 0; e < dd; ++e) {
            const double a = gu[e][x], b = gv[e][x];
            sdot += (cu * a - cv * b) * (a - b);
        }
        t.S += sdot;
        t.w_v22 += gw2;
        t.v_vp_raw += pow_fast(gv2, 0.5 * par.p);

        double u2 = 0, v2 = 0, w2 = 0;
        for (int c = 0; c < d; ++c) {
            const double a = vu[c][x], b = vv[c][x], w = a - b;
            u2 += a * a;
            v2 += b * b;
            w2 += w * w;
        }
        t.w_h2 += w2;
        const double du = pow_fast(u2, qc), dv = pow_fast(v2, qc);
        double cdot = 0;
        for (int c = 0; c < d; ++c)
            cdot += (du * vu[c][x] - dv * vv[c][x]) * (vu[c][x] - vv[c][x]);
        t.D += cdot;

        // b(w, w, v) = sum_j (w . grad w_j) v_j with grad w = gu - gv
        double bdot = 0;
        for (int j = 0; j < d; ++j) {
            double adv = 0;
            for (int i = 0; i < d; ++i)
                adv += (vu[i][x] - vv[i][x]) * (gu[i * d + j][x] - gv[i * d + j][x]);
            bdot += adv * vv[j][x];
        }
        t.b_www_v += bdot;
    }
    const double w = g.cell_volume_padded();
    t.S *= w;
    t.D *= w;
    t.b_www_v *= w;
    t.w_h2 *= w;
    t.w_v22 *= w;
    t.v_vp_raw *= w;
    return t;
}

// global monotonicity (r > 4 with the eta shift, or r = 4 with 2 beta mu >= 1):
//   m1: <G(u)-G(v), w> + eta ||w||_H^2 >= 0
//   m2 (r > 4): the proof surplus, LHS >= surplus_factor * mu ||w||_V2^2
// eta_factor scales eta and surplus_factor the guaranteed surplus (the proof
// gives 1/2); canaries falsify one of them. scale = sum of |constituent terms|
inline std::vector<double> global_monotonicity_margins(
    const SpectralField& u, const SpectralField& v, const PhysParams& par,
    double eta_factor = 1.0, double surplus_factor = 0.5) {
    if (par.regime() != MonotonicityRegime::Global)
        throw std::invalid_argument(
            "global_monotonicity: parameters are not in the global regime");
    const auto t = drift_gap_terms(u, v, par);
    const double eta = (par.r > 4) ? eta_factor * constant_eta(par) : 0.0;
    const double gap = t.pairing(par);
    const double scale = guard(std::abs(par.mu * t.S) + std::abs(par.beta * t.D) +
                               std::abs(t.b_www_v) + eta * t.w_h2);
    std::vector<double> out{(gap + eta * t.w_h2) / scale};
    if (par.r > 4)
        out.push_back(
            (gap + eta * t.w_h2 - surplus_factor * par.mu * t.w_v22) / scale);
    return out;
}

// local monotonicity (p >= d/2 + 1, r >= 2), pointwise-in-v form:
//   <G(u)-G(v), w> + eta_tilde ||v||_Vp^{2p/(2p-d)} ||w||_H^2 >= 0
// c_gn comes from estimate_gn_constant (caller applies the safety factor);
// scale = sum of |constituent terms|. surplus_factor > 0 appends the canary
// margin LHS >= surplus_factor * mu ||w||_V2^2 (not part of the honest
// check: its validity depends on the sampled constant being sharp).
inline std::vector<double> local_monotonicity_margins(
    const SpectralField& u, const SpectralField& v, const PhysParams& par,
    double c_gn, double eta_factor = 1.0, double surplus_factor = 0.0) {
    if (par.regime() == MonotonicityRegime::None)
        throw std::invalid_argument(
            "local_monotonicity: parameters admit no monotonicity regime");
    const auto t = drift_gap_terms(u, v, par);
    const double eta_t = eta_factor * constant_eta_tilde(par, c_gn);
    const double v_vp = std::pow(t.v_vp_raw, 1.0 / par.p);
    const double shift =
        eta_t * std::pow(v_vp, 2 * par.p / (2 * par.p - par.d)) * t.w_h2;
    const double gap = t.pairing(par);
    const double scale = guard(std::abs(par.mu * t.S) + std::abs(par.beta * t.D) +
                               std::abs(t.b_www_v) + shift);
    std::vector<double> out{(gap + shift) / scale};
    if (surplus_factor > 0)
        out.push_back((gap + shift - surplus_factor * par.mu * t.w_v22) / scale);
    return out;
}

}  // namespace ineq

// ---- single-sample wrappers (CheckReport form) --------------------------------

inline CheckReport make_single_report(const std::string& name,
                                      const std::vector<double>& margins,
                                      double tol = 1e-9) {
    CheckReport rep;
    rep.name = name;
    rep.tol = tol;
    for (double m : margins) rep.absorb(m, 0);
    rep.samples = 1;
    return rep;
}

inline CheckReport check_coercivity(const SpectralField& u, double p,
                                    double tol = 1e-9) {
    if (p < 2) throw std::invalid_argument("check_coercivity: p must be >= 2");
    return make_single_report("coercivity", ineq::coercivity_margins(u, p), tol);
}

inline CheckReport check_A_strong_monotonicity(const SpectralField& u,
                                               const SpectralField& v, double p,
                                               double tol = 1e-9) {
    if (p < 2)
        throw std::invalid_argument("check_A_strong_monotonicity: p >= 2");
    return make_single_report("a_strong_monotonicity",
                              ineq::a_monotonicity_margins(u, v, p), tol);
}

inline CheckReport check_C_monotonicity(const SpectralField& u,
                                        const SpectralField& v, double r,
                                        double tol = 1e-9) {
    if (r < 2) throw std::invalid_argument("check_C_monotonicity: r >= 2");
    return make_single_report("c_monotonicity",
                              ineq::c_monotonicity_margins(u, v, r), tol);
}

inline CheckReport check_C_lipschitz(const SpectralField& u,
                                     const SpectralField& v,
                                     const SpectralField& w, double r,
                                     double tol = 1e-9) {
    if (r < 2) throw std::invalid_argument("check_C_lipschitz: r >= 2");
    return make_single_report("c_lipschitz",
                              ineq::c_lipschitz_margins(u, v, w, r), tol);
}

inline CheckReport check_B_interpolation_bound(const SpectralField& u,
                                               const SpectralField& v, double r,
                                               double tol = 1e-9) {
    return make_single_report("b_interpolation",
                              ineq::b_interpolation_margins(u, v, r), tol);
}

inline CheckReport check_global_monotonicity(const SpectralField& u,
                                             const SpectralField& v,
                                             const PhysParams& par,
                                             double tol = 1e-9) {
    return make_single_report("global_monotonicity",
                              ineq::global_monotonicity_margins(u, v, par), tol);
}

inline CheckReport check_local_monotonicity(const SpectralField& u,
                                            const SpectralField& v,
                                            const PhysParams& par, double c_gn,
                                            double tol = 1e-9) {
    return make_single_report(
        "local_monotonicity",
        ineq::local_monotonicity_margins(u, v, par, c_gn), tol);
}

// hemicontinuity along a line segment: phi(lambda) = <G(u+lambda w)-G(u), v>
// must vanish linearly, i.e. the difference quotients phi(lambda)/lambda form
// a Cauchy sequence whose tail decays with lambda. The pass criterion bounds
// the final Cauchy gap by a fraction of the total quotient spread, which is
// immune to sign cancellations hitting an individual grid point; the modulus
// sup |phi|/lambda is reported.
inline CheckReport check_hemicontinuity(const SpectralField& u,
                                        const SpectralField& w,
                                        const SpectralField& v,
                                        const PhysParams& par,
                                        const std::vector<double>& lambda_grid,
                                        double tol = 1e-9) {
    if (lambda_grid.size() < 3)
        throw std::invalid_argument("check_hemicontinuity: need >= 3 lambdas");
    for (std::size_t i = 0; i + 1 < lambda_grid.size(); ++i)
        if (!(lambda_grid[i] > lambda_grid[i + 1]) || lambda_grid.back() <= 0)
            throw std::invalid_argument(
                "check_hemicontinuity: lambda grid must decrease to 0+");
    CheckReport rep;
    rep.name = "hemicontinuity";
    rep.tol = tol;
    const auto gu = drift_G(u, par);
    std::vector<double> quotients;
    double modulus = 0;
    for (double lam : lambda_grid) {
        SpectralField shifted = u;
        SpectralField lw = w;
        lw *= lam;
        shifted += lw;
        const double phi = pairing(drift_G(shifted, par) - gu, v);
        quotients.push_back(phi / lam);
        modulus = std::max(modulus, std::abs(phi) / lam);
    }
    const std::size_t n = quotients.size();
    const double last = quotients.back();
    const double scale = ineq::guard(std::abs(last) + modulus);
    double max_gap = 0;
    for (double q : quotients) max_gap = std::max(max_gap, std::abs(q - last));
    const double final_gap = std::abs(quotients[n - 2] - last);
    // for a linear tail, final_gap / max_gap ~ lambda_{n-1} / lambda_0 << 0.45
    const double margin =
        (0.45 * (max_gap + tol * scale) - final_gap) / scale;
    rep.absorb(margin, 0);
    rep.notes = "modulus=" + std::to_string(modulus);
    return rep;
}

// ---- Gagliardo-Nirenberg constant estimation -----------------------------------

struct GnEstimate {
    double constant = 0;      // sampled lower bound of the discrete constant
    double p = 2;
    SpectralField extremizer; // field attaining the bound
};

// ratio ||w||^2_{L^q} / (||w||_V2^{d/p} ||w||_H^{(2p-d)/p}), q = 2p/(p-1);
// scaling-invariant (homogeneity degree 0)
inline double gn_ratio(const SpectralField& w, double p) {
    const double denom = std::pow(norm_v2(w), w.grid.d / p) *
                         std::pow(norm_h(w), (2 * p - w.grid.d) / p);
    if (denom < 1e-14) return 0.0;
    const double q = 2 * p / (p - 1);
    const double nq = std::pow(raw_power_lr(w, q), 1.0 / q);
    return nq * nq / denom;
}

// Sampled lower bound of the best constant in
//   ||w||^2_{L^{2p/(p-1)}} <= C ||w||_V2^{d/p} ||w||_H^{(2p-d)/p},
// refined by randomized coordinate ascent on the Fourier coefficients.
// Canonical single-mode starts guarantee the closed-form single-mode ratio
// is always reached.
inline GnEstimate estimate_gn_constant(const GridSpec& grid, double p,
                                       std::size_t n_samples = 64,
                                       std::size_t n_opt_steps = 200,
                                       std::uint64_t seed = 1) {
    if (p <= 0.5 * grid.d)
        throw std::invalid_argument("estimate_gn_constant: requires p > d/2");
    Rng rng(seed, 0xC0FFEE);
    GnEstimate best;
    best.p = p;

    std::vector<SpectralField> starts;
    {
        SpectralField m1(grid);
        m1.at(0, {0, 1, 0}) = Complex(0, -0.5);
        m1.at(0, {0, -1, 0}) = Complex(0, 0.5);  // (sin x2, 0)
        starts.push_back(m1);
        SpectralField m2(grid);
        m2.at(1, {1, 0, 0}) = Complex(0, -0.5);
        m2.at(1, {-1, 0, 0}) = Complex(0, 0.5);  // (0, sin x1)
        starts.push_back(m2);
    }
    for (std::size_t i = 0; i < n_samples; ++i)
        starts.push_back(random_field(grid, rng.next_u64(),
                                      rng.uniform(1.5, 3.0), 1.0));

    for (auto& s : starts) {
        const double r0 = gn_ratio(s, p);
        if (r0 > best.constant) {
            best.constant = r0;
            best.extremizer = s;
        }
    }

    // randomized ascent from the best start
    SpectralField cur = best.extremizer;
    double cur_ratio = best.constant;
    const std::size_t nmodes = grid.spectral_size();
    for (std::size_t it = 0; it < n_opt_steps; ++it) {
        SpectralField cand = cur;
        const int comp = static_cast<int>(rng.uniform_index(grid.d));
        const std::size_t flat = rng.uniform_index(nmodes);
        const double mag = 0.25 * std::max(max_abs_coeff(cur), 1e-3);
        cand.component(comp)[flat] +=
            Complex(rng.gaussian(), rng.gaussian()) * mag;
        enforce_hermitian(cand);
        cand.component(0)[grid.flat_index({0, 0, 0})] = {0, 0};
        cand.component(grid.d - 1)[grid.flat_index({0, 0, 0})] = {0, 0};
        cand = leray_project(cand);
        const double r = gn_ratio(cand, p);
        if (r > cur_ratio) {
            cur_ratio = r;
            cur = cand;
        }
    }
    if (cur_ratio > best.constant) {
        best.constant = cur_ratio;
        best.extremizer = cur;
    }
    return best;
}

// ---- suite drivers ---------------------------------------------------------------

struct SuiteConfig {
    GridSpec grid;
    std::size_t n_samples = 10000;
    std::uint64_t seed = 1;
    double tol = 1e-9;
    unsigned workers = 1;
    std::size_t operator_route_stride = 64;  // identity subcheck cadence
};

namespace ineq {

template <typename PerSample>
CheckReport run_suite(const std::string& name, const SuiteConfig& cfg,
                      std::optional<double> homogeneity, PerSample&& per) {
    std::vector<std::vector<double>> all(cfg.n_samples);
    parallel_for(cfg.n_samples, cfg.workers,
                 [&](std::size_t i) { all[i] = per(i); });
    CheckReport rep;
    rep.name = name;
    rep.tol = cfg.tol;
    rep.homogeneity_degree = homogeneity;
    for (std::size_t i = 0; i < cfg.n_samples; ++i) {
        double worst = std::numeric_limits<double>::infinity();
        for (double m : all[i]) worst = std::min(worst, m);
        rep.absorb(worst, i);
    }
    rep.samples = cfg.n_samples;
    return rep;
}

}  // namespace ineq

inline CheckReport run_coercivity_check(const SuiteConfig& cfg, double p,
                                        double falsify = 1.0) {
    FieldEnsemble ens{cfg.grid, cfg.seed};
    auto rep = ineq::run_suite(
        "coercivity_p" + std::to_string(p), cfg, std::nullopt,
        [&](std::size_t i) {
            return ineq::coercivity_margins(ens.draw(i, 1), p, falsify);
        });
    rep.notes = "scale=max(|LHS|,|RHS|)";
    return rep;
}

inline CheckReport run_a_monotonicity_check(const SuiteConfig& cfg, double p,
                                            double falsify = 1.0) {
    FieldEnsemble ens{cfg.grid, cfg.seed};
    auto rep = ineq::run_suite(
        "a_strong_monotonicity_p" + std::to_string(p), cfg, std::nullopt,
        [&](std::size_t i) {
            return ineq::a_monotonicity_margins(ens.draw(i, 1), ens.draw(i, 2),
                                                p, falsify);
        });
    rep.notes = "scale=max(|LHS|,|RHS|)";
    return rep;
}

inline CheckReport run_c_monotonicity_check(const SuiteConfig& cfg, double r,
                                            double falsify = 1.0) {
    FieldEnsemble ens{cfg.grid, cfg.seed};
    auto rep = ineq::run_suite(
        "c_monotonicity_r" + std::to_string(r), cfg, r, [&](std::size_t i) {
            return ineq::c_monotonicity_margins(ens.draw(i, 1), ens.draw(i, 2),
                                                r, falsify);
        });
    rep.notes = "scale=max(|LHS|,|RHS|); raw margins homogeneous of degree r";
    return rep;
}

inline CheckReport run_c_lipschitz_check(const SuiteConfig& cfg, double r,
                                         double falsify = 1.0) {
    FieldEnsemble ens{cfg.grid, cfg.seed};
    auto rep = ineq::run_suite(
        "c_lipschitz_r" + std::to_string(r), cfg, r, [&](std::size_t i) {
            return ineq::c_lipschitz_margins(ens.draw(i, 1), ens.draw(i, 2),
                                             ens.draw(i, 3), r, falsify);
        });
    rep.notes = "scale=max(|LHS|,|RHS|); raw margin homogeneous of degree r";
    return rep;
}

inline CheckReport run_b_interpolation_check(const SuiteConfig& cfg, double r,
                                             double falsify = 1.0) {
    FieldEnsemble ens{cfg.grid, cfg.seed};
    auto rep = ineq::run_suite(
        "b_interpolation_r" + std::to_string(r), cfg, 3.0, [&](std::size_t i) {
            return ineq::b_interpolation_margins(ens.draw(i, 1), ens.draw(i, 2),
                                                 r, falsify);
        });
    rep.notes = "scale=max(|LHS|,|RHS|); raw margin homogeneous of degree 3";
    return rep;
}

inline CheckReport run_global_monotonicity_check(const SuiteConfig& cfg,
                                                 const PhysParams& par,
                                                 double eta_factor = 1.0,
                                                 double surplus_factor = 0.5) {
    FieldEnsemble ens{cfg.grid, cfg.seed};
    auto rep = ineq::run_suite(
        "global_monotonicity_r" + std::to_string(par.r), cfg, std::nullopt,
        [&](std::size_t i) {
            auto u = ens.draw(i, 1);
            auto v = ens.draw(i, 2);
            auto margins = ineq::global_monotonicity_margins(
                u, v, par, eta_factor, surplus_factor);
            if (cfg.operator_route_stride &&
                i % cfg.operator_route_stride == 0) {
                // suite integrity: the quadrature route must reproduce the
                // operator pairing; a mismatch is a defect, not a margin
                const auto t = ineq::drift_gap_terms(u, v, par);
                const double via_ops =
                    pairing(drift_G(u, par) - drift_G(v, par), u - v);
                const double scale = ineq::guard(
                    std::abs(par.mu * t.S) + std::abs(par.beta * t.D) +
                    std::abs(t.b_www_v));
                if (std::abs(via_ops - t.pairing(par)) > 1e-8 * scale)
                    throw std::runtime_error(
                        "drift gap quadrature/operator routes disagree at "
                        "sample " +
                        std::to_string(i));
            }
            return margins;
        });
    rep.notes = "scale=sum(|terms|); margin uses <G(u)-G(v),u-v> + eta|w|_H^2";
    return rep;
}

inline CheckReport run_local_monotonicity_check(const SuiteConfig& cfg,
                                                const PhysParams& par,
                                                double c_gn,
                                                double eta_factor = 1.0,
                                                double surplus_factor = 0.0) {
    FieldEnsemble ens{cfg.grid, cfg.seed};
    auto rep = ineq::run_suite(
        "local_monotonicity_p" + std::to_string(par.p) + "_r" +
            std::to_string(par.r),
        cfg, std::nullopt, [&](std::size_t i) {
            return ineq::local_monotonicity_margins(ens.draw(i, 1),
                                                    ens.draw(i, 2), par, c_gn,
                                                    eta_factor, surplus_factor);
        });
    rep.notes = "scale=sum(|terms|); C_GN=" + std::to_string(c_gn);
    return rep;
}

inline CheckReport run_hemicontinuity_check(const SuiteConfig& cfg,
                                            const PhysParams& par,
                                            const std::vector<double>& lambdas) {
    FieldEnsemble ens{cfg.grid, cfg.seed};
    CheckReport rep;
    rep.name = "hemicontinuity";
    rep.tol = cfg.tol;
    std::vector<CheckReport> subs(cfg.n_samples);
    parallel_for(cfg.n_samples, cfg.workers, [&](std::size_t i) {
        subs[i] = check_hemicontinuity(ens.draw(i, 1), ens.draw(i, 2),
                                       ens.draw(i, 3), par, lambdas, cfg.tol);
    });
    for (std::size_t i = 0; i < cfg.n_samples; ++i)
        rep.absorb(subs[i].worst_margin, i);
    rep.samples = cfg.n_samples;
    return rep;
}

// ---- adversarial canary ensembles -------------------------------------------------
//
// The eta/10 canaries must demonstrate that a falsified shift constant is
// detected. Random pairs rarely stress the Young steps behind eta, so the
// canary ensemble couples each random direction pair with an aligned
// advection response v ~ P[(w . grad) w] and scans amplitudes; every scanned
// pair counts as one sample.

struct CanaryReport {
    CheckReport report;
    double violation_fraction = 0;
};

namespace ineq {

inline SpectralField aligned_advection_response(const SpectralField& w) {
    auto b = op_B(w, w);
    const double nb = norm_h(b);
    if (nb < 1e-14) return b;
    b *= 1.0 / nb;
    return b;
}

}  // namespace ineq

template <typename MarginFn>
CanaryReport run_shift_canary(const std::string& name, const SuiteConfig& cfg,
                              MarginFn&& margins_for) {
    FieldEnsemble ens{cfg.grid, cfg.seed};
    const std::vector<double> w_scales{0.25, 0.5, 1.0, 2.0};
    const std::vector<double> v_scales{0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
    const std::size_t base = std::max<std::size_t>(1, cfg.n_samples /
                                                          (w_scales.size() *
                                                           v_scales.size()));
    std::vector<std::vector<double>> rows(base);
    parallel_for(base, cfg.workers, [&](std::size_t i) {
        auto w_pat = normalized(ens.draw(i, 11));
        auto v_dir = ineq::aligned_advection_response(w_pat);
        std::vector<double> margins;
        for (double cw : w_scales) {
            SpectralField w = w_pat;
            w *= cw;
            for (double cv : v_scales) {
                SpectralField v = v_dir;
                v *= cv;
                SpectralField u = v + w;
                const auto m = margins_for(u, v);
                margins.push_back(
                    *std::min_element(m.begin(), m.end()));
            }
        }
        rows[i] = std::move(margins);
    });
    CanaryReport out;
    out.report.name = name;
    out.report.tol = cfg.tol;
    std::size_t id = 0;
    for (const auto& row : rows)
        for (double m : row) out.report.absorb(m, id++);
    out.report.samples = id;
    out.violation_fraction =
        double(out.report.violations) / double(std::max<std::size_t>(1, id));
    return out;
}

inline CanaryReport run_global_monotonicity_canary(const SuiteConfig& cfg,
                                                   const PhysParams& par,
                                                   double eta_factor = 0.1) {
    return run_shift_canary(
        "canary_global_monotonicity", cfg,
        [&](const SpectralField& u, const SpectralField& v) {
            return ineq::global_monotonicity_margins(u, v, par, eta_factor);
        });
}

inline CanaryReport run_local_monotonicity_canary(const SuiteConfig& cfg,
                                                  const PhysParams& par,
                                                  double c_gn,
                                                  double eta_factor = 0.1) {
    return run_shift_canary(
        "canary_local_monotonicity", cfg,
        [&](const SpectralField& u, const SpectralField& v) {
            return ineq::local_monotonicity_margins(u, v, par, c_gn,
                                                    eta_factor);
        });
}

template <typename MarginFn>
CanaryReport run_bound_canary(const std::string& name, const SuiteConfig& cfg,
                              MarginFn&& margins_for) {
    FieldEnsemble ens{cfg.grid, cfg.seed};
    std::vector<std::vector<double>> rows(cfg.n_samples);
    parallel_for(cfg.n_samples, cfg.workers, [&](std::size_t i) {
        rows[i] = margins_for(ens, i);
    });
    CanaryReport out;
    out.report.name = name;
    out.report.tol = cfg.tol;
    std::size_t id = 0;
    for (const auto& row : rows)
        for (double m : row) out.report.absorb(m, id++);
    out.report.samples = id;
    out.violation_fraction =
        double(out.report.violations) / double(std::max<std::size_t>(1, id));
    return out;
}

// ---- pinned canary catalog ---------------------------------------------------
//
// Orientation guards: every check is re-run with a deliberately falsified
// constant and must report violations on >= 1% of samples. The factors below
// were chosen from measured ratio distributions so each falsified statement
// is genuinely false on the sampled ensemble.
//
// The eta and eta_tilde shifts themselves are never load-bearing here: on the
// mean-free torus ||grad w|| >= ||w||, and (in 2-D) <grad v, w (x) w> pairs
// only with the traceless strain of v, which caps the advection term at half
// the Holder bound used to derive the shifts. A 10x-falsified shift therefore
// still yields a true inequality for every parameter choice, no matter the
// ensemble. Those literal shift canaries are kept as diagnostics
// (expected_feasible = false); the vacuous-pass guard for the monotonicity
// checks is carried by falsifying the proof's guaranteed (mu/2)||w||_V2^2
// surplus instead.

struct CanaryOutcome {
    std::string name;
    double violation_fraction = 0;
    std::size_t samples = 0;
    bool expected_feasible = true;
    bool tripped() const { return violation_fraction >= 0.01; }
};

inline std::vector<CanaryOutcome> run_canary_catalog(SuiteConfig cfg) {
    std::vector<CanaryOutcome> out;
    auto push = [&](const std::string& name, const CheckReport& r,
                    bool feasible = true) {
        out.push_back({name,
                       double(r.violations) / double(std::max<std::size_t>(
                                                  1, r.samples)),
                       r.samples, feasible});
    };

    const std::vector<std::pair<double, double>> coercivity{
        {2.5, 1.25}, {3.0, 1.5}, {4.0, 2.01}};
    for (auto [p, f] : coercivity)
        push("coercivity_p" + std::to_string(p), run_coercivity_check(cfg, p, f));

    const std::vector<std::pair<double, double>> amono{
        {2.5, 1.30}, {3.0, 1.60}, {4.0, 2.02}, {5.0, 2.02}};
    for (auto [p, f] : amono)
        push("a_monotonicity_p" + std::to_string(p),
             run_a_monotonicity_check(cfg, p, f));

    const std::vector<std::pair<double, double>> cmono{
        {3.0, 1.05}, {4.0, 1.25}, {5.0, 1.30}, {6.0, 1.35}};
    for (auto [r, f] : cmono)
        push("c_monotonicity_r" + std::to_string(r),
             run_c_monotonicity_check(cfg, r, f));

    const std::vector<std::pair<double, double>> clip{
        {3.0, 0.19}, {4.0, 0.115}, {6.0, 0.06}};
    for (auto [r, f] : clip)
        push("c_lipschitz_r" + std::to_string(r),
             run_c_lipschitz_check(cfg, r, f));

    const std::vector<std::pair<double, double>> binterp{
        {5.0, 0.06}, {6.0, 0.058}, {8.0, 0.055}};
    for (auto [r, f] : binterp)
        push("b_interpolation_r" + std::to_string(r),
             run_b_interpolation_check(cfg, r, f));

    {
        PhysParams par{1.0, 1.0, 2.0, 6.0, 2};
        push("global_surplus_8mu",
             run_global_monotonicity_check(cfg, par, 1.0, 8.0));
        auto lit = run_global_monotonicity_canary(cfg, par, 0.1);
        push("global_eta_over_10 (diagnostic)", lit.report, false);
    }
    {
        PhysParams par{1.0, 0.0, 2.0, 2.0, 2};
        auto gn = estimate_gn_constant(cfg.grid, par.p, 64, 400, cfg.seed);
        const double c_eff = 1.5 * gn.constant;
        push("local_surplus_8mu",
             run_local_monotonicity_check(cfg, par, c_eff, 1.0, 8.0));
        auto lit = run_local_monotonicity_canary(cfg, par, c_eff, 0.1);
        push("local_eta_tilde_over_10 (diagnostic)", lit.report, false);
    }
    return out;
}

}  // namespace mspde
