#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "field.hpp"

namespace mspde {

enum class NoiseKind { AdditiveDiagonal, ProjectedMultiplicative };

inline const char* noise_kind_name(NoiseKind k) {
    return k == NoiseKind::AdditiveDiagonal ? "additive_diagonal"
                                            : "projected_multiplicative";
}

// One noise direction: a unit-H-norm divergence-free trigonometric mode
//   phi = N * e(kappa) * {cos, sin}(kappa . x),  N = sqrt(2 / (2pi)^d),
// where e is a unit polarization orthogonal to the wavevector kappa.
struct NoiseMode {
    std::array<int, 3> kappa{0, 1, 0};
    bool sine = true;
    double c = 1.0;  // coefficient c_k > 0
    std::array<double, 3> polarization{1, 0, 0};

    double k_squared() const {
        return double(kappa[0]) * kappa[0] + double(kappa[1]) * kappa[1] +
               double(kappa[2]) * kappa[2];
    }
};

// The two built-in noise families:
//   sigma_k(t, u) = c_k (a phi_k + b Pi_k u),  Pi_k u = <u, phi_k> phi_k.
// Additive diagonal is b = 0. Both satisfy the growth/Lipschitz hypotheses
// with the explicit constants declared below.
class NoiseModel {
  public:
    NoiseKind kind = NoiseKind::AdditiveDiagonal;
    std::vector<NoiseMode> modes;
    double a = 1.0;
    double b = 0.0;
    GridSpec grid;

    NoiseModel() = default;

    static NoiseModel make(const GridSpec& g, NoiseKind kind, int k_max,
                           const std::vector<double>& coeffs, double a,
                           double b) {
        if (kind == NoiseKind::AdditiveDiagonal && b != 0.0)
            throw std::invalid_argument("additive_diagonal requires b = 0");
        if (static_cast<int>(coeffs.size()) != k_max)
            throw std::invalid_argument("coefficient count must equal k_max");
        NoiseModel m;
        m.kind = kind;
        m.grid = g;
        m.a = a;
        m.b = b;
        m.modes = enumerate_modes(g, k_max);
        for (int k = 0; k < k_max; ++k) {
            if (coeffs[k] <= 0)
                throw std::invalid_argument("coefficients must be positive");
            m.modes[k].c = coeffs[k];
        }
        m.init_mode_cache();
        return m;
    }

    // coefficients c_k = c_decay^j shared within each (cos, sin) wavevector pair
    static NoiseModel from_decay(const GridSpec& g, NoiseKind kind, int k_max,
                                 double c_decay, double a, double b) {
        std::vector<double> coeffs(k_max);
        for (int k = 0; k < k_max; ++k)
            coeffs[k] = std::pow(c_decay, 1 + k / 2);
        return make(g, kind, k_max, coeffs, a, b);
    }

    int k_max() const { return static_cast<int>(modes.size()); }

    // spectral coefficients of phi_k: value at +kappa (conjugate at -kappa)
    // for each velocity component
    std::array<Complex, 3> mode_amplitude(int k) const {
        const auto& m = modes[k];
        const double n = std::sqrt(2.0 / grid.domain_volume());
        std::array<Complex, 3> amp{};
        const Complex phase = m.sine ? Complex(0, -0.5) : Complex(0.5, 0);
        for (int c = 0; c < grid.d; ++c)
            amp[c] = n * m.polarization[c] * phase;
        return amp;
    }

    // y_k = <u, phi_k>_H
    double mode_coefficient(const SpectralField& u, int k) const {
        const auto& m = modes[k];
        const auto amp = mode_amplitude(k);
        const std::size_t flat = grid.flat_index(m.kappa);
        double acc = 0;
        for (int c = 0; c < grid.d; ++c) {
            const Complex uc = u.component(c)[flat];
            acc += uc.real() * amp[c].real() + uc.imag() * amp[c].imag();
        }
        // <u, phi> = vol * 2 Re(u_hat(kappa) . conj(phi_hat(kappa)))
        return 2.0 * grid.domain_volume() * acc;
    }

    // scalar amplitude of sigma_k(t,u) along phi_k (time-autonomous family)
    double sigma_amplitude(const SpectralField& u, int k) const {
        return modes[k].c * (a + b * mode_coefficient(u, k));
    }

    // u += scale * sum_k sigma_k(u_eval) * w_k   (w_k = Brownian increments)
    void add_noise(SpectralField& u, const SpectralField& u_eval,
                   const std::vector<double>& w, double scale) const {
        for (int k = 0; k < k_max(); ++k) {
            const double s = scale * sigma_amplitude(u_eval, k) * w[k];
            if (s == 0.0) continue;
            const auto amp = mode_amplitude(k);
            const auto& m = modes[k];
            const std::size_t flat = grid.flat_index(m.kappa);
            const std::size_t mflat = grid.flat_index(
                {-m.kappa[0], -m.kappa[1], -m.kappa[2]});
            const std::size_t sz = grid.spectral_size();
            for (int c = 0; c < grid.d; ++c) {
                u.coeffs[c * sz + flat] += s * amp[c];
                u.coeffs[c * sz + mflat] += s * std::conj(amp[c]);
            }
        }
    }

    SpectralField sigma_field(const SpectralField& u, int k) const {
        SpectralField f(grid);
        std::vector<double> w(k_max(), 0.0);
        w[k] = 1.0;
        add_noise(f, u, w, 1.0);
        return f;
    }

    double sum_sigma_h_sq(const SpectralField& u) const {
        double acc = 0;
        for (int k = 0; k < k_max(); ++k) {
            const double s = sigma_amplitude(u, k);
            acc += s * s;
        }
        return acc;
    }

    // sum_k (sigma_k(u), u) w_k
    double sigma_pairing_sum(const SpectralField& u,
                             const std::vector<double>& w) const {
        double acc = 0;
        for (int k = 0; k < k_max(); ++k)
            acc += sigma_amplitude(u, k) * mode_coefficient(u, k) * w[k];
        return acc;
    }

    // ---- declared hypothesis constants ------------------------------------

    double sum_c_sq() const {
        double s = 0;
        for (const auto& m : modes) s += m.c * m.c;
        return s;
    }
    double max_c_sq() const {
        double s = 0;
        for (const auto& m : modes) s = std::max(s, m.c * m.c);
        return s;
    }

    // H.1: sum ||sigma_k(u)||_H^2 <= K (1 + ||u||_H^2)
    double declared_K() const {
        return 2.0 * std::max(a * a, b * b) * sum_c_sq();
    }
    // H.2: sum ||sigma_k(u)-sigma_k(v)||_H^2 <= L ||u-v||_H^2
    double declared_L() const { return b * b * max_c_sq(); }

    // additional growth constants per norm family; mode norms are explicit
    // (V2 spectrally, Vp/Lr by quadrature, cached at construction)
    double declared_K_v2() const {
        double sum_ck2 = 0, max_ck2 = 0;
        for (const auto& m : modes) {
            const double v = m.c * m.c * m.k_squared();
            sum_ck2 += v;
            max_ck2 = std::max(max_ck2, v);
        }
        return 2.0 * std::max(a * a * sum_ck2, b * b * max_ck2);
    }
    double declared_K_vp(double p) const {
        double sum_v = 0, max_v = 0;
        for (int k = 0; k < k_max(); ++k) {
            const double nv = mode_norm_vp(k, p);
            const double v = modes[k].c * modes[k].c * nv * nv;
            sum_v += v;
            max_v = std::max(max_v, v);
        }
        // ||u||_H <= ||u||_V2 <= (2pi)^{d(p-2)/(2p)} ||u||_Vp
        const double embed =
            std::pow(grid.domain_volume(), (p - 2.0) / p);
        return 2.0 * std::max(a * a * sum_v, b * b * embed * max_v);
    }
    double declared_K_lr(double r) const {
        double sum_v = 0, max_v = 0;
        for (int k = 0; k < k_max(); ++k) {
            const double nv = mode_norm_lr(k, r);
            const double v = modes[k].c * modes[k].c * nv * nv;
            sum_v += v;
            max_v = std::max(max_v, v);
        }
        // ||u||_H <= (2pi)^{d(r-2)/(2r)} ||u||_Lr
        const double embed =
            std::pow(grid.domain_volume(), (r - 2.0) / r);
        return 2.0 * std::max(a * a * sum_v, b * b * embed * max_v);
    }

    double mode_norm_vp(int k, double p) const {
        return norm_vp(cached_mode_field(k), p);
    }
    double mode_norm_lr(int k, double r) const {
        return norm_lr(cached_mode_field(k), r);
    }
    const SpectralField& cached_mode_field(int k) const {
        return mode_fields_[k];
    }

    static std::vector<NoiseMode> enumerate_modes(const GridSpec& g, int k_max) {
        // wavevectors ordered by |kappa|^2 then lexicographically, half-space
        // only; each wavevector contributes a (cos, sin) pair per polarization
        struct Entry {
            double k2;
            std::array<int, 3> kappa;
        };
        std::vector<Entry> entries;
        const int lim = g.n / 2 - 1;
        const int zlim = g.d == 3 ? lim : 0;
        for (int kx = -lim; kx <= lim; ++kx)
            for (int ky = -lim; ky <= lim; ++ky)
                for (int kz = -zlim; kz <= zlim; ++kz) {
                    if (kx == 0 && ky == 0 && kz == 0) continue;
                    if (kx < 0 || (kx == 0 && ky < 0) ||
                        (kx == 0 && ky == 0 && kz < 0))
                        continue;  // half-space
                    entries.push_back({double(kx) * kx + double(ky) * ky +
                                           double(kz) * kz,
                                       {kx, ky, kz}});
                }
        std::sort(entries.begin(), entries.end(), [](auto& a, auto& b) {
            if (a.k2 != b.k2) return a.k2 < b.k2;
            return a.kappa < b.kappa;
        });
        std::vector<NoiseMode> modes;
        for (const auto& e : entries) {
            if (static_cast<int>(modes.size()) >= k_max) break;
            for (const auto& pol : polarizations(e.kappa, g.d)) {
                if (static_cast<int>(modes.size()) >= k_max) break;
                modes.push_back({e.kappa, false, 1.0, pol});
                if (static_cast<int>(modes.size()) < k_max)
                    modes.push_back({e.kappa, true, 1.0, pol});
            }
        }
        if (static_cast<int>(modes.size()) < k_max)
            throw std::invalid_argument(
                "k_max exceeds the available mode count for this grid");
        return modes;
    }

    // unit polarizations orthogonal to kappa: one in 2-D, two in 3-D
    static std::vector<std::array<double, 3>> polarizations(
        const std::array<int, 3>& kappa, int d) {
        const double kx = kappa[0], ky = kappa[1], kz = kappa[2];
        const double norm = std::sqrt(kx * kx + ky * ky + kz * kz);
        if (d == 2) return {{-ky / norm, kx / norm, 0.0}};
        // first: kappa x ez (or kappa x ex when kappa is along ez)
        std::array<double, 3> e1{};
        if (kx == 0 && ky == 0)
            e1 = {0.0, 1.0, 0.0};
        else {
            const double h = std::sqrt(kx * kx + ky * ky);
            e1 = {-ky / h, kx / h, 0.0};
        }
        // second: kappa x e1 / |kappa|
        std::array<double, 3> e2{
            (ky * e1[2] - kz * e1[1]) / norm,
            (kz * e1[0] - kx * e1[2]) / norm,
            (kx * e1[1] - ky * e1[0]) / norm,
        };
        return {e1, e2};
    }

  private:
    std::vector<SpectralField> mode_fields_;

    void init_mode_cache() {
        mode_fields_.clear();
        for (int k = 0; k < k_max(); ++k) {
            SpectralField f(grid);
            // unit field along phi_k
            const auto amp = mode_amplitude(k);
            const auto& m = modes[k];
            const std::size_t flat = grid.flat_index(m.kappa);
            const std::size_t mflat =
                grid.flat_index({-m.kappa[0], -m.kappa[1], -m.kappa[2]});
            const std::size_t sz = grid.spectral_size();
            for (int c = 0; c < grid.d; ++c) {
                f.coeffs[c * sz + flat] += amp[c];
                f.coeffs[c * sz + mflat] += std::conj(amp[c]);
            }
            mode_fields_.push_back(std::move(f));
        }
    }
};

// Empirical validation of the growth/Lipschitz hypotheses against the
// declared constants, by ratio sampling over random fields.
struct HypothesisEntry {
    std::string name;
    double empirical = 0;
    double declared = 0;
    bool pass = false;
};

struct HypothesisReport {
    std::vector<HypothesisEntry> entries;
    bool pass = true;

    void add(const std::string& name, double emp, double dec) {
        const bool ok = emp <= dec * (1 + 1e-12);
        entries.push_back({name, emp, dec, ok});
        pass = pass && ok;
    }
    std::string first_failure() const {
        for (const auto& e : entries)
            if (!e.pass) return e.name;
        return {};
    }
};

inline HypothesisReport validate_hypotheses(const NoiseModel& noise,
                                            std::size_t n_samples,
                                            double p = 3.0, double r = 4.0,
                                            std::uint64_t seed = 1) {
    HypothesisReport rep;
    double sup_h1 = 0, sup_h2 = 0, sup_v2 = 0, sup_vp = 0, sup_lr = 0;
    Rng rng(seed, 0xA11CE);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double decay = rng.uniform(1.5, 3.0);
        const double amp = rng.log_uniform(1e-2, 1e1);
        auto u = random_field(noise.grid, rng.next_u64(), decay, amp);
        auto v = random_field(noise.grid, rng.next_u64(), decay,
                              rng.log_uniform(1e-2, 1e1));

        sup_h1 = std::max(sup_h1,
                          noise.sum_sigma_h_sq(u) / (1 + norm_h_sq(u)));

        const double dw2 = norm_h_sq(u - v);
        if (dw2 > 1e-20) {
            double num = 0;
            for (int k = 0; k < noise.k_max(); ++k) {
                const double ds = noise.sigma_amplitude(u, k) -
                                  noise.sigma_amplitude(v, k);
                num += ds * ds;
            }
            sup_h2 = std::max(sup_h2, num / dw2);
        }

        double s_v2 = 0, s_vp = 0, s_lr = 0;
        for (int k = 0; k < noise.k_max(); ++k) {
            const double s = noise.sigma_amplitude(u, k);
            const double k2 = noise.modes[k].k_squared();
            s_v2 += s * s * k2;
            const double nvp = noise.mode_norm_vp(k, p);
            const double nlr = noise.mode_norm_lr(k, r);
            s_vp += s * s * nvp * nvp;
            s_lr += s * s * nlr * nlr;
        }
        sup_v2 = std::max(sup_v2, s_v2 / (1 + norm_v2_sq(u)));
        const double uvp = norm_vp(u, p);
        const double ulr = norm_lr(u, r);
        sup_vp = std::max(sup_vp, s_vp / (1 + uvp * uvp));
        sup_lr = std::max(sup_lr, s_lr / (1 + ulr * ulr));
    }
    rep.add("H.1 growth (H)", sup_h1, noise.declared_K());
    rep.add("H.2 Lipschitz (H)", sup_h2, noise.declared_L());
    rep.add("H.3 growth (V2)", sup_v2, noise.declared_K_v2());
    rep.add("H.3 growth (Vp)", sup_vp, noise.declared_K_vp(p));
    rep.add("H.3 growth (Lr)", sup_lr, noise.declared_K_lr(r));
    return rep;
}

}  // namespace mspde
