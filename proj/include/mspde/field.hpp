#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "fft.hpp"
#include "grid.hpp"
#include "rng.hpp"

namespace mspde {

using Complex = std::complex<double>;

// Divergence-free vector field on the periodic torus, stored as Fourier
// coefficients u_hat(k) per component. Invariants maintained by the
// constructors/operations here: Hermitian symmetry (real field), zero
// Nyquist ring, and (after projection) k.u_hat(k) = 0.
class SpectralField {
  public:
    SpectralField() = default;
    explicit SpectralField(const GridSpec& g)
        : grid(g), coeffs(static_cast<std::size_t>(g.d) * g.spectral_size()) {}

    GridSpec grid;
    std::vector<Complex> coeffs;  // [component][flat spectral index]

    Complex* component(int c) { return coeffs.data() + c * grid.spectral_size(); }
    const Complex* component(int c) const {
        return coeffs.data() + c * grid.spectral_size();
    }

    Complex& at(int c, const std::array<int, 3>& k) {
        return coeffs[c * grid.spectral_size() + grid.flat_index(k)];
    }
    Complex at(int c, const std::array<int, 3>& k) const {
        return coeffs[c * grid.spectral_size() + grid.flat_index(k)];
    }

    SpectralField& operator+=(const SpectralField& o) {
        for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] -= o.coeffs[i];
        return *this;
    }
    SpectralField& operator*=(double s) {
        for (auto& c : coeffs) c *= s;
        return *this;
    }
    friend SpectralField operator+(SpectralField a, const SpectralField& b) {
        a += b;
        return a;
    }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) {
        a -= b;
        return a;
    }
    friend SpectralField operator*(double s, SpectralField a) {
        a *= s;
        return a;
    }
};

// d x d array of scalar spectral fields; entry(i,j) holds d u_j / d x_i.
class TensorField {
  public:
    TensorField() = default;
    explicit TensorField(const GridSpec& g)
        : grid(g),
          coeffs(static_cast<std::size_t>(g.d) * g.d * g.spectral_size()) {}

    GridSpec grid;
    std::vector<Complex> coeffs;

    Complex* entry(int i, int j) {
        return coeffs.data() + (i * grid.d + j) * grid.spectral_size();
    }
    const Complex* entry(int i, int j) const {
        return coeffs.data() + (i * grid.d + j) * grid.spectral_size();
    }
};

inline void check_same_grid(const GridSpec& a, const GridSpec& b) {
    if (a != b) throw std::invalid_argument("grid mismatch");
}

// --- symmetry / projection -------------------------------------------------

// Make the underlying physical field real: a(k) <- (a(k) + conj(a(-k)))/2,
// and clear the Nyquist ring.
inline void enforce_hermitian(const GridSpec& g, Complex* a) {
    const std::size_t s = g.spectral_size();
    for (std::size_t flat = 0; flat < s; ++flat) {
        auto k = g.wavevector(flat);
        if (g.on_nyquist(k)) {
            a[flat] = {0.0, 0.0};
            continue;
        }
        std::array<int, 3> mk{-k[0], -k[1], -k[2]};
        const std::size_t mflat = g.flat_index(mk);
        if (mflat < flat) continue;  // handle each pair once
        const Complex v = 0.5 * (a[flat] + std::conj(a[mflat]));
        a[flat] = v;
        a[mflat] = std::conj(v);
    }
}

inline void enforce_hermitian(SpectralField& u) {
    for (int c = 0; c < u.grid.d; ++c) enforce_hermitian(u.grid, u.component(c));
}

// Helmholtz-Hodge projection onto divergence-free fields,
// u_hat(k) <- (I - k k^T / |k|^2) u_hat(k); diagonal in Fourier space.
inline SpectralField leray_project(const SpectralField& v, bool zero_mean = true) {
    SpectralField out = v;
    const GridSpec& g = v.grid;
    const std::size_t s = g.spectral_size();
    for (std::size_t flat = 0; flat < s; ++flat) {
        const auto k = g.wavevector(flat);
        const double k2 = g.k_squared(k);
        if (k2 == 0.0) {
            if (zero_mean)
                for (int c = 0; c < g.d; ++c) out.coeffs[c * s + flat] = {0, 0};
            continue;
        }
        if (g.on_nyquist(k)) {
            for (int c = 0; c < g.d; ++c) out.coeffs[c * s + flat] = {0, 0};
            continue;
        }
        Complex kdotu{0, 0};
        for (int c = 0; c < g.d; ++c)
            kdotu += double(k[c]) * v.coeffs[c * s + flat];
        kdotu /= k2;
        for (int c = 0; c < g.d; ++c)
            out.coeffs[c * s + flat] -= double(k[c]) * kdotu;
    }
    return out;
}

// max_k |k.u_hat(k)| (absolute); pair with max coefficient for a relative check
inline double max_divergence(const SpectralField& u) {
    const GridSpec& g = u.grid;
    const std::size_t s = g.spectral_size();
    double worst = 0.0;
    for (std::size_t flat = 0; flat < s; ++flat) {
        const auto k = g.wavevector(flat);
        Complex kdotu{0, 0};
        for (int c = 0; c < g.d; ++c)
            kdotu += double(k[c]) * u.coeffs[c * s + flat];
        worst = std::max(worst, std::abs(kdotu));
    }
    return worst;
}

inline double max_abs_coeff(const SpectralField& u) {
    double m = 0.0;
    for (const auto& c : u.coeffs) m = std::max(m, std::abs(c));
    return m;
}

// --- differentiation --------------------------------------------------------

// (grad u)_{ij} = d u_j / d x_i via multiplication by i k_i
inline TensorField gradient(const SpectralField& u) {
    const GridSpec& g = u.grid;
    TensorField t(g);
    const std::size_t s = g.spectral_size();
    for (int j = 0; j < g.d; ++j) {
        const Complex* uj = u.component(j);
        for (std::size_t flat = 0; flat < s; ++flat) {
            const auto k = g.wavevector(flat);
            const Complex v = uj[flat];
            for (int i = 0; i < g.d; ++i)
                t.entry(i, j)[flat] = Complex(0, double(k[i])) * v;
        }
    }
    return t;
}

// --- transforms --------------------------------------------------------------

// physical samples on the unpadded n^d grid (one scalar component)
inline std::vector<double> to_physical(const GridSpec& g, const Complex* comp) {
    std::vector<Complex> buf(comp, comp + g.spectral_size());
    Fft::instance().backward(g.d, g.n, buf.data());
    std::vector<double> out(g.spectral_size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf[i].real();
    return out;
}

// physical samples on the padded (pad_factor*n)^d grid
inline std::vector<double> to_physical_padded(const GridSpec& g,
                                              const Complex* comp) {
    std::vector<Complex> buf(g.padded_size());
    pad_spectrum(g, comp, buf.data());
    Fft::instance().backward(g.d, g.padded_n(), buf.data());
    std::vector<double> out(g.padded_size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf[i].real();
    return out;
}

// spectrum of samples on the unpadded grid
inline std::vector<Complex> to_spectral(const GridSpec& g,
                                        const std::vector<double>& phys) {
    std::vector<Complex> buf(phys.size());
    for (std::size_t i = 0; i < phys.size(); ++i) buf[i] = {phys[i], 0.0};
    Fft::instance().forward(g.d, g.n, buf.data());
    return buf;
}

// forward transform of padded physical samples, truncated to the n-band
inline void padded_to_band(const GridSpec& g, const std::vector<double>& phys,
                           Complex* out) {
    std::vector<Complex> buf(phys.size());
    for (std::size_t i = 0; i < phys.size(); ++i) buf[i] = {phys[i], 0.0};
    Fft::instance().forward(g.d, g.padded_n(), buf.data());
    truncate_spectrum(g, buf.data(), out);
}

// all components of u on the padded grid
inline std::vector<std::vector<double>> velocity_padded(const SpectralField& u) {
    std::vector<std::vector<double>> v(u.grid.d);
    for (int c = 0; c < u.grid.d; ++c)
        v[c] = to_physical_padded(u.grid, u.component(c));
    return v;
}

// all d*d entries of grad u on the padded grid, indexed [i*d+j]
inline std::vector<std::vector<double>> gradient_padded(const SpectralField& u) {
    const GridSpec& g = u.grid;
    TensorField t = gradient(u);
    std::vector<std::vector<double>> out(static_cast<std::size_t>(g.d) * g.d);
    for (int i = 0; i < g.d; ++i)
        for (int j = 0; j < g.d; ++j)
            out[i * g.d + j] = to_physical_padded(g, t.entry(i, j));
    return out;
}

// --- norms and pairings -------------------------------------------------------

inline double norm_h_sq(const SpectralField& u) {
    double s = 0.0;
    for (const auto& c : u.coeffs) s += std::norm(c);
    return u.grid.domain_volume() * s;
}
inline double norm_h(const SpectralField& u) { return std::sqrt(norm_h_sq(u)); }

inline double norm_v2_sq(const SpectralField& u) {
    const GridSpec& g = u.grid;
    const std::size_t s = g.spectral_size();
    double acc = 0.0;
    for (std::size_t flat = 0; flat < s; ++flat) {
        const double k2 = g.k_squared(g.wavevector(flat));
        for (int c = 0; c < g.d; ++c) acc += k2 * std::norm(u.coeffs[c * s + flat]);
    }
    return g.domain_volume() * acc;
}
inline double norm_v2(const SpectralField& u) { return std::sqrt(norm_v2_sq(u)); }

// |x|^q for the half/integer exponents that dominate the workload
inline double pow_fast(double base, double q) {
    const double qi = std::round(q);
    if (q == qi && qi >= 0 && qi <= 16) {
        double r = 1.0, b = base;
        int e = static_cast<int>(qi);
        while (e > 0) {
            if (e & 1) r *= b;
            b *= b;
            e >>= 1;
        }
        return r;
    }
    const double q2 = std::round(2 * q);
    if (2 * q == q2 && q2 >= 0 && q2 <= 33)
        return pow_fast(std::sqrt(base), 2 * q) * 1.0;
    return std::pow(base, q);
}

// integral of |grad u|^p over the torus (padded quadrature)
inline double raw_power_vp(const SpectralField& u, double p) {
    if (p < 1) throw std::invalid_argument("raw_power_vp: p must be >= 1");
    const GridSpec& g = u.grid;
    const auto grad = gradient_padded(u);
    const std::size_t m = g.padded_size();
    double acc = 0.0;
    for (std::size_t x = 0; x < m; ++x) {
        double g2 = 0.0;
        for (const auto& e : grad) g2 += e[x] * e[x];
        acc += pow_fast(g2, 0.5 * p);
    }
    return acc * g.cell_volume_padded();
}

inline double norm_vp(const SpectralField& u, double p) {
    if (p == 2.0) return norm_v2(u);
    return std::pow(raw_power_vp(u, p), 1.0 / p);
}

// integral of |u|^r over the torus (padded quadrature)
inline double raw_power_lr(const SpectralField& u, double r) {
    if (r < 1) throw std::invalid_argument("raw_power_lr: r must be >= 1");
    const GridSpec& g = u.grid;
    const auto vel = velocity_padded(u);
    const std::size_t m = g.padded_size();
    double acc = 0.0;
    for (std::size_t x = 0; x < m; ++x) {
        double u2 = 0.0;
        for (const auto& c : vel) u2 += c[x] * c[x];
        acc += pow_fast(u2, 0.5 * r);
    }
    return acc * g.cell_volume_padded();
}

inline double norm_lr(const SpectralField& u, double r) {
    if (r == 2.0) return norm_h(u);
    return std::pow(raw_power_lr(u, r), 1.0 / r);
}

enum class NormKind { H, V2, Vp, Lr };

inline double norm(const SpectralField& u, NormKind which, double exponent = 2.0) {
    switch (which) {
        case NormKind::H: return norm_h(u);
        case NormKind::V2: return norm_v2(u);
        case NormKind::Vp: return norm_vp(u, exponent);
        case NormKind::Lr: return norm_lr(u, exponent);
    }
    return 0.0;
}

// L^2 pairing, realized spectrally (Parseval); real for real fields
inline double pairing(const SpectralField& u, const SpectralField& v) {
    check_same_grid(u.grid, v.grid);
    double s = 0.0;
    for (std::size_t i = 0; i < u.coeffs.size(); ++i)
        s += u.coeffs[i].real() * v.coeffs[i].real() +
             u.coeffs[i].imag() * v.coeffs[i].imag();
    return u.grid.domain_volume() * s;
}

inline double pairing(const TensorField& a, const TensorField& b) {
    check_same_grid(a.grid, b.grid);
    double s = 0.0;
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        s += a.coeffs[i].real() * b.coeffs[i].real() +
             a.coeffs[i].imag() * b.coeffs[i].imag();
    return a.grid.domain_volume() * s;
}

// --- generators ----------------------------------------------------------------

// Smooth random divergence-free field: independent complex Gaussians per
// mode scaled by amplitude * (1+|k|^2)^{-s/2}, Hermitian-symmetrized,
// mean-free, Leray-projected. Deterministic in (seed).
inline SpectralField random_field(const GridSpec& g, std::uint64_t seed,
                                  double spectrum_decay = 3.0,
                                  double amplitude = 1.0) {
    SpectralField u(g);
    Rng rng(seed);
    const std::size_t s = g.spectral_size();
    for (int c = 0; c < g.d; ++c) {
        Complex* a = u.component(c);
        for (std::size_t flat = 0; flat < s; ++flat) {
            const auto k = g.wavevector(flat);
            const double k2 = g.k_squared(k);
            const double scale =
                amplitude * std::pow(1.0 + k2, -0.5 * spectrum_decay);
            a[flat] = Complex(rng.gaussian(), rng.gaussian()) * scale;
        }
        enforce_hermitian(g, a);
        a[g.flat_index({0, 0, 0})] = {0.0, 0.0};
    }
    return leray_project(u);
}

// normalize so that ||u||_H = target (no-op on the zero field)
inline SpectralField normalized(const SpectralField& u, double target = 1.0) {
    const double nh = norm_h(u);
    if (nh == 0.0) return u;
    SpectralField out = u;
    out *= target / nh;
    return out;
}

}  // namespace mspde
