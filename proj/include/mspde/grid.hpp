#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mspde {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Uniform periodic grid on [0, 2pi)^d. n modes per dimension (power of two),
// pad_factor * n collocation points per dimension for nonlinear products.
// Spectral storage uses the standard FFT frequency layout
// k in {0, 1, ..., n/2-1, -n/2, ..., -1}; the Nyquist ring |k_i| = n/2 is
// kept at zero so differentiation stays skew-symmetric and real fields stay
// real under every operation.
struct GridSpec {
    int n = 16;
    int d = 2;
    int pad_factor = 2;

    GridSpec() = default;
    GridSpec(int n_, int d_, int pad_ = 2) : n(n_), d(d_), pad_factor(pad_) {
        validate();
    }

    void validate() const {
        if (d != 2 && d != 3)
            throw std::invalid_argument("GridSpec: d must be 2 or 3");
        if (n < 4 || (n & (n - 1)) != 0)
            throw std::invalid_argument("GridSpec: n must be a power of two >= 4");
        if (pad_factor < 2)
            throw std::invalid_argument("GridSpec: pad_factor must be >= 2");
    }

    int padded_n() const { return pad_factor * n; }

    std::size_t spectral_size() const {
        std::size_t s = 1;
        for (int i = 0; i < d; ++i) s *= static_cast<std::size_t>(n);
        return s;
    }
    std::size_t padded_size() const {
        std::size_t s = 1;
        for (int i = 0; i < d; ++i) s *= static_cast<std::size_t>(padded_n());
        return s;
    }

    // signed frequency of index i on an n-point axis
    static int freq(int i, int n_axis) { return i < n_axis / 2 ? i : i - n_axis; }

    // decode flat spectral index into signed wavevector
    std::array<int, 3> wavevector(std::size_t flat) const {
        std::array<int, 3> k{0, 0, 0};
        for (int ax = d - 1; ax >= 0; --ax) {
            k[ax] = freq(static_cast<int>(flat % n), n);
            flat /= n;
        }
        return k;
    }

    std::size_t flat_index(const std::array<int, 3>& k) const {
        std::size_t idx = 0;
        for (int ax = 0; ax < d; ++ax) {
            int i = k[ax] < 0 ? k[ax] + n : k[ax];
            idx = idx * n + static_cast<std::size_t>(i);
        }
        return idx;
    }

    // true if any component sits on the (zeroed) Nyquist ring
    bool on_nyquist(const std::array<int, 3>& k) const {
        for (int ax = 0; ax < d; ++ax)
            if (k[ax] == -n / 2) return true;
        return false;
    }

    double k_squared(const std::array<int, 3>& k) const {
        double s = 0;
        for (int ax = 0; ax < d; ++ax) s += double(k[ax]) * double(k[ax]);
        return s;
    }

    double cell_volume_padded() const {
        double v = 1;
        for (int i = 0; i < d; ++i) v *= kTwoPi / padded_n();
        return v;
    }
    double domain_volume() const {
        double v = 1;
        for (int i = 0; i < d; ++i) v *= kTwoPi;
        return v;
    }

    bool operator==(const GridSpec& o) const {
        return n == o.n && d == o.d && pad_factor == o.pad_factor;
    }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

}  // namespace mspde
