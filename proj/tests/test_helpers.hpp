#pragma once

#include <functional>

#include <mspde/field.hpp>

namespace testutil {

// build a velocity field by sampling closed-form components on the unpadded
// grid (exact for band-limited trigonometric polynomials)
inline mspde::SpectralField make_field(
    const mspde::GridSpec& g,
    const std::function<double(double, double)>& fx,
    const std::function<double(double, double)>& fy) {
    mspde::SpectralField u(g);
    const int n = g.n;
    std::vector<double> sx(g.spectral_size()), sy(g.spectral_size());
    for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy) {
            const double x = mspde::kTwoPi * ix / n;
            const double y = mspde::kTwoPi * iy / n;
            sx[ix * n + iy] = fx(x, y);
            sy[ix * n + iy] = fy(x, y);
        }
    auto cx = mspde::to_spectral(g, sx);
    auto cy = mspde::to_spectral(g, sy);
    std::copy(cx.begin(), cx.end(), u.component(0));
    std::copy(cy.begin(), cy.end(), u.component(1));
    mspde::enforce_hermitian(u);
    return u;
}

inline double rel_err(double got, double want) {
    const double scale = std::max({std::abs(got), std::abs(want), 1e-300});
    return std::abs(got - want) / scale;
}

}  // namespace testutil
