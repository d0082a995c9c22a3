#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include <fftw3.h>

#include "grid.hpp"

namespace mspde {

// Complex-to-complex FFTW transforms with a per-thread plan cache.
// Plan creation is serialized (the FFTW planner is not thread-safe);
// execution on per-thread buffers is safe. FFTW_ESTIMATE keeps planning
// deterministic, so runs are reproducible regardless of worker count.
//
// Conventions: forward() divides by the point count, so forward of physical
// samples yields coefficients u_hat(k) with u(x) = sum_k u_hat(k) e^{i k.x};
// backward() is unnormalized synthesis.
class Fft {
  public:
    static Fft& instance() {
        thread_local Fft f;
        return f;
    }

    // rank-d transform, all axes of length n; sign = FFTW_FORWARD/BACKWARD
    void execute(int d, int n, int sign, std::complex<double>* data) {
        fftw_plan plan = plan_for(d, n, sign);
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data),
                         reinterpret_cast<fftw_complex*>(data));
    }

    void forward(int d, int n, std::complex<double>* data) {
        execute(d, n, FFTW_FORWARD, data);
        std::size_t total = 1;
        for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(n);
        const double inv = 1.0 / static_cast<double>(total);
        for (std::size_t i = 0; i < total; ++i) data[i] *= inv;
    }

    void backward(int d, int n, std::complex<double>* data) {
        execute(d, n, FFTW_BACKWARD, data);
    }

    ~Fft() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

  private:
    Fft() = default;

    fftw_plan plan_for(int d, int n, int sign) {
        const auto key = std::make_tuple(d, n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;

        static std::mutex planner_mutex;
        std::lock_guard<std::mutex> lock(planner_mutex);
        std::vector<std::complex<double>> scratch;
        std::size_t total = 1;
        for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(n);
        scratch.resize(total);
        std::vector<int> dims(static_cast<std::size_t>(d), n);
        fftw_plan plan = fftw_plan_dft(
            d, dims.data(), reinterpret_cast<fftw_complex*>(scratch.data()),
            reinterpret_cast<fftw_complex*>(scratch.data()), sign,
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }

    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

// Embed an n-band spectrum into an m-point FFT layout (m >= n), leaving the
// extra frequencies zero. Inverse of truncate_spectrum.
inline void pad_spectrum(const GridSpec& g, const std::complex<double>* src,
                         std::complex<double>* dst) {
    const int m = g.padded_n(), d = g.d;
    std::size_t msize = 1;
    for (int i = 0; i < d; ++i) msize *= static_cast<std::size_t>(m);
    for (std::size_t i = 0; i < msize; ++i) dst[i] = {0.0, 0.0};

    const std::size_t nsize = g.spectral_size();
    for (std::size_t flat = 0; flat < nsize; ++flat) {
        const auto k = g.wavevector(flat);
        if (g.on_nyquist(k)) continue;
        std::size_t mi = 0;
        for (int ax = 0; ax < d; ++ax) {
            int i = k[ax] < 0 ? k[ax] + m : k[ax];
            mi = mi * m + static_cast<std::size_t>(i);
        }
        dst[mi] = src[flat];
    }
}

inline void truncate_spectrum(const GridSpec& g, const std::complex<double>* src,
                              std::complex<double>* dst) {
    const int m = g.padded_n(), d = g.d;
    const std::size_t nsize = g.spectral_size();
    for (std::size_t flat = 0; flat < nsize; ++flat) {
        const auto k = g.wavevector(flat);
        if (g.on_nyquist(k)) {
            dst[flat] = {0.0, 0.0};
            continue;
        }
        std::size_t mi = 0;
        for (int ax = 0; ax < d; ++ax) {
            int i = k[ax] < 0 ? k[ax] + m : k[ax];
            mi = mi * m + static_cast<std::size_t>(i);
        }
        dst[flat] = src[mi];
    }
}

}  // namespace mspde
