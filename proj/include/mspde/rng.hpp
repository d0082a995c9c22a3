#pragma once

#include <cstdint>
#include <cmath>

namespace mspde {

// Counter-keyed random streams. Every consumer (sample index, path index,
// epsilon index) gets its own stream derived from (master seed, stream id),
// so ensemble results do not depend on worker count or scheduling.
//
// splitmix64 is used for seeding, xoshiro256++ for the stream itself.
// std::normal_distribution is implementation-defined, so Gaussians are
// produced by an explicit Box-Muller transform.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) { init(seed, 0); }
    Rng(std::uint64_t seed, std::uint64_t stream) { init(seed, stream); }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform on (0,1); never returns 0 so log() below is safe
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 6.283185307179586476925286766559 * u2;
        spare_ = rad * std::sin(ang);
        have_spare_ = true;
        return rad * std::cos(ang);
    }

    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    void init(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t sm = seed ^ (0xd1342543de82ef95ULL * (stream + 1));
        for (auto& s : s_) s = splitmix64(sm);
        have_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t s_[4];
    bool have_spare_;
    double spare_;
};

}  // namespace mspde
