#include <catch2/catch_amalgamated.hpp>

#include <mspde/noise.hpp>

#include "test_helpers.hpp"

using namespace mspde;
using testutil::rel_err;

TEST_CASE("noise modes are orthonormal divergence-free unit fields") {
    GridSpec g(16, 2);
    auto m = NoiseModel::from_decay(g, NoiseKind::AdditiveDiagonal, 8, 0.5,
                                    1.0, 0.0);
    REQUIRE(m.k_max() == 8);
    for (int j = 0; j < m.k_max(); ++j) {
        const auto& pj = m.cached_mode_field(j);
        REQUIRE(max_divergence(pj) < 1e-14);
        for (int k = 0; k < m.k_max(); ++k) {
            const double want = j == k ? 1.0 : 0.0;
            REQUIRE(std::abs(pairing(pj, m.cached_mode_field(k)) - want) <
                    1e-12);
        }
    }
    // cos/sin pairs share coefficients: c = decay^(1 + k/2)
    REQUIRE(m.modes[0].c == m.modes[1].c);
    REQUIRE(rel_err(m.modes[0].c, 0.5) < 1e-15);
    REQUIRE(rel_err(m.modes[2].c, 0.25) < 1e-15);
}

TEST_CASE("mode coefficient recovers projections") {
    GridSpec g(16, 2);
    auto m = NoiseModel::from_decay(g, NoiseKind::ProjectedMultiplicative, 6,
                                    0.5, 1.0, 0.5);
    Rng rng(3);
    SpectralField u(g);
    std::vector<double> coef(m.k_max());
    for (int k = 0; k < m.k_max(); ++k) {
        coef[k] = rng.gaussian();
        std::vector<double> w(m.k_max(), 0.0);
        w[k] = 1.0;
        SpectralField delta(g);
        m.add_noise(delta, SpectralField(g), w, 1.0);  // a * phi_k * c_k
        delta *= coef[k] / (m.modes[k].c * m.a);
        u += delta;
    }
    for (int k = 0; k < m.k_max(); ++k)
        REQUIRE(std::abs(m.mode_coefficient(u, k) - coef[k]) < 1e-12);
}

TEST_CASE("sigma at zero matches the closed-form sum") {
    GridSpec g(16, 2);
    std::vector<double> c{0.5, 0.25, 0.125, 0.0625};
    auto m = NoiseModel::make(g, NoiseKind::ProjectedMultiplicative, 4, c, 1.0,
                              1.0);
    SpectralField z(g);
    double want = 0;
    for (double ck : c) want += ck * ck;  // a^2 sum c_k^2 with a = 1
    REQUIRE(rel_err(m.sum_sigma_h_sq(z), want) < 1e-13);
}

TEST_CASE("additive noise has zero Lipschitz constant") {
    GridSpec g(16, 2);
    auto m = NoiseModel::from_decay(g, NoiseKind::AdditiveDiagonal, 4, 0.5,
                                    1.0, 0.0);
    auto rep = validate_hypotheses(m, 200, 3.0, 4.0, 5);
    REQUIRE(rep.pass);
    for (const auto& e : rep.entries)
        if (e.name == "H.2 Lipschitz (H)") {
            REQUIRE(e.empirical == 0.0);
            REQUIRE(e.declared == 0.0);
        }
}

TEST_CASE("hypotheses hold with declared constants for both kinds") {
    GridSpec g(16, 2);
    // c_k = 2^-k, a = 1, b = 1: K declared as 2 sum c_k^2
    std::vector<double> c(6);
    for (int k = 0; k < 6; ++k) c[k] = std::pow(2.0, -(k + 1));
    auto mult = NoiseModel::make(g, NoiseKind::ProjectedMultiplicative, 6, c,
                                 1.0, 1.0);
    REQUIRE(rel_err(mult.declared_K(), 2 * mult.sum_c_sq()) < 1e-14);
    REQUIRE(rel_err(mult.declared_L(), 0.25) < 1e-14);  // b^2 max c^2

    auto rep = validate_hypotheses(mult, 400, 3.0, 4.0, 5);
    for (const auto& e : rep.entries) {
        INFO(e.name << " emp=" << e.empirical << " dec=" << e.declared);
        REQUIRE(e.pass);
    }

    auto add = NoiseModel::from_decay(g, NoiseKind::AdditiveDiagonal, 8, 0.6,
                                      1.3, 0.0);
    REQUIRE(validate_hypotheses(add, 400, 2.5, 6.0, 7).pass);
}

TEST_CASE("noise model construction errors") {
    GridSpec g(16, 2);
    REQUIRE_THROWS_AS(NoiseModel::from_decay(g, NoiseKind::AdditiveDiagonal, 4,
                                             0.5, 1.0, 0.5),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(
        NoiseModel::make(g, NoiseKind::AdditiveDiagonal, 2, {0.5, -0.1}, 1, 0),
        std::invalid_argument);
    REQUIRE_THROWS_AS(NoiseModel::from_decay(g, NoiseKind::AdditiveDiagonal,
                                             100000, 0.5, 1.0, 0.0),
                      std::invalid_argument);
}

TEST_CASE("validation report is deterministic") {
    GridSpec g(16, 2);
    auto m = NoiseModel::from_decay(g, NoiseKind::ProjectedMultiplicative, 4,
                                    0.5, 1.0, 0.7);
    auto r1 = validate_hypotheses(m, 100, 3.0, 4.0, 11);
    auto r2 = validate_hypotheses(m, 100, 3.0, 4.0, 11);
    for (std::size_t i = 0; i < r1.entries.size(); ++i)
        REQUIRE(r1.entries[i].empirical == r2.entries[i].empirical);
}

TEST_CASE("three-dimensional noise modes are orthonormal and divergence-free") {
    GridSpec g(8, 3);
    auto m = NoiseModel::from_decay(g, NoiseKind::AdditiveDiagonal, 6, 0.5,
                                    1.0, 0.0);
    for (int j = 0; j < m.k_max(); ++j) {
        const auto& pj = m.cached_mode_field(j);
        REQUIRE(max_divergence(pj) < 1e-13);
        for (int k = 0; k < m.k_max(); ++k) {
            const double want = j == k ? 1.0 : 0.0;
            REQUIRE(std::abs(pairing(pj, m.cached_mode_field(k)) - want) <
                    1e-12);
        }
    }
}
