#include <cmath>
#include <numbers>

#include "bolostat/errors.hpp"
#include "bolostat/response.hpp"
#include "doctest.h"
#include "gauss_average.hpp"

using namespace bolostat;

namespace {

constexpr double kPi = std::numbers::pi;
const ResonatorParams kPaperRes{524e6, 4.8e6, 18.7e6, 0.0};

double rel_err(Complex got, Complex want) { return std::abs(got - want) / std::abs(want); }

} // namespace

TEST_CASE("bare reflection on resonance is 1 - 2 gamma_c / gamma") {
    const Complex s = bare_reflection(kPaperRes, 524e6);
    CHECK(s.real() == doctest::Approx(1.0 - 2.0 * 4.8 / 18.7).epsilon(1e-15));
    CHECK(s.real() == doctest::Approx(0.4866).epsilon(1e-4));
    CHECK(std::abs(s.imag()) < 1e-15);
}

TEST_CASE("bare reflection tends to one far from resonance") {
    CHECK(std::abs(bare_reflection(kPaperRes, 524e6 + 1e12) - 1.0) < 1e-5);
    CHECK(std::abs(bare_reflection(kPaperRes, 1.0) - 1.0) < 1e-2);
}

TEST_CASE("phi = 0 locus is a circle of diameter 2 gamma_c / gamma through 1") {
    const double radius = kPaperRes.gamma_c / kPaperRes.gamma;
    const Complex centre = 1.0 - radius;
    for (double df : {-50e6, -3e6, -1e5, 0.0, 2e5, 7e6, 80e6})
        CHECK(std::abs(std::abs(bare_reflection(kPaperRes, 524e6 + df) - centre) - radius) < 1e-14);
}

TEST_CASE("averaged reflection reduces to the bare line as sigma -> 0") {
    for (double df : {-20e6, -1e6, 0.0, 3e6}) {
        const double f = 524e6 + df;
        CHECK(averaged_reflection(kPaperRes, {524e6, 0.0}, f) == bare_reflection(kPaperRes, f));
        CHECK(rel_err(averaged_reflection(kPaperRes, {524e6, 10.0}, f), bare_reflection(kPaperRes, f)) < 1e-9);
        const double below = 0.5 * sigma_min(kPaperRes.gamma);
        CHECK(averaged_reflection(kPaperRes, {524e6, below}, f) == bare_reflection(kPaperRes, f));
    }
}

TEST_CASE("averaged reflection is centred at mu, not at res.f_r") {
    ResonatorParams res = kPaperRes;
    res.f_r = 1e9;
    CHECK(averaged_reflection(res, {524e6, 5e5}, 523e6) == averaged_reflection(kPaperRes, {524e6, 5e5}, 523e6));
}

TEST_CASE("closed form agrees with converged quadrature of the bare line") {
    const ResonatorParams res{524e6, 4.8e6, 18.7e6, 0.3};
    for (double sigma : {1e5, 5e5, 2e6, 3e6}) {
        for (double f : {510e6, 520e6, 523.5e6, 524e6, 526e6, 540e6}) {
            CAPTURE(sigma);
            CAPTURE(f);
            const Complex want = oracle::gk_average(
                [&](double fr) { return bare_reflection({fr, res.gamma_c, res.gamma, res.phi}, f); }, 524e6, sigma);
            CHECK(rel_err(averaged_reflection(res, {524e6, sigma}, f), want) < 1e-11);
        }
    }
}

TEST_CASE("64-node Gauss-Hermite is an adequate oracle only while sigma is small against the pole distance") {
    // The bare line has a pole gamma/(4 pi) from the real f_r axis; GH-64
    // converges geometrically only while sigma is well below that.
    for (double sigma : {1e5, 5e5}) {
        for (double f : {515e6, 524e6, 530e6}) {
            const Complex gh = oracle::gh_average(
                [&](double fr) { return bare_reflection({fr, 4.8e6, 18.7e6, 0.0}, f); }, 524e6, sigma);
            CHECK(rel_err(averaged_reflection(kPaperRes, {524e6, sigma}, f), gh) < 1e-9);
        }
    }
}

TEST_CASE("Monte-Carlo estimate") {
    SUBCASE("sigma = 0 is the bare line at mu for any seed") {
        for (std::uint64_t seed : {0ull, 7ull, 123456789ull})
            CHECK(averaged_reflection_mc(kPaperRes, {524e6, 0.0}, 523e6, 1000, seed) ==
                  bare_reflection(kPaperRes, 523e6));
    }
    SUBCASE("one sample is the bare line at some drawn f_r") {
        const Complex s = averaged_reflection_mc(kPaperRes, {524e6, 5e5}, 524e6, 1, 42);
        // Invert the Lorentzian for the drawn detuning and check it is plausible.
        const Complex q = kPaperRes.gamma_c / (1.0 - s);
        const double fr = 524e6 + q.imag() / (2.0 * kPi);
        CHECK(q.real() == doctest::Approx(0.5 * kPaperRes.gamma).epsilon(1e-9));
        CHECK(std::abs(fr - 524e6) < 6 * 5e5);
        CHECK(rel_err(bare_reflection({fr, 4.8e6, 18.7e6, 0.0}, 524e6), s) < 1e-9);
    }
    SUBCASE("deterministic in the seed") {
        const auto a = averaged_reflection_mc(kPaperRes, {524e6, 5e5}, 523e6, 100000, 9);
        const auto b = averaged_reflection_mc(kPaperRes, {524e6, 5e5}, 523e6, 100000, 9);
        const auto c = averaged_reflection_mc(kPaperRes, {524e6, 5e5}, 523e6, 100000, 10);
        CHECK(a == b);
        CHECK(a != c);
    }
    SUBCASE("converges to the closed form") {
        const Complex exact = averaged_reflection(kPaperRes, {524e6, 5e5}, 523.7e6);
        CHECK(rel_err(averaged_reflection_mc(kPaperRes, {524e6, 5e5}, 523.7e6, 1000000, 3), exact) < 1e-3);
    }
    CHECK_THROWS_AS(averaged_reflection_mc(kPaperRes, {524e6, 5e5}, 523e6, 0, 1), DomainError);
}

TEST_CASE("background transfer") {
    BackgroundParams bg;
    bg.s_b = 0.9;
    bg.gamma_bc = 0.0;
    bg.gamma_b = 1e8;
    CHECK(background_transfer(bg, 123e6) == Complex(0.9, 0.0));

    bg.gamma_bc = 2e7;
    bg.f_b = 540e6;
    bg.phi_b = 0.0;
    CHECK(std::abs(background_transfer(bg, 540e6) - (0.9 + 2.0 * 2e7 / 1e8)) < 1e-15);

    SUBCASE("comb of spurious lines 80 MHz apart") {
        bg.n_resonances = 3;
        BackgroundParams single = bg;
        single.n_resonances = 1;
        const double f = 600e6;
        Complex want = bg.s_b;
        for (int j = 0; j < 3; ++j) {
            single.f_b = 540e6 + 80e6 * j;
            want += background_transfer(single, f) - bg.s_b;
        }
        CHECK(std::abs(background_transfer(bg, f) - want) < 1e-14);
    }
}

TEST_CASE("full chain") {
    const FreqDistribution dist{524e6, 7e5};
    BackgroundParams flat;
    flat.gamma_bc = 0.0;
    for (double f : {515e6, 524e6, 533e6})
        CHECK(full_chain_response(kPaperRes, dist, flat, {0.0, 0.0}, f) == averaged_reflection(kPaperRes, dist, f));

    SUBCASE("delay phase advances with slope f_p (no 2 pi)") {
        const double f = 520e6;
        const Complex a = full_chain_response(kPaperRes, dist, flat, {1e-8, 0.2}, f);
        const Complex b = full_chain_response(kPaperRes, dist, flat, {2e-8, 0.2}, f);
        CHECK(std::remainder(std::arg(b / a) - f * 1e-8, 2 * kPi) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(std::abs(a) == doctest::Approx(std::abs(b)).epsilon(1e-14));
    }
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(bare_reflection({524e6, 20e6, 18.7e6, 0.0}, 1e6), DomainError);
    CHECK_THROWS_AS(bare_reflection({524e6, 4.8e6, 18.7e6, 4.0}, 1e6), DomainError);
    CHECK_THROWS_AS(bare_reflection({-1.0, 4.8e6, 18.7e6, 0.0}, 1e6), DomainError);
    CHECK_THROWS_AS(averaged_reflection(kPaperRes, {524e6, -1.0}, 1e6), DomainError);
    BackgroundParams bg;
    bg.gamma_b = 0.0;
    CHECK_THROWS_AS(background_transfer(bg, 1e6), DomainError);
    CHECK_THROWS_AS(full_chain_response(kPaperRes, {524e6, 0.0}, {}, {-1.0, 0.0}, 1e6), DomainError);
}

TEST_CASE("RLC expansion") {
    const RlcParams c(80.0, 20e-15, 176.0, 524e6);
    CHECK(rlc_input_impedance(c, 0.0).imag() == 0.0);
    CHECK(rlc_input_impedance(c, 0.0).real() == rlc_series_resistance(c));
    CHECK(rlc_input_impedance(c, 1e5).imag() == doctest::Approx(-2.0 * rlc_series_inductance(c) * 1e5));
    CHECK(rlc_external_q(c) == doctest::Approx(c.Q_i() * rlc_series_resistance(c) / c.Z0()).epsilon(1e-15));
    CHECK(rlc_series_resistance(c) / c.Z0() == doctest::Approx(rlc_external_q(c) / c.Q_i()).epsilon(1e-15));

    const RlcParams c2(80.0, 40e-15, 176.0, 524e6);
    CHECK(rlc_series_resistance(c2) == doctest::Approx(rlc_series_resistance(c) / 4.0).epsilon(1e-15));
    CHECK(rlc_series_inductance(c2) == doctest::Approx(rlc_series_inductance(c) / 4.0).epsilon(1e-15));
    CHECK(rlc_rates(c2).gamma_c_expr == doctest::Approx(4.0 * rlc_rates(c).gamma_c_expr).epsilon(1e-15));

    const RlcRates r = rlc_rates(c);
    CHECK(2.0 * kPi * c.f_r() / r.gamma_i == doctest::Approx(176.0).epsilon(1e-15));
    CHECK(r.gamma_i == doctest::Approx(18.7e6).epsilon(1e-3));

    CHECK_THROWS_AS(RlcParams(80.0, 1e-12, 176.0, 524e6), DomainError);
    CHECK_THROWS_AS(RlcParams(0.0, 20e-15, 176.0, 524e6), DomainError);
}
