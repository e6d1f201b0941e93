#include "bolostat/response.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "bolostat/errors.hpp"
#include "bolostat/rng.hpp"
#include "bolostat/specfun.hpp"

namespace bolostat {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kMcBatch = 1u << 16;

void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

} // namespace

void ResonatorParams::validate() const {
    require(std::isfinite(f_r) && f_r > 0.0, "ResonatorParams.f_r must be > 0");
    require(std::isfinite(gamma) && gamma > 0.0, "ResonatorParams.gamma must be > 0");
    require(std::isfinite(gamma_c) && gamma_c > 0.0 && gamma_c <= gamma,
            "ResonatorParams.gamma_c must satisfy 0 < gamma_c <= gamma");
    require(std::isfinite(phi) && phi > -kPi && phi <= kPi, "ResonatorParams.phi must lie in (-pi, pi]");
}

void FreqDistribution::validate() const {
    require(std::isfinite(mu) && mu > 0.0, "FreqDistribution.mu must be > 0");
    require(std::isfinite(sigma) && sigma >= 0.0, "FreqDistribution.sigma must be >= 0");
}

void BackgroundParams::validate() const {
    require(std::isfinite(s_b), "BackgroundParams.s_b must be finite");
    require(std::isfinite(gamma_b) && gamma_b > 0.0, "BackgroundParams.gamma_b must be > 0");
    require(std::isfinite(f_b) && std::isfinite(gamma_bc) && std::isfinite(phi_b),
            "BackgroundParams fields must be finite");
    require(n_resonances >= 1, "BackgroundParams.n_resonances must be >= 1");
    require(std::isfinite(spacing) && spacing > 0.0, "BackgroundParams.spacing must be > 0");
}

void LineParams::validate() const {
    require(std::isfinite(tau) && tau >= 0.0, "LineParams.tau must be >= 0");
    require(std::isfinite(varphi), "LineParams.varphi must be finite");
}

RlcParams::RlcParams(double Z, double C_g, double Q_i, double f_r, double Z0)
    : Z_(Z), C_g_(C_g), Q_i_(Q_i), f_r_(f_r), Z0_(Z0) {
    require(Z > 0.0 && C_g > 0.0 && Q_i > 0.0 && f_r > 0.0 && Z0 > 0.0,
            "RlcParams: all fields must be positive");
    const double coupling = 2.0 * kPi * f_r * Z * C_g;
    require(coupling < 0.1, "RlcParams: small-coupling regime violated, 2 pi f_r Z C_g = " +
                                std::to_string(coupling) + " (need < 0.1)");
}

double sigma_min(double gamma) { return 1e-6 * gamma / (2.0 * kPi); }

namespace detail {

Complex bare_reflection(double f_r, double gamma_c, double gamma, double phi, double f_p) {
    const double delta = 2.0 * kPi * (f_r - f_p);
    return 1.0 - std::polar(1.0, phi) * gamma_c / Complex(0.5 * gamma, delta);
}

Complex averaged_reflection(double mu, double sigma, double gamma_c, double gamma, double phi,
                            double f_p) {
    if (!(sigma >= sigma_min(gamma))) return bare_reflection(mu, gamma_c, gamma, phi, f_p);
    const double delta = 2.0 * kPi * (mu - f_p);
    const double width = 2.0 * std::numbers::sqrt2 * kPi * sigma;
    const Complex arg{0.5 * gamma / width, delta / width};
    const double prefactor = gamma_c / (2.0 * std::sqrt(2.0 * kPi) * sigma);
    return 1.0 - std::polar(prefactor, phi) * specfun::erfcx(arg);
}

Complex background_transfer(const BackgroundParams& bg, double f_p) {
    Complex h = bg.s_b;
    const Complex rot = std::polar(1.0, bg.phi_b);
    for (int j = 0; j < bg.n_resonances; ++j) {
        const double delta = 2.0 * kPi * (bg.f_b + j * bg.spacing - f_p);
        h += rot * bg.gamma_bc / Complex(0.5 * bg.gamma_b, delta);
    }
    return h;
}

Complex line_factor(const LineParams& line, double f_p) {
    return std::polar(1.0, f_p * line.tau + line.varphi);
}

} // namespace detail

Complex bare_reflection(const ResonatorParams& res, double f_p) {
    res.validate();
    return detail::bare_reflection(res.f_r, res.gamma_c, res.gamma, res.phi, f_p);
}

Complex averaged_reflection(const ResonatorParams& res, const FreqDistribution& dist, double f_p) {
    res.validate();
    dist.validate();
    return detail::averaged_reflection(dist.mu, dist.sigma, res.gamma_c, res.gamma, res.phi, f_p);
}

Complex averaged_reflection_mc(const ResonatorParams& res, const FreqDistribution& dist,
                               double f_p, std::uint64_t n_samples, std::uint64_t seed) {
    res.validate();
    dist.validate();
    if (n_samples == 0) throw DomainError("averaged_reflection_mc: n_samples must be >= 1");
    if (dist.sigma == 0.0)
        return detail::bare_reflection(dist.mu, res.gamma_c, res.gamma, res.phi, f_p);

    Complex total = 0.0;
    const std::uint64_t n_batches = (n_samples + kMcBatch - 1) / kMcBatch;
    for (std::uint64_t b = 0; b < n_batches; ++b) {
        const std::uint64_t count = std::min(kMcBatch, n_samples - b * kMcBatch);
        auto engine = make_engine(seed, b);
        std::normal_distribution<double> normal(dist.mu, dist.sigma);
        Complex batch = 0.0;
        for (std::uint64_t i = 0; i < count; ++i)
            batch += detail::bare_reflection(normal(engine), res.gamma_c, res.gamma, res.phi, f_p);
        total += batch;
    }
    return total / static_cast<double>(n_samples);
}

Complex background_transfer(const BackgroundParams& bg, double f_p) {
    bg.validate();
    return detail::background_transfer(bg, f_p);
}

Complex full_chain_response(const ResonatorParams& res, const FreqDistribution& dist,
                            const BackgroundParams& bg, const LineParams& line, double f_p) {
    bg.validate();
    line.validate();
    return detail::line_factor(line, f_p) * detail::background_transfer(bg, f_p) *
           averaged_reflection(res, dist, f_p);
}

double rlc_series_resistance(const RlcParams& c) {
    return 1.0 / (8.0 * kPi * c.Z() * c.C_g() * c.C_g() * c.Q_i() * c.f_r() * c.f_r());
}

double rlc_series_inductance(const RlcParams& c) {
    return 1.0 / (8.0 * kPi * c.Z() * c.C_g() * c.C_g() * c.f_r() * c.f_r() * c.f_r());
}

Complex rlc_input_impedance(const RlcParams& c, double delta_f) {
    return {rlc_series_resistance(c), -2.0 * rlc_series_inductance(c) * delta_f};
}

double rlc_external_q(const RlcParams& c) { return c.Q_i() * rlc_series_resistance(c) / c.Z0(); }

RlcRates rlc_rates(const RlcParams& c) {
    return {2.0 * kPi * c.f_r() / c.Q_i(), 4.0 * c.Z() * c.Z0() * c.C_g() * c.C_g() * c.f_r()};
}

} // namespace bolostat
