#pragma once

#include <complex>
#include <cstdint>

namespace bolostat {

using Complex = std::complex<double>;

/// Lorentzian thermometer line. Frequencies in Hz, rates in rad/s.
struct ResonatorParams {
    double f_r = 0.0;      ///< resonance frequency (Hz)
    double gamma_c = 0.0;  ///< external energy decay rate (rad/s)
    double gamma = 0.0;    ///< total energy decay rate (rad/s)
    double phi = 0.0;      ///< asymmetry angle (rad), (-pi, pi]

    void validate() const;
};

/// Gaussian law of the resonance frequency, f_r ~ N(mu, sigma^2).
struct FreqDistribution {
    double mu = 0.0;     ///< Hz
    double sigma = 0.0;  ///< Hz

    void validate() const;
};

/// Output-path transfer function
///   H(f) = s_b + sum_j exp(i phi_b) gamma_bc / (gamma_b/2 + i 2pi (f_b + j*spacing - f)),
/// j = 0 .. n_resonances-1. The default is a single Lorentzian term.
struct BackgroundParams {
    double s_b = 1.0;
    double f_b = 0.0;       ///< Hz
    double gamma_bc = 0.0;  ///< rad/s
    double gamma_b = 1.0;   ///< rad/s
    double phi_b = 0.0;     ///< rad
    int n_resonances = 1;
    double spacing = 80e6;  ///< Hz, spurious-resonance comb spacing

    void validate() const;
};

/// Cable delay and phase offset, applied as exp(i (f_p * tau + varphi)).
/// Note there is no 2pi in the exponent: tau is in rad/Hz.
struct LineParams {
    double tau = 0.0;     ///< rad/Hz
    double varphi = 0.0;  ///< rad

    void validate() const;
};

/// Parallel RLC thermometer capacitively coupled to a feedline.
/// Construction enforces positivity and the small-coupling regime
/// 2 pi f_r Z C_g < 0.1.
class RlcParams {
public:
    RlcParams(double Z, double C_g, double Q_i, double f_r, double Z0 = 50.0);

    double Z() const { return Z_; }
    double C_g() const { return C_g_; }
    double Q_i() const { return Q_i_; }
    double f_r() const { return f_r_; }
    double Z0() const { return Z0_; }

private:
    double Z_, C_g_, Q_i_, f_r_, Z0_;
};

struct RlcRates {
    double gamma_i;       ///< 2 pi f_r / Q_i (rad/s)
    /// 4 Z Z0 C_g^2 f_r, evaluated exactly as printed. Its units come out as
    /// seconds rather than rad/s, so nothing downstream consumes it.
    double gamma_c_expr;
};

/// Smallest sigma handled by the Gaussian-averaged model: 1e-6 gamma/(2 pi).
/// Below it averaged_reflection falls back to the bare line at mu.
double sigma_min(double gamma);

/// S11 = 1 - exp(i phi) gamma_c / (gamma/2 + i Delta), Delta = 2 pi (f_r - f_p).
Complex bare_reflection(const ResonatorParams& res, double f_p);

/// Closed-form average of bare_reflection over f_r ~ N(mu, sigma^2):
///   <S11> = 1 - exp(i phi) gamma_c / (2 sqrt(2 pi) sigma)
///               * erfcx((gamma/2 + i Delta') / (2 sqrt(2) pi sigma)),
/// Delta' = 2 pi (mu - f_p). res.f_r is ignored; the line is centred at dist.mu.
Complex averaged_reflection(const ResonatorParams& res, const FreqDistribution& dist, double f_p);

/// Monte-Carlo estimate of averaged_reflection: mean of bare_reflection over
/// n_samples seeded normal draws of f_r. Samples are drawn in fixed-size
/// batches, each from its own engine seeded by (seed, batch index), and the
/// batch sums are reduced in index order.
Complex averaged_reflection_mc(const ResonatorParams& res, const FreqDistribution& dist,
                               double f_p, std::uint64_t n_samples, std::uint64_t seed);

Complex background_transfer(const BackgroundParams& bg, double f_p);

/// exp(i (f_p tau + varphi)) * H(f_p) * <S11(f_p)>
Complex full_chain_response(const ResonatorParams& res, const FreqDistribution& dist,
                            const BackgroundParams& bg, const LineParams& line, double f_p);

/// Z_in = R' - i 2 L' delta_f with R' = 1/(8 pi Z C_g^2 Q_i f_r^2),
/// L' = 1/(8 pi Z C_g^2 f_r^3).
Complex rlc_input_impedance(const RlcParams& circuit, double delta_f);
double rlc_series_resistance(const RlcParams& circuit);
double rlc_series_inductance(const RlcParams& circuit);
/// Q_e = Q_i R' / Z0
double rlc_external_q(const RlcParams& circuit);
RlcRates rlc_rates(const RlcParams& circuit);

namespace detail {
// Unchecked kernels for the fitters, which may step through parameter
// combinations that the public invariants reject (e.g. gamma_c > gamma).
Complex bare_reflection(double f_r, double gamma_c, double gamma, double phi, double f_p);
Complex averaged_reflection(double mu, double sigma, double gamma_c, double gamma, double phi,
                            double f_p);
Complex background_transfer(const BackgroundParams& bg, double f_p);
Complex line_factor(const LineParams& line, double f_p);
} // namespace detail

} // namespace bolostat
