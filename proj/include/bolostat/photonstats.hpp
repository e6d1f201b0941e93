#pragma once

#include <span>

namespace bolostat {

namespace constants {
inline constexpr double planck = 6.62607015e-34;     // J s
inline constexpr double boltzmann = 1.380649e-23;    // J/K
} // namespace constants

/// First two photon-number moments. Flux units are photon/(s*Hz) throughout.
struct PhotonMoments {
    double mean = 0.0;
    double variance = 0.0;
};

struct RadiatorState {
    double T = 0.0;  ///< radiation temperature (K)
    double f = 0.0;  ///< mode frequency (Hz)
};

/// Coherent and thermal parts of a displaced thermal field.
struct MixedField {
    double n_coh = 0.0;
    double n_th = 0.0;
};

/// Delta n = alpha * sigma. alpha is stored per Hz of sigma.
struct CalibrationScale {
    double alpha = 0.0;  ///< photon/(s*Hz) per Hz

    static CalibrationScale per_mhz(double alpha_per_mhz) { return {alpha_per_mhz * 1e-6}; }
};

/// P = beta T_b + bandwidth k_B T
struct BathCorrection {
    double beta = 0.0;       ///< W/K
    double bandwidth = 0.0;  ///< Hz (FWHM)
};

struct ResolutionMetrics {
    double mean;
    double std;  ///< unbiased sample standard deviation
    double cv;   ///< std / |mean|; 0 when std == 0
};

/// Bose-Einstein occupation 1/(exp(hf/k_B T) - 1); 0 at T = 0.
double planck_mean_photon(const RadiatorState& state);

/// n (n + 1)
double thermal_variance(double mean);

/// Poisson: variance equals the mean.
double coherent_variance(double mean);

/// Moments of a displaced thermal state:
///   mean = n_coh + n_th,  variance = n_coh (2 n_th + 1) + n_th (n_th + 1).
PhotonMoments mixed_moments(const MixedField& field);

/// g2(0) = 1 + (variance - mean) / mean^2. Throws UndefinedStatisticError for
/// mean <= 0.
double g2_zero(const PhotonMoments& m);

/// (alpha sigma)^2
double sigma_to_variance(double sigma, const CalibrationScale& scale);

/// Beam splitter with transmissivity Gamma for the coherent port:
/// n_coh = Gamma coh_in, n_th = (1 - Gamma) th_in.
MixedField beamsplitter_combine(double coh_in, double th_in, double Gamma);

/// mean * h * f * bandwidth (W)
double flux_to_power(double mean, double f, double bandwidth);

/// beta T_b + bandwidth k_B T (W). The second term is the Rayleigh-Jeans
/// form and is independent of f; f is accepted for interface symmetry.
double bath_corrected_power(double T_b, double T, double f, const BathCorrection& corr);

/// Sample mean, unbiased std and coefficient of variation of resonance
/// shifts. Throws InsufficientDataError for fewer than two samples.
ResolutionMetrics resolution_metrics(std::span<const double> shift_samples);

} // namespace bolostat
