#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "bolostat/fitkit.hpp"
#include "bolostat/response.hpp"

namespace bolostat {

/// Complete measured-trace model: Gaussian-averaged thermometer line seen
/// through the output-path background and the cable. Twelve scalars; mu and
/// sigma are the extraction targets.
struct FullModelParams {
    FreqDistribution dist;
    double gamma_c = 0.0;  ///< rad/s
    double gamma = 0.0;    ///< rad/s
    double phi = 0.0;      ///< rad
    BackgroundParams bg;
    LineParams line;

    ResonatorParams resonator() const { return {dist.mu, gamma_c, gamma, phi}; }
    void validate() const;
};

enum FullParam : std::size_t {
    kMu, kSigma, kGammaC, kGamma, kPhi, kSB, kFB, kGammaBC, kGammaB, kPhiB, kTau, kVarphi,
    kFullParamCount
};

inline constexpr std::array<std::string_view, kFullParamCount> kFullParamNames = {
    "mu", "sigma", "gamma_c", "gamma", "phi", "s_b", "f_b", "gamma_bc", "gamma_b", "phi_b", "tau", "varphi"};

/// Held at their base-temperature values for every later measurement.
inline constexpr std::array<FullParam, 6> kFrozenParams = {kGamma, kSB, kGammaBC, kGammaB, kTau, kVarphi};

/// Refitted per measurement: the four nuisance parameters plus mu and sigma.
inline constexpr std::array<FullParam, 6> kMeasurementParams = {kMu, kSigma, kGammaC, kPhi, kFB, kPhiB};

std::array<double, kFullParamCount> pack(const FullModelParams& p);
/// Inverse of pack; non-scalar settings (background comb) come from `like`.
FullModelParams unpack(std::span<const double> v, const FullModelParams& like);

/// Unchecked model evaluation, e^{i(f tau + varphi)} H(f) <S11(f)>.
Complex evaluate_full_model(const FullModelParams& p, double f_p);

ComplexSweep render_sweep(const FullModelParams& p, std::span<const double> freqs);

struct CalibrationResult {
    FullModelParams params;
    FitResult fit;  ///< params in SI units, ordered as FullParam
};

/// Fits all twelve scalars to a base-temperature trace. Angles are returned
/// wrapped to (-pi, pi].
CalibrationResult fit_base_calibration(const ComplexSweep& sweep, const FullModelParams& init,
                                       const FitOptions& opts = {});

struct MeasurementFit {
    double mu = 0.0;
    double sigma = 0.0;
    FitResult fit;  ///< params in SI units, ordered as kMeasurementParams
    FullModelParams params;
    bool sigma_at_floor = false;
};

/// Per-measurement fit of {mu, sigma, gamma_c, phi, f_b, phi_b} with the
/// frozen set taken from `calib`. Without an explicit init, mu starts at the
/// minimum of the background-corrected |trace| and sigma at 10% of its
/// apparent FWHM. A sigma that ends on its lower bound sets sigma_at_floor
/// and adds a warning.
MeasurementFit fit_measurement(const ComplexSweep& sweep, const CalibrationResult& calib,
                               const FitOptions& opts = {},
                               const std::optional<FullModelParams>& init = std::nullopt);

/// Nearest line of the spurious-resonance comb offset + k*spacing to f.
double nearest_comb_line(double f, double spacing = 80e6, double offset = 0.0);

} // namespace bolostat
