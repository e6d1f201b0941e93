#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bolostat/fitkit.hpp"
#include "bolostat/photonstats.hpp"
#include "bolostat/staged_fit.hpp"

namespace bolostat {

enum class SweepMode { Thermal, Coherent, Mixed };

std::string to_string(SweepMode mode);
SweepMode parse_mode(const std::string& s);

/// Probe-frequency grid, inclusive of both ends.
struct ProbeGrid {
    double start = 500e6;  ///< Hz
    double stop = 540e6;   ///< Hz
    int points = 401;

    std::vector<double> frequencies() const;
};

/// Partial override of FullModelParams; unset fields keep their fallback.
struct ParamOverrides {
    std::optional<double> mu, sigma, gamma_c, gamma, phi, s_b, f_b, gamma_bc, gamma_b, phi_b, tau, varphi;

    FullModelParams apply(FullModelParams p) const;
};

/// Everything needed to synthesise a sweep and to interpret its fits.
///
/// control holds radiation temperatures (K) in thermal and mixed mode and
/// input photon flux densities (photon/(s*Hz)) in coherent mode. The thermal
/// line is shifted by shift_poly(<n>) (Hz, ascending coefficients) from
/// truth.dist.mu and broadened by sigma = Delta n / alpha.
struct SweepConfig {
    SweepMode mode = SweepMode::Thermal;
    std::vector<double> control;
    double radiator_frequency = 8.428e9;  ///< Hz
    double filter_f0 = 8.428e9;           ///< Hz
    double filter_fwhm = 133e6;           ///< Hz
    CalibrationScale alpha = CalibrationScale::per_mhz(1.92);
    double transmissivity = 0.01;         ///< coherent-port Gamma (mixed mode)
    double coherent_input = 100.0;        ///< coherent flux before the splitter (mixed mode)
    double base_temperature = 0.05;       ///< K
    std::vector<double> shift_poly = {0.0, -1.0e6, 4.0e4, -8.0e2};
    ProbeGrid probe;
    FullModelParams truth = default_truth();
    ParamOverrides fit_init;
    double comb_offset = 60e6;  ///< Hz; background comb lines at offset + k*spacing
    double noise_rms = 0.0;     ///< per-quadrature Gaussian noise on every trace
    std::uint64_t seed = 1;
    int workers = 1;
    FitOptions fit;

    /// Throws ValidationError naming the first offending field.
    void validate() const;

    static FullModelParams default_truth();
};

/// Photon moments at one control point, and at the base reference.
PhotonMoments control_moments(const SweepConfig& cfg, double control);
PhotonMoments base_moments(const SweepConfig& cfg);

struct TruthRecord {
    double control = 0.0;
    double mean_n = 0.0;
    double variance_n = 0.0;
    double mu = 0.0;     ///< Hz
    double sigma = 0.0;  ///< Hz
};

struct Trace {
    TruthRecord truth;
    std::vector<Complex> values;
};

struct Dataset {
    SweepConfig config;
    std::vector<double> freqs;
    Trace base;
    std::vector<Trace> traces;  ///< config.control order

    ComplexSweep sweep(const Trace& t) const { return {freqs, t.values}; }
};

/// Deterministic in cfg (including cfg.seed). Noise for trace i is drawn
/// from its own substream, so traces do not depend on each other.
Dataset simulate_sweep(const SweepConfig& cfg);

struct StatsRecord {
    double control = 0.0;
    double mu = 0.0;          ///< Hz
    double sigma = 0.0;       ///< Hz
    double mean_n = 0.0;
    double variance_n = 0.0;
    double g2 = 0.0;          ///< NaN when mean_n <= 0
    double power = 0.0;       ///< W, mean_n through the input filter
    double truth_mean_n = 0.0;
    double truth_variance_n = 0.0;
    double residual_rms = 0.0;
    bool converged = false;
    bool sigma_at_floor = false;
    std::string warnings;     ///< '; '-separated fit diagnostics
};

struct Extraction {
    SweepMode mode = SweepMode::Thermal;
    CalibrationResult calibration;
    std::vector<StatsRecord> records;  ///< dataset order

    bool all_converged() const;
};

/// Solves shift_poly(n) = shift for the branch continuous with n = 0.
/// Shifts on the wrong side of zero map to negative n by the linear term.
double invert_shift(const std::vector<double>& shift_poly, double shift);

/// Base calibration once, then one fit_measurement per trace on up to
/// `workers` threads. <n> comes from inverting the shift polynomial on
/// mu - mu_base, the variance from alpha^2 (sigma^2 - sigma_base^2).
Extraction extract_statistics(const Dataset& data, int workers = 1);

} // namespace bolostat
