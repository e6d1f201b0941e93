#include "bolostat/photonstats.hpp"

#include <cmath>
#include <numeric>

#include "bolostat/errors.hpp"

namespace bolostat {

double planck_mean_photon(const RadiatorState& state) {
    if (!(state.T >= 0.0) || !(state.f > 0.0))
        throw DomainError("planck_mean_photon: need T >= 0 and f > 0");
    if (state.T == 0.0) return 0.0;
    const double x = constants::planck * state.f / (constants::boltzmann * state.T);
    return 1.0 / std::expm1(x);
}

double thermal_variance(double mean) {
    if (!(mean >= 0.0)) throw DomainError("thermal_variance: mean must be >= 0");
    return mean * (mean + 1.0);
}

double coherent_variance(double mean) {
    if (!(mean >= 0.0)) throw DomainError("coherent_variance: mean must be >= 0");
    return mean;
}

PhotonMoments mixed_moments(const MixedField& field) {
    if (!(field.n_coh >= 0.0) || !(field.n_th >= 0.0))
        throw DomainError("mixed_moments: fluxes must be >= 0");
    const double nc = field.n_coh, nt = field.n_th;
    return {nc + nt, nc * (2.0 * nt + 1.0) + nt * (nt + 1.0)};
}

double g2_zero(const PhotonMoments& m) {
    if (!(m.mean > 0.0)) throw UndefinedStatisticError("g2_zero: undefined for mean photon flux <= 0");
    return 1.0 + (m.variance - m.mean) / (m.mean * m.mean);
}

double sigma_to_variance(double sigma, const CalibrationScale& scale) {
    if (!(sigma >= 0.0)) throw DomainError("sigma_to_variance: sigma must be >= 0");
    if (!(scale.alpha > 0.0)) throw DomainError("sigma_to_variance: alpha must be > 0");
    const double dn = scale.alpha * sigma;
    return dn * dn;
}

MixedField beamsplitter_combine(double coh_in, double th_in, double Gamma) {
    if (!(Gamma >= 0.0 && Gamma <= 1.0))
        throw DomainError("beamsplitter_combine: transmissivity must lie in [0, 1]");
    if (!(coh_in >= 0.0) || !(th_in >= 0.0))
        throw DomainError("beamsplitter_combine: input fluxes must be >= 0");
    return {Gamma * coh_in, (1.0 - Gamma) * th_in};
}

double flux_to_power(double mean, double f, double bandwidth) {
    if (!(mean >= 0.0 && f >= 0.0 && bandwidth >= 0.0))
        throw DomainError("flux_to_power: arguments must be >= 0");
    return mean * constants::planck * f * bandwidth;
}

double bath_corrected_power(double T_b, double T, double /*f*/, const BathCorrection& corr) {
    if (!(T_b >= 0.0) || !(T >= 0.0))
        throw DomainError("bath_corrected_power: temperatures must be >= 0");
    if (!(corr.beta >= 0.0) || !(corr.bandwidth > 0.0))
        throw DomainError("bath_corrected_power: need beta >= 0 and bandwidth > 0");
    return corr.beta * T_b + corr.bandwidth * constants::boltzmann * T;
}

ResolutionMetrics resolution_metrics(std::span<const double> s) {
    if (s.size() < 2) throw InsufficientDataError("resolution_metrics: need at least 2 samples");
    const double n = static_cast<double>(s.size());
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : s) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    const double cv = sd == 0.0 ? 0.0 : sd / std::abs(mean);
    return {mean, sd, cv};
}

} // namespace bolostat
