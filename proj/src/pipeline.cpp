#include "bolostat/pipeline.hpp"

#include <atomic>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <thread>

#include "bolostat/errors.hpp"
#include "bolostat/rng.hpp"

namespace bolostat {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Trace synthesize(const SweepConfig& cfg, const std::vector<double>& freqs, double control,
                 const PhotonMoments& m, std::uint64_t stream) {
    Trace t;
    t.truth.control = control;
    t.truth.mean_n = m.mean;
    t.truth.variance_n = m.variance;
    t.truth.mu = cfg.truth.dist.mu + polyval(cfg.shift_poly, m.mean);
    t.truth.sigma = std::sqrt(m.variance) / cfg.alpha.alpha;

    FullModelParams p = cfg.truth;
    p.dist = {t.truth.mu, t.truth.sigma};
    t.values = render_sweep(p, freqs).values;
    if (cfg.noise_rms > 0.0) {
        auto engine = make_engine(cfg.seed, stream);
        std::normal_distribution<double> normal(0.0, cfg.noise_rms);
        for (auto& z : t.values) {
            const double re = normal(engine);
            const double im = normal(engine);
            z += Complex{re, im};
        }
    }
    return t;
}

StatsRecord failed_record(const Trace& t, const std::string& why) {
    StatsRecord r;
    r.control = t.truth.control;
    r.mu = r.sigma = r.mean_n = r.variance_n = r.g2 = r.power = r.residual_rms = kNaN;
    r.truth_mean_n = t.truth.mean_n;
    r.truth_variance_n = t.truth.variance_n;
    r.warnings = why;
    return r;
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
    return out;
}

} // namespace

std::string to_string(SweepMode mode) {
    switch (mode) {
    case SweepMode::Thermal: return "thermal";
    case SweepMode::Coherent: return "coherent";
    case SweepMode::Mixed: return "mixed";
    }
    return "thermal";
}

SweepMode parse_mode(const std::string& s) {
    if (s == "thermal") return SweepMode::Thermal;
    if (s == "coherent") return SweepMode::Coherent;
    if (s == "mixed") return SweepMode::Mixed;
    throw DomainError("mode must be one of thermal, coherent, mixed (got '" + s + "')");
}

std::vector<double> ProbeGrid::frequencies() const {
    std::vector<double> f(static_cast<std::size_t>(points));
    const double step = (stop - start) / (points - 1);
    for (int i = 0; i < points; ++i) f[static_cast<std::size_t>(i)] = start + i * step;
    f.back() = stop;
    return f;
}

PhotonMoments control_moments(const SweepConfig& cfg, double control) {
    switch (cfg.mode) {
    case SweepMode::Thermal: {
        const double n = planck_mean_photon({control, cfg.radiator_frequency});
        return {n, thermal_variance(n)};
    }
    case SweepMode::Coherent: return {control, coherent_variance(control)};
    case SweepMode::Mixed: {
        const double th = planck_mean_photon({control, cfg.radiator_frequency});
        return mixed_moments(beamsplitter_combine(cfg.coherent_input, th, cfg.transmissivity));
    }
    }
    return {};
}

PhotonMoments base_moments(const SweepConfig& cfg) {
    // Reference trace: radiator at base temperature, coherent drive off.
    const double n = planck_mean_photon({cfg.base_temperature, cfg.radiator_frequency});
    if (cfg.mode == SweepMode::Coherent) return {0.0, 0.0};
    if (cfg.mode == SweepMode::Mixed) return mixed_moments(beamsplitter_combine(0.0, n, cfg.transmissivity));
    return {n, thermal_variance(n)};
}

Dataset simulate_sweep(const SweepConfig& cfg) {
    cfg.validate();
    Dataset data;
    data.config = cfg;
    data.freqs = cfg.probe.frequencies();
    const double base_control = cfg.mode == SweepMode::Coherent ? 0.0 : cfg.base_temperature;
    data.base = synthesize(cfg, data.freqs, base_control, base_moments(cfg), 0);
    for (std::size_t i = 0; i < cfg.control.size(); ++i)
        data.traces.push_back(
            synthesize(cfg, data.freqs, cfg.control[i], control_moments(cfg, cfg.control[i]), i + 1));
    return data;
}

double invert_shift(const std::vector<double>& shift_poly, double shift) {
    if (shift_poly.size() < 2 || shift_poly[1] == 0.0) throw DomainError("invert_shift: need a nonzero linear term");
    if (shift == 0.0) return 0.0;
    const double c1 = shift_poly[1];
    if (shift / c1 < 0.0) return shift / c1;

    std::vector<double> q = shift_poly;
    q[0] = 0.0;
    auto residual = [&](double n) { return polyval(q, n) - shift; };
    double hi = std::abs(shift / c1);
    while (residual(hi) * residual(0.0) > 0.0) {
        hi *= 2.0;
        if (hi > 1e9) return kNaN;
    }
    // First sign change along the branch that starts at n = 0.
    double lo = 0.0;
    constexpr int kScan = 64;
    for (int k = 1; k <= kScan; ++k) {
        const double x = hi * k / kScan;
        if (residual(x) * residual(0.0) <= 0.0) {
            hi = x;
            break;
        }
        lo = x;
    }
    std::uintmax_t max_iter = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(residual, lo, hi, boost::math::tools::eps_tolerance<double>(),
                                                          max_iter);
    return 0.5 * (a + b);
}

bool Extraction::all_converged() const {
    for (const auto& r : records)
        if (!r.converged) return false;
    return true;
}

Extraction extract_statistics(const Dataset& data, int workers) {
    const SweepConfig& cfg = data.config;
    Extraction ex;
    ex.mode = cfg.mode;

    FullModelParams init = cfg.truth;
    init.bg.f_b = nearest_comb_line(0.5 * (cfg.probe.start + cfg.probe.stop), cfg.truth.bg.spacing, cfg.comb_offset);
    init = cfg.fit_init.apply(init);
    ex.calibration = fit_base_calibration(data.sweep(data.base), init, cfg.fit);

    const double mu_base = ex.calibration.params.dist.mu;
    const double sigma_base = ex.calibration.params.dist.sigma;
    const double alpha = cfg.alpha.alpha;

    ex.records.resize(data.traces.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < data.traces.size(); i = next++) {
            const Trace& t = data.traces[i];
            try {
                const MeasurementFit m = fit_measurement(data.sweep(t), ex.calibration, cfg.fit);
                StatsRecord r;
                r.control = t.truth.control;
                r.mu = m.mu;
                r.sigma = m.sigma;
                r.mean_n = invert_shift(cfg.shift_poly, m.mu - mu_base);
                r.variance_n = alpha * alpha * (m.sigma * m.sigma - sigma_base * sigma_base);
                r.truth_mean_n = t.truth.mean_n;
                r.truth_variance_n = t.truth.variance_n;
                r.residual_rms = m.fit.residual_norm;
                r.converged = m.fit.converged;
                r.sigma_at_floor = m.sigma_at_floor;
                r.power = r.mean_n >= 0.0 ? flux_to_power(r.mean_n, cfg.filter_f0, cfg.filter_fwhm) : kNaN;
                std::vector<std::string> warn = m.fit.warnings;
                if (r.mean_n > 0.0) {
                    r.g2 = g2_zero({r.mean_n, r.variance_n});
                } else {
                    r.g2 = kNaN;
                    warn.push_back("g2 undefined for mean_n <= 0");
                }
                if (r.variance_n < 0.0) warn.push_back("negative variance: broadening below base reference");
                r.warnings = join(warn);
                ex.records[i] = std::move(r);
            } catch (const std::exception& e) {
                ex.records[i] = failed_record(t, e.what());
            }
        }
    };
    const auto n_threads = static_cast<std::size_t>(std::max(1, workers));
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < std::min(n_threads, data.traces.size()); ++k) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    return ex;
}

} // namespace bolostat
