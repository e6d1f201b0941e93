#include "bolostat/staged_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bolostat/errors.hpp"

namespace bolostat {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSigmaMax = 20e6;

// Fit-internal units: MHz for frequencies, 1/us for rates, rad/MHz for tau.
constexpr std::array<double, kFullParamCount> kUnit = {1e6, 1e6, 1e6, 1e6, 1.0, 1.0,
                                                       1e6, 1e6, 1e6, 1.0, 1e-6, 1.0};

bool is_angle(std::size_t k) { return k == kPhi || k == kPhiB || k == kVarphi; }

// sigma is fitted as its square: the model is flat in sigma at sigma = 0 but
// has a nonzero slope in sigma^2.
double to_internal(std::size_t k, double si) {
    return k == kSigma ? std::pow(si / kUnit[k], 2) : si / kUnit[k];
}

double to_si(std::size_t k, double p) {
    return k == kSigma ? kUnit[k] * std::sqrt(std::max(p, 0.0)) : p * kUnit[k];
}

// d(SI value)/d(internal value)
double si_slope(std::size_t k, double p) {
    return k == kSigma ? 0.5 * kUnit[k] / std::sqrt(p) : kUnit[k];
}

ParamBounds internal_bounds(std::size_t k, double gamma) {
    switch (k) {
    case kMu: return {1e-6, kInf};
    case kSigma: return {std::pow(sigma_min(gamma) / kUnit[kSigma], 2), std::pow(kSigmaMax / kUnit[kSigma], 2)};
    case kGammaC: return {1e-9, kInf};
    case kGamma: return {1e-9, kInf};
    case kPhi: return {-std::numbers::pi / 2.0, std::numbers::pi / 2.0};
    case kGammaBC: return {0.0, kInf};
    case kGammaB: return {1e-9, kInf};
    case kTau: return {0.0, kInf};
    default: return {};
    }
}

std::vector<std::string> names_of(std::span<const std::size_t> idx) {
    std::vector<std::string> out;
    for (auto k : idx) out.emplace_back(kFullParamNames[k]);
    return out;
}

// Fits the subset `idx` of the twelve scalars, the rest held at `start`.
// Internally varphi is referenced to the sweep centre f_c, i.e. the fitted
// phase is varphi + tau f_c, which decorrelates it from tau.
FitResult fit_subset(const ComplexSweep& sweep, const FullModelParams& start, std::span<const std::size_t> idx,
                     std::span<const ParamBounds> bounds, const FitOptions& opts) {
    const auto base = pack(start);
    const double f_c = 0.5 * (sweep.freqs.front() + sweep.freqs.back());
    const auto pos = [&](std::size_t k) { return std::find(idx.begin(), idx.end(), k) - idx.begin(); };
    const auto j_tau = static_cast<std::size_t>(pos(kTau));
    const auto j_varphi = static_cast<std::size_t>(pos(kVarphi));
    const bool centred = j_varphi < idx.size();

    std::vector<double> init;
    for (auto k : idx) init.push_back(to_internal(k, base[k]));
    if (centred) init[j_varphi] += base[kTau] * f_c;
    for (std::size_t j = 0; j < idx.size(); ++j)
        init[j] = std::clamp(init[j], bounds[j].lower, bounds[j].upper);

    const std::size_t m = sweep.size();
    ResidualProblem prob;
    prob.n_residuals = 2 * m;
    prob.n_points = m;
    prob.names = names_of(idx);
    for (const auto& v : sweep.values) prob.data_norm2 += std::norm(v);
    prob.fn = [&](std::span<const double> p, std::span<double> r) {
        auto full = base;
        for (std::size_t j = 0; j < idx.size(); ++j) full[idx[j]] = to_si(idx[j], p[j]);
        if (centred) full[kVarphi] -= full[kTau] * f_c;
        const FullModelParams fp = unpack(full, start);
        for (std::size_t i = 0; i < m; ++i) {
            const Complex d = evaluate_full_model(fp, sweep.freqs[i]) - sweep.values[i];
            r[2 * i] = d.real();
            r[2 * i + 1] = d.imag();
        }
    };
    FitResult fit = solve_least_squares(prob, std::move(init), bounds, opts);

    // Back to SI units and the uncentred phase, angles wrapped.
    const auto n = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        const auto j = static_cast<std::size_t>(a);
        T(a, a) = si_slope(idx[j], fit.params[j]);
    }
    if (centred) {
        const double tau = j_tau < idx.size() ? fit.params[j_tau] * kUnit[kTau] : base[kTau];
        fit.params[j_varphi] -= tau * f_c;
        if (j_tau < idx.size())
            T(static_cast<Eigen::Index>(j_varphi), static_cast<Eigen::Index>(j_tau)) = -kUnit[kTau] * f_c;
    }
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (!(centred && j == j_varphi)) fit.params[j] = to_si(idx[j], fit.params[j]);
        if (is_angle(idx[j])) fit.params[j] = wrap_angle(fit.params[j]);
    }
    fit.covariance = T * fit.covariance * T.transpose();
    return fit;
}

// Trace with the frozen output path divided out.
std::vector<Complex> strip_background(const ComplexSweep& sweep, const FullModelParams& p) {
    std::vector<Complex> out(sweep.size());
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        const double f = sweep.freqs[i];
        out[i] = sweep.values[i] / (detail::line_factor(p.line, f) * detail::background_transfer(p.bg, f));
    }
    return out;
}

double sweep_cost(const ComplexSweep& sweep, const FullModelParams& p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < sweep.size(); ++i)
        acc += std::norm(evaluate_full_model(p, sweep.freqs[i]) - sweep.values[i]);
    return acc;
}

// Below resolvable broadening the model is flat in sigma. Pins it to the
// floor when that moves the cost by less than one standard error.
bool pin_sigma(const ComplexSweep& sweep, FullModelParams& p, std::size_t n_free) {
    const double floor = sigma_min(p.gamma);
    if (p.dist.sigma <= floor) {
        // Below the floor the model is already the bare line.
        p.dist.sigma = floor;
        return true;
    }
    auto pinned = p;
    pinned.dist.sigma = floor;
    const double cost = sweep_cost(sweep, p);
    const double dof = static_cast<double>(2 * sweep.size() - n_free);
    double data_norm2 = 0.0;
    for (const auto& z : sweep.values) data_norm2 += std::norm(z);
    if (sweep_cost(sweep, pinned) - cost > cost / dof + 1e-20 * data_norm2) return false;
    p = pinned;
    return true;
}

} // namespace

void FullModelParams::validate() const {
    dist.validate();
    resonator().validate();
    bg.validate();
    line.validate();
}

std::array<double, kFullParamCount> pack(const FullModelParams& p) {
    return {p.dist.mu, p.dist.sigma, p.gamma_c, p.gamma, p.phi, p.bg.s_b,
            p.bg.f_b, p.bg.gamma_bc, p.bg.gamma_b, p.bg.phi_b, p.line.tau, p.line.varphi};
}

FullModelParams unpack(std::span<const double> v, const FullModelParams& like) {
    if (v.size() != kFullParamCount) throw DomainError("unpack: expected 12 scalars");
    FullModelParams p = like;
    p.dist = {v[kMu], v[kSigma]};
    p.gamma_c = v[kGammaC];
    p.gamma = v[kGamma];
    p.phi = v[kPhi];
    p.bg.s_b = v[kSB];
    p.bg.f_b = v[kFB];
    p.bg.gamma_bc = v[kGammaBC];
    p.bg.gamma_b = v[kGammaB];
    p.bg.phi_b = v[kPhiB];
    p.line.tau = v[kTau];
    p.line.varphi = v[kVarphi];
    return p;
}

Complex evaluate_full_model(const FullModelParams& p, double f_p) {
    return detail::line_factor(p.line, f_p) * detail::background_transfer(p.bg, f_p) *
           detail::averaged_reflection(p.dist.mu, p.dist.sigma, p.gamma_c, p.gamma, p.phi, f_p);
}

ComplexSweep render_sweep(const FullModelParams& p, std::span<const double> freqs) {
    ComplexSweep s;
    s.freqs.assign(freqs.begin(), freqs.end());
    s.values.reserve(freqs.size());
    for (double f : freqs) s.values.push_back(evaluate_full_model(p, f));
    return s;
}

double nearest_comb_line(double f, double spacing, double offset) {
    return offset + spacing * std::round((f - offset) / spacing);
}

CalibrationResult fit_base_calibration(const ComplexSweep& sweep, const FullModelParams& init,
                                       const FitOptions& opts) {
    sweep.validate();
    init.validate();
    std::array<std::size_t, kFullParamCount> idx{};
    std::vector<ParamBounds> bounds;
    for (std::size_t k = 0; k < kFullParamCount; ++k) {
        idx[k] = k;
        bounds.push_back(internal_bounds(k, init.gamma));
    }
    // Cable phase and overall scale first: a rotated start otherwise sends
    // the first full step far off.
    const std::array<std::size_t, 3> line_idx = {kSB, kTau, kVarphi};
    const std::array<ParamBounds, 3> line_bounds = {bounds[kSB], bounds[kTau], bounds[kVarphi]};
    const FitResult pre = fit_subset(sweep, init, line_idx, line_bounds, opts);
    auto v = pack(init);
    for (std::size_t j = 0; j < line_idx.size(); ++j) v[line_idx[j]] = pre.params[j];
    const FullModelParams start = unpack(v, init);

    CalibrationResult out;
    out.fit = fit_subset(sweep, start, idx, bounds, opts);
    out.params = unpack(out.fit.params, init);
    if (pin_sigma(sweep, out.params, kFullParamCount)) out.fit.params[kSigma] = out.params.dist.sigma;
    return out;
}

MeasurementFit fit_measurement(const ComplexSweep& sweep, const CalibrationResult& calib, const FitOptions& opts,
                               const std::optional<FullModelParams>& init) {
    sweep.validate();
    FullModelParams start = calib.params;
    if (init) {
        const auto given = pack(*init);
        auto v = pack(start);
        for (auto k : kMeasurementParams) v[k] = given[k];
        start = unpack(v, start);
    } else {
        const auto stripped = strip_background(sweep, start);
        std::vector<double> depth(stripped.size());
        for (std::size_t i = 0; i < depth.size(); ++i) depth[i] = std::abs(1.0 - stripped[i]);
        std::size_t ipk = 0;
        for (std::size_t i = 1; i < stripped.size(); ++i)
            if (std::abs(stripped[i]) < std::abs(stripped[ipk])) ipk = i;
        const double half = 0.5 * depth[ipk];
        std::size_t l = ipk, r = ipk;
        while (l > 0 && depth[l] > half) --l;
        while (r + 1 < depth.size() && depth[r] > half) ++r;
        const double fwhm = sweep.freqs[r] - sweep.freqs[l];
        start.dist.mu = sweep.freqs[ipk];
        start.dist.sigma = 0.1 * fwhm;
    }

    const double gamma = calib.params.gamma;
    std::vector<std::size_t> idx(kMeasurementParams.begin(), kMeasurementParams.end());
    std::vector<ParamBounds> bounds;
    for (auto k : idx) bounds.push_back(internal_bounds(k, gamma));
    bounds[2].upper = gamma / kUnit[kGammaC];  // gamma_c <= gamma

    MeasurementFit out;
    out.fit = fit_subset(sweep, start, idx, bounds, opts);
    auto v = pack(start);
    for (std::size_t j = 0; j < idx.size(); ++j) v[idx[j]] = out.fit.params[j];
    out.params = unpack(v, start);
    out.mu = out.params.dist.mu;
    out.sigma = out.params.dist.sigma;
    if (pin_sigma(sweep, out.params, idx.size())) {
        out.sigma = out.params.dist.sigma;
        out.fit.params[1] = out.sigma;
    }
    out.sigma_at_floor = out.sigma <= sigma_min(gamma) * (1.0 + 1e-9);
    if (out.sigma_at_floor) out.fit.warnings.push_back("sigma pinned at lower bound (no resolvable broadening)");
    return out;
}

} // namespace bolostat
