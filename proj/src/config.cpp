#include <algorithm>
#include <cmath>
#include <numbers>

#include "bolostat/errors.hpp"
#include "bolostat/io.hpp"
#include "bolostat/pipeline.hpp"
#include "json.hpp"

namespace bolostat {
namespace {

using nlohmann::json;

void check(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ValidationError(field, what);
}

double get_number(const json& j, const std::string& key, double fallback, const std::string& path) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    check(v.is_number(), path + key, "must be a number");
    const double d = v.get<double>();
    check(std::isfinite(d), path + key, "must be finite");
    return d;
}

std::optional<double> get_optional(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) return std::nullopt;
    return get_number(j, key, 0.0, path);
}

std::vector<double> get_numbers(const json& j, const std::string& key, std::vector<double> fallback,
                                const std::string& path) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    check(v.is_array(), path + key, "must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        check(v[i].is_number(), path + key + "[" + std::to_string(i) + "]", "must be a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

const json& get_object(const json& j, const std::string& key, const std::string& path) {
    static const json empty = json::object();
    if (!j.contains(key)) return empty;
    check(j.at(key).is_object(), path + key, "must be an object");
    return j.at(key);
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& path) {
    for (const auto& [key, _] : j.items()) {
        const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return key == k; });
        check(ok, path + key, "unknown field");
    }
}

constexpr std::initializer_list<const char*> kParamKeys = {
    "mu_hz", "sigma_hz", "gamma_c", "gamma", "phi", "s_b", "f_b_hz", "gamma_bc", "gamma_b", "phi_b",
    "tau", "varphi", "n_resonances", "spacing_hz"};

ParamOverrides parse_overrides(const json& j, const std::string& path, bool allow_layout) {
    reject_unknown(j, kParamKeys, path);
    if (!allow_layout)
        check(!j.contains("n_resonances") && !j.contains("spacing_hz"), path + "n_resonances",
              "background comb layout is set under truth only");
    ParamOverrides o;
    o.mu = get_optional(j, "mu_hz", path);
    o.sigma = get_optional(j, "sigma_hz", path);
    o.gamma_c = get_optional(j, "gamma_c", path);
    o.gamma = get_optional(j, "gamma", path);
    o.phi = get_optional(j, "phi", path);
    o.s_b = get_optional(j, "s_b", path);
    o.f_b = get_optional(j, "f_b_hz", path);
    o.gamma_bc = get_optional(j, "gamma_bc", path);
    o.gamma_b = get_optional(j, "gamma_b", path);
    o.phi_b = get_optional(j, "phi_b", path);
    o.tau = get_optional(j, "tau", path);
    o.varphi = get_optional(j, "varphi", path);
    return o;
}

json params_json(const FullModelParams& p) {
    return {{"mu_hz", p.dist.mu},        {"sigma_hz", p.dist.sigma}, {"gamma_c", p.gamma_c},
            {"gamma", p.gamma},          {"phi", p.phi},             {"s_b", p.bg.s_b},
            {"f_b_hz", p.bg.f_b},        {"gamma_bc", p.bg.gamma_bc}, {"gamma_b", p.bg.gamma_b},
            {"phi_b", p.bg.phi_b},       {"tau", p.line.tau},        {"varphi", p.line.varphi},
            {"n_resonances", p.bg.n_resonances}, {"spacing_hz", p.bg.spacing}};
}

json overrides_json(const ParamOverrides& o) {
    json j = json::object();
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
    };
    put("mu_hz", o.mu);
    put("sigma_hz", o.sigma);
    put("gamma_c", o.gamma_c);
    put("gamma", o.gamma);
    put("phi", o.phi);
    put("s_b", o.s_b);
    put("f_b_hz", o.f_b);
    put("gamma_bc", o.gamma_bc);
    put("gamma_b", o.gamma_b);
    put("phi_b", o.phi_b);
    put("tau", o.tau);
    put("varphi", o.varphi);
    return j;
}

} // namespace

FullModelParams SweepConfig::default_truth() {
    FullModelParams p;
    p.dist = {524e6, 0.0};
    p.gamma_c = 4.8e6;
    p.gamma = 18.7e6;
    p.phi = 0.1;
    p.bg.s_b = 0.8;
    p.bg.f_b = 540e6;
    p.bg.gamma_b = 2.0 * std::numbers::pi * 25e6;
    p.bg.gamma_bc = 0.1 * p.bg.gamma_b;
    p.bg.phi_b = 0.4;
    p.line = {4e-8, -0.6};
    return p;
}

FullModelParams ParamOverrides::apply(FullModelParams p) const {
    auto set = [](double& dst, const std::optional<double>& v) {
        if (v) dst = *v;
    };
    set(p.dist.mu, mu);
    set(p.dist.sigma, sigma);
    set(p.gamma_c, gamma_c);
    set(p.gamma, gamma);
    set(p.phi, phi);
    set(p.bg.s_b, s_b);
    set(p.bg.f_b, f_b);
    set(p.bg.gamma_bc, gamma_bc);
    set(p.bg.gamma_b, gamma_b);
    set(p.bg.phi_b, phi_b);
    set(p.line.tau, tau);
    set(p.line.varphi, varphi);
    return p;
}

void SweepConfig::validate() const {
    check(!control.empty(), "control", "must not be empty");
    for (std::size_t i = 0; i < control.size(); ++i) {
        const std::string field = "control[" + std::to_string(i) + "]";
        check(std::isfinite(control[i]) && control[i] >= 0.0, field, "must be finite and >= 0");
        check(i == 0 || control[i] > control[i - 1], field, "grid must be strictly increasing");
    }
    check(radiator_frequency > 0.0, "radiator_frequency_hz", "must be positive");
    check(filter_f0 > 0.0, "filter.f0_hz", "must be positive");
    check(filter_fwhm > 0.0, "filter.fwhm_hz", "must be positive");
    check(alpha.alpha > 0.0, "alpha_per_mhz", "must be positive");
    check(transmissivity >= 0.0 && transmissivity <= 1.0, "transmissivity", "must lie in [0, 1]");
    check(coherent_input >= 0.0, "coherent_input", "must be >= 0");
    check(base_temperature >= 0.0, "base_temperature_k", "must be >= 0");
    check(!shift_poly.empty() && shift_poly.size() <= 8, "shift_poly_hz", "needs 1 to 8 coefficients");
    check(shift_poly.size() >= 2 && shift_poly[1] != 0.0, "shift_poly_hz[1]", "linear coefficient must be nonzero");
    check(probe.points >= 8, "probe.points", "must be >= 8");
    check(probe.start > 0.0 && probe.stop > probe.start, "probe", "need 0 < start_hz < stop_hz");
    check(noise_rms >= 0.0, "noise_rms", "must be >= 0");
    check(workers >= 1, "workers", "must be >= 1");
    check(fit.max_iter >= 1, "fit.max_iter", "must be >= 1");
    try {
        truth.validate();
    } catch (const DomainError& e) {
        throw ValidationError("truth", e.what());
    }
    check(truth.dist.sigma == 0.0, "truth.sigma_hz", "broadening is set by the photon statistics; leave at 0");
}

SweepConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError("<document>", std::string("invalid JSON: ") + e.what());
    }
    check(j.is_object(), "<document>", "must be a JSON object");
    reject_unknown(j,
                   {"mode", "control", "radiator_frequency_hz", "filter", "alpha_per_mhz", "transmissivity",
                    "coherent_input", "base_temperature_k", "shift_poly_hz", "probe", "truth", "fit_init",
                    "comb_offset_hz", "noise_rms", "seed", "workers", "fit"},
                   "");

    SweepConfig cfg;
    if (j.contains("mode")) {
        check(j["mode"].is_string(), "mode", "must be a string");
        try {
            cfg.mode = parse_mode(j["mode"].get<std::string>());
        } catch (const DomainError& e) {
            throw ValidationError("mode", e.what());
        }
    }
    check(j.contains("control"), "control", "is required");
    cfg.control = get_numbers(j, "control", {}, "");
    cfg.radiator_frequency = get_number(j, "radiator_frequency_hz", cfg.radiator_frequency, "");
    const json& filter = get_object(j, "filter", "");
    reject_unknown(filter, {"f0_hz", "fwhm_hz"}, "filter.");
    cfg.filter_f0 = get_number(filter, "f0_hz", cfg.filter_f0, "filter.");
    cfg.filter_fwhm = get_number(filter, "fwhm_hz", cfg.filter_fwhm, "filter.");
    cfg.alpha = CalibrationScale::per_mhz(get_number(j, "alpha_per_mhz", cfg.alpha.alpha * 1e6, ""));
    cfg.transmissivity = get_number(j, "transmissivity", cfg.transmissivity, "");
    cfg.coherent_input = get_number(j, "coherent_input", cfg.coherent_input, "");
    cfg.base_temperature = get_number(j, "base_temperature_k", cfg.base_temperature, "");
    cfg.shift_poly = get_numbers(j, "shift_poly_hz", cfg.shift_poly, "");
    const json& probe = get_object(j, "probe", "");
    reject_unknown(probe, {"start_hz", "stop_hz", "points"}, "probe.");
    cfg.probe.start = get_number(probe, "start_hz", cfg.probe.start, "probe.");
    cfg.probe.stop = get_number(probe, "stop_hz", cfg.probe.stop, "probe.");
    const double points = get_number(probe, "points", cfg.probe.points, "probe.");
    check(points == std::floor(points) && points < 1e7, "probe.points", "must be an integer");
    cfg.probe.points = static_cast<int>(points);

    const json& truth = get_object(j, "truth", "");
    cfg.truth = parse_overrides(truth, "truth.", true).apply(cfg.truth);
    const double n_res = get_number(truth, "n_resonances", cfg.truth.bg.n_resonances, "truth.");
    check(n_res >= 1 && n_res == std::floor(n_res) && n_res <= 64, "truth.n_resonances", "must be an integer in [1, 64]");
    cfg.truth.bg.n_resonances = static_cast<int>(n_res);
    cfg.truth.bg.spacing = get_number(truth, "spacing_hz", cfg.truth.bg.spacing, "truth.");
    cfg.fit_init = parse_overrides(get_object(j, "fit_init", ""), "fit_init.", false);
    cfg.comb_offset = get_number(j, "comb_offset_hz", cfg.comb_offset, "");
    cfg.noise_rms = get_number(j, "noise_rms", cfg.noise_rms, "");
    if (j.contains("seed")) {
        check(j["seed"].is_number_unsigned(), "seed", "must be a non-negative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("workers")) {
        check(j["workers"].is_number_integer(), "workers", "must be an integer");
        cfg.workers = j["workers"].get<int>();
    }
    const json& fit = get_object(j, "fit", "");
    reject_unknown(fit, {"max_iter", "rel_tol", "grad_tol", "residual_threshold"}, "fit.");
    cfg.fit.max_iter = static_cast<int>(get_number(fit, "max_iter", cfg.fit.max_iter, "fit."));
    cfg.fit.rel_tol = get_number(fit, "rel_tol", cfg.fit.rel_tol, "fit.");
    cfg.fit.grad_tol = get_number(fit, "grad_tol", cfg.fit.grad_tol, "fit.");
    if (fit.contains("residual_threshold"))
        cfg.fit.residual_threshold = get_number(fit, "residual_threshold", 0.0, "fit.");
    cfg.validate();
    return cfg;
}

std::string dump_config(const SweepConfig& cfg) {
    json fit = {{"max_iter", cfg.fit.max_iter}, {"rel_tol", cfg.fit.rel_tol}, {"grad_tol", cfg.fit.grad_tol}};
    if (std::isfinite(cfg.fit.residual_threshold)) fit["residual_threshold"] = cfg.fit.residual_threshold;
    const json j = {
        {"mode", to_string(cfg.mode)},
        {"control", cfg.control},
        {"radiator_frequency_hz", cfg.radiator_frequency},
        {"filter", {{"f0_hz", cfg.filter_f0}, {"fwhm_hz", cfg.filter_fwhm}}},
        {"alpha_per_mhz", cfg.alpha.alpha * 1e6},
        {"transmissivity", cfg.transmissivity},
        {"coherent_input", cfg.coherent_input},
        {"base_temperature_k", cfg.base_temperature},
        {"shift_poly_hz", cfg.shift_poly},
        {"probe", {{"start_hz", cfg.probe.start}, {"stop_hz", cfg.probe.stop}, {"points", cfg.probe.points}}},
        {"truth", params_json(cfg.truth)},
        {"fit_init", overrides_json(cfg.fit_init)},
        {"comb_offset_hz", cfg.comb_offset},
        {"noise_rms", cfg.noise_rms},
        {"seed", cfg.seed},
        {"workers", cfg.workers},
        {"fit", fit},
    };
    return j.dump(2);
}

SweepConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

} // namespace bolostat
