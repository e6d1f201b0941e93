#include <cmath>
#include <numbers>
#include <random>

#include "bolostat/errors.hpp"
#include "bolostat/fitkit.hpp"
#include "doctest.h"

using namespace bolostat;

namespace {

constexpr double kPi = std::numbers::pi;

ComplexSweep bare_sweep(const ResonatorParams& res, double lo, double hi, int n) {
    ComplexSweep s;
    for (int i = 0; i < n; ++i) {
        const double f = lo + (hi - lo) * i / (n - 1);
        s.freqs.push_back(f);
        s.values.push_back(bare_reflection(res, f));
    }
    return s;
}

// Bare line in fit units: f_r in MHz, rates in 1/us.
const ComplexModel kBareModel = [](double f, std::span<const double> p) {
    return detail::bare_reflection(p[0] * 1e6, p[1] * 1e6, p[2] * 1e6, p[3], f);
};

} // namespace

TEST_CASE("least_squares: truth is a zero-residual fixed point") {
    const ResonatorParams res{524e6, 4.8e6, 18.7e6, 0.2};
    const auto sweep = bare_sweep(res, 510e6, 538e6, 101);
    const FitResult fit = least_squares(kBareModel, sweep, {524.0, 4.8, 18.7, 0.2});
    CHECK(fit.converged);
    CHECK(fit.n_iter <= 2);
    CHECK(fit.residual_norm < 1e-12);
}

TEST_CASE("least_squares: linear model matches the normal-equations solution") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::vector<double> x, y;
    for (int i = 0; i < 40; ++i) {
        x.push_back(0.25 * i);
        y.push_back(1.7 * x.back() - 0.4 + noise(rng));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double a = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double b = (sy - a * sx) / n;

    const RealModel line = [](double t, std::span<const double> p) { return p[0] * t + p[1]; };
    const FitResult fit = curve_fit(line, x, y, {0.0, 0.0});
    CHECK(fit.converged);
    CHECK(fit.params[0] == doctest::Approx(a).epsilon(1e-10));
    CHECK(fit.params[1] == doctest::Approx(b).epsilon(1e-10));
}

TEST_CASE("least_squares: covariance describes the scatter of noisy fits") {
    // |S11| of a bare line with 1% additive noise, fitted over many seeds.
    const std::vector<double> truth = {524.0, 4.8, 18.7};
    const RealModel mag = [](double f, std::span<const double> p) {
        return std::abs(detail::bare_reflection(p[0] * 1e6, p[1] * 1e6, p[2] * 1e6, 0.0, f));
    };
    std::vector<double> f;
    for (int i = 0; i < 201; ++i) f.push_back(505e6 + 0.2e6 * i);

    int within = 0;
    const int n_seeds = 40;
    for (int seed = 0; seed < n_seeds; ++seed) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
        std::normal_distribution<double> noise(0.0, 0.01);
        std::vector<double> y;
        for (double fi : f) y.push_back(mag(fi, truth) + noise(rng));
        const FitResult fit = curve_fit(mag, f, y, {523.5, 5.0, 18.0});
        REQUIRE(fit.converged);
        bool ok = true;
        for (int k = 0; k < 3; ++k) ok = ok && std::abs(fit.params[k] - truth[k]) < 5.0 * std::sqrt(fit.covariance(k, k));
        within += ok;
    }
    CHECK(within == n_seeds);
}

TEST_CASE("least_squares: accepted steps never increase the cost") {
    const ResonatorParams res{524e6, 4.8e6, 18.7e6, 0.2};
    const auto sweep = bare_sweep(res, 510e6, 538e6, 101);
    const FitResult fit = least_squares(kBareModel, sweep, {521.0, 3.0, 25.0, -0.3});
    CHECK(fit.converged);
    for (std::size_t i = 1; i < fit.cost_history.size(); ++i) CHECK(fit.cost_history[i] <= fit.cost_history[i - 1]);
    CHECK(fit.params[0] == doctest::Approx(524.0).epsilon(1e-10));
}

TEST_CASE("least_squares: deterministic") {
    const ResonatorParams res{524e6, 4.8e6, 18.7e6, 0.2};
    const auto sweep = bare_sweep(res, 510e6, 538e6, 101);
    const FitResult a = least_squares(kBareModel, sweep, {521.0, 3.0, 25.0, -0.3});
    const FitResult b = least_squares(kBareModel, sweep, {521.0, 3.0, 25.0, -0.3});
    CHECK(a.params == b.params);
    CHECK(a.n_iter == b.n_iter);
}

TEST_CASE("least_squares: iteration cap gives a non-converged result") {
    const ResonatorParams res{524e6, 4.8e6, 18.7e6, 0.2};
    const auto sweep = bare_sweep(res, 510e6, 538e6, 101);
    FitOptions opts;
    opts.max_iter = 1;
    const FitResult fit = least_squares(kBareModel, sweep, {521.0, 3.0, 25.0, -0.3}, {}, opts);
    CHECK_FALSE(fit.converged);
    CHECK(fit.n_iter == 1);
    CHECK_FALSE(fit.warnings.empty());
}

TEST_CASE("least_squares: degenerate directions are named") {
    const RealModel redundant = [](double t, std::span<const double> p) { return (p[0] + p[1]) * t + p[2]; };
    const std::vector<double> x = {0, 1, 2, 3, 4, 5, 6, 7}, y = {1, 3, 5, 7, 9, 11, 13, 15};
    try {
        curve_fit(redundant, x, y, {0.5, 0.5, 0.0}, {}, {}, {"a", "b", "c"});
        FAIL("expected RankDeficiencyError");
    } catch (const RankDeficiencyError& e) {
        REQUIRE(e.directions().size() == 1);
        const std::string& d = e.directions()[0];
        CHECK(d.find('a') != std::string::npos);
        CHECK(d.find('b') != std::string::npos);
        CHECK(d.find('c') == std::string::npos);
    }
}

TEST_CASE("least_squares: bounds") {
    const RealModel line = [](double t, std::span<const double> p) { return p[0] * t + p[1]; };
    const std::vector<double> x = {0, 1, 2, 3, 4, 5, 6, 7}, y = {1, 3, 5, 7, 9, 11, 13, 15};
    const std::vector<ParamBounds> bounds = {{0.0, 1.5}, {}};
    const FitResult fit = curve_fit(line, x, y, {1.0, 0.0}, bounds);
    CHECK(fit.converged);
    CHECK(fit.params[0] == 1.5);
    CHECK(fit.covariance(0, 0) == 0.0);
    CHECK_THROWS_AS(curve_fit(line, x, y, {2.0, 0.0}, bounds), DomainError);
}

TEST_CASE("circle fit recovers the paper's thermometer line") {
    const ResonatorParams truth{524e6, 4.8e6, 18.7e6, 0.0};
    const ResonatorParams got = circle_fit(bare_sweep(truth, 510e6, 538e6, 281));
    CHECK(got.f_r == doctest::Approx(truth.f_r).epsilon(1e-3));
    CHECK(got.gamma_c == doctest::Approx(truth.gamma_c).epsilon(1e-3));
    CHECK(got.gamma == doctest::Approx(truth.gamma).epsilon(1e-3));
    CHECK(std::abs(got.phi) < 1e-3);
}

TEST_CASE("circle fit with asymmetry and over-coupling") {
    for (double phi : {-0.5, 0.25, 1.0}) {
        const ResonatorParams truth{524e6, 4.8e6, 18.7e6, phi};
        const ResonatorParams got = circle_fit(bare_sweep(truth, 505e6, 543e6, 301));
        CHECK(got.gamma_c == doctest::Approx(truth.gamma_c).epsilon(1e-3));
        CHECK(got.phi == doctest::Approx(phi).epsilon(1e-3));
    }
    const ResonatorParams over{524e6, 0.9 * 18.7e6, 18.7e6, 0.0};
    const ResonatorParams got = circle_fit(bare_sweep(over, 505e6, 543e6, 301));
    CHECK(got.gamma_c > got.gamma / 2.0);
    CHECK(got.gamma_c == doctest::Approx(over.gamma_c).epsilon(1e-3));
}

TEST_CASE("circle fit and a full least-squares fit agree") {
    const ResonatorParams truth{524e6, 4.8e6, 18.7e6, 0.15};
    const auto sweep = bare_sweep(truth, 510e6, 538e6, 281);
    const ResonatorParams c = circle_fit(sweep);
    const FitResult ls = least_squares(kBareModel, sweep, {c.f_r / 1e6, c.gamma_c / 1e6, c.gamma / 1e6, c.phi});
    CHECK(ls.params[0] * 1e6 == doctest::Approx(c.f_r).epsilon(1e-3));
    CHECK(ls.params[1] * 1e6 == doctest::Approx(c.gamma_c).epsilon(1e-3));
    CHECK(ls.params[2] * 1e6 == doctest::Approx(c.gamma).epsilon(1e-3));
}

TEST_CASE("circle fit errors") {
    ComplexSweep line;
    for (int i = 0; i < 20; ++i) {
        line.freqs.push_back(500e6 + 1e6 * i);
        line.values.push_back({0.1 * i, 0.2 * i});
    }
    CHECK_THROWS_AS(circle_fit(line), DomainError);
    ComplexSweep short_sweep = bare_sweep({524e6, 4.8e6, 18.7e6, 0.0}, 520e6, 528e6, 5);
    CHECK_THROWS_AS(circle_fit(short_sweep), DomainError);
    ComplexSweep narrow = bare_sweep({524e6, 4.8e6, 18.7e6, 0.0}, 522e6, 526e6, 41);
    CHECK_THROWS_AS(circle_fit(narrow), DomainError);
}

TEST_CASE("Lorentzian passband fit") {
    const double f0 = 8.428e9, fwhm = 133e6;
    std::vector<double> x, y;
    for (int i = 0; i < 201; ++i) {
        x.push_back(f0 - 400e6 + 4e6 * i);
        const double s = 2.0 * (x.back() - f0) / fwhm;
        y.push_back(0.05 + 0.8 / (1.0 + s * s));
    }
    const LorentzianFit fit = lorentzian_fit(x, y);
    CHECK(fit.center == doctest::Approx(f0).epsilon(1e-6));
    CHECK(fit.fwhm == doctest::Approx(fwhm).epsilon(1e-6));
    CHECK(fit.amplitude == doctest::Approx(0.8).epsilon(1e-6));
    CHECK(fit.offset == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(fit.fit.converged);

    const auto peak = std::max_element(y.begin(), y.end()) - y.begin();
    CHECK(std::abs(fit.center - x[static_cast<std::size_t>(peak)]) <= 4e6);

    SUBCASE("dips are fitted with a negative amplitude") {
        std::vector<double> dip;
        for (double v : y) dip.push_back(1.0 - v);
        const LorentzianFit d = lorentzian_fit(x, dip);
        CHECK(d.amplitude == doctest::Approx(-0.8).epsilon(1e-6));
        CHECK(d.fwhm == doctest::Approx(fwhm).epsilon(1e-6));
    }
    SUBCASE("flat data cannot locate a line") {
        const std::vector<double> flat(x.size(), 0.3);
        CHECK_THROWS_AS(lorentzian_fit(x, flat), RankDeficiencyError);
    }
    CHECK_THROWS_AS(lorentzian_fit(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 1}), DomainError);
}

TEST_CASE("polynomial fit") {
    std::vector<double> x, y;
    for (int i = 0; i < 10; ++i) {
        x.push_back(-1.0 + 0.3 * i);
        y.push_back(x.back() * x.back() * x.back());
    }
    const auto c = polynomial_fit(x, y, 3);
    REQUIRE(c.size() == 4);
    CHECK(std::abs(c[0]) < 1e-10);
    CHECK(std::abs(c[1]) < 1e-10);
    CHECK(std::abs(c[2]) < 1e-10);
    CHECK(c[3] == doctest::Approx(1.0).epsilon(1e-10));

    std::vector<double> affine;
    for (double xi : x) affine.push_back(2.5 * xi - 7.0);
    const auto l = polynomial_fit(x, affine, 1);
    CHECK(l[0] == doctest::Approx(-7.0).epsilon(1e-13));
    CHECK(l[1] == doctest::Approx(2.5).epsilon(1e-13));

    SUBCASE("residual RMS stays at the injected noise level") {
        std::mt19937_64 rng(11);
        std::normal_distribution<double> noise(0.0, 0.05);
        std::vector<double> xs, ys;
        for (int i = 0; i < 200; ++i) {
            xs.push_back(0.01 * i);
            ys.push_back(1.0 - 2.0 * xs.back() + 0.5 * std::pow(xs.back(), 3) + noise(rng));
        }
        const auto p = polynomial_fit(xs, ys, 3);
        double ss = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) ss += std::pow(ys[i] - polyval(p, xs[i]), 2);
        CHECK(std::sqrt(ss / xs.size()) < 0.05);
    }
    CHECK_THROWS_AS(polynomial_fit(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}, 3),
                    InsufficientDataError);
    CHECK_THROWS_AS(polynomial_fit(std::vector<double>{1, 1, 1, 1, 1}, std::vector<double>{1, 2, 3, 4, 5}, 2),
                    RankDeficiencyError);
    CHECK(polyval(std::vector<double>{1.0, -2.0, 3.0}, 2.0) == 9.0);
}

TEST_CASE("wrap_angle maps into (-pi, pi]") {
    CHECK(wrap_angle(kPi) == kPi);
    CHECK(wrap_angle(-kPi) == kPi);
    CHECK(wrap_angle(3.0 * kPi / 2.0) == doctest::Approx(-kPi / 2.0));
    CHECK(wrap_angle(0.3 + 8.0 * kPi) == doctest::Approx(0.3));
}
