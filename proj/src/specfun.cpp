#include "bolostat/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bolostat/errors.hpp"

namespace bolostat::specfun {
namespace {

// Region radii for the upper half-plane kernel. Inside kSeriesRadius the
// Maclaurin series converges in a handful of terms (and reproduces w(0) = 1
// exactly); beyond kFractionRadius the Laplace continued fraction converges
// to machine precision with a few dozen levels. The annulus in between uses
// Weideman's rational expansion with 40 terms.
constexpr double kSeriesRadius = 0.5;
constexpr double kFractionRadius = 8.0;
constexpr int kSeriesTerms = 28;
constexpr int kWeidemanTerms = 40;

const double kInvSqrtPi = std::numbers::inv_sqrtpi;

struct SeriesTable {
    // 1 / Gamma(n/2 + 1)
    std::array<double, kSeriesTerms> coeff{};
    SeriesTable() {
        for (int n = 0; n < kSeriesTerms; ++n) coeff[n] = 1.0 / std::tgamma(0.5 * n + 1.0);
    }
};

struct WeidemanTable {
    double L = 0.0;
    // p(Z) = sum_k coeff[k] Z^k, k = 0..N-1
    std::array<double, kWeidemanTerms> coeff{};

    WeidemanTable() {
        constexpr int N = kWeidemanTerms;
        constexpr int M = 2 * N;
        const long double pi = std::numbers::pi_v<long double>;
        const long double Ll = std::sqrt(static_cast<long double>(N) / std::sqrt(2.0L));
        L = static_cast<double>(Ll);

        // Samples of (L^2 + t^2) exp(-t^2) at t = L tan(theta/2), theta = k pi / M.
        std::array<long double, 2 * M - 1> f{};
        for (int k = -M + 1; k <= M - 1; ++k) {
            const long double t = Ll * std::tan(0.5L * k * pi / M);
            f[k + M - 1] = std::exp(-t * t) * (Ll * Ll + t * t);
        }
        // Cosine transform of the even sample sequence.
        for (int n = 1; n <= N; ++n) {
            long double acc = 0.0L;
            for (int k = -M + 1; k <= M - 1; ++k)
                acc += f[k + M - 1] * std::cos(pi * static_cast<long double>(k) * n / M);
            coeff[n - 1] = static_cast<double>(acc / (2 * M));
        }
    }
};

const SeriesTable& series_table() {
    static const SeriesTable table;
    return table;
}

const WeidemanTable& weideman_table() {
    static const WeidemanTable table;
    return table;
}

Complex w_series(Complex z) {
    const auto& c = series_table().coeff;
    const Complex iz{-z.imag(), z.real()};
    Complex acc = c[kSeriesTerms - 1];
    for (int n = kSeriesTerms - 2; n >= 0; --n) acc = acc * iz + c[n];
    return acc;
}

Complex w_weideman(Complex z) {
    const auto& tab = weideman_table();
    const Complex iz{-z.imag(), z.real()};
    const Complex denom = tab.L - iz;
    const Complex Z = (tab.L + iz) / denom;
    Complex p = tab.coeff[kWeidemanTerms - 1];
    for (int k = kWeidemanTerms - 2; k >= 0; --k) p = p * Z + tab.coeff[k];
    return 2.0 * p / (denom * denom) + kInvSqrtPi / denom;
}

// w(z) = (i/sqrt(pi)) / (z - (1/2)/(z - 1/(z - (3/2)/(z - ...)))) for Im z > 0.
Complex w_continued_fraction(Complex z) {
    const double r = std::abs(z);
    const int levels = r < 12.0 ? 24 : (r < 50.0 ? 12 : 6);
    Complex t = z;
    for (int k = levels; k >= 1; --k) t = z - (0.5 * k) / t;
    return Complex{0.0, kInvSqrtPi} / t;
}

// Faddeeva function restricted to Im z >= 0.
Complex w_upper(Complex z) {
    const double r = std::abs(z);
    if (r < kSeriesRadius) return w_series(z);
    if (r < kFractionRadius) return w_weideman(z);
    return w_continued_fraction(z);
}

void require_finite(Complex z, const char* fn) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw DomainError(std::string(fn) + ": non-finite argument");
}

} // namespace

Complex faddeeva_w(Complex z) {
    require_finite(z, "faddeeva_w");
    if (z.imag() >= 0.0) return w_upper(z);

    // Lower half-plane: w(z) = 2 exp(-z^2) - w(-z).
    const Complex mz2 = -z * z;
    if (mz2.real() > std::log(std::numeric_limits<double>::max()))
        throw RangeError("faddeeva_w: exp(-z^2) overflows for z = (" + std::to_string(z.real()) +
                         ", " + std::to_string(z.imag()) + ")");
    return 2.0 * std::exp(mz2) - w_upper(-z);
}

Complex erfcx(Complex z) {
    require_finite(z, "erfcx");
    const Complex iz{-z.imag(), z.real()};
    if (iz.imag() >= 0.0) return w_upper(iz);

    const Complex z2 = z * z;
    if (z2.real() > std::log(std::numeric_limits<double>::max()))
        throw RangeError("erfcx: exp(z^2) overflows for z = (" + std::to_string(z.real()) + ", " +
                         std::to_string(z.imag()) + ")");
    return 2.0 * std::exp(z2) - w_upper(-iz);
}

} // namespace bolostat::specfun
