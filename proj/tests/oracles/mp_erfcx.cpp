#include "mp_erfcx.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/multiprecision/mpfr.hpp>
#include <cmath>

namespace oracle {
namespace {

using boost::multiprecision::mpfr_float;

struct MpComplex {
    mpfr_float re, im;
};

MpComplex mul(const MpComplex& a, const MpComplex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

} // namespace

std::complex<double> mp_erfcx(std::complex<double> z) {
    const double x = z.real(), y = z.imag();
    const double r2 = x * x + y * y;
    const double growth = r2 + std::max(x * x - y * y, 0.0);
    const unsigned bits = static_cast<unsigned>(growth * 1.4427 + std::log2(r2 + 2.0) + 96.0);
    const unsigned digits = bits * 30103u / 100000u + 2u;
    mpfr_float::default_precision(digits);

    const MpComplex zz{mpfr_float(x), mpfr_float(y)};
    const MpComplex minus_z2{-(zz.re * zz.re - zz.im * zz.im), -(2 * zz.re * zz.im)};

    MpComplex term = zz;
    MpComplex sum = zz;
    const mpfr_float tiny = boost::multiprecision::ldexp(mpfr_float(1), -static_cast<int>(bits));
    for (long n = 1;; ++n) {
        term = mul(term, minus_z2);
        term.re /= n;
        term.im /= n;
        sum.re += term.re / (2 * n + 1);
        sum.im += term.im / (2 * n + 1);
        if (n > r2 + 10 && abs(term.re) + abs(term.im) < tiny) break;
    }
    const mpfr_float two_over_sqrt_pi = 2 / sqrt(boost::math::constants::pi<mpfr_float>());
    const MpComplex erfc{1 - two_over_sqrt_pi * sum.re, -two_over_sqrt_pi * sum.im};

    const mpfr_float mag = exp(-minus_z2.re);
    const MpComplex ez2{mag * cos(-minus_z2.im), mag * sin(-minus_z2.im)};
    const MpComplex out = mul(ez2, erfc);
    return {static_cast<double>(out.re), static_cast<double>(out.im)};
}

double quad_erfcx(double x) {
    boost::math::quadrature::exp_sinh<long double> integrator;
    const long double xl = x;
    auto f = [xl](long double t) { return std::exp(-t * t - 2 * xl * t); };
    const long double v = integrator.integrate(f, 0.0L, std::numeric_limits<long double>::infinity());
    return static_cast<double>(2.0L / std::sqrt(3.14159265358979323846264338327950288L) * v);
}

long double series_erfi(long double x) {
    long double term = x, sum = x;
    for (int n = 1; n < 200; ++n) {
        term *= x * x / n;
        sum += term / (2 * n + 1);
    }
    return 2.0L / std::sqrt(3.14159265358979323846264338327950288L) * sum;
}

} // namespace oracle
