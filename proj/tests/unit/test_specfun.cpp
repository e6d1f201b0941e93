#include <cmath>
#include <limits>
#include <numbers>

#include "bolostat/errors.hpp"
#include "bolostat/specfun.hpp"
#include "doctest.h"
#include "mp_erfcx.hpp"

using bolostat::specfun::Complex;
using bolostat::specfun::erfcx;
using bolostat::specfun::faddeeva_w;

namespace {

double rel_err(Complex got, Complex want) { return std::abs(got - want) / std::abs(want); }

} // namespace

TEST_CASE("erfcx and w at the origin are exactly one") {
    CHECK(erfcx(0.0) == Complex(1.0, 0.0));
    CHECK(faddeeva_w(0.0) == Complex(1.0, 0.0));
}

TEST_CASE("erfcx(i) matches exp(-1) (1 - i erfi(1))") {
    const long double e1 = std::exp(-1.0L);
    const Complex want(static_cast<double>(e1), static_cast<double>(-e1 * oracle::series_erfi(1.0L)));
    CHECK(rel_err(erfcx({0.0, 1.0}), want) < 1e-14);
    CHECK(std::abs(erfcx({0.0, 1.0}) - Complex(0.36788, -0.60716)) < 1e-5);
}

TEST_CASE("real axis agrees with the integral representation") {
    for (double x : {0.0, 1e-8, 0.1, 0.49, 0.5, 1.0, 2.5, 5.0, 7.99, 8.0, 12.0, 30.0, 100.0, 1e4}) {
        CAPTURE(x);
        const Complex got = erfcx(x);
        CHECK(std::abs(got.imag()) <= 1e-300);
        CHECK(std::abs(got.real() - oracle::quad_erfcx(x)) / oracle::quad_erfcx(x) < 1e-13);
    }
}

TEST_CASE("complex plane agrees with the multiprecision oracle in every region") {
    const double xs[] = {-6.0, -3.3, -1.0, -0.3, 0.0, 0.2, 0.45, 0.7, 2.0, 5.5, 7.9, 8.1, 15.0, 29.0};
    const double ys[] = {-5.0, -2.2, -0.4, 0.0, 0.3, 1.5, 4.0, 9.0, 25.0};
    double worst = 0.0;
    for (double x : xs)
        for (double y : ys) {
            const Complex z(x, y);
            const Complex want = oracle::mp_erfcx(z);
            worst = std::max(worst, rel_err(erfcx(z), want));
        }
    CHECK(worst < 1e-13);
}

TEST_CASE("conjugation and reflection symmetries") {
    for (const Complex z : {Complex(0.3, 0.7), Complex(2.0, -1.5), Complex(-4.0, 3.0), Complex(9.0, 0.5)}) {
        CAPTURE(z);
        CHECK(rel_err(erfcx(std::conj(z)), std::conj(erfcx(z))) < 1e-15);
        CHECK(rel_err(faddeeva_w(-std::conj(z)), std::conj(faddeeva_w(z))) < 1e-15);
        const Complex sum = erfcx(z) + erfcx(-z);
        CHECK(rel_err(sum, 2.0 * std::exp(z * z)) < 1e-13);
    }
}

TEST_CASE("derivative identity erfcx' = 2 z erfcx - 2/sqrt(pi)") {
    const double h = 1e-6;
    for (const Complex z : {Complex(0.1, 0.2), Complex(1.0, 1.0), Complex(3.0, -2.0), Complex(10.0, 4.0)}) {
        CAPTURE(z);
        const Complex fd = (erfcx(z + h) - erfcx(z - h)) / (2.0 * h);
        const Complex exact = 2.0 * z * erfcx(z) - 2.0 / std::sqrt(std::numbers::pi);
        CHECK(std::abs(fd - exact) / std::abs(exact) < 1e-6);
    }
}

TEST_CASE("large arguments follow the asymptotic 1/(z sqrt(pi))") {
    for (const Complex z : {Complex(1e8, 0.0), Complex(0.0, 1e7), Complex(3e6, -4e6)}) {
        const Complex asym = 1.0 / (z * std::sqrt(std::numbers::pi));
        CHECK(rel_err(erfcx(z), asym) < 1e-12);
    }
}

TEST_CASE("w is the Voigt kernel: Re w(x + i y) integrates to sqrt(pi)") {
    // int Re w(x + iy) dx = sqrt(pi) for y > 0 (trapezoid on a wide window).
    const double y = 0.8;
    double acc = 0.0;
    const double dx = 0.01;
    for (double x = -2000.0; x <= 2000.0; x += dx) acc += faddeeva_w({x, y}).real() * dx;
    CHECK(acc == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-3));
}

TEST_CASE("errors") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(erfcx({nan, 0.0}), bolostat::DomainError);
    CHECK_THROWS_AS(erfcx({0.0, inf}), bolostat::DomainError);
    CHECK_THROWS_AS(faddeeva_w({inf, 1.0}), bolostat::DomainError);
    CHECK_THROWS_AS(erfcx({-30.0, 0.0}), bolostat::RangeError);
    CHECK(std::isfinite(erfcx({-26.0, 0.0}).real()));
}
