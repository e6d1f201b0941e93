#pragma once

#include <complex>

namespace bolostat::specfun {

using Complex = std::complex<double>;

/// Scaled complementary error function exp(z^2) * erfc(z) for complex z.
///
/// Relative accuracy is better than 1e-10 on |Re z|, |Im z| <= 30 wherever the
/// result is representable. For Re z < 0 the value is obtained through the
/// reflection erfcx(z) = 2 exp(z^2) - erfcx(-z); when Re(z^2) exceeds the log of
/// the largest double this throws RangeError instead of returning Inf.
/// Throws DomainError for non-finite input.
Complex erfcx(Complex z);

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz) = erfcx(-iz).
///
/// For Im z > 0, Re w(x + iy) is sqrt(pi) times the normalized Voigt profile
/// at x with Lorentz parameter y.
Complex faddeeva_w(Complex z);

} // namespace bolostat::specfun
