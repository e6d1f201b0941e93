#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bolostat/response.hpp"

namespace bolostat {

/// Probe-frequency grid with one complex reflection sample per frequency.
struct ComplexSweep {
    std::vector<double> freqs;   ///< Hz, strictly increasing
    std::vector<Complex> values;

    std::size_t size() const { return freqs.size(); }

    /// Throws DomainError unless the sizes agree, freqs are strictly
    /// increasing and there are at least `min_points` samples.
    void validate(std::size_t min_points = 8) const;
};

struct ParamBounds {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
};

struct FitOptions {
    double rel_tol = 1e-10;          ///< relative cost change on an accepted step
    double grad_tol = 1e-8;          ///< max |cos| between residual and Jacobian columns
    double stall_grad_tol = 1e-4;    ///< gradient bound that must also hold when stopping on rel_tol
    int max_iter = 200;
    double fd_rel_step = 1e-6;
    double fd_abs_step = 1e-9;
    /// RMS residual above which a converged fit is flagged as a model mismatch.
    double residual_threshold = std::numeric_limits<double>::infinity();
};

struct FitResult {
    std::vector<double> params;
    double residual_norm = 0.0;        ///< RMS residual per data point
    Eigen::MatrixXd covariance;        ///< zero rows/cols for parameters held at a bound
    int n_iter = 0;                    ///< accepted iterations
    bool converged = false;
    double gradient_norm = 0.0;        ///< max |cos| between residual and free Jacobian columns
    bool flagged = false;              ///< converged but residual_norm > residual_threshold
    std::vector<double> cost_history;  ///< 0.5*|r|^2 after each accepted step (first entry: init)
    std::vector<std::string> warnings;
};

/// Writes the residual vector for parameter vector p into r.
using ResidualFn = std::function<void(std::span<const double> p, std::span<double> r)>;

struct ResidualProblem {
    ResidualFn fn;
    std::size_t n_residuals = 0;
    /// Number of data points behind the residuals (complex points count once);
    /// residual_norm is sqrt(|r|^2 / n_points).
    std::size_t n_points = 0;
    /// |data|^2; a cost below 0.5e-26 * data_norm2 is treated as an exact fit.
    double data_norm2 = 0.0;
    std::vector<std::string> names;
};

/// Bound-constrained damped Gauss-Newton (Levenberg-Marquardt) with a
/// central finite-difference Jacobian. Parameters sitting on a bound with the
/// gradient pointing outward are held for that iteration. Throws
/// RankDeficiencyError when the free Jacobian columns are linearly dependent;
/// hitting max_iter returns converged == false.
FitResult solve_least_squares(const ResidualProblem& problem, std::vector<double> init,
                              std::span<const ParamBounds> bounds, const FitOptions& opts = {});

using ComplexModel = std::function<Complex(double f, std::span<const double> p)>;
using RealModel = std::function<double(double x, std::span<const double> p)>;

/// Minimises sum_i |model(f_i, p) - value_i|^2.
FitResult least_squares(const ComplexModel& model, const ComplexSweep& sweep, std::vector<double> init,
                        std::span<const ParamBounds> bounds = {}, const FitOptions& opts = {},
                        std::vector<std::string> names = {});

/// Minimises sum_i (model(x_i, p) - y_i)^2.
FitResult curve_fit(const RealModel& model, std::span<const double> x, std::span<const double> y,
                    std::vector<double> init, std::span<const ParamBounds> bounds = {},
                    const FitOptions& opts = {}, std::vector<std::string> names = {});

/// Resonator parameters from the circular locus of a reflection trace:
/// algebraic (Kasa) circle refined geometrically, then a phase-vs-frequency
/// arctan fit about the centre for f_r and gamma. gamma_c/gamma is the circle
/// radius over the modulus of the off-resonant point, phi the rotation of the
/// centre as seen from that point. Cable delay must be removed beforehand.
ResonatorParams circle_fit(const ComplexSweep& sweep);

struct LorentzianFit {
    double center = 0.0;
    double fwhm = 0.0;
    double amplitude = 0.0;
    double offset = 0.0;
    FitResult fit;
};

/// y = offset + amplitude / (1 + (2 (x - center) / fwhm)^2)
LorentzianFit lorentzian_fit(std::span<const double> x, std::span<const double> y);

/// Least-squares polynomial coefficients in ascending order.
std::vector<double> polynomial_fit(std::span<const double> x, std::span<const double> y, int degree);

double polyval(std::span<const double> coeffs, double x);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

} // namespace bolostat
