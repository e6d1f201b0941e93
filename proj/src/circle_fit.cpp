#include <algorithm>
#include <cmath>
#include <numbers>

#include "bolostat/errors.hpp"
#include "bolostat/fitkit.hpp"

namespace bolostat {
namespace {

struct Circle {
    Complex center;
    double radius;
};

// Kasa fit in centred, rescaled coordinates, then geometric refinement of
// sum (|z_i - c| - r)^2.
Circle fit_circle(std::span<const Complex> z) {
    const auto m = static_cast<Eigen::Index>(z.size());
    Complex mean = 0.0;
    for (auto v : z) mean += v;
    mean /= static_cast<double>(z.size());
    double spread = 0.0;
    for (auto v : z) spread = std::max(spread, std::abs(v - mean));
    if (!(spread > 0.0)) throw DomainError("circle_fit: degenerate circle (all points coincide)");

    Eigen::MatrixXd A(m, 3);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Complex w = (z[i] - mean) / spread;
        A(i, 0) = w.real();
        A(i, 1) = w.imag();
        A(i, 2) = 1.0;
        b[i] = -std::norm(w);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3) throw DomainError("circle_fit: degenerate circle (points are collinear)");
    const Eigen::Vector3d s = qr.solve(b);
    const Complex c0{-0.5 * s[0], -0.5 * s[1]};
    const double r2 = std::norm(c0) - s[2];
    if (!(r2 > 0.0) || std::sqrt(r2) > 1e6) throw DomainError("circle_fit: degenerate circle (points are collinear)");

    ResidualProblem prob;
    prob.n_residuals = z.size();
    prob.n_points = z.size();
    prob.names = {"cx", "cy", "r"};
    prob.data_norm2 = static_cast<double>(z.size()) * r2;
    prob.fn = [&](std::span<const double> p, std::span<double> r) {
        const Complex c{p[0], p[1]};
        for (std::size_t i = 0; i < z.size(); ++i) r[i] = std::abs((z[i] - mean) / spread - c) - p[2];
    };
    const FitResult fit = solve_least_squares(prob, {c0.real(), c0.imag(), std::sqrt(r2)}, {});
    return {mean + spread * Complex{fit.params[0], fit.params[1]}, spread * std::abs(fit.params[2])};
}

} // namespace

ResonatorParams circle_fit(const ComplexSweep& sweep) {
    sweep.validate();
    const Circle circle = fit_circle(sweep.values);
    const std::size_t m = sweep.size();

    // Unwrapped angle of each sample about the centre.
    std::vector<double> theta(m);
    for (std::size_t i = 0; i < m; ++i) {
        theta[i] = std::arg(sweep.values[i] - circle.center);
        if (i > 0) {
            double d = theta[i] - theta[i - 1];
            theta[i] = theta[i - 1] + wrap_angle(d);
        }
    }

    // theta(f) = theta0 + 2 atan(2 (f - f_r) / kappa), kappa the FWHM in Hz.
    const double fc = 0.5 * (sweep.freqs.front() + sweep.freqs.back());
    const double span = sweep.freqs.back() - sweep.freqs.front();
    std::vector<double> u(m);
    for (std::size_t i = 0; i < m; ++i) u[i] = (sweep.freqs[i] - fc) / 1e6;

    const double theta_mid = 0.5 * (theta.front() + theta.back());
    std::size_t imid = 0;
    for (std::size_t i = 1; i < m; ++i)
        if (std::abs(theta[i] - theta_mid) < std::abs(theta[imid] - theta_mid)) imid = i;
    const double sense = theta.back() >= theta.front() ? 1.0 : -1.0;
    auto crossing = [&](double level) {
        for (std::size_t i = 1; i < m; ++i)
            if ((theta[i - 1] - level) * (theta[i] - level) <= 0.0) return u[i];
        return u[imid];
    };
    double kappa0 = crossing(theta_mid + sense * std::numbers::pi / 2) - crossing(theta_mid - sense * std::numbers::pi / 2);
    if (!(std::abs(kappa0) > 0.0)) kappa0 = sense * span / 1e6 / 10.0;

    const RealModel model = [](double t, std::span<const double> p) {
        return p[0] + 2.0 * std::atan(2.0 * (t - p[1]) / p[2]);
    };
    const FitResult fit = curve_fit(model, u, theta, {theta_mid, u[imid], kappa0}, {}, {},
                                    {"theta0", "f_r", "kappa"});
    const double theta0 = fit.params[0];
    const double f_r = fc + 1e6 * fit.params[1];
    const double kappa = 1e6 * std::abs(fit.params[2]);
    if (3.0 * kappa > span) throw DomainError("circle_fit: sweep must span at least 3 linewidths");

    const Complex off_resonant = circle.center + std::polar(circle.radius, theta0 + std::numbers::pi);
    const double gamma = 2.0 * std::numbers::pi * kappa;
    ResonatorParams out;
    out.f_r = f_r;
    out.gamma = gamma;
    out.gamma_c = gamma * circle.radius / std::abs(off_resonant);
    out.phi = wrap_angle(std::arg((off_resonant - circle.center) / off_resonant));
    return out;
}

} // namespace bolostat
