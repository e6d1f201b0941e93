#include <algorithm>
#include <cmath>
#include <numeric>

#include "bolostat/errors.hpp"
#include "bolostat/fitkit.hpp"

namespace bolostat {

LorentzianFit lorentzian_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DomainError("lorentzian_fit: x and y lengths differ");
    if (x.size() < 5) throw DomainError("lorentzian_fit: need at least 5 points");

    // Work in normalised coordinates u = (x - xc)/xs, v = y/ys.
    const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
    const double xc = 0.5 * (*xmin_it + *xmax_it);
    const double xs = 0.5 * (*xmax_it - *xmin_it);
    if (!(xs > 0.0)) throw DomainError("lorentzian_fit: x values must span a nonzero range");
    double ys = 0.0;
    for (double v : y) ys = std::max(ys, std::abs(v));
    if (ys == 0.0) ys = 1.0;

    std::vector<double> u(x.size()), v(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        u[i] = (x[i] - xc) / xs;
        v[i] = y[i] / ys;
    }

    // Peak or dip: whichever extreme lies further from the median.
    std::vector<double> sorted = v;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    const auto [vmin_it, vmax_it] = std::minmax_element(v.begin(), v.end());
    const bool dip = (median - *vmin_it) > (*vmax_it - median);
    const auto peak_it = dip ? vmin_it : vmax_it;
    const std::size_t ipk = static_cast<std::size_t>(peak_it - v.begin());
    const double offset0 = dip ? *vmax_it : *vmin_it;
    const double amp0 = *peak_it - offset0;

    if (amp0 == 0.0) throw RankDeficiencyError({"center", "fwhm"});

    double width0 = 0.2;
    {
        const double half = offset0 + 0.5 * amp0;
        auto beyond = [&](std::size_t i) { return dip ? v[i] > half : v[i] < half; };
        std::size_t l = ipk, r = ipk;
        while (l > 0 && !beyond(l)) --l;
        while (r + 1 < v.size() && !beyond(r)) ++r;
        if (u[r] > u[l]) width0 = u[r] - u[l];
    }

    const RealModel model = [](double t, std::span<const double> p) {
        const double s = 2.0 * (t - p[0]) / p[1];
        return p[3] + p[2] / (1.0 + s * s);
    };
    const std::vector<ParamBounds> bounds = {{}, {1e-12, std::numeric_limits<double>::infinity()}, {}, {}};
    FitResult fit = curve_fit(model, u, v, {u[ipk], width0, amp0, offset0}, bounds, {},
                              {"center", "fwhm", "amplitude", "offset"});

    LorentzianFit out;
    out.center = xc + xs * fit.params[0];
    out.fwhm = xs * fit.params[1];
    out.amplitude = ys * fit.params[2];
    out.offset = ys * fit.params[3];
    fit.params = {out.center, out.fwhm, out.amplitude, out.offset};
    const Eigen::Vector4d scale{xs, xs, ys, ys};
    fit.covariance = scale.asDiagonal() * fit.covariance * scale.asDiagonal();
    fit.residual_norm *= ys;
    out.fit = std::move(fit);
    return out;
}

std::vector<double> polynomial_fit(std::span<const double> x, std::span<const double> y, int degree) {
    if (degree < 0) throw DomainError("polynomial_fit: degree must be >= 0");
    if (x.size() != y.size()) throw DomainError("polynomial_fit: x and y lengths differ");
    const auto ncoef = static_cast<std::size_t>(degree) + 1;
    if (x.size() < ncoef)
        throw InsufficientDataError("polynomial_fit: underdetermined, need more than degree points");

    double xs = 0.0;
    for (double v : x) xs = std::max(xs, std::abs(v));
    if (xs == 0.0) xs = 1.0;

    const auto m = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd V(m, static_cast<Eigen::Index>(ncoef));
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double t = x[i] / xs;
        double p = 1.0;
        for (std::size_t k = 0; k < ncoef; ++k) {
            V(i, static_cast<Eigen::Index>(k)) = p;
            p *= t;
        }
        b[i] = y[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V);
    if (qr.rank() < static_cast<Eigen::Index>(ncoef))
        throw RankDeficiencyError({"polynomial_fit: fewer distinct x values than coefficients"});
    const Eigen::VectorXd c = qr.solve(b);

    std::vector<double> out(ncoef);
    double s = 1.0;
    for (std::size_t k = 0; k < ncoef; ++k) {
        out[k] = c[static_cast<Eigen::Index>(k)] / s;
        s *= xs;
    }
    return out;
}

double polyval(std::span<const double> coeffs, double x) {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

} // namespace bolostat
