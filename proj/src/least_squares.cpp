#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bolostat/errors.hpp"
#include "bolostat/fitkit.hpp"

namespace bolostat {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kCorrelationRankTol = 1e-15;
constexpr double kLambdaInit = 1e-3;
constexpr double kLambdaMax = 1e16;

class Evaluator {
public:
    Evaluator(const ResidualProblem& problem, std::size_t n)
        : problem_(problem), r_(problem.n_residuals), p_(n) {}

    // Returns 0.5 |r|^2 and leaves the residuals in `out`.
    double cost(const VectorXd& x, VectorXd& out) {
        for (Eigen::Index i = 0; i < x.size(); ++i) p_[i] = x[i];
        problem_.fn(p_, r_);
        out = Eigen::Map<const VectorXd>(r_.data(), static_cast<Eigen::Index>(r_.size()));
        return 0.5 * out.squaredNorm();
    }

private:
    const ResidualProblem& problem_;
    std::vector<double> r_;
    std::vector<double> p_;
};

MatrixXd jacobian(Evaluator& eval, const VectorXd& x, const VectorXd& r0, const VectorXd& lo,
                  const VectorXd& hi, const FitOptions& opts) {
    const auto n = x.size();
    MatrixXd J(r0.size(), n);
    VectorXd xp = x, rp, rm;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double h = std::max(opts.fd_rel_step * std::abs(x[j]), opts.fd_abs_step);
        const bool up = x[j] + h <= hi[j];
        const bool down = x[j] - h >= lo[j];
        if (up && down) {
            xp[j] = x[j] + h;
            eval.cost(xp, rp);
            xp[j] = x[j] - h;
            eval.cost(xp, rm);
            J.col(j) = (rp - rm) / (2.0 * h);
        } else if (up) {
            xp[j] = x[j] + h;
            eval.cost(xp, rp);
            J.col(j) = (rp - r0) / h;
        } else if (down) {
            xp[j] = x[j] - h;
            eval.cost(xp, rm);
            J.col(j) = (r0 - rm) / h;
        } else {
            J.col(j).setZero();
        }
        xp[j] = x[j];
    }
    return J;
}

std::string describe_direction(const VectorXd& v, const std::vector<std::size_t>& idx,
                               const std::vector<std::string>& names) {
    std::ostringstream os;
    os.precision(2);
    bool first = true;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (std::abs(v[k]) < 0.1) continue;
        if (!first) os << (v[k] < 0 ? " - " : " + ");
        else if (v[k] < 0) os << "-";
        os << std::abs(v[k]) << "*" << names[idx[k]];
        first = false;
    }
    return os.str();
}

// Throws when the free columns cannot be separated. Columns are normalised
// so the test is insensitive to parameter units.
void check_rank(const MatrixXd& Jf, const std::vector<std::size_t>& idx,
                const std::vector<std::string>& names) {
    const VectorXd norms = Jf.colwise().norm();
    std::vector<std::string> dirs;
    for (Eigen::Index k = 0; k < norms.size(); ++k)
        if (!(norms[k] > 0.0)) dirs.push_back(names[idx[k]]);
    if (!dirs.empty()) throw RankDeficiencyError(dirs);

    const MatrixXd Jn = Jf * norms.cwiseInverse().asDiagonal();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Jn.transpose() * Jn);
    const VectorXd& ev = es.eigenvalues();
    for (Eigen::Index k = 0; k < ev.size(); ++k)
        if (ev[k] < kCorrelationRankTol * ev[ev.size() - 1])
            dirs.push_back(describe_direction(es.eigenvectors().col(k), idx, names));
    if (!dirs.empty()) throw RankDeficiencyError(dirs);
}

} // namespace

double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::remainder(a, two_pi);
    if (w <= -std::numbers::pi) w += two_pi;
    return w;
}

FitResult solve_least_squares(const ResidualProblem& problem, std::vector<double> init,
                              std::span<const ParamBounds> bounds, const FitOptions& opts) {
    const auto n = static_cast<Eigen::Index>(init.size());
    if (n == 0) throw DomainError("solve_least_squares: empty parameter vector");
    if (!bounds.empty() && bounds.size() != init.size())
        throw DomainError("solve_least_squares: bounds size mismatch");

    std::vector<std::string> names = problem.names;
    if (names.size() != init.size()) {
        names.clear();
        for (Eigen::Index j = 0; j < n; ++j) names.push_back("p" + std::to_string(j));
    }

    VectorXd lo = VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
    VectorXd hi = VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < bounds.size(); ++j) {
        lo[j] = bounds[j].lower;
        hi[j] = bounds[j].upper;
    }
    VectorXd x = Eigen::Map<const VectorXd>(init.data(), n);
    for (Eigen::Index j = 0; j < n; ++j)
        if (!(x[j] >= lo[j] && x[j] <= hi[j]))
            throw DomainError("solve_least_squares: initial " + names[j] + " outside its bounds");

    Evaluator eval(problem, init.size());
    VectorXd r, r_trial;
    double cost = eval.cost(x, r);
    if (!std::isfinite(cost)) throw DomainError("solve_least_squares: model not finite at init");

    const double floor = 0.5e-26 * std::max(problem.data_norm2, std::numeric_limits<double>::min());
    FitResult out;
    out.cost_history.push_back(cost);

    double lambda = kLambdaInit;
    double last_rel_change = std::numeric_limits<double>::infinity();
    VectorXd dscale = VectorXd::Zero(n);
    std::vector<std::size_t> free_idx;
    MatrixXd J;
    int iter = 0;

    auto free_set = [&](const VectorXd& g) {
        std::vector<std::size_t> idx;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (lo[j] == hi[j]) continue;
            if (x[j] <= lo[j] && g[j] >= 0.0) continue;
            if (x[j] >= hi[j] && g[j] <= 0.0) continue;
            idx.push_back(static_cast<std::size_t>(j));
        }
        return idx;
    };
    auto grad_cos = [&](const VectorXd& g, const std::vector<std::size_t>& idx) {
        const double rn = r.norm();
        double worst = 0.0;
        if (rn == 0.0) return 0.0;
        for (auto j : idx) {
            const double cn = J.col(static_cast<Eigen::Index>(j)).norm();
            if (cn > 0.0) worst = std::max(worst, std::abs(g[j]) / (cn * rn));
        }
        return worst;
    };

    for (;;) {
        if (cost <= floor) {
            out.converged = true;
            out.gradient_norm = 0.0;
            break;
        }
        J = jacobian(eval, x, r, lo, hi, opts);
        const VectorXd g = J.transpose() * r;
        free_idx = free_set(g);
        out.gradient_norm = grad_cos(g, free_idx);
        if (free_idx.empty() || out.gradient_norm < opts.grad_tol) {
            out.converged = true;
            break;
        }
        if (last_rel_change < opts.rel_tol && out.gradient_norm < opts.stall_grad_tol) {
            out.converged = true;
            break;
        }
        if (iter >= opts.max_iter) break;

        const auto nf = static_cast<Eigen::Index>(free_idx.size());
        MatrixXd Jf(J.rows(), nf);
        VectorXd gf(nf);
        for (Eigen::Index k = 0; k < nf; ++k) {
            Jf.col(k) = J.col(static_cast<Eigen::Index>(free_idx[k]));
            gf[k] = g[static_cast<Eigen::Index>(free_idx[k])];
        }
        check_rank(Jf, free_idx, names);

        const MatrixXd A = Jf.transpose() * Jf;
        VectorXd D(nf);
        for (Eigen::Index k = 0; k < nf; ++k) {
            auto j = static_cast<Eigen::Index>(free_idx[k]);
            dscale[j] = std::max(dscale[j], A(k, k));
            D[k] = dscale[j];
        }

        bool accepted = false;
        while (lambda <= kLambdaMax) {
            MatrixXd M = A;
            M.diagonal() += lambda * D;
            const VectorXd step = M.ldlt().solve(-gf);
            VectorXd xt = x;
            for (Eigen::Index k = 0; k < nf; ++k) {
                auto j = static_cast<Eigen::Index>(free_idx[k]);
                xt[j] = std::clamp(x[j] + step[k], lo[j], hi[j]);
            }
            const double ct = eval.cost(xt, r_trial);
            if (std::isfinite(ct) && ct < cost) {
                last_rel_change = (cost - ct) / cost;
                x = xt;
                r = r_trial;
                cost = ct;
                lambda = std::max(lambda * 0.3, 1e-12);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            // No descent step exists at any damping: the iterate is at a
            // (numerically) stationary point.
            out.converged = cost <= 100.0 * floor || out.gradient_norm < opts.stall_grad_tol;
            if (!out.converged) out.warnings.push_back("damping exhausted before convergence");
            break;
        }
        ++iter;
        out.cost_history.push_back(cost);
    }

    out.n_iter = iter;
    out.params.assign(x.data(), x.data() + n);
    out.residual_norm = std::sqrt(2.0 * cost / static_cast<double>(std::max<std::size_t>(problem.n_points, 1)));

    // Covariance from the final Jacobian over the free parameters.
    out.covariance = MatrixXd::Zero(n, n);
    J = jacobian(eval, x, r, lo, hi, opts);
    free_idx = free_set(J.transpose() * r);
    if (!free_idx.empty()) {
        const auto nf = static_cast<Eigen::Index>(free_idx.size());
        MatrixXd Jf(J.rows(), nf);
        for (Eigen::Index k = 0; k < nf; ++k) Jf.col(k) = J.col(static_cast<Eigen::Index>(free_idx[k]));
        const double dof = std::max<double>(static_cast<double>(problem.n_residuals) - nf, 1.0);
        const double s2 = 2.0 * cost / dof;
        Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(Jf.transpose() * Jf);
        const MatrixXd inv = cod.pseudoInverse();
        for (Eigen::Index a = 0; a < nf; ++a)
            for (Eigen::Index b = 0; b < nf; ++b)
                out.covariance(static_cast<Eigen::Index>(free_idx[a]), static_cast<Eigen::Index>(free_idx[b])) =
                    s2 * inv(a, b);
    }

    if (!out.converged && iter >= opts.max_iter) out.warnings.push_back("maximum iterations reached");
    out.flagged = out.residual_norm > opts.residual_threshold;
    if (out.flagged) out.warnings.push_back("residual above model-mismatch threshold");
    return out;
}

FitResult least_squares(const ComplexModel& model, const ComplexSweep& sweep, std::vector<double> init,
                        std::span<const ParamBounds> bounds, const FitOptions& opts,
                        std::vector<std::string> names) {
    sweep.validate();
    const std::size_t m = sweep.size();
    ResidualProblem prob;
    prob.n_residuals = 2 * m;
    prob.n_points = m;
    prob.names = std::move(names);
    for (const auto& v : sweep.values) prob.data_norm2 += std::norm(v);
    prob.fn = [&](std::span<const double> p, std::span<double> r) {
        for (std::size_t i = 0; i < m; ++i) {
            const Complex d = model(sweep.freqs[i], p) - sweep.values[i];
            r[2 * i] = d.real();
            r[2 * i + 1] = d.imag();
        }
    };
    return solve_least_squares(prob, std::move(init), bounds, opts);
}

FitResult curve_fit(const RealModel& model, std::span<const double> x, std::span<const double> y,
                    std::vector<double> init, std::span<const ParamBounds> bounds, const FitOptions& opts,
                    std::vector<std::string> names) {
    if (x.size() != y.size()) throw DomainError("curve_fit: x and y lengths differ");
    ResidualProblem prob;
    prob.n_residuals = x.size();
    prob.n_points = x.size();
    prob.names = std::move(names);
    for (double v : y) prob.data_norm2 += v * v;
    prob.fn = [&](std::span<const double> p, std::span<double> r) {
        for (std::size_t i = 0; i < x.size(); ++i) r[i] = model(x[i], p) - y[i];
    };
    return solve_least_squares(prob, std::move(init), bounds, opts);
}

void ComplexSweep::validate(std::size_t min_points) const {
    if (freqs.size() != values.size()) throw DomainError("ComplexSweep: freqs and values lengths differ");
    if (freqs.size() < min_points)
        throw DomainError("ComplexSweep: need at least " + std::to_string(min_points) + " points");
    for (std::size_t i = 1; i < freqs.size(); ++i)
        if (!(freqs[i] > freqs[i - 1])) throw DomainError("ComplexSweep: freqs must be strictly increasing");
}

} // namespace bolostat
