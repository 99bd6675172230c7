#include "qcff/pseudodata/fit_generator.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <utility>

#include "qcff/errors.hpp"
#include "qcff/util/rng.hpp"

namespace qcff::pseudodata {

namespace {

// Residual functor over the free parameters, in the shape Eigen's
// NumericalDiff expects.
struct Residuals {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    const std::vector<GeneratorPoint> *points;
    std::array<double, 6> base;
    std::vector<std::size_t> free_idx;

    int inputs() const { return static_cast<int>(free_idx.size()); }
    int values() const { return static_cast<int>(points->size()); }

    GeneratorParams expand(const Eigen::VectorXd &x) const {
        auto v = base;
        for (std::size_t k = 0; k < free_idx.size(); ++k) {
            v[free_idx[k]] = x[static_cast<Eigen::Index>(k)];
        }
        return GeneratorParams::from_array(v);
    }

    int operator()(const Eigen::VectorXd &x, Eigen::VectorXd &fvec) const {
        const auto p = expand(x);
        for (std::size_t i = 0; i < points->size(); ++i) {
            const auto &pt = (*points)[i];
            const double expo = p.c * pt.t * pt.t + p.d * pt.t + p.e;
            // Keep LM inside the representable range instead of throwing.
            const double g = (p.a * pt.xB * pt.xB + p.b * pt.xB) * std::exp(std::min(expo, 700.0)) + p.f;
            fvec[static_cast<Eigen::Index>(i)] = (g - pt.value) / pt.sigma;
        }
        return 0;
    }
};

double sse_of(const Residuals &r, const Eigen::VectorXd &x) {
    Eigen::VectorXd f(r.values());
    r(x, f);
    const double s = f.squaredNorm();
    return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

// Weighted linear least squares for the free members of (a, b, f) with
// c, d, e held at their base values.
std::array<double, 6> linear_start(const std::vector<GeneratorPoint> &pts,
                                   const GeneratorFitOptions &o) {
    auto v = o.initial.to_array();
    const std::array<std::size_t, 3> lin{0, 1, 5};
    std::vector<std::size_t> cols;
    for (auto k : lin) {
        if (o.free[k]) {
            cols.push_back(k);
        }
    }
    if (cols.empty()) {
        return v;
    }
    const auto n = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd A(n, static_cast<Eigen::Index>(cols.size()));
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto &p = pts[static_cast<std::size_t>(i)];
        const double E = std::exp(std::min(v[2] * p.t * p.t + v[3] * p.t + v[4], 700.0));
        double fixed = 0.0;
        const double basis[6] = {p.xB * p.xB * E, p.xB * E, 0, 0, 0, 1.0};
        for (auto k : lin) {
            if (!o.free[k]) {
                fixed += v[k] * basis[k];
            }
        }
        for (std::size_t c = 0; c < cols.size(); ++c) {
            A(i, static_cast<Eigen::Index>(c)) = basis[cols[c]] / p.sigma;
        }
        y[i] = (p.value - fixed) / p.sigma;
    }
    const Eigen::VectorXd sol = A.completeOrthogonalDecomposition().solve(y);
    for (std::size_t c = 0; c < cols.size(); ++c) {
        v[cols[c]] = sol[static_cast<Eigen::Index>(c)];
    }
    return v;
}

} // namespace

GeneratorFit fit_generator(const std::vector<GeneratorPoint> &points,
                           const GeneratorFitOptions &options) {
    std::set<std::pair<double, double>> distinct;
    for (const auto &p : points) {
        if (!std::isfinite(p.xB) || !std::isfinite(p.t) || !std::isfinite(p.value) ||
            !(p.sigma > 0.0) || !std::isfinite(p.sigma)) {
            throw DomainError("generator fit points need finite values and sigma > 0");
        }
        distinct.emplace(p.xB, p.t);
    }
    if (distinct.size() < 6) {
        throw DegenerateDataError("generator fit needs at least 6 distinct (xB, t) points, got " +
                                  std::to_string(distinct.size()));
    }
    if (options.n_starts == 0) {
        throw ConfigError("generator fit needs at least one start");
    }

    Residuals res{&points, options.initial.to_array(), {}};
    for (std::size_t k = 0; k < 6; ++k) {
        if (options.free[k]) {
            res.free_idx.push_back(k);
        }
    }
    const auto nf = static_cast<Eigen::Index>(res.free_idx.size());
    const auto start0 = linear_start(points, options);

    GeneratorFit best;
    double best_sse = std::numeric_limits<double>::infinity();
    bool any_converged = false;
    Rng rng(derive_seed(options.seed, 0, 0, streams::kGenerator));
    std::uniform_real_distribution<double> u(-options.start_width, options.start_width);

    for (std::size_t s = 0; s < options.n_starts; ++s) {
        Eigen::VectorXd x(nf);
        for (Eigen::Index k = 0; k < nf; ++k) {
            const std::size_t idx = res.free_idx[static_cast<std::size_t>(k)];
            x[k] = start0[idx] + (s == 0 ? 0.0 : u(rng));
        }
        if (nf > 0) {
            Eigen::NumericalDiff<Residuals> nd(res);
            Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Residuals>> lm(nd);
            lm.parameters.maxfev = static_cast<Eigen::Index>(options.max_evaluations);
            lm.parameters.ftol = 1e-15;
            lm.parameters.xtol = 1e-15;
            const auto status = lm.minimize(x);
            if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters ||
                status == Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation ||
                status == Eigen::LevenbergMarquardtSpace::UserAsked) {
                continue;
            }
        }
        any_converged = true;
        const double sse = sse_of(res, x);
        if (sse < best_sse) {
            best_sse = sse;
            best.params = res.expand(x);
            best.sse = sse;
            best.start = s;
            best.covariance = {};
            if (nf > 0) {
                Eigen::NumericalDiff<Residuals> nd(res);
                Eigen::MatrixXd J(res.values(), nf);
                nd.df(x, J);
                const Eigen::MatrixXd JtJ = J.transpose() * J;
                const double dof = std::max<double>(1.0, static_cast<double>(points.size()) -
                                                             static_cast<double>(nf));
                const Eigen::MatrixXd cov =
                    JtJ.completeOrthogonalDecomposition().pseudoInverse() * (sse / dof);
                for (Eigen::Index i = 0; i < nf; ++i) {
                    for (Eigen::Index j = 0; j < nf; ++j) {
                        best.covariance[res.free_idx[static_cast<std::size_t>(i)]]
                                       [res.free_idx[static_cast<std::size_t>(j)]] = cov(i, j);
                    }
                }
            }
        }
    }
    if (!any_converged || !std::isfinite(best_sse)) {
        throw ConvergenceError("generator fit did not converge from any of " +
                               std::to_string(options.n_starts) + " starts");
    }
    return best;
}

} // namespace qcff::pseudodata
