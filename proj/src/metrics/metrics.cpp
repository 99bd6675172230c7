#include "qcff/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "qcff/errors.hpp"
#include "qcff/util/parallel.hpp"
#include "qcff/util/rng.hpp"

namespace qcff::metrics {

PerCff mean_cffs(std::span<const physics::CFFSet> cffs) {
    if (cffs.empty()) {
        throw EmptyEnsembleError("no replicas to average");
    }
    // Shifted by the first replica: identical replicas average to exactly
    // their common value, so their spread is exactly zero.
    PerCff shift{};
    for (const auto &c : cffs) {
        for (std::size_t k = 0; k < 4; ++k) {
            shift[k] += c[k] - cffs[0][k];
        }
    }
    PerCff m{};
    for (std::size_t k = 0; k < 4; ++k) {
        m[k] = cffs[0][k] + shift[k] / static_cast<double>(cffs.size());
    }
    return m;
}

PerCff accuracy(std::span<const physics::CFFSet> cffs,
                const std::optional<physics::CFFSet> &truth) {
    if (!truth) {
        throw MissingTruthError("accuracy needs the true CFFs (pseudodata only)");
    }
    const auto m = mean_cffs(cffs);
    PerCff out{};
    for (std::size_t k = 0; k < 4; ++k) {
        out[k] = std::abs(m[k] - (*truth)[k]);
    }
    return out;
}

PerCff precision(std::span<const physics::CFFSet> cffs) {
    if (cffs.size() < 2) {
        throw InsufficientReplicasError("precision needs at least 2 replicas, got " +
                                        std::to_string(cffs.size()));
    }
    const auto m = mean_cffs(cffs);
    PerCff out{};
    for (const auto &c : cffs) {
        for (std::size_t k = 0; k < 4; ++k) {
            const double d = c[k] - m[k];
            out[k] += d * d;
        }
    }
    for (auto &v : out) {
        v = std::sqrt(v / static_cast<double>(cffs.size()));
    }
    return out;
}

double sample_sigma(std::span<const double> values) {
    if (values.size() < 2) {
        throw InsufficientReplicasError("sample sigma needs at least 2 values");
    }
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return std::sqrt(ss / (n - 1.0));
}

PerCff algorithmic_error(models::ModelClass model, const training::KinematicBin &bin,
                         std::size_t n_replicas, const training::FitConfig &config,
                         const models::ModelOptions &options, std::size_t workers) {
    training::ReplicaOptions ro;
    ro.n_replicas = n_replicas;
    ro.mode = training::ResampleMode::Identical;
    ro.vary_seed = true;
    ro.workers = workers;
    const auto ens = training::fit_replicas(model, bin, ro, config, options);
    const auto inc = ens.included();
    return precision(inc);
}

PerCff methodological_error(models::ModelClass model, const training::KinematicBin &templ,
                            const pseudodata::GeneratorSet &generator,
                            const MethodologicalOptions &mopts,
                            const training::FitConfig &config,
                            const models::ModelOptions &options) {
    if (mopts.n_draws < 2) {
        throw InsufficientReplicasError("methodological error needs at least 2 draws");
    }
    templ.validate();
    std::vector<physics::CFFSet> residuals(mopts.n_draws);
    parallel_for(mopts.n_draws, mopts.workers, [&](std::size_t d) {
        Rng rng(derive_seed(mopts.seed, templ.set_id, d, streams::kGenerator));
        const auto gen = pseudodata::perturb_generator(generator, mopts.param_spread, rng);
        const auto pb = pseudodata::make_pseudobin(
            templ, gen, mopts.noise_scale, derive_seed(mopts.seed, templ.set_id, d, streams::kNoise));
        auto c = config;
        c.seed = derive_seed(config.seed, templ.set_id, d, streams::kInit);
        c.trace_stride = std::max<std::size_t>(c.epochs, 1);
        const auto fit = training::fit_local(model, pb.bin, c, options);
        PerCff r{};
        for (std::size_t k = 0; k < 4; ++k) {
            r[k] = fit.cffs[k] - pb.truth[k];
        }
        residuals[d] = physics::CFFSet::from_array(r);
    });
    return precision(residuals);
}

double m_chi2(std::span<const BinSummary> bins) {
    if (bins.empty()) {
        throw EmptyEnsembleError("M_chi2 needs at least one bin");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        double sum = 0.0;
        for (const auto &b : bins) {
            const double s = b.sigma[k];
            if (s == 0.0) {
                throw ZeroSigmaError(std::string("M_chi2: zero sigma for ") +
                                     physics::kCffNames[k]);
            }
            const double r = b.mean[k] - b.truth[k];
            sum += r * r / (s * s);
        }
        total += sum / static_cast<double>(bins.size());
    }
    return total;
}

double simpson(const std::function<double(double)> &f, double a, double b, int intervals) {
    int n = std::max(2, intervals);
    n += n % 2;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) {
        s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    }
    return s * h / 3.0;
}

namespace {

// Integral of |d| with the zero crossings of d located first, so Simpson only
// sees smooth pieces.
double integrate_abs(const std::function<double(double)> &d, double a, double b) {
    const int n = kSimpsonIntervals;
    const double h = (b - a) / n;
    std::vector<double> cuts{a};
    double x0 = a;
    double f0 = d(a);
    for (int i = 1; i <= n; ++i) {
        const double x1 = (i == n) ? b : a + i * h;
        const double f1 = d(x1);
        if ((f0 < 0.0 && f1 > 0.0) || (f0 > 0.0 && f1 < 0.0)) {
            double lo = x0, hi = x1, flo = f0;
            for (int it = 0; it < 100 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = d(mid);
                if ((fm < 0.0) == (flo < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            cuts.push_back(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    cuts.push_back(b);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double len = cuts[k + 1] - cuts[k];
        if (len <= 0.0) {
            continue;
        }
        const int m = std::max(2, static_cast<int>(std::ceil(n * len / (b - a))));
        total += simpson([&](double x) { return std::abs(d(x)); }, cuts[k], cuts[k + 1], m);
    }
    return total;
}

} // namespace

double m_dvcs(const std::function<double(double)> &fit, const std::function<double(double)> &truth,
              double phi_min_deg, double phi_max_deg) {
    return integrate_abs([&](double phi) { return fit(phi) - truth(phi); }, phi_min_deg,
                         phi_max_deg);
}

double m_dvcs(const physics::Kinematics &kin, const physics::FormFactors &ff,
              const physics::CFFSet &fit, const physics::CFFSet &truth, double phi_min_deg,
              double phi_max_deg) {
    // F_fit - F_true is the interference difference plus the DVCS constant
    // difference; BH cancels exactly.
    physics::CFFSet diff{fit.ReH - truth.ReH, fit.ReE - truth.ReE, fit.ReHt - truth.ReHt,
                         fit.dvcs - truth.dvcs};
    return integrate_abs(
        [&](double phi) {
            return physics::interference_term(kin, ff, diff, phi * physics::kDegToRad) + diff.dvcs;
        },
        phi_min_deg, phi_max_deg);
}

double xi_outperformance(double m_cdnn, double m_qdnn) {
    if (m_qdnn == 0.0) {
        throw DivisionByZeroError("Xi: the QDNN M_DVCS is zero");
    }
    if (m_cdnn < 0.0 || m_qdnn < 0.0) {
        throw DomainError("Xi: M_DVCS values must be non-negative");
    }
    return m_cdnn / m_qdnn - 1.0;
}

LinearFit ols(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw ShapeError("OLS: x and y sizes differ");
    }
    if (x.size() < 3) {
        throw DegenerateDataError("OLS needs at least 3 points");
    }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) {
        throw DegenerateDataError("OLS: all x values are equal");
    }
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        rss += r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - rss / syy : 1.0;
    fit.n_used = x.size();
    return fit;
}

double nonlinearity(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw ShapeError("nonlinearity: x and y sizes differ");
    }
    if (x.size() < 3) {
        throw DegenerateDataError("nonlinearity needs at least 3 points");
    }
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    if (*lo == *hi) {
        throw DegenerateDataError("nonlinearity: all y values are equal");
    }
    const double n = static_cast<double>(y.size());
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double tss = 0.0;
    for (double v : y) {
        tss += (v - my) * (v - my);
    }
    const auto fit = ols(x, y);
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        rss += r * r;
    }
    return rss / tss;
}

double bin_nonlinearity(const training::KinematicBin &bin) {
    std::vector<double> phi;
    std::vector<double> F;
    for (const auto &p : bin.points) {
        phi.push_back(p.phi_deg);
        F.push_back(p.F);
    }
    return nonlinearity(phi, F);
}

ScaledError avg_scaled_error(std::span<const double> sigma,
                             const std::vector<std::vector<double>> &F_replicas, double s) {
    ScaledError out;
    double sum = 0.0;
    for (const auto &F : F_replicas) {
        if (F.size() != sigma.size()) {
            throw ShapeError("avg_scaled_error: replica size differs from sigma size");
        }
        for (std::size_t i = 0; i < F.size(); ++i) {
            if (!(F[i] > 0.0)) {
                ++out.n_excluded;
                continue;
            }
            sum += s * sigma[i] / F[i];
            ++out.n_used;
        }
    }
    out.value = out.n_used ? sum / static_cast<double>(out.n_used) : 0.0;
    return out;
}

double qualifier(double eps_bar_s, double nonlinearity) {
    return kQualifierEps * eps_bar_s + kQualifierNonlin * nonlinearity + kQualifierConst;
}

QualifierFeatures make_features(double eps_bar_s, double nonlin) {
    if (!std::isfinite(eps_bar_s) || !std::isfinite(nonlin)) {
        throw DomainError("qualifier features must be finite");
    }
    return {eps_bar_s, nonlin, qualifier(eps_bar_s, nonlin), std::nullopt};
}

Recommendation recommend(double xi_hat, double threshold) {
    if (xi_hat > threshold) return Recommendation::QDNN;
    if (xi_hat < -threshold) return Recommendation::CDNN;
    return Recommendation::Tie;
}

LinearFit qualifier_calibration(std::span<const double> xi_hat, std::span<const double> xi,
                                double outlier_z) {
    auto fit = ols(xi_hat, xi);
    if (!(outlier_z > 0.0)) {
        return fit;
    }
    std::vector<double> res(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) {
        res[i] = xi[i] - (fit.intercept + fit.slope * xi_hat[i]);
    }
    std::vector<double> tmp = res;
    auto median = [](std::vector<double> v) {
        const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
        std::nth_element(v.begin(), mid, v.end());
        double m = *mid;
        if (v.size() % 2 == 0) {
            m = 0.5 * (m + *std::max_element(v.begin(), mid));
        }
        return m;
    };
    const double med = median(tmp);
    for (auto &v : tmp) {
        v = std::abs(v - med);
    }
    const double scale = 1.4826 * median(tmp);
    if (scale == 0.0) {
        return fit;
    }
    std::vector<double> kx, ky;
    for (std::size_t i = 0; i < xi.size(); ++i) {
        if (std::abs(res[i] - med) <= outlier_z * scale) {
            kx.push_back(xi_hat[i]);
            ky.push_back(xi[i]);
        }
    }
    if (kx.size() == xi.size() || kx.size() < 3) {
        return fit;
    }
    auto refit = ols(kx, ky);
    refit.n_excluded = xi.size() - kx.size();
    return refit;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) {
            ++j;
        }
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            r[idx[k]] = rank;
        }
        i = j + 1;
    }
    return r;
}

} // namespace

RankCorrelation spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw ShapeError("spearman: x and y sizes differ");
    }
    if (x.size() < 3) {
        throw DegenerateDataError("spearman needs at least 3 pairs");
    }
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double m = (n + 1.0) / 2.0;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - m) * (ry[i] - m);
        sxx += (rx[i] - m) * (rx[i] - m);
        syy += (ry[i] - m) * (ry[i] - m);
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw DegenerateDataError("spearman: a variable is constant");
    }
    RankCorrelation out;
    out.rho = sxy / std::sqrt(sxx * syy);
    if (std::abs(out.rho) >= 1.0) {
        out.p_value = 0.0;
        return out;
    }
    const double dof = n - 2.0;
    const double t = out.rho * std::sqrt(dof / (1.0 - out.rho * out.rho));
    boost::math::students_t dist(dof);
    out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw EmptyEnsembleError("median of no values");
    }
    const std::size_t n = values.size();
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n / 2), values.end());
    const double hi = values[n / 2];
    if (n % 2 == 1) {
        return hi;
    }
    const double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n / 2));
    return 0.5 * (lo + hi);
}

ModelSetup ModelSetup::defaults(models::ModelClass model, std::size_t epochs) {
    ModelSetup s;
    s.model = model;
    s.config = training::default_fit_config(model, epochs);
    s.options = models::ModelOptions::defaults(model);
    return s;
}

CellResult compare_on_pseudodata(const training::KinematicBin &templ,
                                 const physics::CFFSet &truth, double noise_scale,
                                 const ModelSetup &classical, const ModelSetup &quantum,
                                 const CellOptions &options) {
    if (options.n_replicas < 1) {
        throw InsufficientReplicasError("a pseudodata cell needs at least one replica");
    }
    templ.validate();
    const auto kin = templ.kinematics();
    const auto ff = physics::kelly_form_factors(templ.t);
    const std::size_t n = options.n_replicas;

    struct Slot {
        double m_c = 0.0, m_q = 0.0, nonlin = 0.0;
        std::vector<double> F;
        bool ok = false;
    };
    std::vector<Slot> slots(n);
    parallel_for(n, options.workers, [&](std::size_t r) {
        const auto pb = pseudodata::make_pseudobin(
            templ, truth, noise_scale, derive_seed(options.seed, templ.set_id, r, streams::kNoise));
        auto &slot = slots[r];
        slot.F = pb.bin.F();
        slot.nonlin = bin_nonlinearity(pb.bin);
        auto fit_one = [&](const ModelSetup &m) {
            auto c = m.config;
            c.seed = derive_seed(m.config.seed, templ.set_id, r, streams::kInit);
            c.trace_stride = std::max<std::size_t>(c.epochs, 1);
            return training::fit_local(m.model, pb.bin, c, m.options).cffs;
        };
        try {
            slot.m_c = m_dvcs(kin, ff, fit_one(classical), truth);
            slot.m_q = m_dvcs(kin, ff, fit_one(quantum), truth);
            slot.ok = true;
        } catch (const NumericError &) {
            slot.ok = false;
        }
    });

    CellResult out;
    out.set_id = templ.set_id;
    out.noise_scale = noise_scale;
    std::vector<std::vector<double>> F_all;
    std::vector<double> nonlin, xis;
    for (const auto &slot : slots) {
        F_all.push_back(slot.F);
        nonlin.push_back(slot.nonlin);
        if (!slot.ok) {
            ++out.n_failed;
            continue;
        }
        out.m_cdnn.push_back(slot.m_c);
        out.m_qdnn.push_back(slot.m_q);
        if (slot.m_q > 0.0) {
            xis.push_back(xi_outperformance(slot.m_c, slot.m_q));
        }
    }
    if (out.m_cdnn.empty()) {
        throw ConvergenceError("every replica fit failed for set " + std::to_string(templ.set_id));
    }
    out.eps_bar_s = avg_scaled_error(templ.sigmas(), F_all, noise_scale).value;
    out.nonlinearity = std::accumulate(nonlin.begin(), nonlin.end(), 0.0) /
                       static_cast<double>(nonlin.size());
    out.xi_hat = qualifier(out.eps_bar_s, out.nonlinearity);
    out.median_m_cdnn = median(out.m_cdnn);
    out.median_m_qdnn = median(out.m_qdnn);
    out.median_xi = xis.empty() ? 0.0 : median(xis);
    return out;
}

} // namespace qcff::metrics
