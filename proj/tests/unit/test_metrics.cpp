#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "qcff/errors.hpp"
#include "qcff/metrics/metrics.hpp"

using namespace qcff;
using namespace qcff::metrics;
using physics::CFFSet;

namespace {

// Two-pass population standard deviation in long double.
long double two_pass_std(const std::vector<double> &v, bool sample) {
    long double m = 0;
    for (double x : v) m += x;
    m /= v.size();
    long double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / (v.size() - (sample ? 1 : 0)));
}

// Trapezoid rule on a very fine grid.
double trapezoid(const std::function<double(double)> &f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = 0.5 * (f(a) + f(b));
    for (int i = 1; i < n; ++i) s += f(a + i * h);
    return s * h;
}

} // namespace

TEST_CASE("accuracy") {
    const std::vector<CFFSet> ens{{1, 2, 3, 4}, {3, 2, 1, 0}};
    CHECK(accuracy(ens, CFFSet{2, 2, 2, 2}) == PerCff{0, 0, 0, 0});
    CHECK(accuracy(ens, CFFSet{1.5, 2, 2, 2})[0] == 0.5);
    CHECK_THROWS_AS(accuracy(ens, std::nullopt), MissingTruthError);
    CHECK_THROWS_AS(accuracy(std::vector<CFFSet>{}, CFFSet{}), EmptyEnsembleError);
}

TEST_CASE("precision is the population standard deviation") {
    const std::vector<CFFSet> two{{-1, 0, 5, 1}, {1, 0, 5, 1}};
    CHECK(precision(two)[0] == 1.0);
    CHECK(precision(two)[1] == 0.0);
    CHECK_THROWS_AS(precision(std::vector<CFFSet>{{1, 1, 1, 1}}), InsufficientReplicasError);

    std::mt19937_64 rng(8);
    std::normal_distribution<double> nd(0.3, 2.0);
    std::vector<CFFSet> ens;
    std::array<std::vector<double>, 4> cols;
    for (int i = 0; i < 257; ++i) {
        CFFSet c{nd(rng), 10 * nd(rng), 1e-3 * nd(rng), nd(rng) + 100};
        ens.push_back(c);
        for (std::size_t k = 0; k < 4; ++k) cols[k].push_back(c[k]);
    }
    const auto p = precision(ens);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(std::abs(p[k] - static_cast<double>(two_pass_std(cols[k], false))) <=
              1e-12 * std::max(1.0, p[k]));
        CHECK(sample_sigma(cols[k]) ==
              doctest::Approx(static_cast<double>(two_pass_std(cols[k], true))).epsilon(1e-13));
    }
}

TEST_CASE("sample sigma divides by N - 1") {
    const std::vector<double> v{0.0, 2.0};
    CHECK(sample_sigma(v) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("M_chi2") {
    std::vector<BinSummary> bins;
    for (int b = 0; b < 5; ++b) {
        const CFFSet truth{0.1 * b, -1, 2, 0.01};
        const CFFSet sigma{0.2, 0.5, 1.5, 0.003};
        CFFSet mean = truth;
        mean.ReH += (b % 2 ? 1 : -1) * sigma.ReH;
        mean.ReE += sigma.ReE;
        mean.ReHt -= sigma.ReHt;
        mean.dvcs += sigma.dvcs;
        bins.push_back({mean, truth, sigma});
    }
    CHECK(m_chi2(bins) == doctest::Approx(4.0).epsilon(1e-12));
    for (auto &b : bins) b.mean = b.truth;
    CHECK(m_chi2(bins) == 0.0);
    bins[2].sigma.ReE = 0.0;
    CHECK_THROWS_AS(m_chi2(bins), ZeroSigmaError);
}

TEST_CASE("M_DVCS quadrature") {
    auto f = [](double phi) { return 0.1 + 0.02 * std::cos(phi * physics::kDegToRad); };
    CHECK(m_dvcs(f, f) == 0.0);
    const double delta = 0.013;
    CHECK(m_dvcs([&](double p) { return f(p) + delta; }, f) ==
          doctest::Approx(delta * 345.0).epsilon(1e-12));

    // Curves that cross several times, against a 2e6-step trapezoid.
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 5; ++trial) {
        const double a1 = u(rng), a2 = u(rng), a3 = u(rng), c0 = 0.3 * u(rng);
        auto g = [=](double p) {
            const double r = p * physics::kDegToRad;
            return c0 + a1 * std::cos(r) + a2 * std::sin(2 * r) + a3 * std::cos(3 * r);
        };
        auto zero = [](double) { return 0.0; };
        const double oracle = trapezoid([&](double p) { return std::abs(g(p)); }, 7.5, 352.5,
                                        2000000);
        CHECK(m_dvcs(g, zero) == doctest::Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("M_DVCS of CFF curves and the triangle bound") {
    const auto bin = testing::set144_bin();
    const auto kin = bin.kinematics();
    const auto ff = physics::kelly_form_factors(bin.t);
    const CFFSet truth = testing::table_basic_truth(bin.xB, bin.t);
    const CFFSet a{truth.ReH + 0.4, truth.ReE, truth.ReHt - 0.3, truth.dvcs + 0.002};
    const CFFSet b{truth.ReH - 0.2, truth.ReE + 1.0, truth.ReHt, truth.dvcs - 0.001};
    CHECK(m_dvcs(kin, ff, truth, truth) == 0.0);
    auto curve = [&](const CFFSet &c) {
        return [&, c](double p) { return physics::forward_model(kin, ff, c, p * physics::kDegToRad); };
    };
    const double direct = m_dvcs(curve(a), curve(truth));
    CHECK(m_dvcs(kin, ff, a, truth) == doctest::Approx(direct).epsilon(1e-9));
    const double ab = m_dvcs(kin, ff, a, b);
    const double at = m_dvcs(kin, ff, a, truth);
    const double tb = m_dvcs(kin, ff, truth, b);
    CHECK(ab <= (at + tb) * (1 + 1e-6));
}

TEST_CASE("quantum outperformance") {
    CHECK(xi_outperformance(1.3, 1.3) == 0.0);
    CHECK(xi_outperformance(2.0, 1.0) == 1.0);
    CHECK(xi_outperformance(1.0, 2.0) == -0.5);
    CHECK_THROWS_AS(xi_outperformance(1.0, 0.0), DivisionByZeroError);
    // Sign contract.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.01, 5);
    for (int i = 0; i < 1000; ++i) {
        const double mc = u(rng), mq = u(rng);
        CHECK((xi_outperformance(mc, mq) > 0) == (mc - mq > 0));
    }
}

TEST_CASE("nonlinearity") {
    const std::vector<double> x{0, 1, 2, 3, 4, 5};
    std::vector<double> lin;
    for (double v : x) lin.push_back(3 - 2 * v);
    CHECK(nonlinearity(x, lin) == doctest::Approx(0.0).epsilon(1e-15));

    // +-1 about the mean, mirror-symmetric in x on an even equally spaced
    // grid: the OLS slope vanishes, so RSS = TSS.
    const std::vector<double> xs{-3, -1, 1, 3};
    const std::vector<double> sym{6, 4, 4, 6};
    CHECK(ols(xs, sym).slope == 0.0);
    CHECK(nonlinearity(xs, sym) == doctest::Approx(1.0).epsilon(1e-15));

    // Closed-form OLS oracle on random data.
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd(0, 1);
    std::vector<double> rx, ry;
    for (int i = 0; i < 50; ++i) {
        rx.push_back(nd(rng));
        ry.push_back(0.5 * rx.back() + nd(rng));
    }
    const double n = 50;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < 50; ++i) {
        sx += rx[i];
        sy += ry[i];
        sxx += rx[i] * rx[i];
        sxy += rx[i] * ry[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / n;
    double rss = 0, tss = 0;
    for (int i = 0; i < 50; ++i) {
        rss += std::pow(ry[i] - icpt - slope * rx[i], 2);
        tss += std::pow(ry[i] - sy / n, 2);
    }
    CHECK(nonlinearity(rx, ry) == doctest::Approx(rss / tss).epsilon(1e-10));

    CHECK_THROWS_AS(nonlinearity(std::vector<double>{1, 2}, std::vector<double>{1, 2}),
                    DegenerateDataError);
    CHECK_THROWS_AS(nonlinearity(x, std::vector<double>(6, 2.0)), DegenerateDataError);
    CHECK(bin_nonlinearity(testing::set144_bin()) > 0.0);
}

TEST_CASE("average scaled error") {
    const std::vector<double> sigma{0.1, 0.2, 0.3};
    std::vector<std::vector<double>> F{{1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}};
    CHECK(avg_scaled_error(sigma, F, 0.0).value == 0.0);
    CHECK(avg_scaled_error(sigma, F, 2.0).value == doctest::Approx(0.2).epsilon(1e-15));

    F = {{0.5, -1.0, 3.0}, {0.25, 2.0, 0.0}};
    const auto r = avg_scaled_error(sigma, F, 1.5);
    const double by_hand = (1.5 * 0.1 / 0.5 + 1.5 * 0.3 / 3.0 + 1.5 * 0.1 / 0.25 + 1.5 * 0.2 / 2.0) / 4;
    CHECK(r.value == doctest::Approx(by_hand).epsilon(1e-15));
    CHECK(r.n_used == 4);
    CHECK(r.n_excluded == 2);
}

TEST_CASE("qualifier formula") {
    CHECK(qualifier(0.0, 0.0) == -0.583);
    CHECK(qualifier(0.583 / 1.98, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(qualifier(0.6, 1.0) == doctest::Approx(0.473).epsilon(1e-14));
    CHECK(qualifier(0.5, 0.2) == doctest::Approx(0.3806).epsilon(1e-14));
    CHECK(recommend(qualifier(0.0, 0.0)) == Recommendation::CDNN);
    CHECK(recommend(0.3806) == Recommendation::QDNN);
    CHECK(recommend(0.05, 0.1) == Recommendation::Tie);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 1000; ++i) {
        const double e = u(rng), n = u(rng), d = 1e-3 + u(rng);
        CHECK(qualifier(e + d, n) > qualifier(e, n));
        CHECK(qualifier(e, n + d) < qualifier(e, n));
    }
    const auto f = make_features(0.5, 0.2);
    CHECK(f.xi_hat == qualifier(0.5, 0.2));
    CHECK_FALSE(f.xi.has_value());
}

TEST_CASE("qualifier calibration") {
    const std::vector<double> x{-1, 0, 0.5, 1, 2};
    const auto exact = qualifier_calibration(x, x);
    CHECK(exact.slope == doctest::Approx(1.0));
    CHECK(exact.intercept == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(exact.r2 == doctest::Approx(1.0));

    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd(0, 1);
    std::vector<double> a, b;
    for (int i = 0; i < 100; ++i) {
        a.push_back(nd(rng));
        b.push_back(1.0004 * a.back() - 0.0042 + 0.8 * nd(rng));
    }
    const auto fit = qualifier_calibration(a, b, 0.0);
    const auto oracle = ols(a, b);
    CHECK(fit.slope == doctest::Approx(oracle.slope).epsilon(1e-10));
    CHECK(fit.r2 == doctest::Approx(oracle.r2).epsilon(1e-10));
    CHECK(fit.r2 > 0.0);
    CHECK(fit.r2 < 1.0);

    b[10] += 100.0; // extreme outlier
    const auto robust = qualifier_calibration(a, b);
    CHECK(robust.n_excluded >= 1);
    CHECK(std::abs(robust.slope - 1.0) < 0.3);
    CHECK_THROWS_AS(qualifier_calibration(std::vector<double>{1, 2}, std::vector<double>{1, 2}),
                    DegenerateDataError);
}

TEST_CASE("spearman correlation") {
    const std::vector<double> x{1, 2, 3, 4, 5, 6};
    const std::vector<double> y{2, 4, 9, 16, 30, 36};
    CHECK(spearman(x, y).rho == doctest::Approx(1.0));
    CHECK(spearman(x, y).p_value == 0.0);
    const std::vector<double> z{6, 5, 4, 3, 2, 1};
    CHECK(spearman(x, z).rho == doctest::Approx(-1.0));

    // Ties use average ranks; oracle is Pearson on hand-assigned ranks.
    const std::vector<double> s{0, 0, 0.5, 0.5, 1, 1, 2, 2};
    const std::vector<double> m{-0.2, 0.1, 0.0, 0.3, 0.2, 0.5, 0.9, 0.4};
    const auto r = spearman(s, m);
    // Ranks: s -> 1.5,1.5,3.5,3.5,5.5,5.5,7.5,7.5; m -> 1,3,2,5,4,7,8,6.
    const std::vector<double> rs{1.5, 1.5, 3.5, 3.5, 5.5, 5.5, 7.5, 7.5};
    const std::vector<double> rm{1, 3, 2, 5, 4, 7, 8, 6};
    double num = 0, dx = 0, dy = 0;
    for (int i = 0; i < 8; ++i) {
        num += (rs[i] - 4.5) * (rm[i] - 4.5);
        dx += (rs[i] - 4.5) * (rs[i] - 4.5);
        dy += (rm[i] - 4.5) * (rm[i] - 4.5);
    }
    const double rho = num / std::sqrt(dx * dy);
    CHECK(r.rho == doctest::Approx(rho).epsilon(1e-14));
    CHECK(r.p_value > 0.0);
    CHECK(r.p_value < 0.05);
    CHECK_THROWS_AS(spearman(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
                    DegenerateDataError);
}

TEST_CASE("spearman p-value matches closed-form Student t tails") {
    // 1 dof: p = 1 - (2/pi) atan|t|.
    const auto r3 = spearman(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3, 2});
    CHECK(r3.rho == doctest::Approx(0.5).epsilon(1e-15));
    const double t3 = 0.5 * std::sqrt(1 / 0.75);
    CHECK(r3.p_value == doctest::Approx(1 - 2 / physics::kPi * std::atan(t3)).epsilon(1e-12));
    // 2 dof: p = 1 - |t| / sqrt(2 + t^2).
    const auto r4 = spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 2, 4, 3});
    CHECK(r4.rho == doctest::Approx(0.8).epsilon(1e-15));
    const double t4 = 0.8 * std::sqrt(2 / 0.36);
    CHECK(r4.p_value == doctest::Approx(1 - t4 / std::sqrt(2 + t4 * t4)).epsilon(1e-12));
}

TEST_CASE("algorithmic and methodological error") {
    const auto bin = testing::set144_bin();
    auto cfg = training::default_fit_config(models::ModelClass::CDNN, 25);
    const auto opts = models::ModelOptions::defaults(models::ModelClass::CDNN);
    const auto alg = algorithmic_error(models::ModelClass::CDNN, bin, 4, cfg, opts);
    for (double v : alg) {
        CHECK(v > 0.0);
    }
    // One shared seed and identical data: zero spread.
    training::ReplicaOptions ro;
    ro.n_replicas = 3;
    ro.mode = training::ResampleMode::Identical;
    ro.vary_seed = false;
    const auto ens = training::fit_replicas(models::ModelClass::CDNN, bin, ro, cfg, opts);
    CHECK(precision(ens.included()) == PerCff{0, 0, 0, 0});

    MethodologicalOptions mo;
    mo.n_draws = 4;
    const auto meth = methodological_error(models::ModelClass::CDNN, bin,
                                           pseudodata::GeneratorSet::basic(), mo, cfg, opts);
    for (double v : meth) {
        CHECK(v >= 0.0);
        CHECK(std::isfinite(v));
    }
    mo.n_draws = 1;
    CHECK_THROWS_AS(methodological_error(models::ModelClass::CDNN, bin,
                                         pseudodata::GeneratorSet::basic(), mo, cfg, opts),
                    InsufficientReplicasError);
}
