#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fixtures.hpp"
#include "qcff/errors.hpp"
#include "qcff/training/fit.hpp"
#include "qcff/training/replicas.hpp"

using namespace qcff;
using namespace qcff::training;
using models::ModelClass;

namespace {

models::ModelOptions fast_options(ModelClass m) {
    auto o = models::ModelOptions::defaults(m);
    o.gradient = models::CircuitGradient::Adjoint;
    return o;
}

FitConfig short_config(ModelClass m, std::size_t epochs) {
    auto c = default_fit_config(m, epochs);
    c.seed = 7;
    return c;
}

} // namespace

TEST_CASE("loss vanishes when the data equal the predictions") {
    auto bin = testing::set144_bin();
    const auto response = bin.response();
    const physics::CFFSet c{0.4, -1.2, 0.7, 0.01};
    const auto pred = response.predict(c);
    for (std::size_t i = 0; i < bin.points.size(); ++i) {
        bin.points[i].F = pred[i];
    }
    CHECK(loss(response, c, bin.F(), bin.sigmas()) == 0.0);
}

TEST_CASE("doubling every sigma divides the loss by four") {
    const auto bin = testing::set144_bin();
    const auto response = bin.response();
    const physics::CFFSet c{0.4, -1.2, 0.7, 0.01};
    auto s = bin.sigmas();
    const double L1 = loss(response, c, bin.F(), s);
    for (auto &v : s) {
        v *= 2.0;
    }
    CHECK(loss(response, c, bin.F(), s) == doctest::Approx(L1 / 4.0).epsilon(1e-14));
}

TEST_CASE("three-point loss matches a hand sum") {
    const double phis[3] = {30.0, 150.0, 275.0};
    const double data[3] = {0.11, 0.07, 0.09};
    const double sig[3] = {0.01, 0.004, 0.02};
    const physics::CFFSet c{-0.9, -0.3, -0.4, 0.02};
    const auto kin = physics::derive_kinematics(5.75, 2.22, 0.333, -0.16);
    const auto ff = physics::kelly_form_factors(-0.16);
    double sum = 0.0;
    std::vector<double> rad;
    for (int i = 0; i < 3; ++i) {
        rad.push_back(phis[i] * physics::kDegToRad);
        const double r = (physics::forward_model(kin, ff, c, rad.back()) - data[i]) / sig[i];
        sum += r * r;
    }
    const physics::CrossSectionResponse response(kin, ff, rad);
    CHECK(loss(response, c, data, sig) == doctest::Approx(sum / 3.0).epsilon(1e-12));
}

TEST_CASE("loss is invariant under phi-point permutation") {
    auto bin = testing::set144_bin();
    for (auto &p : bin.points) {
        p.F *= 1.07;
    }
    const auto reg = models::make_regressor(ModelClass::CDNN);
    const auto params = reg->init_params(3);
    const double L = loss(*reg, params, bin);
    auto shuffled = bin;
    std::reverse(shuffled.points.begin(), shuffled.points.end());
    std::rotate(shuffled.points.begin(), shuffled.points.begin() + 5, shuffled.points.end());
    CHECK(loss(*reg, params, shuffled) == doctest::Approx(L).epsilon(1e-13));
}

TEST_CASE("loss gradient matches finite differences") {
    const auto bin = testing::set144_bin();
    const auto response = bin.response();
    const auto F = bin.F();
    const auto s = bin.sigmas();
    const physics::CFFSet c{0.4, -1.2, 0.7, 0.01};
    const auto g = loss_gradient(response, c, F, s);
    for (std::size_t k = 0; k < 4; ++k) {
        auto a = c.to_array();
        const double h = 1e-6;
        a[k] += h;
        const double up = loss(response, physics::CFFSet::from_array(a), F, s);
        a[k] -= 2 * h;
        const double dn = loss(response, physics::CFFSet::from_array(a), F, s);
        CHECK(g[k] == doctest::Approx((up - dn) / (2 * h)).epsilon(1e-6));
    }
}

TEST_CASE("non-finite loss is reported") {
    const auto bin = testing::set144_bin();
    std::vector<double> F(bin.points.size(), 1e200);
    std::vector<double> s(bin.points.size(), 1e-200);
    CHECK_THROWS_AS(loss(bin.response(), {}, F, s), NonFiniteError);
    auto cfg = short_config(ModelClass::CDNN, 3);
    CHECK_THROWS_AS(fit_targets(ModelClass::CDNN, bin.response(), bin.inputs(), F, s, cfg,
                                models::ModelOptions::defaults(ModelClass::CDNN)),
                    DivergenceError);
}

TEST_CASE("Adam first step moves each parameter by its group learning rate") {
    FitConfig cfg;
    cfg.lr_classical = 1e-3;
    cfg.lr_quantum = 5e-3;
    Adam adam(4, {{0, 2, false}, {2, 2, true}}, cfg);
    std::vector<double> p{0, 0, 0, 0};
    const std::vector<double> g{2.0, -0.5, 3.0, -1e-3};
    adam.step(p, g);
    // m_hat / sqrt(v_hat) = sign(g) on the first step, up to eps.
    CHECK(p[0] == doctest::Approx(-1e-3).epsilon(1e-6));
    CHECK(p[1] == doctest::Approx(1e-3).epsilon(1e-6));
    CHECK(p[2] == doctest::Approx(-5e-3).epsilon(1e-6));
    CHECK(p[3] == doctest::Approx(5e-3).epsilon(1e-4));
    CHECK(adam.steps() == 1);
}

TEST_CASE("Adam insert keeps existing moments and zeroes new ones") {
    FitConfig cfg;
    Adam a(3, {{0, 3, false}}, cfg);
    Adam b(3, {{0, 3, false}}, cfg);
    std::vector<double> pa{1, 2, 3}, pb{1, 2, 3};
    const std::vector<double> g{0.3, -0.2, 0.1};
    a.step(pa, g);
    b.step(pb, g);
    a.insert(1, 2, {{0, 1, false}, {1, 2, true}, {3, 2, false}});
    std::vector<double> pa5{pa[0], 0.0, 0.0, pa[1], pa[2]};
    const std::vector<double> g5{0.3, 0.0, 0.0, -0.2, 0.1};
    a.step(pa5, g5);
    b.step(pb, g);
    CHECK(pa5[0] == pb[0]);
    CHECK(pa5[3] == pb[1]);
    CHECK(pa5[4] == pb[2]);
    CHECK(pa5[1] == 0.0);
    CHECK(pa5[2] == 0.0);
    CHECK_THROWS_AS(a.step(pb, g), ShapeError);
}

TEST_CASE("layer-wise growth schedule") {
    const auto g = GrowthSchedule::layerwise(2000);
    REQUIRE(g.milestones.size() == 4);
    CHECK(g.milestones[0] == std::pair<std::size_t, std::size_t>{0, 2});
    CHECK(g.milestones[1] == std::pair<std::size_t, std::size_t>{500, 4});
    CHECK(g.milestones[2] == std::pair<std::size_t, std::size_t>{1000, 6});
    CHECK(g.milestones[3] == std::pair<std::size_t, std::size_t>{1500, 8});
    CHECK(g.depth_at(0) == 2);
    CHECK(g.depth_at(499) == 2);
    CHECK(g.depth_at(500) == 4);
    CHECK(g.depth_at(1999) == 8);
    g.validate(8);
    CHECK_THROWS_AS(g.validate(6), ConfigError);
    GrowthSchedule bad{{{0, 4}, {10, 2}}};
    CHECK_THROWS_AS(bad.validate(2), ConfigError);
    GrowthSchedule late{{{5, 2}, {10, 8}}};
    CHECK_THROWS_AS(late.validate(8), ConfigError);
    CHECK_THROWS_AS(GrowthSchedule::layerwise(100, 4, 2), ConfigError);
}

TEST_CASE("config validation") {
    FitConfig c;
    c.lr_classical = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = FitConfig{};
    c.beta1 = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("zero-epoch fit returns the initial parameters") {
    const auto bin = testing::set144_bin();
    for (auto m : {ModelClass::CDNN, ModelClass::BasicQDNN}) {
        auto cfg = short_config(m, 0);
        const auto res = fit_local(m, bin, cfg, fast_options(m));
        const auto reg = models::make_regressor(m, fast_options(m));
        CHECK(res.params == reg->init_params(cfg.seed));
        CHECK(res.epochs_run == 0);
        CHECK(res.final_loss == res.initial_loss);
    }
}

TEST_CASE("fit never returns a loss above the initial loss") {
    const auto bin = testing::set144_bin();
    for (auto m : {ModelClass::CDNN, ModelClass::BasicQDNN, ModelClass::FQDNN}) {
        CAPTURE(models::to_string(m));
        const auto opts = fast_options(m);
        auto cfg = short_config(m, 40);
        const auto res = fit_local(m, bin, cfg, opts);
        CHECK(res.final_loss <= res.initial_loss);
        CHECK(res.final_loss < res.initial_loss);
        // The stored parameters reproduce the stored loss at the stored depth.
        auto o = opts;
        o.qdnn.n_layers = models::is_quantum(m) ? res.n_layers : o.qdnn.n_layers;
        const auto reg = models::make_regressor(m, o);
        CHECK(loss(*reg, res.params, bin) == doctest::Approx(res.final_loss).epsilon(1e-12));
        CHECK(reg->forward(res.params, bin.inputs()) == res.cffs.to_array());
    }
}

TEST_CASE("same seed and config give identical parameters") {
    const auto bin = testing::set144_bin();
    for (auto m : {ModelClass::CDNN, ModelClass::FQDNN}) {
        auto cfg = short_config(m, 12);
        const auto a = fit_local(m, bin, cfg, fast_options(m));
        const auto b = fit_local(m, bin, cfg, fast_options(m));
        CHECK(a.params == b.params);
        CHECK(a.trace == b.trace);
        cfg.seed += 1;
        const auto c = fit_local(m, bin, cfg, fast_options(m));
        CHECK(c.params != a.params);
    }
}

TEST_CASE("FQDNN grows from 2 to 8 layers") {
    const auto bin = testing::set144_bin();
    const auto opts = fast_options(ModelClass::FQDNN);
    const auto cfg = short_config(ModelClass::FQDNN, 8);
    const auto res = fit_local(ModelClass::FQDNN, bin, cfg, opts);
    CHECK(res.final_layers == 8);
    CHECK(res.trace.size() == 8);
    auto o = opts;
    o.qdnn.n_layers = res.n_layers;
    CHECK(res.params.size() == models::make_regressor(ModelClass::FQDNN, o)->num_params());

    // The first trace entry is the loss of the depth-2 initialisation.
    o.qdnn.n_layers = 2;
    const auto r2 = models::make_regressor(ModelClass::FQDNN, o);
    CHECK(loss(*r2, r2->init_params(cfg.seed), bin) == doctest::Approx(res.trace[0]).epsilon(1e-12));

    auto bad = cfg;
    bad.growth = GrowthSchedule::layerwise(8, 2, 6);
    CHECK_THROWS_AS(fit_local(ModelClass::FQDNN, bin, bad, opts), ConfigError);

    // Without a schedule the model trains at its full depth.
    auto fixed = cfg;
    fixed.growth = {};
    CHECK(fit_local(ModelClass::FQDNN, bin, fixed, opts).final_layers == 8);
}

TEST_CASE("noise-free closure: CDNN reproduces the cross section within 2%") {
    const auto bin = testing::set144_bin();
    auto cfg = short_config(ModelClass::CDNN, 2000);
    const auto res = fit_local(ModelClass::CDNN, bin, cfg);
    const auto pred = bin.response().predict(res.cffs);
    const auto F = bin.F();
    const double mean_F = std::accumulate(F.begin(), F.end(), 0.0) / static_cast<double>(F.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i) {
        worst = std::max(worst, std::abs(pred[i] - F[i]));
    }
    CAPTURE(worst / mean_F);
    CHECK(worst < 0.02 * mean_F);
}

TEST_CASE("identical replicas with one seed have zero spread") {
    const auto bin = testing::set144_bin();
    ReplicaOptions ro;
    ro.n_replicas = 4;
    ro.mode = ResampleMode::Identical;
    ro.vary_seed = false;
    const auto ens = fit_replicas(ModelClass::CDNN, bin, ro, short_config(ModelClass::CDNN, 30),
                                  fast_options(ModelClass::CDNN));
    REQUIRE(ens.included().size() == 4);
    for (const auto &r : ens.replicas) {
        CHECK(r.cffs == ens.replicas[0].cffs);
        CHECK(r.init_seed == 7);
    }
}

TEST_CASE("replica seeds are independent and the schedule does not matter") {
    const auto bin = testing::set144_bin();
    ReplicaOptions ro;
    ro.n_replicas = 5;
    const auto cfg = short_config(ModelClass::CDNN, 15);
    const auto serial =
        fit_replicas(ModelClass::CDNN, bin, ro, cfg, fast_options(ModelClass::CDNN));
    ro.workers = 3;
    const auto par = fit_replicas(ModelClass::CDNN, bin, ro, cfg, fast_options(ModelClass::CDNN));
    for (std::size_t r = 0; r < 5; ++r) {
        CHECK(serial.replicas[r].cffs == par.replicas[r].cffs);
        CHECK(serial.replicas[r].init_seed == par.replicas[r].init_seed);
        CHECK(serial.replicas[r].noise_seed ==
              derive_seed(cfg.seed, bin.set_id, r, streams::kNoise));
        for (std::size_t q = r + 1; q < 5; ++q) {
            CHECK(serial.replicas[r].init_seed != serial.replicas[q].init_seed);
            CHECK(serial.replicas[r].cffs != serial.replicas[q].cffs);
        }
    }
}

TEST_CASE("gaussian replicas approach identical-mode replicas as sigma vanishes") {
    auto bin = testing::set144_bin();
    for (auto &p : bin.points) {
        p.sigma_F *= 1e-9;
    }
    ReplicaOptions ro;
    ro.n_replicas = 3;
    const auto cfg = short_config(ModelClass::CDNN, 30);
    const auto opts = fast_options(ModelClass::CDNN);
    const auto g = fit_replicas(ModelClass::CDNN, bin, ro, cfg, opts);
    ro.mode = ResampleMode::Identical;
    const auto id = fit_replicas(ModelClass::CDNN, bin, ro, cfg, opts);
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t k = 0; k < 4; ++k) {
            CHECK(g.replicas[r].cffs[k] ==
                  doctest::Approx(id.replicas[r].cffs[k]).epsilon(1e-5));
        }
    }
}

TEST_CASE("replica options and outlier flags") {
    const auto bin = testing::set144_bin();
    ReplicaOptions ro;
    ro.n_replicas = 1;
    CHECK_THROWS_AS(fit_replicas(ModelClass::CDNN, bin, ro, FitConfig{},
                                 models::ModelOptions::defaults(ModelClass::CDNN)),
                    ConfigError);
    CHECK(parse_resample_mode("Gaussian") == ResampleMode::Gaussian);
    CHECK_THROWS_AS(parse_resample_mode("poisson"), ConfigError);

    ReplicaEnsemble ens;
    for (double L : {1.0, 2.0, 3.0, 40.0, 5.0}) {
        ReplicaRecord r;
        r.final_loss = L;
        r.ok = true;
        ens.replicas.push_back(r);
    }
    ens.replicas.push_back(ReplicaRecord{}); // failed fit
    flag_outliers(ens, 10.0);
    CHECK(ens.n_excluded == 1);
    CHECK(ens.replicas[3].excluded);
    CHECK(ens.included().size() == 4);
    ens.replicas.pop_back();
    ens.replicas.pop_back();
    flag_outliers(ens, 20.0); // even count: median 2.5, threshold 50
    CHECK(ens.n_excluded == 0);
}

TEST_CASE("replica fit errors are recorded, not thrown") {
    auto bin = testing::set144_bin();
    ReplicaOptions ro;
    ro.n_replicas = 2;
    ro.mode = ResampleMode::Identical;
    for (auto &p : bin.points) {
        p.F = 1e200;
        p.sigma_F = 1e-200;
    }
    const auto ens = fit_replicas(ModelClass::CDNN, bin, ro, short_config(ModelClass::CDNN, 2),
                                  fast_options(ModelClass::CDNN));
    CHECK(ens.n_failed == 2);
    CHECK(ens.included().empty());
    CHECK_FALSE(ens.replicas[0].error.empty());
}
