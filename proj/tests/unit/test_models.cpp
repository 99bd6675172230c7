#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "dense_oracle.hpp"
#include "qcff/errors.hpp"
#include "qcff/models/checkpoint.hpp"
#include "qcff/models/complexity.hpp"
#include "qcff/models/regressor.hpp"

using namespace qcff;
using namespace qcff::models;

namespace {

// Independent naive evaluation of the flat-parameter MLP.
std::vector<double> mlp_oracle(const MlpSpec &spec, const std::vector<double> &p,
                               std::vector<double> a) {
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
        const std::size_t in = spec.widths[l];
        const std::size_t out = spec.widths[l + 1];
        std::vector<double> z(out, 0.0);
        for (std::size_t i = 0; i < out; ++i) {
            double s = p[off + in * out + i];
            for (std::size_t j = 0; j < in; ++j) {
                s += p[off + i * in + j] * a[j];
            }
            z[i] = s;
        }
        off += in * out + out;
        if (l + 2 < spec.widths.size()) {
            for (auto &v : z) {
                v = activate(spec.activations[l], v);
            }
        }
        a = z;
    }
    return a;
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double scale = 0.3) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, scale);
    std::vector<double> v(n);
    for (auto &x : v) {
        x = nd(rng);
    }
    return v;
}

} // namespace

TEST_CASE("complexity: published parameter and FLOP counts") {
    const auto c = count_complexity(MlpSpec::cdnn());
    CHECK(c.n_params == 33796);
    CHECK(c.n_flops == 67008);
    const auto q = count_complexity(QdnnSpec::basic());
    CHECK(q.n_params == 876);
    CHECK(q.n_flops == 74688);
    CHECK(count_complexity(QdnnSpec::full()).n_params == 876);
    CHECK(sel_param_count(6, 8) == 144);
    CHECK(dense_flops(3, 64, true) == 448);
    CHECK(Mlp(MlpSpec::cdnn()).num_params() == 33796);
    CHECK(Qdnn(QdnnSpec::basic()).num_params() == 876);
    CHECK(Qdnn(QdnnSpec::basic()).theta_count() == 144);
}

TEST_CASE("mlp: zero weights give zero output") {
    const Mlp mlp(MlpSpec::cdnn());
    const std::vector<double> zeros(mlp.num_params(), 0.0);
    const Eigen::MatrixXd X = Eigen::Vector3d(0.3, 2.0, -0.2);
    CHECK(mlp.forward(zeros, X).norm() == 0.0);
}

TEST_CASE("mlp: matches a naive matrix-multiply oracle") {
    for (Activation act : {Activation::ReLU, Activation::Tanh, Activation::LeakyReLU,
                           Activation::ReLU6, Activation::Tanhshrink}) {
        MlpSpec spec;
        spec.widths = {3, 7, 5, 4};
        spec.activations = {act, Activation::Tanh};
        const Mlp mlp(spec);
        const auto p = random_vector(mlp.num_params(), 5);
        const std::vector<double> x{0.4, 1.7, -0.3};
        const auto y = mlp.forward(p, Eigen::Map<const Eigen::VectorXd>(x.data(), 3));
        const auto yo = mlp_oracle(spec, p, x);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(std::abs(y(static_cast<Eigen::Index>(i), 0) - yo[i]) < 1e-12);
        }
    }
}

TEST_CASE("mlp: scaling the output layer scales the outputs") {
    const CdnnRegressor cdnn;
    auto p = cdnn.init_params(3);
    const std::vector<double> x{0.33, 2.2, -0.23};
    const auto y = cdnn.forward(p, x);
    const std::size_t last = cdnn.mlp().weight_offset(9);
    for (std::size_t i = last; i < p.size(); ++i) {
        p[i] *= 2.5;
    }
    const auto y2 = cdnn.forward(p, x);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(y2[i] == doctest::Approx(2.5 * y[i]).epsilon(1e-12));
    }
}

TEST_CASE("mlp: reverse-mode gradient matches finite differences") {
    MlpSpec spec;
    spec.widths = {3, 6, 6, 4};
    spec.activations = {Activation::Tanh, Activation::Tanhshrink};
    const CdnnRegressor reg(spec);
    const auto p = random_vector(reg.num_params(), 9, 0.5);
    const std::vector<double> x{0.3, -1.2, 0.8};
    const std::array<double, 4> w{0.7, -1.1, 0.4, 2.0};
    std::vector<double> grad(p.size(), 0.0);
    reg.forward_backward(p, x, w, grad);
    auto objective = [&](const std::vector<double> &q) {
        const auto y = reg.forward(q, x);
        return w[0] * y[0] + w[1] * y[1] + w[2] * y[2] + w[3] * y[3];
    };
    const double h = 1e-6;
    for (std::size_t k = 0; k < p.size(); ++k) {
        auto q = p;
        q[k] += h;
        const double fp = objective(q);
        q[k] -= 2 * h;
        const double fm = objective(q);
        CHECK(grad[k] == doctest::Approx((fp - fm) / (2 * h)).epsilon(1e-6));
    }
}

TEST_CASE("mlp: batch norm and dropout gradients") {
    MlpSpec spec;
    spec.widths = {3, 5, 5, 2};
    spec.activations = {Activation::Tanh, Activation::LeakyReLU};
    spec.batch_norm = {true, true};
    const Mlp mlp(spec);
    Rng rng(4);
    auto p = mlp.init_params(rng);
    for (auto &v : p) {
        v += 0.05;
    }
    Eigen::MatrixXd X(3, 6);
    X.setRandom();
    Eigen::MatrixXd W(2, 6);
    W.setRandom();

    // Fixed dropout masks: regenerate with the same seed for each evaluation.
    auto loss = [&](const std::vector<double> &q) {
        Rng r(77);
        MlpTrainOptions opt;
        opt.dropout = {0.3, 0.0};
        opt.rng = &r;
        Mlp::Tape tape;
        return mlp.forward_train(q, X, tape, opt).cwiseProduct(W).sum();
    };
    Rng r(77);
    MlpTrainOptions opt;
    opt.dropout = {0.3, 0.0};
    opt.rng = &r;
    Mlp::Tape tape;
    mlp.forward_train(p, X, tape, opt);
    std::vector<double> grad(p.size(), 0.0);
    mlp.backward(p, tape, W, grad);
    const double h = 1e-6;
    for (std::size_t k = 0; k < p.size(); ++k) {
        auto q = p;
        q[k] += h;
        const double fp = loss(q);
        q[k] -= 2 * h;
        const double fm = loss(q);
        CHECK(std::abs(grad[k] - (fp - fm) / (2 * h)) < 1e-6 * (1.0 + std::abs(grad[k])));
    }

    auto bn = mlp.init_batch_norm_state();
    CHECK_THROWS_AS(mlp.forward(p, X), ConfigError);
    CHECK(mlp.forward(p, X, &bn).cols() == 6);
}

TEST_CASE("qdnn: composed oracle") {
    for (auto spec : {QdnnSpec::basic(), QdnnSpec::full()}) {
        spec.n_qubits = 4;
        spec.n_layers = 3;
        spec.head_width = 5;
        const Qdnn q(spec);
        const auto p = random_vector(q.num_params(), 21, 0.6);
        const std::vector<double> x{0.36, 2.3, -0.28};

        std::vector<double> h(4);
        for (std::size_t i = 0; i < 4; ++i) {
            h[i] = p[12 + i];
            for (std::size_t j = 0; j < 3; ++j) {
                h[i] += p[i * 3 + j] * x[j];
            }
        }
        const auto z = qcff_test::oracle_z(h, q.circuit(p));
        const std::size_t hw = 5;
        const std::size_t o1 = q.theta_offset() + q.theta_count();
        std::vector<double> a(hw);
        for (std::size_t i = 0; i < hw; ++i) {
            double s = p[o1 + hw * 4 + i];
            for (std::size_t j = 0; j < 4; ++j) {
                s += p[o1 + i * 4 + j] * z[j];
            }
            a[i] = std::tanh(s);
        }
        const std::size_t o2 = o1 + hw * 4 + hw;
        const auto y = q.forward(p, x);
        for (std::size_t k = 0; k < 4; ++k) {
            double s = p[o2 + 4 * hw + k];
            for (std::size_t i = 0; i < hw; ++i) {
                s += p[o2 + k * hw + i] * a[i];
            }
            CHECK(std::abs(y[k] - s) < 1e-10);
        }
    }
}

TEST_CASE("qdnn: L = 0 with zero pre-layer feeds z = 1 to the head") {
    QdnnSpec spec = QdnnSpec::basic();
    spec.n_layers = 0;
    const Qdnn q(spec);
    auto p = random_vector(q.num_params(), 2);
    std::fill(p.begin(), p.begin() + 24, 0.0);
    auto pz = q.circuit(p);
    const std::vector<double> x{0.3, 2.0, -0.2};
    const auto h = q.embedding(p, x);
    CHECK(qcff::qsim::run_circuit(h, pz).z == std::vector<double>(6, 1.0));
}

TEST_CASE("qdnn: gradients by both circuit routes match finite differences") {
    QdnnSpec spec = QdnnSpec::basic();
    spec.n_layers = 3;
    for (auto method : {CircuitGradient::ParameterShift, CircuitGradient::Adjoint}) {
        const QdnnRegressor reg(ModelClass::BasicQDNN, spec, AngleInit::small_angle(0.4), method);
        const auto p = reg.init_params(17);
        const std::vector<double> x{0.34, 2.1, -0.25};
        const std::array<double, 4> w{1.0, -0.5, 0.25, 3.0};
        std::vector<double> grad(p.size(), 0.0);
        reg.forward_backward(p, x, w, grad);
        auto objective = [&](const std::vector<double> &q) {
            const auto y = reg.forward(q, x);
            return w[0] * y[0] + w[1] * y[1] + w[2] * y[2] + w[3] * y[3];
        };
        const double h = 1e-6;
        for (std::size_t k = 0; k < p.size(); ++k) {
            auto q = p;
            q[k] += h;
            const double fp = objective(q);
            q[k] -= 2 * h;
            const double fm = objective(q);
            const double fd = (fp - fm) / (2 * h);
            CHECK(std::abs(grad[k] - fd) <= std::max(1e-7, 1e-5 * std::abs(fd)));
        }
    }
}

TEST_CASE("init: depth-scaled standard deviations") {
    const auto ds = AngleInit::depth_scaled(0.3);
    CHECK(ds.sigma_for_layer(0) == 0.3);
    CHECK(ds.sigma_for_layer(3) == doctest::Approx(0.15).epsilon(1e-15));
    CHECK(AngleInit::small_angle(0.1).sigma_for_layer(5) == 0.1);

    // Empirical std of 1e5 draws for layer 1 within 1% of sigma0 / sqrt(2).
    QdnnSpec spec = QdnnSpec::full();
    spec.n_qubits = 10;
    spec.n_layers = 2;
    const Qdnn q(spec);
    std::vector<double> draws;
    for (std::uint64_t s = 0; draws.size() < 100000; ++s) {
        Rng rng(s);
        const auto p = q.init_params(rng, ds);
        const std::size_t l1 = q.theta_offset() + 30;
        draws.insert(draws.end(), p.begin() + static_cast<std::ptrdiff_t>(l1),
                     p.begin() + static_cast<std::ptrdiff_t>(l1 + 30));
    }
    double mean = 0.0;
    for (double d : draws) mean += d;
    mean /= static_cast<double>(draws.size());
    double var = 0.0;
    for (double d : draws) var += (d - mean) * (d - mean);
    const double sd = std::sqrt(var / static_cast<double>(draws.size()));
    CHECK(sd == doctest::Approx(0.3 / std::sqrt(2.0)).epsilon(0.01));
}

TEST_CASE("init: same seed gives identical parameters and outputs") {
    for (auto m : {ModelClass::CDNN, ModelClass::BasicQDNN, ModelClass::FQDNN}) {
        const auto reg = make_regressor(m);
        const auto a = reg->init_params(99);
        const auto b = reg->init_params(99);
        CHECK(a == b);
        CHECK(a != reg->init_params(100));
        const std::vector<double> x{0.3, 2.0, -0.2};
        CHECK(reg->forward(a, x) == reg->forward(b, x));
    }
}

TEST_CASE("init: both angle scales give non-vanishing circuit gradients") {
    for (auto m : {ModelClass::BasicQDNN, ModelClass::FQDNN}) {
        auto opts = ModelOptions::defaults(m);
        opts.gradient = CircuitGradient::Adjoint;
        const auto reg = make_regressor(m, opts);
        const auto p = reg->init_params(5);
        std::vector<double> grad(p.size(), 0.0);
        reg->forward_backward(p, std::vector<double>{0.3, 2.0, -0.2}, {1.0, 1.0, 1.0, 1.0}, grad);
        const auto g = reg->param_groups()[1];
        CHECK(g.quantum);
        double norm = 0.0;
        for (std::size_t k = g.offset; k < g.offset + g.count; ++k) norm += grad[k] * grad[k];
        CHECK(std::sqrt(norm) > 1e-4);
    }
}

TEST_CASE("grow_depth preserves existing layers") {
    QdnnSpec spec = QdnnSpec::full();
    spec.n_layers = 2;
    const Qdnn q2(spec);
    Rng rng(1);
    const auto p = q2.init_params(rng, AngleInit::depth_scaled());

    CHECK(grow_depth(q2, p, 2, AngleInit::depth_scaled(), 7) == p);
    CHECK_THROWS_AS(grow_depth(q2, p, 1, AngleInit::depth_scaled(), 7), ConfigError);

    const auto p3 = grow_depth(q2, p, 3, AngleInit::depth_scaled(), 7);
    spec.n_layers = 3;
    const Qdnn q3(spec);
    REQUIRE(p3.size() == q3.num_params());
    const std::size_t t0 = q2.theta_offset();
    for (std::size_t i = 0; i < t0 + q2.theta_count(); ++i) {
        CHECK(p3[i] == p[i]);
    }
    for (std::size_t i = t0 + q2.theta_count(); i < p.size(); ++i) {
        CHECK(p3[i + 18] == p[i]);
    }

    // A zero-angle layer is a bare CNOT ring. It fixes |0...0>, so with a
    // zero embedding and zero old angles the readout stays at z = 1.
    const std::vector<double> x{0.3, 2.0, -0.2};
    auto zero_all = p3;
    std::fill(zero_all.begin(), zero_all.begin() + static_cast<std::ptrdiff_t>(t0 + 54), 0.0);
    CHECK(qcff::qsim::run_circuit(q3.embedding(zero_all, x), q3.circuit(zero_all)).z ==
          std::vector<double>(6, 1.0));

    // Continuity: shrinking the new layer's angles moves z linearly towards the
    // zero-angle readout.
    auto at_scale = [&](double eps) {
        auto pe = p3;
        for (std::size_t i = t0 + 36; i < t0 + 54; ++i) pe[i] *= eps;
        return qcff::qsim::run_circuit(q3.embedding(pe, x), q3.circuit(pe)).z;
    };
    const auto z0 = at_scale(0.0);
    double d1 = 0.0;
    double d2 = 0.0;
    const auto za = at_scale(1e-3);
    const auto zb = at_scale(1e-4);
    for (std::size_t j = 0; j < 6; ++j) {
        d1 = std::max(d1, std::abs(za[j] - z0[j]));
        d2 = std::max(d2, std::abs(zb[j] - z0[j]));
    }
    CHECK(d1 < 1e-2);
    CHECK(d2 < 0.2 * d1 + 1e-12);
}

TEST_CASE("checkpoint round trip") {
    for (auto m : {ModelClass::CDNN, ModelClass::BasicQDNN, ModelClass::FQDNN}) {
        const auto opts = ModelOptions::defaults(m);
        const auto reg = make_regressor(m, opts);
        Checkpoint c;
        c.model = m;
        c.seed = 123456789012345ULL;
        c.mlp = opts.mlp;
        c.qdnn = opts.qdnn;
        c.params = reg->init_params(c.seed);
        std::stringstream ss;
        write_checkpoint(ss, c);
        const auto text = ss.str();
        const auto back = read_checkpoint(ss);
        CHECK(back.model == m);
        CHECK(back.seed == c.seed);
        CHECK(back.params == c.params);
        std::stringstream again;
        write_checkpoint(again, back);
        CHECK(again.str() == text);
    }
    std::stringstream bad("qcff-checkpoint 1\nmodel cdnn\nseed 1\nwidths 3 4\nactivations\nparams 3\n1\n2\n3\n");
    CHECK_THROWS_AS(read_checkpoint(bad), ShapeError);
    std::stringstream junk("hello\n");
    CHECK_THROWS_AS(read_checkpoint(junk), SchemaError);
}
