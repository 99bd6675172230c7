#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "qcff/errors.hpp"
#include "qcff/qsim/circuit.hpp"
#include "dense_oracle.hpp"

using namespace qcff;
using namespace qcff::qsim;

using namespace qcff_test;

namespace {

CircuitParams random_params(std::mt19937_64 &rng, std::size_t n, std::size_t L,
                            EntanglerPattern pattern = EntanglerPattern::Fixed) {
    std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
    std::uniform_int_distribution<std::size_t> rr(1, n > 1 ? n - 1 : 1);
    auto p = CircuitParams::zeros(n, L, rr(rng), pattern);
    for (auto &t : p.thetas) {
        t = ang(rng);
    }
    return p;
}

std::vector<double> random_features(std::mt19937_64 &rng, std::size_t n) {
    std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
    std::vector<double> f(n);
    for (auto &x : f) {
        x = ang(rng);
    }
    return f;
}

} // namespace

TEST_CASE("angle_embed: basic states") {
    const std::vector<double> zero(4, 0.0);
    const auto s0 = angle_embed(zero);
    CHECK(s0.amplitudes()[0] == C{1.0, 0.0});
    for (double z : s0.expectations_z()) {
        CHECK(z == 1.0);
    }
    const std::vector<double> f{std::numbers::pi, std::numbers::pi / 2, 0.3};
    const auto s = angle_embed(f);
    CHECK(s.expectation_z(0) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(std::abs(s.expectation_z(1)) < 1e-15);
    CHECK(s.expectation_z(2) == doctest::Approx(std::cos(0.3)).epsilon(1e-14));
    CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-15));

    auto p = CircuitParams::zeros(3, 1);
    const std::vector<double> wrong(2, 0.0);
    CHECK_THROWS_AS(run_circuit(wrong, p), ShapeError);
}

TEST_CASE("sel layer: zero angles keep |0...0>") {
    QuantumState s(5);
    const std::vector<double> zeros(15, 0.0);
    for (std::size_t r = 1; r < 5; ++r) {
        apply_sel_layer(s, zeros, r);
    }
    CHECK(std::abs(s.amplitudes()[0] - C{1.0, 0.0}) < 1e-15);
    CHECK_THROWS_AS(apply_sel_layer(s, std::vector<double>(14, 0.0), 1), ShapeError);
}

TEST_CASE("sel layer: two-qubit instance matches tensor algebra") {
    const std::vector<double> th{0.3, -1.1, 0.7, 2.0, 0.4, -0.9};
    QuantumState s(2);
    apply_sel_layer(s, th, 1);

    const Dense rot0 = matmul(rz2(th[2]), matmul(ry2(th[1]), rz2(th[0])));
    const Dense rot1 = matmul(rz2(th[5]), matmul(ry2(th[4]), rz2(th[3])));
    Dense U = matmul(kron(rot1, rot0), Dense::identity(4));
    U = matmul(cnot_dense(0, 1, 2), U);
    U = matmul(cnot_dense(1, 0, 2), U);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(s.amplitudes()[i] - U(i, 0)) < 1e-14);
    }
}

TEST_CASE("run_circuit: dense-matrix oracle") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + trial % 5;
        const std::size_t L = trial % 4;
        const auto pattern = trial % 2 ? EntanglerPattern::Cyclic : EntanglerPattern::Fixed;
        const auto p = random_params(rng, n, L, pattern);
        const auto f = random_features(rng, n);
        const auto z = run_circuit(f, p).z;
        const auto zo = oracle_z(f, p);
        for (std::size_t j = 0; j < n; ++j) {
            CHECK(z[j] == doctest::Approx(zo[j]).epsilon(1e-10));
            CHECK(std::abs(z[j] - zo[j]) < 1e-10);
            CHECK(std::abs(z[j]) <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("run_circuit: L = 0 is the embedding readout") {
    const std::vector<double> f{0.2, 1.3, -0.4};
    const auto z = run_circuit(f, CircuitParams::zeros(3, 0)).z;
    for (std::size_t q = 0; q < 3; ++q) {
        CHECK(z[q] == doctest::Approx(std::cos(f[q])).epsilon(1e-14));
    }
    const std::vector<double> zero(3, 0.0);
    const auto z1 = run_circuit(zero, CircuitParams::zeros(3, 1)).z;
    for (double v : z1) {
        CHECK(v == 1.0);
    }
}

TEST_CASE("run_circuit: split application equals a single call bit-for-bit") {
    std::mt19937_64 rng(11);
    const auto p = random_params(rng, 6, 8, EntanglerPattern::Cyclic);
    const auto f = random_features(rng, 6);
    auto whole = angle_embed(f);
    apply_layers(whole, p, 0, 8);
    auto split = angle_embed(f);
    apply_layers(split, p, 0, 3);
    apply_layers(split, p, 3, 8);
    for (std::size_t i = 0; i < whole.dimension(); ++i) {
        CHECK(whole.amplitudes()[i] == split.amplitudes()[i]);
    }
    CHECK(run_circuit(f, p).z == whole.expectations_z());
}

TEST_CASE("circuit params: validation and ranges") {
    auto p = CircuitParams::zeros(6, 8);
    CHECK(p.size() == 144);
    CHECK_NOTHROW(p.validate());
    p.entangle_range = 6;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.entangle_range = 1;
    p.thetas.pop_back();
    CHECK_THROWS_AS(p.validate(), ShapeError);

    auto c = CircuitParams::zeros(6, 8, 1, EntanglerPattern::Cyclic);
    const std::vector<std::size_t> expect{1, 2, 3, 4, 5, 1, 2, 3};
    for (std::size_t l = 0; l < 8; ++l) {
        CHECK(c.range_for_layer(l) == expect[l]);
    }
}

TEST_CASE("norm is preserved after every layer") {
    std::mt19937_64 rng(3);
    const auto p = random_params(rng, 6, 200);
    auto s = angle_embed(random_features(rng, 6));
    for (std::size_t l = 0; l < p.n_layers; ++l) {
        apply_sel_layer(s, p.layer(l), p.range_for_layer(l));
        CHECK(std::abs(s.norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("parameter shift: single-qubit RY") {
    // Rot(0, theta, 0) on |0> is RY(theta): <Z> = cos(theta).
    auto p = CircuitParams::zeros(1, 1);
    const std::vector<double> f{0.0};
    auto g = parameter_shift_grad(f, p, 1);
    CHECK(std::abs(g[0]) < 1e-15);
    p.thetas[1] = std::numbers::pi / 2;
    g = parameter_shift_grad(f, p, 1);
    CHECK(g[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK_THROWS_AS(parameter_shift_grad(f, p, 3), IndexError);
}

TEST_CASE("parameter shift: agrees with central differences") {
    std::mt19937_64 rng(19);
    const double h = 1e-5;
    for (int trial = 0; trial < 10; ++trial) {
        const auto p = random_params(rng, 6, 1 + trial % 4);
        const auto f = random_features(rng, 6);
        for (std::size_t k = 0; k < p.size(); k += 5) {
            const auto g = parameter_shift_grad(f, p, k);
            auto pp = p;
            pp.thetas[k] += h;
            const auto zp = run_circuit(f, pp).z;
            pp.thetas[k] -= 2 * h;
            const auto zm = run_circuit(f, pp).z;
            for (std::size_t j = 0; j < 6; ++j) {
                const double fd = (zp[j] - zm[j]) / (2 * h);
                CHECK(std::abs(g[j] - fd) <= std::max(1e-6, 1e-5 * std::abs(fd)));
            }
        }
    }
}

TEST_CASE("adjoint VJP equals shift-rule VJP") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 15; ++trial) {
        const std::size_t n = 1 + trial % 6;
        const auto p = random_params(rng, n, trial % 5, trial % 3 ? EntanglerPattern::Fixed
                                                                   : EntanglerPattern::Cyclic);
        const auto f = random_features(rng, n);
        std::vector<double> w(n);
        for (auto &x : w) {
            x = nd(rng);
        }
        const auto a = adjoint_vjp(f, p, w);
        const auto s = parameter_shift_vjp(f, p, w);
        REQUIRE(a.d_thetas.size() == s.d_thetas.size());
        for (std::size_t k = 0; k < a.d_thetas.size(); ++k) {
            CHECK(std::abs(a.d_thetas[k] - s.d_thetas[k]) < 1e-12);
        }
        for (std::size_t q = 0; q < n; ++q) {
            CHECK(std::abs(a.d_features[q] - s.d_features[q]) < 1e-12);
            CHECK(a.z[q] == s.z[q]);
        }
    }
}

TEST_CASE("shift-rule Jacobian does not depend on the worker count") {
    std::mt19937_64 rng(29);
    const auto p = random_params(rng, 5, 3);
    const auto f = random_features(rng, 5);
    const auto j1 = parameter_shift_jacobian(f, p, 1);
    const auto j4 = parameter_shift_jacobian(f, p, 4);
    CHECK(j1.d_thetas == j4.d_thetas);
    CHECK(j1.d_features == j4.d_features);
}
