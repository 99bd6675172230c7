#pragma once

// Dense-matrix circuit oracle shared by unit and acceptance tests: builds the
// full 2^n x 2^n unitary by Kronecker products.

#include <cmath>
#include <complex>
#include <vector>

#include "qcff/qsim/circuit.hpp"

namespace qcff_test {

using qcff::qsim::CircuitParams;
using C = std::complex<double>;

// Dense 2^n x 2^n matrices built by Kronecker products, used as an oracle.
struct Dense {
    std::size_t dim;
    std::vector<C> m;
    explicit Dense(std::size_t d) : dim(d), m(d * d, C{0.0, 0.0}) {}
    C &operator()(std::size_t r, std::size_t c) { return m[r * dim + c]; }
    C operator()(std::size_t r, std::size_t c) const { return m[r * dim + c]; }
    static Dense identity(std::size_t d) {
        Dense I(d);
        for (std::size_t i = 0; i < d; ++i) {
            I(i, i) = 1.0;
        }
        return I;
    }
};

inline Dense matmul(const Dense &a, const Dense &b) {
    Dense out(a.dim);
    for (std::size_t i = 0; i < a.dim; ++i) {
        for (std::size_t k = 0; k < a.dim; ++k) {
            const C aik = a(i, k);
            for (std::size_t j = 0; j < a.dim; ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

inline Dense kron(const Dense &a, const Dense &b) {
    Dense out(a.dim * b.dim);
    for (std::size_t i = 0; i < a.dim; ++i) {
        for (std::size_t j = 0; j < a.dim; ++j) {
            for (std::size_t k = 0; k < b.dim; ++k) {
                for (std::size_t l = 0; l < b.dim; ++l) {
                    out(i * b.dim + k, j * b.dim + l) = a(i, j) * b(k, l);
                }
            }
        }
    }
    return out;
}

inline Dense ry2(double t) {
    Dense g(2);
    g(0, 0) = std::cos(t / 2);
    g(0, 1) = -std::sin(t / 2);
    g(1, 0) = std::sin(t / 2);
    g(1, 1) = std::cos(t / 2);
    return g;
}

inline Dense rz2(double t) {
    Dense g(2);
    g(0, 0) = std::polar(1.0, -t / 2);
    g(1, 1) = std::polar(1.0, t / 2);
    return g;
}

// Single-qubit gate on qubit q (little-endian) as a full matrix:
// I_{n-1} x ... x g x ... x I_0, with the highest qubit leftmost.
inline Dense embed(const Dense &g, std::size_t q, std::size_t n) {
    Dense out = Dense::identity(1);
    for (std::size_t k = n; k-- > 0;) {
        out = kron(out, k == q ? g : Dense::identity(2));
    }
    return out;
}

inline Dense cnot_dense(std::size_t c, std::size_t t, std::size_t n) {
    const std::size_t d = std::size_t{1} << n;
    Dense out(d);
    for (std::size_t i = 0; i < d; ++i) {
        const std::size_t j = ((i >> c) & 1U) ? (i ^ (std::size_t{1} << t)) : i;
        out(j, i) = 1.0;
    }
    return out;
}

inline Dense circuit_unitary(const std::vector<double> &features, const CircuitParams &p) {
    const std::size_t n = p.n_qubits;
    Dense U = Dense::identity(std::size_t{1} << n);
    for (std::size_t q = 0; q < n; ++q) {
        U = matmul(embed(ry2(features[q]), q, n), U);
    }
    for (std::size_t l = 0; l < p.n_layers; ++l) {
        for (std::size_t q = 0; q < n; ++q) {
            const std::size_t i = CircuitParams::index(n, l, q, 0);
            // Application order RZ(a), RY(b), RZ(c): matrix RZ(c) RY(b) RZ(a).
            const Dense rot = matmul(rz2(p.thetas[i + 2]), matmul(ry2(p.thetas[i + 1]), rz2(p.thetas[i])));
            U = matmul(embed(rot, q, n), U);
        }
        if (n > 1) {
            const std::size_t r = p.range_for_layer(l);
            for (std::size_t q = 0; q < n; ++q) {
                U = matmul(cnot_dense(q, (q + r) % n, n), U);
            }
        }
    }
    return U;
}

inline std::vector<double> oracle_z(const std::vector<double> &features, const CircuitParams &p) {
    const Dense U = circuit_unitary(features, p);
    const std::size_t n = p.n_qubits;
    std::vector<double> z(n, 0.0);
    for (std::size_t i = 0; i < U.dim; ++i) {
        const double prob = std::norm(U(i, 0));
        for (std::size_t q = 0; q < n; ++q) {
            z[q] += ((i >> q) & 1U) ? -prob : prob;
        }
    }
    return z;
}

} // namespace qcff_test
