#include "qcff/qsim/circuit.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qcff/errors.hpp"
#include "qcff/util/parallel.hpp"

namespace qcff::qsim {

namespace {

constexpr double kShift = std::numbers::pi / 2.0;

void check_finite(std::span<const double> v, const char *what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw NonFiniteError(std::string(what) + " contains a non-finite value");
        }
    }
}

void check_features(std::span<const double> features, const CircuitParams &params) {
    if (features.size() != params.n_qubits) {
        throw ShapeError("expected " + std::to_string(params.n_qubits) + " features, got " +
                         std::to_string(features.size()));
    }
}

// Im <lambda| P_q |phi> for P = Y or Z; the derivative of <O> with respect to
// the angle of exp(-i theta P / 2) placed just before phi.
double generator_overlap_y(const QuantumState &lambda, const QuantumState &phi, std::size_t q) {
    const auto l = lambda.amplitudes();
    const auto p = phi.amplitudes();
    const std::size_t mask = std::size_t{1} << q;
    Complex sum{0.0, 0.0};
    const Complex I{0.0, 1.0};
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(i & mask)) {
            sum += std::conj(l[i]) * (-I * p[i | mask]);
            sum += std::conj(l[i | mask]) * (I * p[i]);
        }
    }
    return sum.imag();
}

double generator_overlap_z(const QuantumState &lambda, const QuantumState &phi, std::size_t q) {
    const auto l = lambda.amplitudes();
    const auto p = phi.amplitudes();
    const std::size_t mask = std::size_t{1} << q;
    Complex sum{0.0, 0.0};
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Complex term = std::conj(l[i]) * p[i];
        sum += (i & mask) ? -term : term;
    }
    return sum.imag();
}

void undo_cnot_ring(QuantumState &s, std::size_t n, std::size_t r) {
    if (n < 2) {
        return;
    }
    for (std::size_t q = n; q-- > 0;) {
        s.apply_cnot(q, (q + r) % n);
    }
}

} // namespace

CircuitParams CircuitParams::zeros(std::size_t n_qubits, std::size_t n_layers,
                                   std::size_t entangle_range, EntanglerPattern pattern) {
    CircuitParams p;
    p.n_qubits = n_qubits;
    p.n_layers = n_layers;
    p.entangle_range = entangle_range;
    p.pattern = pattern;
    p.thetas.assign(n_layers * n_qubits * 3, 0.0);
    return p;
}

std::span<const double> CircuitParams::layer(std::size_t l) const {
    if (l >= n_layers) {
        throw IndexError("layer " + std::to_string(l) + " out of range for " +
                         std::to_string(n_layers) + " layers");
    }
    return std::span<const double>(thetas).subspan(l * n_qubits * 3, n_qubits * 3);
}

std::size_t CircuitParams::range_for_layer(std::size_t l) const {
    if (n_qubits < 2) {
        return 1;
    }
    if (pattern == EntanglerPattern::Cyclic) {
        return (l % (n_qubits - 1)) + 1;
    }
    return entangle_range;
}

void CircuitParams::validate() const {
    if (n_qubits == 0 || n_qubits > QuantumState::kMaxQubits) {
        throw ShapeError("n_qubits must be in 1.." + std::to_string(QuantumState::kMaxQubits));
    }
    if (thetas.size() != n_layers * n_qubits * 3) {
        throw ShapeError("thetas has " + std::to_string(thetas.size()) + " entries, expected " +
                         std::to_string(n_layers * n_qubits * 3));
    }
    if (n_qubits >= 2 && pattern == EntanglerPattern::Fixed &&
        (entangle_range < 1 || entangle_range > n_qubits - 1)) {
        throw ConfigError("entangle_range " + std::to_string(entangle_range) +
                          " outside [1, " + std::to_string(n_qubits - 1) + "]");
    }
}

QuantumState angle_embed(std::span<const double> features) {
    check_finite(features, "features");
    QuantumState s(features.size());
    for (std::size_t q = 0; q < features.size(); ++q) {
        s.apply_ry(q, features[q]);
    }
    return s;
}

void apply_sel_layer(QuantumState &state, std::span<const double> layer_thetas,
                     std::size_t entangle_range) {
    const std::size_t n = state.num_qubits();
    if (layer_thetas.size() != n * 3) {
        throw ShapeError("layer needs " + std::to_string(n * 3) + " angles, got " +
                         std::to_string(layer_thetas.size()));
    }
    for (std::size_t q = 0; q < n; ++q) {
        state.apply_rot(q, layer_thetas[3 * q], layer_thetas[3 * q + 1], layer_thetas[3 * q + 2]);
    }
    if (n < 2) {
        return;
    }
    if (entangle_range < 1 || entangle_range > n - 1) {
        throw ConfigError("entangle_range " + std::to_string(entangle_range) + " outside [1, " +
                          std::to_string(n - 1) + "]");
    }
    for (std::size_t q = 0; q < n; ++q) {
        state.apply_cnot(q, (q + entangle_range) % n);
    }
}

void apply_layers(QuantumState &state, const CircuitParams &params, std::size_t first,
                  std::size_t last) {
    params.validate();
    if (state.num_qubits() != params.n_qubits) {
        throw ShapeError("state and params disagree on qubit count");
    }
    if (first > last || last > params.n_layers) {
        throw IndexError("layer range [" + std::to_string(first) + ", " + std::to_string(last) +
                         ") invalid for " + std::to_string(params.n_layers) + " layers");
    }
    for (std::size_t l = first; l < last; ++l) {
        apply_sel_layer(state, params.layer(l), params.range_for_layer(l));
    }
}

ZExpectations run_circuit(std::span<const double> features, const CircuitParams &params) {
    params.validate();
    check_features(features, params);
    check_finite(params.thetas, "circuit angles");
    QuantumState s = angle_embed(features);
    apply_layers(s, params, 0, params.n_layers);
    return {s.expectations_z()};
}

std::vector<double> parameter_shift_grad(std::span<const double> features,
                                         const CircuitParams &params, std::size_t k) {
    if (k >= params.size()) {
        throw IndexError("rotation index " + std::to_string(k) + " out of range for " +
                         std::to_string(params.size()) + " angles");
    }
    CircuitParams shifted = params;
    shifted.thetas[k] = params.thetas[k] + kShift;
    const auto plus = run_circuit(features, shifted).z;
    shifted.thetas[k] = params.thetas[k] - kShift;
    const auto minus = run_circuit(features, shifted).z;
    std::vector<double> g(plus.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        g[j] = 0.5 * (plus[j] - minus[j]);
    }
    return g;
}

CircuitJacobian parameter_shift_jacobian(std::span<const double> features,
                                         const CircuitParams &params, std::size_t workers) {
    params.validate();
    check_features(features, params);
    const std::size_t n = params.n_qubits;
    const std::size_t P = params.size();
    CircuitJacobian jac;
    jac.n_outputs = n;
    jac.d_thetas.assign(n * P, 0.0);
    jac.d_features.assign(n * n, 0.0);
    const std::vector<double> base_features(features.begin(), features.end());

    parallel_for(P + n, workers, [&](std::size_t c) {
        if (c < P) {
            const auto g = parameter_shift_grad(base_features, params, c);
            for (std::size_t j = 0; j < n; ++j) {
                jac.d_thetas[j * P + c] = g[j];
            }
            return;
        }
        const std::size_t q = c - P;
        std::vector<double> f = base_features;
        f[q] = base_features[q] + kShift;
        const auto plus = run_circuit(f, params).z;
        f[q] = base_features[q] - kShift;
        const auto minus = run_circuit(f, params).z;
        for (std::size_t j = 0; j < n; ++j) {
            jac.d_features[j * n + q] = 0.5 * (plus[j] - minus[j]);
        }
    });
    return jac;
}

CircuitVjp parameter_shift_vjp(std::span<const double> features, const CircuitParams &params,
                               std::span<const double> weights, std::size_t workers) {
    if (weights.size() != params.n_qubits) {
        throw ShapeError("VJP weights must have one entry per qubit");
    }
    const auto jac = parameter_shift_jacobian(features, params, workers);
    const std::size_t n = params.n_qubits;
    const std::size_t P = params.size();
    CircuitVjp out;
    out.z = run_circuit(features, params).z;
    out.d_thetas.assign(P, 0.0);
    out.d_features.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < P; ++k) {
            out.d_thetas[k] += weights[j] * jac.d_thetas[j * P + k];
        }
        for (std::size_t q = 0; q < n; ++q) {
            out.d_features[q] += weights[j] * jac.d_features[j * n + q];
        }
    }
    return out;
}

CircuitVjp adjoint_vjp(std::span<const double> features, const CircuitParams &params,
                       std::span<const double> weights) {
    params.validate();
    check_features(features, params);
    check_finite(params.thetas, "circuit angles");
    const std::size_t n = params.n_qubits;
    if (weights.size() != n) {
        throw ShapeError("VJP weights must have one entry per qubit");
    }

    QuantumState phi = angle_embed(features);
    apply_layers(phi, params, 0, params.n_layers);

    CircuitVjp out;
    out.z = phi.expectations_z();
    out.d_thetas.assign(params.size(), 0.0);
    out.d_features.assign(n, 0.0);

    // lambda = O |psi> with O = sum_j w_j Z_j (diagonal).
    QuantumState lambda = phi;
    {
        auto amps = lambda.amplitudes();
        for (std::size_t i = 0; i < amps.size(); ++i) {
            double d = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                d += ((i >> j) & 1U) ? -weights[j] : weights[j];
            }
            amps[i] *= d;
        }
    }

    for (std::size_t l = params.n_layers; l-- > 0;) {
        const std::size_t r = params.range_for_layer(l);
        undo_cnot_ring(phi, n, r);
        undo_cnot_ring(lambda, n, r);
        const auto th = params.layer(l);
        for (std::size_t q = n; q-- > 0;) {
            const std::size_t base = CircuitParams::index(n, l, q, 0);
            // Rot = RZ(a), RY(b), RZ(c) in application order; unwind c, b, a.
            out.d_thetas[base + 2] = generator_overlap_z(lambda, phi, q);
            phi.apply_rz(q, -th[3 * q + 2]);
            lambda.apply_rz(q, -th[3 * q + 2]);
            out.d_thetas[base + 1] = generator_overlap_y(lambda, phi, q);
            phi.apply_ry(q, -th[3 * q + 1]);
            lambda.apply_ry(q, -th[3 * q + 1]);
            out.d_thetas[base] = generator_overlap_z(lambda, phi, q);
            phi.apply_rz(q, -th[3 * q]);
            lambda.apply_rz(q, -th[3 * q]);
        }
    }
    for (std::size_t q = n; q-- > 0;) {
        out.d_features[q] = generator_overlap_y(lambda, phi, q);
        phi.apply_ry(q, -features[q]);
        lambda.apply_ry(q, -features[q]);
    }
    return out;
}

} // namespace qcff::qsim
