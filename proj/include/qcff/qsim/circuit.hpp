#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qcff/qsim/state.hpp"

namespace qcff::qsim {

/// How the CNOT ring offset varies with depth.
enum class EntanglerPattern {
    Fixed,  // every layer uses entangle_range
    Cyclic, // layer l uses (l mod (n-1)) + 1
};

/**
 * Angles for L strongly entangling layers on n qubits.
 *
 * thetas is flat with index ((l * n) + q) * 3 + j, j selecting the three
 * Euler angles of Rot on qubit q in layer l.
 */
struct CircuitParams {
    std::size_t n_qubits = 0;
    std::size_t n_layers = 0;
    std::size_t entangle_range = 1;
    EntanglerPattern pattern = EntanglerPattern::Fixed;
    std::vector<double> thetas;

    static CircuitParams zeros(std::size_t n_qubits, std::size_t n_layers,
                               std::size_t entangle_range = 1,
                               EntanglerPattern pattern = EntanglerPattern::Fixed);

    std::size_t size() const { return thetas.size(); }
    static std::size_t index(std::size_t n_qubits, std::size_t layer, std::size_t qubit,
                             std::size_t j) {
        return (layer * n_qubits + qubit) * 3 + j;
    }
    std::span<const double> layer(std::size_t l) const;

    /// Ring offset used by layer l.
    std::size_t range_for_layer(std::size_t l) const;

    /// Throws ShapeError or ConfigError on inconsistent fields.
    void validate() const;
};

struct ZExpectations {
    std::vector<double> z;
};

/// One RY(feature_j) per qubit on |0...0>.
QuantumState angle_embed(std::span<const double> features);

/// Rot on every qubit, then CNOT(q, (q + r) mod n) for q = 0..n-1.
/// The CNOT ring is skipped for a single qubit.
void apply_sel_layer(QuantumState &state, std::span<const double> layer_thetas,
                     std::size_t entangle_range);

/// Applies layers [first, last) of params to state in place.
void apply_layers(QuantumState &state, const CircuitParams &params, std::size_t first,
                  std::size_t last);

ZExpectations run_circuit(std::span<const double> features, const CircuitParams &params);

/// d z / d theta_k by the two-term shift rule with shifts of +-pi/2.
std::vector<double> parameter_shift_grad(std::span<const double> features,
                                         const CircuitParams &params, std::size_t k);

/// Full Jacobians by the shift rule. Row j holds d z_j; angle columns follow
/// the flat theta index, feature columns the qubit index.
struct CircuitJacobian {
    std::size_t n_outputs = 0;
    std::vector<double> d_thetas;   // n_outputs x params.size()
    std::vector<double> d_features; // n_outputs x n_qubits
};

CircuitJacobian parameter_shift_jacobian(std::span<const double> features,
                                         const CircuitParams &params, std::size_t workers = 1);

/// Vector-Jacobian product  sum_j w_j d z_j  for all angles and features.
struct CircuitVjp {
    std::vector<double> z;
    std::vector<double> d_thetas;
    std::vector<double> d_features;
};

/// Shift-rule VJP built from parameter_shift_jacobian.
CircuitVjp parameter_shift_vjp(std::span<const double> features, const CircuitParams &params,
                               std::span<const double> weights, std::size_t workers = 1);

/// Same quantity by adjoint differentiation: one forward pass, one backward
/// sweep, O(P) gate applications instead of O(P^2).
CircuitVjp adjoint_vjp(std::span<const double> features, const CircuitParams &params,
                       std::span<const double> weights);

} // namespace qcff::qsim
