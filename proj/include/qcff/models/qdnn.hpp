#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qcff/models/activation.hpp"
#include "qcff/qsim/circuit.hpp"
#include "qcff/util/rng.hpp"

namespace qcff::models {

enum class CircuitGradient { ParameterShift, Adjoint };

enum class InitScheme { SmallAngle, DepthScaled };

/// Gaussian initialisation of circuit angles. DepthScaled uses
/// sigma0 / sqrt(l + 1) for layer l; SmallAngle uses sigma0 everywhere.
struct AngleInit {
    InitScheme scheme = InitScheme::SmallAngle;
    double sigma0 = 0.1;

    double sigma_for_layer(std::size_t l) const;
    static AngleInit small_angle(double sigma0 = 0.1) { return {InitScheme::SmallAngle, sigma0}; }
    static AngleInit depth_scaled(double sigma0 = 0.3) { return {InitScheme::DepthScaled, sigma0}; }
};

/// pre-affine (n_inputs -> n_qubits), RY embedding, SEL stack, Z readout,
/// head (n_qubits -> head_width, activation, -> n_outputs).
struct QdnnSpec {
    std::size_t n_inputs = 3;
    std::size_t n_qubits = 6;
    std::size_t n_layers = 8;
    std::size_t entangle_range = 1;
    qsim::EntanglerPattern pattern = qsim::EntanglerPattern::Fixed;
    std::size_t head_width = 64;
    std::size_t n_outputs = 4;
    Activation head_activation = Activation::Tanh;

    /// Cyclic entangler ranges.
    static QdnnSpec basic();
    /// Nearest-neighbour entanglers.
    static QdnnSpec full();

    std::size_t quantum_params() const { return n_layers * n_qubits * 3; }
    void validate() const;
};

/// Flat layout: pre W (n_qubits x n_inputs, row-major), pre b, circuit angles
/// (CircuitParams order), head W1, b1, head W2, b2.
class Qdnn {
  public:
    explicit Qdnn(QdnnSpec spec);

    const QdnnSpec &spec() const { return spec_; }
    std::size_t num_params() const { return n_params_; }
    std::size_t theta_offset() const { return off_theta_; }
    std::size_t theta_count() const { return spec_.quantum_params(); }

    std::vector<double> init_params(Rng &rng, const AngleInit &angles) const;

    qsim::CircuitParams circuit(std::span<const double> params) const;

    /// Pre-affine outputs used as embedding angles.
    std::vector<double> embedding(std::span<const double> params, std::span<const double> x) const;

    std::vector<double> forward(std::span<const double> params, std::span<const double> x) const;

    /// Returns the outputs and accumulates dLoss/dparams; dloss maps the
    /// outputs to dLoss/dout.
    using OutputGradient = std::function<std::vector<double>(std::span<const double>)>;
    std::vector<double> forward_backward(std::span<const double> params, std::span<const double> x,
                                         const OutputGradient &dloss, std::span<double> grad,
                                         CircuitGradient method = CircuitGradient::ParameterShift,
                                         std::size_t workers = 1) const;

  private:
    void check(std::span<const double> params, std::span<const double> x) const;

    QdnnSpec spec_;
    std::size_t off_pre_w_ = 0, off_pre_b_ = 0, off_theta_ = 0;
    std::size_t off_h1_w_ = 0, off_h1_b_ = 0, off_h2_w_ = 0, off_h2_b_ = 0;
    std::size_t n_params_ = 0;
};

} // namespace qcff::models
