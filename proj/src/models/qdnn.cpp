#include "qcff/models/qdnn.hpp"

#include <cmath>
#include <random>
#include <string>

#include "qcff/errors.hpp"

namespace qcff::models {

double AngleInit::sigma_for_layer(std::size_t l) const {
    if (scheme == InitScheme::DepthScaled) {
        return sigma0 / std::sqrt(static_cast<double>(l + 1));
    }
    return sigma0;
}

QdnnSpec QdnnSpec::basic() {
    QdnnSpec s;
    s.pattern = qsim::EntanglerPattern::Cyclic;
    return s;
}

QdnnSpec QdnnSpec::full() {
    QdnnSpec s;
    s.pattern = qsim::EntanglerPattern::Fixed;
    s.entangle_range = 1;
    return s;
}

void QdnnSpec::validate() const {
    if (n_inputs == 0 || n_outputs == 0 || head_width == 0) {
        throw ConfigError("QDNN input, head and output widths must be positive");
    }
    if (n_qubits == 0 || n_qubits > qsim::QuantumState::kMaxQubits) {
        throw ConfigError("QDNN qubit count out of range");
    }
    if (n_qubits >= 2 && pattern == qsim::EntanglerPattern::Fixed &&
        (entangle_range < 1 || entangle_range > n_qubits - 1)) {
        throw ConfigError("QDNN entangle_range " + std::to_string(entangle_range) +
                          " outside [1, " + std::to_string(n_qubits - 1) + "]");
    }
}

Qdnn::Qdnn(QdnnSpec spec) : spec_(spec) {
    spec_.validate();
    const std::size_t ni = spec_.n_inputs;
    const std::size_t nq = spec_.n_qubits;
    const std::size_t hw = spec_.head_width;
    std::size_t off = 0;
    off_pre_w_ = off;
    off += nq * ni;
    off_pre_b_ = off;
    off += nq;
    off_theta_ = off;
    off += spec_.quantum_params();
    off_h1_w_ = off;
    off += hw * nq;
    off_h1_b_ = off;
    off += hw;
    off_h2_w_ = off;
    off += spec_.n_outputs * hw;
    off_h2_b_ = off;
    off += spec_.n_outputs;
    n_params_ = off;
}

void Qdnn::check(std::span<const double> params, std::span<const double> x) const {
    if (params.size() != n_params_) {
        throw ShapeError("QDNN expects " + std::to_string(n_params_) + " parameters, got " +
                         std::to_string(params.size()));
    }
    if (x.size() != spec_.n_inputs) {
        throw ShapeError("QDNN expects " + std::to_string(spec_.n_inputs) + " inputs, got " +
                         std::to_string(x.size()));
    }
}

std::vector<double> Qdnn::init_params(Rng &rng, const AngleInit &angles) const {
    std::vector<double> p(n_params_, 0.0);
    auto uniform_block = [&](std::size_t off, std::size_t count, std::size_t fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (std::size_t i = 0; i < count; ++i) {
            p[off + i] = u(rng);
        }
    };
    const std::size_t nq = spec_.n_qubits;
    uniform_block(off_pre_w_, nq * spec_.n_inputs + nq, spec_.n_inputs);
    for (std::size_t l = 0; l < spec_.n_layers; ++l) {
        std::normal_distribution<double> nd(0.0, angles.sigma_for_layer(l));
        for (std::size_t i = 0; i < nq * 3; ++i) {
            p[off_theta_ + l * nq * 3 + i] = nd(rng);
        }
    }
    uniform_block(off_h1_w_, spec_.head_width * nq + spec_.head_width, nq);
    uniform_block(off_h2_w_, spec_.n_outputs * spec_.head_width + spec_.n_outputs,
                  spec_.head_width);
    return p;
}

qsim::CircuitParams Qdnn::circuit(std::span<const double> params) const {
    auto c = qsim::CircuitParams::zeros(spec_.n_qubits, spec_.n_layers, spec_.entangle_range,
                                        spec_.pattern);
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(off_theta_), c.thetas.size(),
                c.thetas.begin());
    return c;
}

std::vector<double> Qdnn::embedding(std::span<const double> params,
                                    std::span<const double> x) const {
    check(params, x);
    const std::size_t ni = spec_.n_inputs;
    std::vector<double> h(spec_.n_qubits);
    for (std::size_t q = 0; q < spec_.n_qubits; ++q) {
        double s = params[off_pre_b_ + q];
        for (std::size_t i = 0; i < ni; ++i) {
            s += params[off_pre_w_ + q * ni + i] * x[i];
        }
        h[q] = s;
    }
    return h;
}

std::vector<double> Qdnn::forward(std::span<const double> params,
                                  std::span<const double> x) const {
    const auto h = embedding(params, x);
    const auto z = qsim::run_circuit(h, circuit(params)).z;
    const std::size_t nq = spec_.n_qubits;
    const std::size_t hw = spec_.head_width;
    std::vector<double> a(hw);
    for (std::size_t i = 0; i < hw; ++i) {
        double s = params[off_h1_b_ + i];
        for (std::size_t j = 0; j < nq; ++j) {
            s += params[off_h1_w_ + i * nq + j] * z[j];
        }
        a[i] = activate(spec_.head_activation, s);
    }
    std::vector<double> out(spec_.n_outputs);
    for (std::size_t o = 0; o < spec_.n_outputs; ++o) {
        double s = params[off_h2_b_ + o];
        for (std::size_t i = 0; i < hw; ++i) {
            s += params[off_h2_w_ + o * hw + i] * a[i];
        }
        out[o] = s;
    }
    return out;
}

std::vector<double> Qdnn::forward_backward(std::span<const double> params,
                                           std::span<const double> x,
                                           const OutputGradient &dloss, std::span<double> grad,
                                           CircuitGradient method, std::size_t workers) const {
    check(params, x);
    if (grad.size() != n_params_) {
        throw ShapeError("QDNN backward buffers have the wrong size");
    }
    const std::size_t ni = spec_.n_inputs;
    const std::size_t nq = spec_.n_qubits;
    const std::size_t hw = spec_.head_width;
    const std::size_t no = spec_.n_outputs;

    const auto h = embedding(params, x);
    const auto circ = circuit(params);
    const auto z = qsim::run_circuit(h, circ).z;

    std::vector<double> pre(hw);
    std::vector<double> a(hw);
    for (std::size_t i = 0; i < hw; ++i) {
        double s = params[off_h1_b_ + i];
        for (std::size_t j = 0; j < nq; ++j) {
            s += params[off_h1_w_ + i * nq + j] * z[j];
        }
        pre[i] = s;
        a[i] = activate(spec_.head_activation, s);
    }
    std::vector<double> out(no);
    for (std::size_t o = 0; o < no; ++o) {
        double s = params[off_h2_b_ + o];
        for (std::size_t i = 0; i < hw; ++i) {
            s += params[off_h2_w_ + o * hw + i] * a[i];
        }
        out[o] = s;
    }

    const std::vector<double> dout = dloss(out);
    if (dout.size() != no) {
        throw ShapeError("QDNN output gradient has the wrong size");
    }

    // Head backward.
    std::vector<double> da(hw, 0.0);
    for (std::size_t o = 0; o < no; ++o) {
        grad[off_h2_b_ + o] += dout[o];
        for (std::size_t i = 0; i < hw; ++i) {
            grad[off_h2_w_ + o * hw + i] += dout[o] * a[i];
            da[i] += dout[o] * params[off_h2_w_ + o * hw + i];
        }
    }
    std::vector<double> dz(nq, 0.0);
    for (std::size_t i = 0; i < hw; ++i) {
        const double dp = da[i] * activate_grad(spec_.head_activation, pre[i]);
        grad[off_h1_b_ + i] += dp;
        for (std::size_t j = 0; j < nq; ++j) {
            grad[off_h1_w_ + i * nq + j] += dp * z[j];
            dz[j] += dp * params[off_h1_w_ + i * nq + j];
        }
    }

    // Circuit backward.
    const auto vjp = method == CircuitGradient::Adjoint
                         ? qsim::adjoint_vjp(h, circ, dz)
                         : qsim::parameter_shift_vjp(h, circ, dz, workers);
    for (std::size_t k = 0; k < vjp.d_thetas.size(); ++k) {
        grad[off_theta_ + k] += vjp.d_thetas[k];
    }
    for (std::size_t q = 0; q < nq; ++q) {
        const double dh = vjp.d_features[q];
        grad[off_pre_b_ + q] += dh;
        for (std::size_t i = 0; i < ni; ++i) {
            grad[off_pre_w_ + q * ni + i] += dh * x[i];
        }
    }
    return out;
}

} // namespace qcff::models
