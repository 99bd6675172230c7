#include "qcff/qsim/state.hpp"

#include <cmath>
#include <string>

#include "qcff/errors.hpp"

namespace qcff::qsim {

Matrix2 ry_matrix(double theta) {
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    return {Complex{c, 0.0}, Complex{-s, 0.0}, Complex{s, 0.0}, Complex{c, 0.0}};
}

Matrix2 rz_matrix(double theta) {
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    return {Complex{c, -s}, Complex{0.0, 0.0}, Complex{0.0, 0.0}, Complex{c, s}};
}

QuantumState::QuantumState(std::size_t n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits == 0 || n_qubits > kMaxQubits) {
        throw ShapeError("QuantumState supports 1.." + std::to_string(kMaxQubits) +
                         " qubits, got " + std::to_string(n_qubits));
    }
    amps_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
    amps_[0] = Complex{1.0, 0.0};
}

void QuantumState::check_qubit(std::size_t qubit) const {
    if (qubit >= n_qubits_) {
        throw IndexError("qubit index " + std::to_string(qubit) + " out of range for " +
                         std::to_string(n_qubits_) + " qubits");
    }
}

void QuantumState::apply(std::size_t qubit, const Matrix2 &m) {
    check_qubit(qubit);
    const std::size_t stride = std::size_t{1} << qubit;
    const std::size_t dim = amps_.size();
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const Complex a0 = amps_[i];
            const Complex a1 = amps_[i + stride];
            amps_[i] = m[0] * a0 + m[1] * a1;
            amps_[i + stride] = m[2] * a0 + m[3] * a1;
        }
    }
}

void QuantumState::apply_ry(std::size_t qubit, double theta) {
    check_qubit(qubit);
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    const std::size_t stride = std::size_t{1} << qubit;
    const std::size_t dim = amps_.size();
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const Complex a0 = amps_[i];
            const Complex a1 = amps_[i + stride];
            amps_[i] = c * a0 - s * a1;
            amps_[i + stride] = s * a0 + c * a1;
        }
    }
}

void QuantumState::apply_rz(std::size_t qubit, double theta) {
    check_qubit(qubit);
    const Complex lo = std::polar(1.0, -theta / 2.0);
    const Complex hi = std::polar(1.0, theta / 2.0);
    const std::size_t mask = std::size_t{1} << qubit;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        amps_[i] *= (i & mask) ? hi : lo;
    }
}

void QuantumState::apply_rot(std::size_t qubit, double a, double b, double c) {
    apply_rz(qubit, a);
    apply_ry(qubit, b);
    apply_rz(qubit, c);
}

void QuantumState::apply_cnot(std::size_t control, std::size_t target) {
    check_qubit(control);
    check_qubit(target);
    if (control == target) {
        throw IndexError("CNOT control and target must differ");
    }
    const std::size_t cmask = std::size_t{1} << control;
    const std::size_t tmask = std::size_t{1} << target;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if ((i & cmask) && !(i & tmask)) {
            std::swap(amps_[i], amps_[i | tmask]);
        }
    }
}

void QuantumState::apply_pauli_y(std::size_t qubit) {
    check_qubit(qubit);
    const std::size_t mask = std::size_t{1} << qubit;
    const Complex I{0.0, 1.0};
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (!(i & mask)) {
            const Complex a0 = amps_[i];
            const Complex a1 = amps_[i | mask];
            amps_[i] = -I * a1;
            amps_[i | mask] = I * a0;
        }
    }
}

void QuantumState::apply_pauli_z(std::size_t qubit) {
    check_qubit(qubit);
    const std::size_t mask = std::size_t{1} << qubit;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (i & mask) {
            amps_[i] = -amps_[i];
        }
    }
}

double QuantumState::norm() const {
    double sum = 0.0;
    for (const auto &a : amps_) {
        sum += std::norm(a);
    }
    return std::sqrt(sum);
}

double QuantumState::expectation_z(std::size_t qubit) const {
    check_qubit(qubit);
    const std::size_t mask = std::size_t{1} << qubit;
    double z = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        z += (i & mask) ? -std::norm(amps_[i]) : std::norm(amps_[i]);
    }
    return z;
}

std::vector<double> QuantumState::expectations_z() const {
    std::vector<double> z(n_qubits_, 0.0);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        const double p = std::norm(amps_[i]);
        for (std::size_t q = 0; q < n_qubits_; ++q) {
            z[q] += ((i >> q) & 1U) ? -p : p;
        }
    }
    return z;
}

Complex QuantumState::inner(const QuantumState &other) const {
    if (other.amps_.size() != amps_.size()) {
        throw ShapeError("inner product of states with different dimensions");
    }
    Complex sum{0.0, 0.0};
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        sum += std::conj(amps_[i]) * other.amps_[i];
    }
    return sum;
}

} // namespace qcff::qsim
