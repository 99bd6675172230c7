#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qcff::qsim {

using Complex = std::complex<double>;
using Matrix2 = std::array<Complex, 4>; // row-major 2x2

Matrix2 ry_matrix(double theta);
Matrix2 rz_matrix(double theta);

/**
 * Dense n-qubit pure state.
 *
 * Amplitudes are stored little-endian: qubit 0 is the least significant bit
 * of the basis-state index, so amplitude i corresponds to |b_{n-1} ... b_0>.
 */
class QuantumState {
  public:
    static constexpr std::size_t kMaxQubits = 20;

    /// |0...0> on n qubits.
    explicit QuantumState(std::size_t n_qubits);

    std::size_t num_qubits() const { return n_qubits_; }
    std::size_t dimension() const { return amps_.size(); }
    std::span<const Complex> amplitudes() const { return amps_; }
    std::span<Complex> amplitudes() { return amps_; }

    void apply(std::size_t qubit, const Matrix2 &m);
    void apply_ry(std::size_t qubit, double theta);
    void apply_rz(std::size_t qubit, double theta);
    /// Rot(a, b, c): RZ(a) first, then RY(b), then RZ(c).
    void apply_rot(std::size_t qubit, double a, double b, double c);
    void apply_cnot(std::size_t control, std::size_t target);
    /// Multiplies by the Pauli generator of a rotation (Y or Z) on one qubit.
    void apply_pauli_y(std::size_t qubit);
    void apply_pauli_z(std::size_t qubit);

    double norm() const;
    double expectation_z(std::size_t qubit) const;
    std::vector<double> expectations_z() const;

    /// <this|other>
    Complex inner(const QuantumState &other) const;

  private:
    void check_qubit(std::size_t qubit) const;

    std::size_t n_qubits_;
    std::vector<Complex> amps_;
};

} // namespace qcff::qsim
