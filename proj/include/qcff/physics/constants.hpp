#pragma once

namespace qcff::physics {

/// Physical constants shared by every cross-section evaluation.
struct PhysicsConstants {
    double proton_mass = 0.938272;  // GeV
    double alpha_em = 1.0 / 137.036;
    double kappa_p = 1.79285;       // proton anomalous magnetic moment
    double gev2_to_nb = 0.389379e6; // hbar^2 c^2 in nb GeV^2
};

inline constexpr PhysicsConstants kDefaultConstants{};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;

} // namespace qcff::physics
