#pragma once

#include <cmath>

#include "qcff/physics/forward_model.hpp"
#include "qcff/training/data.hpp"

namespace qcff::testing {

// Generator truth written out by hand so tests do not depend on the
// pseudodata module.
inline double generator_by_hand(double a, double b, double c, double d, double e, double f,
                                double xB, double t) {
    return (a * xB * xB + b * xB) * std::exp(c * t * t + d * t + e) + f;
}

inline physics::CFFSet table_basic_truth(double xB, double t) {
    return {generator_by_hand(-4.41, 1.68, -9.14, -3.57, 1.54, -1.37, xB, t),
            generator_by_hand(144.56, 149.99, 0.32, -1.09, -148.49, -0.31, xB, t),
            generator_by_hand(-1.86, 1.50, -0.29, -1.33, 0.46, -0.98, xB, t),
            generator_by_hand(0.50, -0.41, 0.05, -0.25, 0.55, 0.166, xB, t)};
}

/// Noise-free bin on a uniform phi grid with sigma = rel_sigma * F.
inline training::KinematicBin truth_bin(double k, double Q2, double xB, double t,
                                        const physics::CFFSet &cffs, int n_phi = 24,
                                        double rel_sigma = 0.05, std::int64_t set_id = 144) {
    training::KinematicBin bin{set_id, k, Q2, xB, t, {}};
    const auto kin = physics::derive_kinematics(k, Q2, xB, t);
    const auto ff = physics::kelly_form_factors(t);
    for (int i = 0; i < n_phi; ++i) {
        const double phi = (i + 0.5) * 360.0 / n_phi;
        const double F = physics::forward_model(kin, ff, cffs, phi * physics::kDegToRad);
        bin.points.push_back({phi, F, rel_sigma * F});
    }
    return bin;
}

/// Set 144 kinematics with the basic generator truth.
inline training::KinematicBin set144_bin(int n_phi = 24) {
    return truth_bin(5.75, 2.22, 0.333, -0.16, table_basic_truth(0.333, -0.16), n_phi);
}

} // namespace qcff::testing
