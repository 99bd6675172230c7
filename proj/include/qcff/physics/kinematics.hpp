#pragma once

#include "qcff/physics/constants.hpp"

namespace qcff::physics {

/// One (k, Q2, xB, t) setting with every derived quantity the forward model
/// needs. Construct through derive_kinematics().
struct Kinematics {
    double k = 0.0;  // beam energy, GeV
    double Q2 = 0.0; // GeV^2
    double xB = 0.0;
    double t = 0.0;  // GeV^2, negative

    double y = 0.0;    // lepton energy fraction
    double eps2 = 0.0; // 4 xB^2 M^2 / Q2
    double xi = 0.0;   // xB / (2 - xB)

    // Quantities of the BKM helicity-amplitude coefficients.
    double sqrt_1pe2 = 0.0; // sqrt(1 + eps2)
    double t_min = 0.0;     // kinematic boundary, t <= t_min
    double K2 = 0.0;        // kinematic factor K^2 (phi-harmonic suppression)
    double K = 0.0;
    double Ktilde2 = 0.0;   // Ktilde^2 = Q2 K^2 / (1 - y - y^2 eps2 / 4)
    double ell = 0.0;       // 1 - y - y^2 eps2 / 4
    double M2 = 0.0;        // proton mass squared
};

struct KinematicCuts {
    bool enforce = false;
    double min_Q2 = 1.5;         // GeV^2, strict
    double max_abs_t_over_Q2 = 0.25;
};

/// Validates raw inputs and fills the derived quantities; y = Q2/(2 M k xB).
/// Throws DomainError for invalid or unphysical kinematics (y outside (0,1),
/// t above t_min, or failing the twist-2 cuts when cuts.enforce is set).
Kinematics derive_kinematics(double k, double Q2, double xB, double t,
                             const PhysicsConstants &constants = kDefaultConstants,
                             const KinematicCuts &cuts = {});

} // namespace qcff::physics
