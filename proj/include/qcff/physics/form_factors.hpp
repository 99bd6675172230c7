#pragma once

#include "qcff/physics/constants.hpp"

namespace qcff::physics {

/// Dirac and Pauli elastic proton form factors at a given t.
struct FormFactors {
    double F1 = 0.0;
    double F2 = 0.0;
};

/// Kelly rational parametrisation of G_E and G_M/mu_p, converted to F1/F2.
/// Requires t <= 0; throws DomainError otherwise.
FormFactors kelly_form_factors(double t, const PhysicsConstants &constants = kDefaultConstants);

} // namespace qcff::physics
