#pragma once

#include <array>

#include "qcff/physics/form_factors.hpp"
#include "qcff/physics/kinematics.hpp"

// Unpolarised twist-2 BKM helicity-amplitude coefficients.
//
// BH harmonics follow Belitsky, Mueller, Kirchner, NPB 629 (2002) 323; the
// helicity-conserving interference coefficients C^n_{++}, C^{V,n}_{++},
// C^{A,n}_{++} are the BKM10 unpolarised-target set.
//
// The BKM papers define the azimuth as phi_BKM = pi - phi_Trento. Everything
// returned here is already converted to the Trento angle, i.e. the n-th
// harmonic carries an extra factor (-1)^n so that the series reads
// sum_n c_n cos(n phi_Trento).

namespace qcff::physics {

struct LeptonPropagators {
    double P1 = 0.0;
    double P2 = 0.0;
};

/// BH lepton propagators P1(phi), P2(phi) at Trento angle phi (radians).
LeptonPropagators lepton_propagators(const Kinematics &kin, double phi_rad);

/// c^BH_n, n = 0..2 (Trento convention).
std::array<double, 3> bh_harmonics(const Kinematics &kin, const FormFactors &ff);

/// Kinematic interference coefficients, n = 0..3 (Trento convention).
struct InterferenceCoefficients {
    std::array<double, 4> c{};   // C^n_{++}
    std::array<double, 4> c_v{}; // C^{V,n}_{++}
    std::array<double, 4> c_a{}; // C^{A,n}_{++}
};

InterferenceCoefficients interference_coefficients(const Kinematics &kin);

/// Linear CFF combinations entering the interference.
struct CffCombinations {
    double C_I = 0.0;
    double C_IV = 0.0;
    double C_IA = 0.0;
};

CffCombinations cff_combinations(const Kinematics &kin, const FormFactors &ff, double ReH,
                                 double ReE, double ReHt);

} // namespace qcff::physics
