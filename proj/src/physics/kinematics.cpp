#include "qcff/physics/kinematics.hpp"

#include <cmath>
#include <sstream>

#include "qcff/errors.hpp"

namespace qcff::physics {

namespace {

[[noreturn]] void fail(const std::string &what, double k, double Q2, double xB, double t) {
    std::ostringstream os;
    os << what << " (k=" << k << ", Q2=" << Q2 << ", xB=" << xB << ", t=" << t << ")";
    throw DomainError(os.str());
}

} // namespace

Kinematics derive_kinematics(double k, double Q2, double xB, double t,
                             const PhysicsConstants &constants, const KinematicCuts &cuts) {
    if (!(std::isfinite(k) && std::isfinite(Q2) && std::isfinite(xB) && std::isfinite(t))) {
        fail("non-finite kinematics", k, Q2, xB, t);
    }
    if (!(k > 0.0)) {
        fail("beam energy must be positive", k, Q2, xB, t);
    }
    if (!(Q2 > 0.0)) {
        fail("Q2 must be positive", k, Q2, xB, t);
    }
    if (!(xB > 0.0 && xB < 1.0)) {
        fail("xB must lie in (0,1)", k, Q2, xB, t);
    }
    if (!(t < 0.0)) {
        fail("t must be negative", k, Q2, xB, t);
    }

    Kinematics kin;
    kin.k = k;
    kin.Q2 = Q2;
    kin.xB = xB;
    kin.t = t;

    const double M = constants.proton_mass;
    kin.M2 = M * M;
    kin.y = Q2 / (2.0 * M * k * xB);
    kin.eps2 = 4.0 * xB * xB * kin.M2 / Q2;
    kin.xi = xB / (2.0 - xB);
    kin.sqrt_1pe2 = std::sqrt(1.0 + kin.eps2);

    if (!(kin.y > 0.0 && kin.y < 1.0)) {
        fail("derived y outside (0,1)", k, Q2, xB, t);
    }
    if (cuts.enforce) {
        if (!(Q2 > cuts.min_Q2)) {
            fail("fails twist-2 cut Q2 > 1.5 GeV^2", k, Q2, xB, t);
        }
        if (!(std::abs(t) / Q2 <= cuts.max_abs_t_over_Q2)) {
            fail("fails twist-2 cut |t|/Q2 <= 0.25", k, Q2, xB, t);
        }
    }

    const double eps2 = kin.eps2;
    kin.t_min = -Q2 * (2.0 * (1.0 - xB) * (1.0 - kin.sqrt_1pe2) + eps2) /
                (4.0 * xB * (1.0 - xB) + eps2);
    if (!(t < kin.t_min)) {
        fail("t above kinematic limit t_min", k, Q2, xB, t);
    }

    kin.ell = 1.0 - kin.y - kin.y * kin.y * eps2 / 4.0;
    if (!(kin.ell > 0.0)) {
        fail("outside physical region (1 - y - y^2 eps2/4 <= 0)", k, Q2, xB, t);
    }

    const double tp = t - kin.t_min; // t' <= 0
    kin.Ktilde2 = (kin.t_min - t) *
                  ((1.0 - xB) * kin.sqrt_1pe2 + tp * (eps2 + 4.0 * xB * (1.0 - xB)) / (4.0 * Q2));
    kin.K2 = kin.ell * kin.Ktilde2 / Q2;
    if (!(kin.K2 >= 0.0)) {
        fail("negative kinematic factor K^2", k, Q2, xB, t);
    }
    kin.K = std::sqrt(kin.K2);
    return kin;
}

} // namespace qcff::physics
