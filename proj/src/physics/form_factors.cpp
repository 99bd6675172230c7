#include "qcff/physics/form_factors.hpp"

#include <array>
#include <cmath>

#include "qcff/errors.hpp"

namespace qcff::physics {

namespace {

// G(tau) = sum_k a_k tau^k / (1 + sum_k b_k tau^k), J.J. Kelly, PRC 70 068202.
struct KellyFit {
    std::array<double, 2> a;
    std::array<double, 3> b;

    double operator()(double tau) const {
        const double num = a[0] + a[1] * tau;
        const double den = 1.0 + tau * (b[0] + tau * (b[1] + tau * b[2]));
        return num / den;
    }
};

constexpr KellyFit kElectric{{1.0, -0.24}, {10.98, 12.82, 21.97}};
constexpr KellyFit kMagnetic{{1.0, 0.12}, {10.97, 18.86, 6.55}};

} // namespace

FormFactors kelly_form_factors(double t, const PhysicsConstants &constants) {
    if (!(t <= 0.0) || !std::isfinite(t)) {
        throw DomainError("kelly_form_factors requires finite t <= 0");
    }
    const double M = constants.proton_mass;
    const double tau = -t / (4.0 * M * M);
    const double mu_p = 1.0 + constants.kappa_p;
    const double GE = kElectric(tau);
    const double GM = mu_p * kMagnetic(tau);

    FormFactors ff;
    ff.F1 = (GE + tau * GM) / (1.0 + tau);
    ff.F2 = (GM - GE) / (1.0 + tau);
    return ff;
}

} // namespace qcff::physics
