#include "qcff/physics/forward_model.hpp"

#include <cmath>
#include <sstream>

#include "qcff/errors.hpp"

namespace qcff::physics {

namespace {

constexpr double kMinPropagatorProduct = 1e-12;

double cos_series(std::span<const double> c, double phi_rad) {
    double sum = 0.0;
    for (std::size_t n = 0; n < c.size(); ++n) {
        sum += c[n] * std::cos(static_cast<double>(n) * phi_rad);
    }
    return sum;
}

LeptonPropagators checked_propagators(const Kinematics &kin, double phi_rad) {
    const auto p = lepton_propagators(kin, phi_rad);
    // Physical region: P1 < 0 < P2, so the product keeps a fixed negative sign.
    if (!(p.P1 * p.P2 < -kMinPropagatorProduct)) {
        std::ostringstream os;
        os << "lepton propagator product P1*P2=" << p.P1 * p.P2 << " not negative at phi="
           << phi_rad / kDegToRad << " deg";
        throw SingularityError(os.str());
    }
    return p;
}

} // namespace

double cross_section_prefactor(const Kinematics &kin, const PhysicsConstants &constants) {
    const double a = constants.alpha_em;
    return a * a * a * kin.xB * kin.y * kin.y /
           (8.0 * kPi * kin.Q2 * kin.Q2 * kin.sqrt_1pe2) * constants.gev2_to_nb;
}

HarmonicCoefficients harmonic_coefficients(const Kinematics &kin, const FormFactors &ff,
                                           const CFFSet &cffs, double phi_rad) {
    HarmonicCoefficients h;
    const auto p = checked_propagators(kin, phi_rad);
    h.P1 = p.P1;
    h.P2 = p.P2;
    h.c_bh = bh_harmonics(kin, ff);
    const auto comb = cff_combinations(kin, ff, cffs.ReH, cffs.ReE, cffs.ReHt);
    h.C_I = comb.C_I;
    h.C_IV = comb.C_IV;
    h.C_IA = comb.C_IA;
    const auto ic = interference_coefficients(kin);
    for (std::size_t n = 0; n < 4; ++n) {
        h.c_int[n] = ic.c[n] * comb.C_I + ic.c_v[n] * comb.C_IV + ic.c_a[n] * comb.C_IA;
    }
    return h;
}

double bh_term(const Kinematics &kin, const FormFactors &ff, double phi_rad,
               const PhysicsConstants &constants) {
    const auto p = checked_propagators(kin, phi_rad);
    const auto c = bh_harmonics(kin, ff);
    const double x = kin.xB;
    const double y = kin.y;
    const double one_pe2 = 1.0 + kin.eps2;
    const double amp2 =
        cos_series(c, phi_rad) / (x * x * y * y * one_pe2 * one_pe2 * kin.t * p.P1 * p.P2);
    return cross_section_prefactor(kin, constants) * amp2;
}

double interference_term(const Kinematics &kin, const FormFactors &ff, const CFFSet &cffs,
                         double phi_rad, const PhysicsConstants &constants) {
    const auto h = harmonic_coefficients(kin, ff, cffs, phi_rad);
    const double y = kin.y;
    const double amp2 = cos_series(h.c_int, phi_rad) / (kin.xB * y * y * y * kin.t * h.P1 * h.P2);
    return cross_section_prefactor(kin, constants) * amp2;
}

double forward_model(const Kinematics &kin, const FormFactors &ff, const CFFSet &cffs,
                     double phi_rad, const PhysicsConstants &constants) {
    return bh_term(kin, ff, phi_rad, constants) +
           interference_term(kin, ff, cffs, phi_rad, constants) + cffs.dvcs;
}

CrossSectionResponse::CrossSectionResponse(const Kinematics &kin, const FormFactors &ff,
                                           std::span<const double> phis_rad,
                                           const PhysicsConstants &constants) {
    bh_.reserve(phis_rad.size());
    slope_.reserve(phis_rad.size());
    for (double phi : phis_rad) {
        bh_.push_back(bh_term(kin, ff, phi, constants));
        std::array<double, 4> s{};
        s[0] = interference_term(kin, ff, {1.0, 0.0, 0.0, 0.0}, phi, constants);
        s[1] = interference_term(kin, ff, {0.0, 1.0, 0.0, 0.0}, phi, constants);
        s[2] = interference_term(kin, ff, {0.0, 0.0, 1.0, 0.0}, phi, constants);
        s[3] = 1.0;
        slope_.push_back(s);
    }
}

double CrossSectionResponse::predict(std::size_t i, const CFFSet &cffs) const {
    const auto &s = slope_[i];
    return bh_[i] + s[0] * cffs.ReH + s[1] * cffs.ReE + s[2] * cffs.ReHt + s[3] * cffs.dvcs;
}

std::vector<double> CrossSectionResponse::predict(const CFFSet &cffs) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) {
        out[i] = predict(i, cffs);
    }
    return out;
}

} // namespace qcff::physics
