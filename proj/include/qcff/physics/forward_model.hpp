#pragma once

#include <array>
#include <span>
#include <vector>

#include "qcff/physics/bkm_coefficients.hpp"
#include "qcff/physics/constants.hpp"
#include "qcff/physics/form_factors.hpp"
#include "qcff/physics/kinematics.hpp"

namespace qcff::physics {

/// The four fit targets at one kinematic bin. dvcs is the phi-independent
/// DVCS^2 contribution, expressed in the same units as the cross section
/// (nb/GeV^4), i.e. defined after the cross-section prefactor.
struct CFFSet {
    double ReH = 0.0;
    double ReE = 0.0;
    double ReHt = 0.0;
    double dvcs = 0.0;

    static constexpr std::size_t size() { return 4; }
    std::array<double, 4> to_array() const { return {ReH, ReE, ReHt, dvcs}; }
    static CFFSet from_array(std::span<const double> v) { return {v[0], v[1], v[2], v[3]}; }
    double operator[](std::size_t i) const { return to_array()[i]; }
    double &operator[](std::size_t i) {
        switch (i) {
        case 0: return ReH;
        case 1: return ReE;
        case 2: return ReHt;
        default: return dvcs;
        }
    }
    bool operator==(const CFFSet &) const = default;
};

inline constexpr std::array<const char *, 4> kCffNames{"ReH", "ReE", "ReHt", "DVCS"};

/// Everything needed to reconstruct F(phi) at one angle.
struct HarmonicCoefficients {
    std::array<double, 3> c_bh{};  // BH Fourier coefficients (Trento cos(n phi))
    std::array<double, 4> c_int{}; // interference Fourier coefficients
    double P1 = 0.0;
    double P2 = 0.0;
    double C_I = 0.0;
    double C_IV = 0.0;
    double C_IA = 0.0;
};

/// alpha^3 xB y^2 / (8 pi Q^4 sqrt(1+eps2)) times the GeV^-2 -> nb conversion.
double cross_section_prefactor(const Kinematics &kin,
                               const PhysicsConstants &constants = kDefaultConstants);

/// Throws SingularityError when P1(phi) P2(phi) vanishes or leaves its
/// physical (negative) sign.
HarmonicCoefficients harmonic_coefficients(const Kinematics &kin, const FormFactors &ff,
                                           const CFFSet &cffs, double phi_rad);

// All three terms return nb/GeV^4 and take the Trento angle in radians.
double bh_term(const Kinematics &kin, const FormFactors &ff, double phi_rad,
               const PhysicsConstants &constants = kDefaultConstants);

double interference_term(const Kinematics &kin, const FormFactors &ff, const CFFSet &cffs,
                         double phi_rad, const PhysicsConstants &constants = kDefaultConstants);

/// F_pred = BH + interference + dvcs.
double forward_model(const Kinematics &kin, const FormFactors &ff, const CFFSet &cffs,
                     double phi_rad, const PhysicsConstants &constants = kDefaultConstants);

/// Affine decomposition of F_pred on a fixed phi grid:
///   F_i(cffs) = bh_i + sum_c slope_i[c] * cffs[c].
/// The map is exactly affine, so the slopes are the interference evaluated
/// at unit CFFs (plus 1 for the DVCS constant). Training evaluates this
/// instead of re-deriving the BKM coefficients every epoch.
class CrossSectionResponse {
  public:
    CrossSectionResponse() = default;
    CrossSectionResponse(const Kinematics &kin, const FormFactors &ff,
                         std::span<const double> phis_rad,
                         const PhysicsConstants &constants = kDefaultConstants);

    std::size_t size() const { return bh_.size(); }
    double bh(std::size_t i) const { return bh_[i]; }
    const std::array<double, 4> &slope(std::size_t i) const { return slope_[i]; }

    double predict(std::size_t i, const CFFSet &cffs) const;
    std::vector<double> predict(const CFFSet &cffs) const;

  private:
    std::vector<double> bh_;
    std::vector<std::array<double, 4>> slope_;
};

} // namespace qcff::physics
