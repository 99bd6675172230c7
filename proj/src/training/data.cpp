#include "qcff/training/data.hpp"

#include <cmath>
#include <string>

#include "qcff/errors.hpp"

namespace qcff::training {

std::vector<double> KinematicBin::phis_rad() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto &p : points) {
        out.push_back(p.phi_deg * physics::kDegToRad);
    }
    return out;
}

std::vector<double> KinematicBin::F() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto &p : points) {
        out.push_back(p.F);
    }
    return out;
}

std::vector<double> KinematicBin::sigmas() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto &p : points) {
        out.push_back(p.sigma_F);
    }
    return out;
}

void KinematicBin::validate() const {
    const std::string where = "set " + std::to_string(set_id);
    if (points.size() < 4) {
        throw DegenerateDataError(where + ": a 4-parameter local fit needs at least 4 phi points, got " +
                                  std::to_string(points.size()));
    }
    for (double v : {k, Q2, xB, t}) {
        if (!std::isfinite(v)) {
            throw DomainError(where + ": non-finite kinematics");
        }
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto &p = points[i];
        if (!std::isfinite(p.phi_deg) || !std::isfinite(p.F) || !std::isfinite(p.sigma_F)) {
            throw DomainError(where + ", point " + std::to_string(i) + ": non-finite value");
        }
        if (p.sigma_F <= 0.0) {
            throw DomainError(where + ", point " + std::to_string(i) + ": sigma_F must be > 0");
        }
        if (p.phi_deg < 0.0 || p.phi_deg >= 360.0) {
            throw DomainError(where + ", point " + std::to_string(i) + ": phi outside [0, 360)");
        }
    }
}

physics::Kinematics KinematicBin::kinematics(const physics::KinematicCuts &cuts) const {
    return physics::derive_kinematics(k, Q2, xB, t, physics::kDefaultConstants, cuts);
}

physics::CrossSectionResponse KinematicBin::response(const physics::KinematicCuts &cuts) const {
    const auto kin = kinematics(cuts);
    const auto ff = physics::kelly_form_factors(t);
    const auto phis = phis_rad();
    return physics::CrossSectionResponse(kin, ff, phis);
}

} // namespace qcff::training
