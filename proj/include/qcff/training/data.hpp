#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qcff/physics/forward_model.hpp"

namespace qcff::training {

struct DataPoint {
    double phi_deg = 0.0;
    double F = 0.0;       // nb/GeV^4
    double sigma_F = 0.0; // same units, > 0
};

/// One (k, Q2, xB, t) setting with its phi points.
struct KinematicBin {
    std::int64_t set_id = 0;
    double k = 0.0;
    double Q2 = 0.0;
    double xB = 0.0;
    double t = 0.0;
    std::vector<DataPoint> points;

    /// Model inputs (xB, Q2, t).
    std::array<double, 3> inputs() const { return {xB, Q2, t}; }
    std::vector<double> phis_rad() const;
    std::vector<double> F() const;
    std::vector<double> sigmas() const;

    /// Throws DataError subclasses: fewer than 4 points, sigma_F <= 0,
    /// phi outside [0, 360), or non-finite values.
    void validate() const;

    physics::Kinematics kinematics(const physics::KinematicCuts &cuts = {}) const;
    physics::CrossSectionResponse response(const physics::KinematicCuts &cuts = {}) const;
};

} // namespace qcff::training
