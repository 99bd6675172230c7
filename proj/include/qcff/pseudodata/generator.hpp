#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "qcff/physics/forward_model.hpp"
#include "qcff/training/data.hpp"
#include "qcff/util/rng.hpp"

namespace qcff::pseudodata {

/// G(xB, t) = (a xB^2 + b xB) exp(c t^2 + d t + e) + f
struct GeneratorParams {
    double a = 0, b = 0, c = 0, d = 0, e = 0, f = 0;

    std::array<double, 6> to_array() const { return {a, b, c, d, e, f}; }
    static GeneratorParams from_array(std::span<const double> v) {
        return {v[0], v[1], v[2], v[3], v[4], v[5]};
    }
    bool operator==(const GeneratorParams &) const = default;
};

/// One generator per target, ordered ReH, ReE, ReHt, DVCS.
struct GeneratorSet {
    std::array<GeneratorParams, 4> targets;

    /// Closure-test generator.
    static GeneratorSet basic();
    /// Generator refitted to CDNN extractions of the e1-DVCS1 subset.
    static GeneratorSet realistic();
};

/// Throws DomainError on non-finite inputs and OverflowError when the
/// exponent or the result overflows.
double eval_generator(const GeneratorParams &p, double xB, double t);
physics::CFFSet eval_generator(const GeneratorSet &g, double xB, double t);

/// Each parameter multiplied by (1 + u), u ~ U(-spread, spread).
GeneratorSet perturb_generator(const GeneratorSet &g, double spread, Rng &rng);

struct PseudoBin {
    training::KinematicBin bin; // noisy F, template sigma_F
    physics::CFFSet truth;
    std::vector<double> F_true;
    double noise_scale = 0.0;
};

/// Truth from the forward model at the template's kinematics and phi points;
/// F_i ~ Normal(truth_i, s sigma_F,i). s = 0 gives the truth exactly.
/// Throws ConfigError for s < 0.
PseudoBin make_pseudobin(const training::KinematicBin &templ, const physics::CFFSet &truth,
                         double noise_scale, std::uint64_t seed);
PseudoBin make_pseudobin(const training::KinematicBin &templ, const GeneratorSet &gen,
                         double noise_scale, std::uint64_t seed);

/// Kinematic ranges for synthetic template bins.
struct TemplateRanges {
    double k = 5.75;
    double Q2_min = 1.79, Q2_max = 3.77;
    double xB_min = 0.244, xB_max = 0.475;
    double t_min = -0.45, t_max = -0.11;
    double rel_sigma_min = 0.04, rel_sigma_max = 0.15;
    int n_phi = 24; // 7.5 deg to 352.5 deg in 15 deg steps
};

/// Random physical kinematic bins with sigma_F = r F_basic(phi), r drawn per
/// bin from [rel_sigma_min, rel_sigma_max]. Set ids start at first_id.
std::vector<training::KinematicBin> synthetic_templates(std::size_t n, std::uint64_t seed,
                                                        const TemplateRanges &ranges = {},
                                                        std::int64_t first_id = 1);

/// One qualifier pseudodata replica: a CFF combination and a noise scale.
struct QualifierSpec {
    std::size_t index = 0;
    physics::CFFSet cffs;
    double noise_scale = 0.0;
};

inline constexpr std::array<double, 4> kQualifierNoiseScales{0.0, 0.5, 1.0, 2.0};

/// Five evenly spaced values per target in [low, high] crossed with the
/// noise scales: 5^4 * 4 = 2500 specs.
std::vector<QualifierSpec> qualifier_grid(const physics::CFFSet &low, const physics::CFFSet &high,
                                          std::span<const double> scales = kQualifierNoiseScales);

/// Central 95% interval (2.5% and 97.5% quantiles, linear interpolation) per
/// target. Throws InsufficientReplicasError for fewer than 2 entries.
std::pair<physics::CFFSet, physics::CFFSet> interval95(std::span<const physics::CFFSet> cffs);

} // namespace qcff::pseudodata
