#include "qcff/pseudodata/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "qcff/errors.hpp"

namespace qcff::pseudodata {

GeneratorSet GeneratorSet::basic() {
    return {{{{-4.41, 1.68, -9.14, -3.57, 1.54, -1.37},
              {144.56, 149.99, 0.32, -1.09, -148.49, -0.31},
              {-1.86, 1.50, -0.29, -1.33, 0.46, -0.98},
              {0.50, -0.41, 0.05, -0.25, 0.55, 0.166}}}};
}

GeneratorSet GeneratorSet::realistic() {
    return {{{{-8.13, 1.82, 35.26, 25.37, 6.26, 3.20},
              {6.92, -5.64, 0.81, 0.98, 4.03, 49.71},
              {-8.51, 1.72, 31.11, 22.49, 6.09, 4.77},
              {0.45, -0.45, 4.40, 2.91, 0.13, 0.08}}}};
}

double eval_generator(const GeneratorParams &p, double xB, double t) {
    if (!std::isfinite(xB) || !std::isfinite(t)) {
        throw DomainError("generator inputs must be finite");
    }
    const double expo = p.c * t * t + p.d * t + p.e;
    if (!std::isfinite(expo) || expo > std::log(std::numeric_limits<double>::max())) {
        throw OverflowError("generator exponent " + std::to_string(expo) + " overflows at xB=" +
                            std::to_string(xB) + ", t=" + std::to_string(t));
    }
    const double g = (p.a * xB * xB + p.b * xB) * std::exp(expo) + p.f;
    if (!std::isfinite(g)) {
        throw OverflowError("generator value overflows");
    }
    return g;
}

physics::CFFSet eval_generator(const GeneratorSet &g, double xB, double t) {
    return {eval_generator(g.targets[0], xB, t), eval_generator(g.targets[1], xB, t),
            eval_generator(g.targets[2], xB, t), eval_generator(g.targets[3], xB, t)};
}

GeneratorSet perturb_generator(const GeneratorSet &g, double spread, Rng &rng) {
    if (!(spread >= 0.0)) {
        throw ConfigError("parameter spread must be >= 0");
    }
    GeneratorSet out = g;
    std::uniform_real_distribution<double> u(-spread, spread);
    for (auto &p : out.targets) {
        auto v = p.to_array();
        for (auto &x : v) {
            x *= 1.0 + (spread > 0.0 ? u(rng) : 0.0);
        }
        p = GeneratorParams::from_array(v);
    }
    return out;
}

PseudoBin make_pseudobin(const training::KinematicBin &templ, const physics::CFFSet &truth,
                         double noise_scale, std::uint64_t seed) {
    if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
        throw ConfigError("noise scale must be finite and >= 0");
    }
    templ.validate();
    PseudoBin pb;
    pb.truth = truth;
    pb.noise_scale = noise_scale;
    pb.F_true = templ.response().predict(truth);
    pb.bin = templ;
    Rng rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (std::size_t i = 0; i < pb.F_true.size(); ++i) {
        auto &p = pb.bin.points[i];
        p.F = pb.F_true[i];
        if (noise_scale > 0.0) {
            p.F += noise_scale * p.sigma_F * nd(rng);
        }
    }
    return pb;
}

PseudoBin make_pseudobin(const training::KinematicBin &templ, const GeneratorSet &gen,
                         double noise_scale, std::uint64_t seed) {
    return make_pseudobin(templ, eval_generator(gen, templ.xB, templ.t), noise_scale, seed);
}

std::vector<training::KinematicBin> synthetic_templates(std::size_t n, std::uint64_t seed,
                                                        const TemplateRanges &r,
                                                        std::int64_t first_id) {
    if (r.n_phi < 4 || !(r.Q2_min <= r.Q2_max) || !(r.xB_min <= r.xB_max) ||
        !(r.t_min <= r.t_max) || !(r.rel_sigma_min > 0.0) ||
        !(r.rel_sigma_min <= r.rel_sigma_max)) {
        throw ConfigError("invalid template ranges");
    }
    Rng rng(seed);
    std::uniform_real_distribution<double> uQ2(r.Q2_min, r.Q2_max);
    std::uniform_real_distribution<double> uxB(r.xB_min, r.xB_max);
    std::uniform_real_distribution<double> ut(r.t_min, r.t_max);
    std::uniform_real_distribution<double> urel(r.rel_sigma_min, r.rel_sigma_max);
    const auto gen = GeneratorSet::basic();
    std::vector<training::KinematicBin> out;
    std::size_t attempts = 0;
    while (out.size() < n) {
        if (++attempts > 1000 * (n + 1)) {
            throw DomainError("could not draw physical kinematics in the requested ranges");
        }
        training::KinematicBin bin;
        bin.set_id = first_id + static_cast<std::int64_t>(out.size());
        bin.k = r.k;
        bin.Q2 = uQ2(rng);
        bin.xB = uxB(rng);
        bin.t = ut(rng);
        const double rel = urel(rng);
        for (int i = 0; i < r.n_phi; ++i) {
            bin.points.push_back({(i + 0.5) * 360.0 / r.n_phi, 0.0, 1.0});
        }
        try {
            const auto F = bin.response().predict(eval_generator(gen, bin.xB, bin.t));
            if (*std::min_element(F.begin(), F.end()) <= 0.0) {
                continue;
            }
            for (std::size_t i = 0; i < F.size(); ++i) {
                bin.points[i].F = F[i];
                bin.points[i].sigma_F = rel * F[i];
            }
        } catch (const Error &) {
            continue; // unphysical draw
        }
        out.push_back(std::move(bin));
    }
    return out;
}

std::vector<QualifierSpec> qualifier_grid(const physics::CFFSet &low, const physics::CFFSet &high,
                                          std::span<const double> scales) {
    const auto lo = low.to_array();
    const auto hi = high.to_array();
    for (std::size_t c = 0; c < 4; ++c) {
        if (!std::isfinite(lo[c]) || !std::isfinite(hi[c]) || lo[c] > hi[c]) {
            throw ConfigError("qualifier grid needs finite low <= high per target");
        }
    }
    for (double s : scales) {
        if (!(s >= 0.0)) {
            throw ConfigError("noise scales must be >= 0");
        }
    }
    auto value = [&](std::size_t c, std::size_t i) {
        return lo[c] + (hi[c] - lo[c]) * static_cast<double>(i) / 4.0;
    };
    std::vector<QualifierSpec> out;
    out.reserve(625 * scales.size());
    for (std::size_t i0 = 0; i0 < 5; ++i0) {
        for (std::size_t i1 = 0; i1 < 5; ++i1) {
            for (std::size_t i2 = 0; i2 < 5; ++i2) {
                for (std::size_t i3 = 0; i3 < 5; ++i3) {
                    const physics::CFFSet c{value(0, i0), value(1, i1), value(2, i2), value(3, i3)};
                    for (double s : scales) {
                        out.push_back({out.size(), c, s});
                    }
                }
            }
        }
    }
    return out;
}

std::pair<physics::CFFSet, physics::CFFSet> interval95(std::span<const physics::CFFSet> cffs) {
    if (cffs.size() < 2) {
        throw InsufficientReplicasError("a 95% interval needs at least 2 replicas");
    }
    std::array<double, 4> lo{}, hi{};
    std::vector<double> v(cffs.size());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(v.size() - 1);
        const auto i = static_cast<std::size_t>(std::floor(pos));
        const double frac = pos - static_cast<double>(i);
        return i + 1 < v.size() ? v[i] + frac * (v[i + 1] - v[i]) : v[i];
    };
    for (std::size_t c = 0; c < 4; ++c) {
        for (std::size_t r = 0; r < cffs.size(); ++r) {
            v[r] = cffs[r][c];
        }
        std::sort(v.begin(), v.end());
        lo[c] = quantile(0.025);
        hi[c] = quantile(0.975);
    }
    return {physics::CFFSet::from_array(lo), physics::CFFSet::from_array(hi)};
}

} // namespace qcff::pseudodata
