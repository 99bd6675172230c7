#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qcff/pseudodata/generator.hpp"

namespace qcff::pseudodata {

struct GeneratorPoint {
    double xB = 0.0;
    double t = 0.0;
    double value = 0.0;
    double sigma = 1.0;
};

struct GeneratorFitOptions {
    std::size_t n_starts = 20;
    std::uint64_t seed = 11;
    std::size_t max_evaluations = 20000;
    /// Parameters marked false stay at their value in `initial`.
    std::array<bool, 6> free{true, true, true, true, true, true};
    GeneratorParams initial;
    /// Random starts draw free parameters from U(-start_width, start_width)
    /// around the linear start.
    double start_width = 2.0;
};

struct GeneratorFit {
    GeneratorParams params;
    double sse = 0.0; // sum of squared weighted residuals
    /// Covariance estimate of the free parameters (6 x 6, zero rows for fixed
    /// ones): pinv(J^T J) * sse / (n - n_free).
    std::array<std::array<double, 6>, 6> covariance{};
    std::size_t start = 0; // multi-start index that won
};

/**
 * Weighted least squares of the generator to (xB, t, value +- sigma).
 * The first start solves the c = d = e = 0 problem linearly; the others are
 * random perturbations of it. Throws DegenerateDataError with fewer than 6
 * distinct (xB, t) points and ConvergenceError if no start converges.
 */
GeneratorFit fit_generator(const std::vector<GeneratorPoint> &points,
                           const GeneratorFitOptions &options = {});

} // namespace qcff::pseudodata
