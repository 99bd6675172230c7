#pragma once

#include <cstdint>

#include "qcff/models/mlp.hpp"
#include "qcff/models/qdnn.hpp"

namespace qcff::models {

struct ModelComplexity {
    std::uint64_t n_params = 0;
    std::uint64_t n_flops = 0;
};

/// Dense layer M -> N: M N + N parameters, 2 M N FLOPs; each activation
/// adds its width in FLOPs.
std::uint64_t dense_params(std::uint64_t in, std::uint64_t out);
std::uint64_t dense_flops(std::uint64_t in, std::uint64_t out, bool activation);

/// Trainable circuit angles: L * n * 3. The embedding has none.
std::uint64_t sel_param_count(std::uint64_t n_qubits, std::uint64_t n_layers);

ModelComplexity count_complexity(const MlpSpec &spec);

/**
 * QDNN accounting. Parameters are exact. FLOPs follow the published
 * convention, which sizes every classical map touching the register by the
 * state dimension D = 2^n rather than n:
 *   pre      2 * n_inputs * D
 *   circuit  L * 2 * D^2
 *   head     2 * D * head_width + head_width + 2 * head_width * n_outputs
 */
ModelComplexity count_complexity(const QdnnSpec &spec);

} // namespace qcff::models
