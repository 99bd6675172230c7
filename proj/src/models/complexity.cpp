#include "qcff/models/complexity.hpp"

namespace qcff::models {

std::uint64_t dense_params(std::uint64_t in, std::uint64_t out) { return in * out + out; }

std::uint64_t dense_flops(std::uint64_t in, std::uint64_t out, bool activation) {
    return 2 * in * out + (activation ? out : 0);
}

std::uint64_t sel_param_count(std::uint64_t n_qubits, std::uint64_t n_layers) {
    return n_layers * n_qubits * 3;
}

ModelComplexity count_complexity(const MlpSpec &spec) {
    spec.validate();
    ModelComplexity c;
    for (std::size_t l = 0; l < spec.n_affine(); ++l) {
        const std::uint64_t in = spec.widths[l];
        const std::uint64_t out = spec.widths[l + 1];
        const bool hidden = l < spec.n_hidden();
        c.n_params += dense_params(in, out);
        if (hidden && spec.has_batch_norm(l)) {
            c.n_params += 2 * out;
        }
        c.n_flops += dense_flops(in, out, hidden);
    }
    return c;
}

ModelComplexity count_complexity(const QdnnSpec &spec) {
    spec.validate();
    const std::uint64_t n = spec.n_qubits;
    const std::uint64_t D = std::uint64_t{1} << n;
    const std::uint64_t hw = spec.head_width;
    ModelComplexity c;
    c.n_params = dense_params(spec.n_inputs, n) + sel_param_count(n, spec.n_layers) +
                 dense_params(n, hw) + dense_params(hw, spec.n_outputs);
    c.n_flops = 2 * spec.n_inputs * D + spec.n_layers * 2 * D * D + dense_flops(D, hw, true) +
                dense_flops(hw, spec.n_outputs, false);
    return c;
}

} // namespace qcff::models
