#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "qcff/models/regressor.hpp"

namespace qcff::models {

/**
 * Text checkpoint:
 *
 *   qcff-checkpoint 1
 *   model <cdnn|basic_qdnn|fqdnn>
 *   seed <u64>
 *   widths <w0> <w1> ...                       (CDNN)
 *   activations <name> ...                     (CDNN)
 *   qdnn <inputs> <qubits> <layers> <range> <fixed|cyclic> <head> <outputs> <activation>
 *   params <count>
 *   <one value per line, shortest round-trip form>
 */
struct Checkpoint {
    ModelClass model = ModelClass::CDNN;
    std::uint64_t seed = 0;
    MlpSpec mlp = MlpSpec::cdnn();
    QdnnSpec qdnn = QdnnSpec::basic();
    std::vector<double> params;

    /// Throws ShapeError if the parameter count does not match the spec.
    void validate() const;
};

void write_checkpoint(std::ostream &os, const Checkpoint &ckpt);
Checkpoint read_checkpoint(std::istream &is);

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt);
Checkpoint load_checkpoint(const std::filesystem::path &path);

} // namespace qcff::models
