#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qcff/models/mlp.hpp"
#include "qcff/models/qdnn.hpp"

namespace qcff::models {

enum class ModelClass { CDNN, BasicQDNN, FQDNN };

std::string to_string(ModelClass m);
/// Accepts "cdnn", "basic_qdnn", "fqdnn" (case-insensitive). Throws ConfigError.
ModelClass parse_model_class(std::string_view name);
bool is_quantum(ModelClass m);

/// A contiguous slice of the flat parameter vector.
struct ParamGroup {
    std::size_t offset = 0;
    std::size_t count = 0;
    bool quantum = false;
};

struct ModelOptions {
    MlpSpec mlp = MlpSpec::cdnn();
    QdnnSpec qdnn = QdnnSpec::basic();
    AngleInit angles = AngleInit::small_angle();
    CircuitGradient gradient = CircuitGradient::ParameterShift;
    std::size_t gradient_workers = 1;

    /// Defaults for one model class: Basic QDNN uses cyclic ranges and
    /// small-angle init (sigma0 = 0.1); FQDNN nearest-neighbour ranges and
    /// depth-scaled init (sigma0 = 0.3).
    static ModelOptions defaults(ModelClass m);
};

/// Given the model outputs, returns dLoss/doutputs.
using OutputGradient = std::function<std::array<double, 4>(const std::array<double, 4> &)>;

/// Maps the 3 kinematic inputs to the 4 fit targets.
class Regressor {
  public:
    virtual ~Regressor() = default;
    virtual ModelClass model_class() const = 0;
    virtual std::size_t num_params() const = 0;
    virtual std::vector<ParamGroup> param_groups() const = 0;
    virtual std::vector<double> init_params(std::uint64_t seed) const = 0;
    virtual std::array<double, 4> forward(std::span<const double> params,
                                          std::span<const double> x) const = 0;
    /// One forward pass; dloss maps the outputs to dLoss/dout, which is then
    /// back-propagated and accumulated into grad. Returns the outputs.
    virtual std::array<double, 4> value_and_grad(std::span<const double> params,
                                                 std::span<const double> x,
                                                 const OutputGradient &dloss,
                                                 std::span<double> grad) const = 0;
    /// value_and_grad with a fixed output cotangent.
    std::array<double, 4> forward_backward(std::span<const double> params,
                                           std::span<const double> x,
                                           const std::array<double, 4> &dout,
                                           std::span<double> grad) const {
        return value_and_grad(params, x, [&](const std::array<double, 4> &) { return dout; }, grad);
    }
};

class CdnnRegressor final : public Regressor {
  public:
    explicit CdnnRegressor(MlpSpec spec = MlpSpec::cdnn());
    ModelClass model_class() const override { return ModelClass::CDNN; }
    std::size_t num_params() const override { return mlp_.num_params(); }
    std::vector<ParamGroup> param_groups() const override;
    std::vector<double> init_params(std::uint64_t seed) const override;
    std::array<double, 4> forward(std::span<const double> params,
                                  std::span<const double> x) const override;
    std::array<double, 4> value_and_grad(std::span<const double> params,
                                         std::span<const double> x, const OutputGradient &dloss,
                                         std::span<double> grad) const override;
    const Mlp &mlp() const { return mlp_; }

  private:
    Mlp mlp_;
};

class QdnnRegressor final : public Regressor {
  public:
    QdnnRegressor(ModelClass kind, QdnnSpec spec, AngleInit angles,
                  CircuitGradient gradient = CircuitGradient::ParameterShift,
                  std::size_t gradient_workers = 1);
    ModelClass model_class() const override { return kind_; }
    std::size_t num_params() const override { return qdnn_.num_params(); }
    std::vector<ParamGroup> param_groups() const override;
    std::vector<double> init_params(std::uint64_t seed) const override;
    std::array<double, 4> forward(std::span<const double> params,
                                  std::span<const double> x) const override;
    std::array<double, 4> value_and_grad(std::span<const double> params,
                                         std::span<const double> x, const OutputGradient &dloss,
                                         std::span<double> grad) const override;
    const Qdnn &qdnn() const { return qdnn_; }
    const AngleInit &angles() const { return angles_; }
    CircuitGradient gradient() const { return gradient_; }
    std::size_t gradient_workers() const { return workers_; }

  private:
    ModelClass kind_;
    Qdnn qdnn_;
    AngleInit angles_;
    CircuitGradient gradient_;
    std::size_t workers_;
};

std::unique_ptr<Regressor> make_regressor(ModelClass m, const ModelOptions &options);
inline std::unique_ptr<Regressor> make_regressor(ModelClass m) {
    return make_regressor(m, ModelOptions::defaults(m));
}

/**
 * New parameter vector with circuit depth new_layers. Existing angles and
 * classical weights are copied verbatim; the new layers are drawn from
 * `angles` at their own depth index using `seed`.
 * Throws ConfigError if new_layers is below the current depth.
 */
std::vector<double> grow_depth(const Qdnn &current, std::span<const double> params,
                               std::size_t new_layers, const AngleInit &angles,
                               std::uint64_t seed);

} // namespace qcff::models
