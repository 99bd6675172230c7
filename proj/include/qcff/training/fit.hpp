#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qcff/models/regressor.hpp"
#include "qcff/physics/forward_model.hpp"
#include "qcff/training/data.hpp"

namespace qcff::training {

/// (epoch, circuit depth) milestones; depth applies from that epoch on.
struct GrowthSchedule {
    std::vector<std::pair<std::size_t, std::size_t>> milestones;

    bool enabled() const { return !milestones.empty(); }
    /// Depth 2 at epoch 0, then +2 at every 25% of the epochs until 8.
    static GrowthSchedule layerwise(std::size_t epochs, std::size_t start = 2,
                                    std::size_t final_depth = 8, std::size_t step = 2);
    std::size_t depth_at(std::size_t epoch) const;
    /// Throws ConfigError unless epochs and depths are non-decreasing.
    void validate(std::size_t final_depth) const;
};

struct FitConfig {
    std::size_t epochs = 2000;
    double lr_classical = 1e-3;
    double lr_quantum = 5e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    /// Stop once the loss falls below this value; 0 disables.
    double early_stop_loss = 0.0;
    std::uint64_t seed = 42;
    GrowthSchedule growth; // only used by quantum models
    std::size_t trace_stride = 1;

    void validate() const;
};

/// Mean squared pull (F_pred - F)/sigma over the phi points.
double loss(const physics::CrossSectionResponse &response, const physics::CFFSet &cffs,
            std::span<const double> F, std::span<const double> sigma);

/// loss() with the model evaluated at the bin's inputs.
double loss(const models::Regressor &model, std::span<const double> params,
            const KinematicBin &bin);

/// dLoss/dCFF for the affine forward model.
std::array<double, 4> loss_gradient(const physics::CrossSectionResponse &response,
                                    const physics::CFFSet &cffs, std::span<const double> F,
                                    std::span<const double> sigma);

/// Adam with one learning rate per parameter group.
class Adam {
  public:
    Adam(std::size_t n_params, std::vector<models::ParamGroup> groups, const FitConfig &config);
    void step(std::span<double> params, std::span<const double> grad);
    /// Inserts zero moments for `count` new parameters at `offset`.
    void insert(std::size_t offset, std::size_t count, std::vector<models::ParamGroup> groups);
    std::size_t steps() const { return t_; }

  private:
    std::vector<double> m_, v_, lr_;
    double beta1_, beta2_, eps_;
    double lr_classical_, lr_quantum_;
    std::size_t t_ = 0;
    void assign_rates(const std::vector<models::ParamGroup> &groups);
};

struct FitResult {
    std::vector<double> params;   // best parameters seen
    physics::CFFSet cffs;         // model output at the bin inputs
    std::size_t n_layers = 0;     // circuit depth of params (quantum models)
    std::size_t final_layers = 0; // circuit depth when training stopped
    double initial_loss = 0.0;
    double final_loss = 0.0;      // loss of params
    std::size_t best_epoch = 0;
    std::size_t epochs_run = 0;
    std::uint64_t seed = 0;
    std::vector<double> trace;    // loss every trace_stride epochs
};

/**
 * Per-bin fit. The model is initialised from config.seed; quantum models
 * with a growth schedule start at its first depth and grow at each
 * milestone. Returns the best parameters seen, so final_loss never exceeds
 * initial_loss. Throws DivergenceError on a non-finite loss.
 */
FitResult fit_local(models::ModelClass model, const KinematicBin &bin, const FitConfig &config,
                    const models::ModelOptions &options);
FitResult fit_local(models::ModelClass model, const KinematicBin &bin, const FitConfig &config);

/// Lower-level entry with a precomputed response and explicit targets.
FitResult fit_targets(models::ModelClass model, const physics::CrossSectionResponse &response,
                      std::span<const double> inputs, std::span<const double> F,
                      std::span<const double> sigma, const FitConfig &config,
                      const models::ModelOptions &options);

/// Config defaults for a model class: layer-wise growth for FQDNN only.
FitConfig default_fit_config(models::ModelClass model, std::size_t epochs = 2000);

} // namespace qcff::training
