#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qcff/models/activation.hpp"
#include "qcff/util/rng.hpp"

namespace qcff::models {

/// Fully connected network: widths[0] inputs, widths.back() outputs, one
/// activation per hidden layer, linear output.
struct MlpSpec {
    std::vector<std::size_t> widths;
    std::vector<Activation> activations; // size widths.size() - 2
    std::vector<bool> batch_norm;        // empty, or one flag per hidden layer

    /// 3 -> 64 x 9 -> 4 with ReLU on every hidden layer.
    static MlpSpec cdnn();

    std::size_t n_inputs() const { return widths.front(); }
    std::size_t n_outputs() const { return widths.back(); }
    std::size_t n_affine() const { return widths.size() - 1; }
    std::size_t n_hidden() const { return widths.size() - 2; }
    bool has_batch_norm(std::size_t hidden) const;

    /// Throws ConfigError when the shapes are inconsistent.
    void validate() const;
};

/// Running statistics for batch-normalised layers (inference mode).
struct BatchNormState {
    std::vector<Eigen::VectorXd> mean;
    std::vector<Eigen::VectorXd> var;
};

struct MlpTrainOptions {
    std::vector<double> dropout; // empty, or one rate per hidden layer
    Rng *rng = nullptr;          // required when any dropout rate > 0
    BatchNormState *bn_state = nullptr; // updated with momentum if non-null
    double bn_momentum = 0.1;
};

/**
 * Flat-parameter MLP with reverse-mode gradients.
 *
 * Layout per affine layer l: W_l (out x in, row-major), then b_l (out);
 * a batch-normalised hidden layer appends gamma (out) and beta (out).
 * Batches are column-major: one sample per column.
 */
class Mlp {
  public:
    static constexpr double kBatchNormEps = 1e-5;

    explicit Mlp(MlpSpec spec);

    const MlpSpec &spec() const { return spec_; }
    std::size_t num_params() const { return n_params_; }
    std::size_t weight_offset(std::size_t l) const { return offsets_[l]; }

    /// PyTorch-style U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases;
    /// batch-norm gamma = 1, beta = 0.
    std::vector<double> init_params(Rng &rng) const;
    BatchNormState init_batch_norm_state() const;

    /// Inference pass; batch-norm layers use `bn` (required if any are enabled).
    Eigen::MatrixXd forward(std::span<const double> params, const Eigen::MatrixXd &X,
                            const BatchNormState *bn = nullptr) const;

    struct Tape {
        std::vector<Eigen::MatrixXd> inputs; // input to each affine layer
        std::vector<Eigen::MatrixXd> pre;    // activation argument per hidden layer
        std::vector<Eigen::MatrixXd> xhat;   // normalised values (batch-norm layers)
        std::vector<Eigen::VectorXd> inv_std;
        std::vector<Eigen::MatrixXd> mask;   // dropout scale per hidden layer
    };

    /// Training pass: batch statistics for batch norm, dropout masks drawn
    /// from options.rng.
    Eigen::MatrixXd forward_train(std::span<const double> params, const Eigen::MatrixXd &X,
                                  Tape &tape, const MlpTrainOptions &options = {}) const;

    /// Accumulates dLoss/dparams into grad and returns dLoss/dX.
    Eigen::MatrixXd backward(std::span<const double> params, const Tape &tape,
                             const Eigen::MatrixXd &dY, std::span<double> grad) const;

  private:
    void check_params(std::span<const double> params) const;

    MlpSpec spec_;
    std::vector<std::size_t> offsets_;
    std::size_t n_params_ = 0;
};

} // namespace qcff::models
