#include "qcff/models/mlp.hpp"

#include <cmath>
#include <random>
#include <string>

#include "qcff/errors.hpp"

namespace qcff::models {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeights = Eigen::Map<const RowMajor>;
using Weights = Eigen::Map<RowMajor>;
using ConstVec = Eigen::Map<const Eigen::VectorXd>;
using Vec = Eigen::Map<Eigen::VectorXd>;

Eigen::MatrixXd apply_activation(Activation a, const Eigen::MatrixXd &z) {
    return z.unaryExpr([a](double v) { return activate(a, v); });
}

} // namespace

MlpSpec MlpSpec::cdnn() {
    MlpSpec s;
    s.widths = {3, 64, 64, 64, 64, 64, 64, 64, 64, 64, 4};
    s.activations.assign(9, Activation::ReLU);
    return s;
}

bool MlpSpec::has_batch_norm(std::size_t hidden) const {
    return !batch_norm.empty() && batch_norm[hidden];
}

void MlpSpec::validate() const {
    if (widths.size() < 2) {
        throw ConfigError("MLP needs at least an input and an output width");
    }
    for (std::size_t w : widths) {
        if (w == 0) {
            throw ConfigError("MLP layer widths must be positive");
        }
    }
    if (activations.size() != widths.size() - 2) {
        throw ConfigError("MLP needs one activation per hidden layer: got " +
                          std::to_string(activations.size()) + " for " +
                          std::to_string(widths.size() - 2) + " hidden layers");
    }
    if (!batch_norm.empty() && batch_norm.size() != widths.size() - 2) {
        throw ConfigError("MLP batch_norm flags must match the hidden layer count");
    }
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    std::size_t off = 0;
    for (std::size_t l = 0; l < spec_.n_affine(); ++l) {
        offsets_.push_back(off);
        const std::size_t in = spec_.widths[l];
        const std::size_t out = spec_.widths[l + 1];
        off += in * out + out;
        if (l < spec_.n_hidden() && spec_.has_batch_norm(l)) {
            off += 2 * out;
        }
    }
    n_params_ = off;
}

void Mlp::check_params(std::span<const double> params) const {
    if (params.size() != n_params_) {
        throw ShapeError("MLP expects " + std::to_string(n_params_) + " parameters, got " +
                         std::to_string(params.size()));
    }
}

std::vector<double> Mlp::init_params(Rng &rng) const {
    std::vector<double> p(n_params_, 0.0);
    for (std::size_t l = 0; l < spec_.n_affine(); ++l) {
        const std::size_t in = spec_.widths[l];
        const std::size_t out = spec_.widths[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        std::uniform_real_distribution<double> u(-bound, bound);
        std::size_t o = offsets_[l];
        for (std::size_t i = 0; i < in * out + out; ++i) {
            p[o + i] = u(rng);
        }
        if (l < spec_.n_hidden() && spec_.has_batch_norm(l)) {
            o += in * out + out;
            for (std::size_t i = 0; i < out; ++i) {
                p[o + i] = 1.0;
                p[o + out + i] = 0.0;
            }
        }
    }
    return p;
}

BatchNormState Mlp::init_batch_norm_state() const {
    BatchNormState s;
    for (std::size_t h = 0; h < spec_.n_hidden(); ++h) {
        const std::size_t w = spec_.widths[h + 1];
        s.mean.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(w)));
        s.var.push_back(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(w)));
    }
    return s;
}

Eigen::MatrixXd Mlp::forward(std::span<const double> params, const Eigen::MatrixXd &X,
                             const BatchNormState *bn) const {
    check_params(params);
    if (static_cast<std::size_t>(X.rows()) != spec_.n_inputs()) {
        throw ShapeError("MLP input has " + std::to_string(X.rows()) + " rows, expected " +
                         std::to_string(spec_.n_inputs()));
    }
    Eigen::MatrixXd a = X;
    for (std::size_t l = 0; l < spec_.n_affine(); ++l) {
        const auto in = static_cast<Eigen::Index>(spec_.widths[l]);
        const auto out = static_cast<Eigen::Index>(spec_.widths[l + 1]);
        const double *base = params.data() + offsets_[l];
        ConstWeights W(base, out, in);
        ConstVec b(base + out * in, out);
        Eigen::MatrixXd z = W * a;
        z.colwise() += b;
        if (l < spec_.n_hidden()) {
            if (spec_.has_batch_norm(l)) {
                if (bn == nullptr) {
                    throw ConfigError("batch-normalised MLP needs running statistics for inference");
                }
                ConstVec gamma(base + out * in + out, out);
                ConstVec beta(base + out * in + 2 * out, out);
                const Eigen::ArrayXd inv =
                    (bn->var[l].array() + kBatchNormEps).rsqrt();
                z = ((z.colwise() - bn->mean[l]).array().colwise() * (inv * gamma.array()))
                        .matrix();
                z.colwise() += beta;
            }
            a = apply_activation(spec_.activations[l], z);
        } else {
            a = std::move(z);
        }
    }
    return a;
}

Eigen::MatrixXd Mlp::forward_train(std::span<const double> params, const Eigen::MatrixXd &X,
                                   Tape &tape, const MlpTrainOptions &options) const {
    check_params(params);
    if (static_cast<std::size_t>(X.rows()) != spec_.n_inputs()) {
        throw ShapeError("MLP input has " + std::to_string(X.rows()) + " rows, expected " +
                         std::to_string(spec_.n_inputs()));
    }
    if (!options.dropout.empty() && options.dropout.size() != spec_.n_hidden()) {
        throw ConfigError("dropout rates must match the hidden layer count");
    }
    const Eigen::Index B = X.cols();
    const std::size_t H = spec_.n_hidden();
    tape.inputs.assign(spec_.n_affine(), {});
    tape.pre.assign(H, {});
    tape.xhat.assign(H, {});
    tape.inv_std.assign(H, {});
    tape.mask.assign(H, {});

    Eigen::MatrixXd a = X;
    for (std::size_t l = 0; l < spec_.n_affine(); ++l) {
        const auto in = static_cast<Eigen::Index>(spec_.widths[l]);
        const auto out = static_cast<Eigen::Index>(spec_.widths[l + 1]);
        const double *base = params.data() + offsets_[l];
        ConstWeights W(base, out, in);
        ConstVec b(base + out * in, out);
        tape.inputs[l] = a;
        Eigen::MatrixXd z = W * a;
        z.colwise() += b;
        if (l >= H) {
            a = std::move(z);
            continue;
        }
        if (spec_.has_batch_norm(l)) {
            ConstVec gamma(base + out * in + out, out);
            ConstVec beta(base + out * in + 2 * out, out);
            const Eigen::VectorXd mean = z.rowwise().mean();
            const Eigen::MatrixXd centred = z.colwise() - mean;
            const Eigen::VectorXd var = centred.array().square().rowwise().mean();
            const Eigen::VectorXd inv = (var.array() + kBatchNormEps).rsqrt();
            tape.xhat[l] = (centred.array().colwise() * inv.array()).matrix();
            tape.inv_std[l] = inv;
            z = (tape.xhat[l].array().colwise() * gamma.array()).matrix();
            z.colwise() += beta;
            if (options.bn_state != nullptr) {
                const double m = options.bn_momentum;
                const double unbias = B > 1 ? static_cast<double>(B) / static_cast<double>(B - 1) : 1.0;
                options.bn_state->mean[l] = (1.0 - m) * options.bn_state->mean[l] + m * mean;
                options.bn_state->var[l] = (1.0 - m) * options.bn_state->var[l] + m * unbias * var;
            }
        }
        tape.pre[l] = z;
        a = apply_activation(spec_.activations[l], z);
        const double p = options.dropout.empty() ? 0.0 : options.dropout[l];
        if (p > 0.0) {
            if (options.rng == nullptr) {
                throw ConfigError("dropout requires a random generator");
            }
            std::bernoulli_distribution keep(1.0 - p);
            Eigen::MatrixXd mask(out, B);
            for (Eigen::Index j = 0; j < B; ++j) {
                for (Eigen::Index i = 0; i < out; ++i) {
                    mask(i, j) = keep(*options.rng) ? 1.0 / (1.0 - p) : 0.0;
                }
            }
            a = a.cwiseProduct(mask);
            tape.mask[l] = std::move(mask);
        }
    }
    return a;
}

Eigen::MatrixXd Mlp::backward(std::span<const double> params, const Tape &tape,
                              const Eigen::MatrixXd &dY, std::span<double> grad) const {
    check_params(params);
    if (grad.size() != n_params_) {
        throw ShapeError("gradient buffer size mismatch");
    }
    const std::size_t H = spec_.n_hidden();
    Eigen::MatrixXd d = dY;
    for (std::size_t l = spec_.n_affine(); l-- > 0;) {
        const auto in = static_cast<Eigen::Index>(spec_.widths[l]);
        const auto out = static_cast<Eigen::Index>(spec_.widths[l + 1]);
        const double *base = params.data() + offsets_[l];
        double *gbase = grad.data() + offsets_[l];
        if (l < H) {
            if (tape.mask[l].size() > 0) {
                d = d.cwiseProduct(tape.mask[l]);
            }
            const Activation act = spec_.activations[l];
            d = d.cwiseProduct(tape.pre[l].unaryExpr([act](double v) { return activate_grad(act, v); }));
            if (spec_.has_batch_norm(l)) {
                ConstVec gamma(base + out * in + out, out);
                Vec dgamma(gbase + out * in + out, out);
                Vec dbeta(gbase + out * in + 2 * out, out);
                const Eigen::MatrixXd &xh = tape.xhat[l];
                dgamma += d.cwiseProduct(xh).rowwise().sum();
                dbeta += d.rowwise().sum();
                const Eigen::MatrixXd dxh = (d.array().colwise() * gamma.array()).matrix();
                const double Bn = static_cast<double>(d.cols());
                const Eigen::VectorXd sum_dxh = dxh.rowwise().sum();
                const Eigen::VectorXd sum_dxh_xh = dxh.cwiseProduct(xh).rowwise().sum();
                Eigen::MatrixXd dz = Bn * dxh;
                dz.colwise() -= sum_dxh;
                dz -= (xh.array().colwise() * sum_dxh_xh.array()).matrix();
                d = (dz.array().colwise() * (tape.inv_std[l].array() / Bn)).matrix();
            }
        }
        ConstWeights W(base, out, in);
        Weights dW(gbase, out, in);
        Vec db(gbase + out * in, out);
        dW += d * tape.inputs[l].transpose();
        db += d.rowwise().sum();
        d = W.transpose() * d;
    }
    return d;
}

} // namespace qcff::models
