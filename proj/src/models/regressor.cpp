#include "qcff/models/regressor.hpp"

#include <algorithm>
#include <cctype>
#include <random>

#include "qcff/errors.hpp"

namespace qcff::models {

std::string to_string(ModelClass m) {
    switch (m) {
    case ModelClass::CDNN:
        return "cdnn";
    case ModelClass::BasicQDNN:
        return "basic_qdnn";
    case ModelClass::FQDNN:
        return "fqdnn";
    }
    return "cdnn";
}

ModelClass parse_model_class(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "cdnn") return ModelClass::CDNN;
    if (s == "basic_qdnn" || s == "qdnn") return ModelClass::BasicQDNN;
    if (s == "fqdnn" || s == "full_qdnn") return ModelClass::FQDNN;
    throw ConfigError("unknown model class '" + std::string(name) + "'");
}

bool is_quantum(ModelClass m) { return m != ModelClass::CDNN; }

ModelOptions ModelOptions::defaults(ModelClass m) {
    ModelOptions o;
    if (m == ModelClass::FQDNN) {
        o.qdnn = QdnnSpec::full();
        o.angles = AngleInit::depth_scaled(0.3);
    } else {
        o.qdnn = QdnnSpec::basic();
        o.angles = AngleInit::small_angle(0.1);
    }
    return o;
}

CdnnRegressor::CdnnRegressor(MlpSpec spec) : mlp_(std::move(spec)) {
    if (mlp_.spec().n_inputs() != 3 || mlp_.spec().n_outputs() != 4) {
        throw ConfigError("CDNN must map 3 inputs to 4 outputs");
    }
}

std::vector<ParamGroup> CdnnRegressor::param_groups() const {
    return {{0, mlp_.num_params(), false}};
}

std::vector<double> CdnnRegressor::init_params(std::uint64_t seed) const {
    Rng rng(seed);
    return mlp_.init_params(rng);
}

std::array<double, 4> CdnnRegressor::forward(std::span<const double> params,
                                             std::span<const double> x) const {
    if (x.size() != 3) {
        throw ShapeError("CDNN expects 3 inputs");
    }
    const Eigen::MatrixXd X = Eigen::Map<const Eigen::VectorXd>(x.data(), 3);
    const Eigen::MatrixXd Y = mlp_.forward(params, X);
    return {Y(0, 0), Y(1, 0), Y(2, 0), Y(3, 0)};
}

std::array<double, 4> CdnnRegressor::value_and_grad(std::span<const double> params,
                                                    std::span<const double> x,
                                                    const OutputGradient &dloss,
                                                    std::span<double> grad) const {
    if (x.size() != 3) {
        throw ShapeError("CDNN expects 3 inputs");
    }
    const Eigen::MatrixXd X = Eigen::Map<const Eigen::VectorXd>(x.data(), 3);
    Mlp::Tape tape;
    const Eigen::MatrixXd Y = mlp_.forward_train(params, X, tape);
    const std::array<double, 4> y{Y(0, 0), Y(1, 0), Y(2, 0), Y(3, 0)};
    const auto dout = dloss(y);
    const Eigen::MatrixXd dY = Eigen::Map<const Eigen::VectorXd>(dout.data(), 4);
    mlp_.backward(params, tape, dY, grad);
    return y;
}

QdnnRegressor::QdnnRegressor(ModelClass kind, QdnnSpec spec, AngleInit angles,
                             CircuitGradient gradient, std::size_t gradient_workers)
    : kind_(kind), qdnn_(spec), angles_(angles), gradient_(gradient),
      workers_(gradient_workers) {
    if (!is_quantum(kind)) {
        throw ConfigError("QdnnRegressor needs a quantum model class");
    }
    if (spec.n_inputs != 3 || spec.n_outputs != 4) {
        throw ConfigError("QDNN must map 3 inputs to 4 outputs");
    }
}

std::vector<ParamGroup> QdnnRegressor::param_groups() const {
    const std::size_t t0 = qdnn_.theta_offset();
    const std::size_t tn = qdnn_.theta_count();
    return {{0, t0, false}, {t0, tn, true}, {t0 + tn, qdnn_.num_params() - t0 - tn, false}};
}

std::vector<double> QdnnRegressor::init_params(std::uint64_t seed) const {
    Rng rng(seed);
    return qdnn_.init_params(rng, angles_);
}

std::array<double, 4> QdnnRegressor::forward(std::span<const double> params,
                                             std::span<const double> x) const {
    const auto y = qdnn_.forward(params, x);
    return {y[0], y[1], y[2], y[3]};
}

std::array<double, 4> QdnnRegressor::value_and_grad(std::span<const double> params,
                                                    std::span<const double> x,
                                                    const OutputGradient &dloss,
                                                    std::span<double> grad) const {
    std::array<double, 4> y{};
    qdnn_.forward_backward(
        params, x,
        [&](std::span<const double> out) {
            std::copy_n(out.begin(), 4, y.begin());
            const auto d = dloss(y);
            return std::vector<double>(d.begin(), d.end());
        },
        grad, gradient_, workers_);
    return y;
}

std::unique_ptr<Regressor> make_regressor(ModelClass m, const ModelOptions &options) {
    if (m == ModelClass::CDNN) {
        return std::make_unique<CdnnRegressor>(options.mlp);
    }
    return std::make_unique<QdnnRegressor>(m, options.qdnn, options.angles, options.gradient,
                                           options.gradient_workers);
}

std::vector<double> grow_depth(const Qdnn &current, std::span<const double> params,
                               std::size_t new_layers, const AngleInit &angles,
                               std::uint64_t seed) {
    const auto &spec = current.spec();
    if (params.size() != current.num_params()) {
        throw ShapeError("grow_depth: parameter vector does not match the model");
    }
    if (new_layers < spec.n_layers) {
        throw ConfigError("grow_depth: cannot shrink from " + std::to_string(spec.n_layers) +
                          " to " + std::to_string(new_layers) + " layers");
    }
    const std::size_t per_layer = spec.n_qubits * 3;
    const std::size_t t0 = current.theta_offset();
    const std::size_t old_end = t0 + current.theta_count();
    std::vector<double> out;
    out.reserve(params.size() + (new_layers - spec.n_layers) * per_layer);
    out.insert(out.end(), params.begin(), params.begin() + static_cast<std::ptrdiff_t>(old_end));
    Rng rng(seed);
    for (std::size_t l = spec.n_layers; l < new_layers; ++l) {
        std::normal_distribution<double> nd(0.0, angles.sigma_for_layer(l));
        for (std::size_t i = 0; i < per_layer; ++i) {
            out.push_back(nd(rng));
        }
    }
    out.insert(out.end(), params.begin() + static_cast<std::ptrdiff_t>(old_end), params.end());
    return out;
}

} // namespace qcff::models
