#include "qcff/training/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qcff/errors.hpp"
#include "qcff/util/rng.hpp"

namespace qcff::training {

using models::ModelClass;

GrowthSchedule GrowthSchedule::layerwise(std::size_t epochs, std::size_t start,
                                         std::size_t final_depth, std::size_t step) {
    if (step == 0 || start == 0 || start > final_depth) {
        throw ConfigError("layer-wise growth needs 0 < start <= final depth and step > 0");
    }
    GrowthSchedule g;
    const std::size_t stages = (final_depth - start + step - 1) / step;
    g.milestones.emplace_back(0, start);
    for (std::size_t s = 1; s <= stages; ++s) {
        const std::size_t depth = std::min(final_depth, start + s * step);
        g.milestones.emplace_back(epochs * s / (stages + 1), depth);
    }
    return g;
}

std::size_t GrowthSchedule::depth_at(std::size_t epoch) const {
    std::size_t depth = milestones.empty() ? 0 : milestones.front().second;
    for (const auto &[e, d] : milestones) {
        if (e <= epoch) {
            depth = d;
        }
    }
    return depth;
}

void GrowthSchedule::validate(std::size_t final_depth) const {
    if (milestones.empty()) {
        return;
    }
    if (milestones.front().first != 0) {
        throw ConfigError("growth schedule must start at epoch 0");
    }
    for (std::size_t i = 1; i < milestones.size(); ++i) {
        if (milestones[i].first < milestones[i - 1].first ||
            milestones[i].second < milestones[i - 1].second) {
            throw ConfigError("growth milestones must be non-decreasing");
        }
    }
    if (milestones.back().second != final_depth) {
        throw ConfigError("growth schedule ends at depth " +
                          std::to_string(milestones.back().second) + " but the model has " +
                          std::to_string(final_depth) + " layers");
    }
}

void FitConfig::validate() const {
    if (!(lr_classical > 0.0) || !(lr_quantum > 0.0)) {
        throw ConfigError("learning rates must be positive");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(adam_eps > 0.0)) {
        throw ConfigError("Adam hyperparameters out of range");
    }
    if (trace_stride == 0) {
        throw ConfigError("trace_stride must be positive");
    }
}

FitConfig default_fit_config(ModelClass model, std::size_t epochs) {
    FitConfig c;
    c.epochs = epochs;
    if (model == ModelClass::FQDNN) {
        c.growth = GrowthSchedule::layerwise(epochs);
    }
    return c;
}

double loss(const physics::CrossSectionResponse &response, const physics::CFFSet &cffs,
            std::span<const double> F, std::span<const double> sigma) {
    const std::size_t n = response.size();
    if (F.size() != n || sigma.size() != n || n == 0) {
        throw ShapeError("loss: data and response sizes differ");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = (response.predict(i, cffs) - F[i]) / sigma[i];
        sum += r * r;
    }
    const double L = sum / static_cast<double>(n);
    if (!std::isfinite(L)) {
        throw NonFiniteError("loss is not finite");
    }
    return L;
}

double loss(const models::Regressor &model, std::span<const double> params,
            const KinematicBin &bin) {
    bin.validate();
    const auto x = bin.inputs();
    const auto y = model.forward(params, x);
    for (double v : y) {
        if (!std::isfinite(v)) {
            throw NonFiniteError("model output is not finite");
        }
    }
    const auto F = bin.F();
    const auto s = bin.sigmas();
    return loss(bin.response(), physics::CFFSet::from_array(y), F, s);
}

std::array<double, 4> loss_gradient(const physics::CrossSectionResponse &response,
                                    const physics::CFFSet &cffs, std::span<const double> F,
                                    std::span<const double> sigma) {
    const std::size_t n = response.size();
    std::array<double, 4> g{};
    for (std::size_t i = 0; i < n; ++i) {
        const double r = (response.predict(i, cffs) - F[i]) / (sigma[i] * sigma[i]);
        const auto &s = response.slope(i);
        for (std::size_t c = 0; c < 4; ++c) {
            g[c] += r * s[c];
        }
    }
    for (auto &v : g) {
        v *= 2.0 / static_cast<double>(n);
    }
    return g;
}

Adam::Adam(std::size_t n_params, std::vector<models::ParamGroup> groups, const FitConfig &config)
    : m_(n_params, 0.0), v_(n_params, 0.0), lr_(n_params, config.lr_classical),
      beta1_(config.beta1), beta2_(config.beta2), eps_(config.adam_eps),
      lr_classical_(config.lr_classical), lr_quantum_(config.lr_quantum) {
    assign_rates(groups);
}

void Adam::assign_rates(const std::vector<models::ParamGroup> &groups) {
    lr_.assign(m_.size(), lr_classical_);
    for (const auto &g : groups) {
        if (g.offset + g.count > lr_.size()) {
            throw ShapeError("Adam parameter group out of range");
        }
        for (std::size_t i = g.offset; i < g.offset + g.count; ++i) {
            lr_[i] = g.quantum ? lr_quantum_ : lr_classical_;
        }
    }
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) {
        throw ShapeError("Adam: parameter/gradient size mismatch");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < m_.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
        const double mh = m_[i] / bc1;
        const double vh = v_[i] / bc2;
        params[i] -= lr_[i] * mh / (std::sqrt(vh) + eps_);
    }
}

void Adam::insert(std::size_t offset, std::size_t count, std::vector<models::ParamGroup> groups) {
    if (offset > m_.size()) {
        throw ShapeError("Adam::insert offset out of range");
    }
    const auto pos = static_cast<std::ptrdiff_t>(offset);
    m_.insert(m_.begin() + pos, count, 0.0);
    v_.insert(v_.begin() + pos, count, 0.0);
    assign_rates(groups);
}

namespace {

models::ModelOptions with_depth(models::ModelOptions o, std::size_t depth) {
    o.qdnn.n_layers = depth;
    return o;
}

} // namespace

FitResult fit_targets(ModelClass model, const physics::CrossSectionResponse &response,
                      std::span<const double> inputs, std::span<const double> F,
                      std::span<const double> sigma, const FitConfig &config,
                      const models::ModelOptions &options) {
    config.validate();
    if (F.size() != response.size() || sigma.size() != response.size()) {
        throw ShapeError("fit: data and response sizes differ");
    }
    const bool quantum = models::is_quantum(model);
    const bool growing = quantum && config.growth.enabled();
    if (growing) {
        config.growth.validate(options.qdnn.n_layers);
    }

    std::size_t depth = growing ? config.growth.depth_at(0) : options.qdnn.n_layers;
    auto reg = models::make_regressor(model, with_depth(options, depth));
    std::vector<double> params = reg->init_params(config.seed);
    Adam adam(params.size(), reg->param_groups(), config);
    std::vector<double> grad(params.size(), 0.0);

    FitResult res;
    res.seed = config.seed;
    double best = std::numeric_limits<double>::infinity();
    physics::CFFSet cffs;
    double L = 0.0;
    const auto dloss = [&](const std::array<double, 4> &y) {
        cffs = physics::CFFSet::from_array(y);
        for (double v : y) {
            if (!std::isfinite(v)) {
                throw DivergenceError("model output became non-finite");
            }
        }
        L = loss(response, cffs, F, sigma);
        return loss_gradient(response, cffs, F, sigma);
    };
    auto consider = [&](std::size_t epoch) {
        if (!std::isfinite(L)) {
            throw DivergenceError("loss became non-finite at epoch " + std::to_string(epoch));
        }
        if (L < best) {
            best = L;
            res.params = params;
            res.cffs = cffs;
            res.n_layers = quantum ? depth : 0;
            res.best_epoch = epoch;
            res.final_loss = L;
        }
    };

    std::size_t epoch = 0;
    for (; epoch < config.epochs; ++epoch) {
        if (growing && epoch > 0) {
            const std::size_t target = config.growth.depth_at(epoch);
            if (target > depth) {
                const auto &q = static_cast<const models::QdnnRegressor &>(*reg).qdnn();
                const std::size_t insert_at = q.theta_offset() + q.theta_count();
                params = models::grow_depth(
                    q, params, target, options.angles,
                    derive_seed(config.seed, 0, epoch, streams::kGrowth));
                const std::size_t added = (target - depth) * options.qdnn.n_qubits * 3;
                depth = target;
                reg = models::make_regressor(model, with_depth(options, depth));
                adam.insert(insert_at, added, reg->param_groups());
                grad.assign(params.size(), 0.0);
            }
        }
        std::fill(grad.begin(), grad.end(), 0.0);
        try {
            reg->value_and_grad(params, inputs, dloss, grad);
        } catch (const NonFiniteError &e) {
            throw DivergenceError(std::string("loss became non-finite: ") + e.what());
        }
        if (epoch == 0) {
            res.initial_loss = L;
        }
        consider(epoch);
        if (epoch % config.trace_stride == 0) {
            res.trace.push_back(L);
        }
        if (config.early_stop_loss > 0.0 && L < config.early_stop_loss) {
            break;
        }
        adam.step(params, grad);
    }
    res.epochs_run = epoch;
    res.final_layers = quantum ? depth : 0;

    // Loss of the parameters after the last update (or the initial ones).
    std::fill(grad.begin(), grad.end(), 0.0);
    try {
        reg->value_and_grad(params, inputs, dloss, grad);
    } catch (const NonFiniteError &e) {
        throw DivergenceError(std::string("loss became non-finite: ") + e.what());
    }
    if (config.epochs == 0) {
        res.initial_loss = L;
    }
    consider(epoch);
    return res;
}

FitResult fit_local(ModelClass model, const KinematicBin &bin, const FitConfig &config,
                    const models::ModelOptions &options) {
    bin.validate();
    const auto response = bin.response();
    const auto x = bin.inputs();
    const auto F = bin.F();
    const auto s = bin.sigmas();
    return fit_targets(model, response, x, F, s, config, options);
}

FitResult fit_local(ModelClass model, const KinematicBin &bin, const FitConfig &config) {
    return fit_local(model, bin, config, models::ModelOptions::defaults(model));
}

} // namespace qcff::training
