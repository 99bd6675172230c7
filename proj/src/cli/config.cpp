#include "qcff/cli/config.hpp"

#include <json.hpp>

#include <cmath>
#include <set>

#include "qcff/errors.hpp"
#include "qcff/io/io.hpp"

namespace qcff::cli {

using nlohmann::ordered_json;

namespace {

// Reads members of one JSON object and rejects any key it was not asked for.
class ObjectReader {
  public:
    ObjectReader(const ordered_json &j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw ConfigError(where() + " must be an object");
        }
    }

    template <class T>
    void get(const char *key, T &out) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) {
            return;
        }
        try {
            out = it->template get<T>();
        } catch (const nlohmann::json::exception &) {
            throw ConfigError("config key " + key_path(key) + " has the wrong type");
        }
    }

    const ordered_json *child(const char *key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    std::string key_path(const char *key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (const auto &item : j_.items()) {
            if (!seen_.count(item.key())) {
                throw ConfigError("unknown config key " + key_path(item.key().c_str()));
            }
        }
    }

  private:
    std::string where() const { return path_.empty() ? "config" : "config key " + path_; }
    const ordered_json &j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class F>
void section(ObjectReader &parent, const char *key, F &&read) {
    if (const auto *j = parent.child(key)) {
        ObjectReader r(*j, parent.key_path(key));
        read(r);
        r.finish();
    }
}

void require(bool ok, const std::string &msg) {
    if (!ok) {
        throw ConfigError(msg);
    }
}

} // namespace

void RunConfig::validate() const {
    require(!paths.output.empty(), "paths.output must not be empty");
    require(!models.empty(), "models must name at least one model class");
    model_classes();
    require(workers >= 1, "workers must be >= 1");
    require(fit.epochs >= 1, "fit.epochs must be >= 1");
    require(fit.gradient == "adjoint" || fit.gradient == "parameter_shift",
            "fit.gradient must be adjoint or parameter_shift");
    for (auto m : model_classes()) {
        fit_config(m).validate();
    }
    replica_options().validate();
    require(pseudodata.generator == "basic" || pseudodata.generator == "realistic",
            "pseudodata.generator must be basic or realistic");
    require(pseudodata.noise_scale >= 0.0 && std::isfinite(pseudodata.noise_scale),
            "pseudodata.noise_scale must be >= 0");
    require(qualifier.noise_scale >= 0.0 && std::isfinite(qualifier.noise_scale),
            "qualifier.noise_scale must be >= 0");
    require(qualifier.threshold >= 0.0, "qualifier.threshold must be >= 0");
    require(global.replicas >= 2, "global.replicas must be >= 2");
    require(global.source == "qualified" || (models::parse_model_class(global.source), true),
            "global.source must be qualified or a model name");
    global_spec().validate();
    global_options().validate();
    for (const auto *axis : {&global.grid.xB, &global.grid.t, &global.grid.Q2}) {
        const double n = (*axis)[2];
        require(std::isfinite((*axis)[0]) && std::isfinite((*axis)[1]) && n >= 1 &&
                    n == std::floor(n) && n <= 1e6,
                "global.grid axes are [lo, hi, n] with an integer n >= 1");
    }
}

std::vector<models::ModelClass> RunConfig::model_classes() const {
    std::vector<models::ModelClass> out;
    for (const auto &m : models) {
        const auto c = models::parse_model_class(m);
        for (auto seen : out) {
            require(seen != c, "models lists " + m + " twice");
        }
        out.push_back(c);
    }
    return out;
}

training::FitConfig RunConfig::fit_config(models::ModelClass m) const {
    auto c = training::default_fit_config(m, fit.epochs);
    if (!fit.layerwise_growth) {
        c.growth = {};
    }
    c.lr_classical = fit.lr_classical;
    c.lr_quantum = fit.lr_quantum;
    c.beta1 = fit.beta1;
    c.beta2 = fit.beta2;
    c.adam_eps = fit.adam_eps;
    c.early_stop_loss = fit.early_stop_loss;
    c.seed = seed;
    c.trace_stride = fit.epochs;
    return c;
}

models::ModelOptions RunConfig::model_options(models::ModelClass m) const {
    auto o = models::ModelOptions::defaults(m);
    o.gradient = fit.gradient == "adjoint" ? models::CircuitGradient::Adjoint
                                           : models::CircuitGradient::ParameterShift;
    return o;
}

training::ReplicaOptions RunConfig::replica_options() const {
    training::ReplicaOptions r;
    r.n_replicas = replicas.count;
    r.mode = training::parse_resample_mode(replicas.mode);
    r.outlier_factor = replicas.outlier_factor;
    r.workers = workers;
    return r;
}

globalfit::GlobalNetSpec RunConfig::global_spec() const {
    auto s = globalfit::GlobalNetSpec::small(global.layers, global.width, global.dropout);
    s.batch_norm.assign(global.layers, global.batch_norm);
    if (!global.activations.empty()) {
        require(global.activations.size() == global.layers,
                "global.activations needs one entry per layer");
        s.activations.clear();
        for (const auto &a : global.activations) {
            s.activations.push_back(models::parse_activation(a));
        }
    }
    return s;
}

globalfit::GlobalTrainOptions RunConfig::global_options() const {
    globalfit::GlobalTrainOptions o;
    o.epochs = global.epochs;
    o.lr = global.lr;
    o.workers = workers;
    return o;
}

RunConfig parse_config(std::string_view text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    ObjectReader root(j, "");
    section(root, "paths", [&](ObjectReader &r) {
        r.get("data", c.paths.data);
        r.get("truth", c.paths.truth);
        r.get("reference", c.paths.reference);
        r.get("output", c.paths.output);
    });
    root.get("models", c.models);
    root.get("seed", c.seed);
    root.get("workers", c.workers);
    section(root, "fit", [&](ObjectReader &r) {
        r.get("epochs", c.fit.epochs);
        r.get("lr_classical", c.fit.lr_classical);
        r.get("lr_quantum", c.fit.lr_quantum);
        r.get("beta1", c.fit.beta1);
        r.get("beta2", c.fit.beta2);
        r.get("adam_eps", c.fit.adam_eps);
        r.get("early_stop_loss", c.fit.early_stop_loss);
        r.get("gradient", c.fit.gradient);
        r.get("layerwise_growth", c.fit.layerwise_growth);
    });
    section(root, "replicas", [&](ObjectReader &r) {
        r.get("count", c.replicas.count);
        r.get("mode", c.replicas.mode);
        r.get("outlier_factor", c.replicas.outlier_factor);
    });
    section(root, "pseudodata", [&](ObjectReader &r) {
        r.get("generator", c.pseudodata.generator);
        r.get("noise_scale", c.pseudodata.noise_scale);
        r.get("synthetic_bins", c.pseudodata.synthetic_bins);
        r.get("template_seed", c.pseudodata.template_seed);
        r.get("qualifier_grid", c.pseudodata.qualifier_grid);
    });
    section(root, "qualifier", [&](ObjectReader &r) {
        r.get("noise_scale", c.qualifier.noise_scale);
        r.get("threshold", c.qualifier.threshold);
    });
    section(root, "global", [&](ObjectReader &r) {
        r.get("replicas", c.global.replicas);
        r.get("epochs", c.global.epochs);
        r.get("lr", c.global.lr);
        r.get("layers", c.global.layers);
        r.get("width", c.global.width);
        r.get("dropout", c.global.dropout);
        r.get("batch_norm", c.global.batch_norm);
        r.get("activations", c.global.activations);
        r.get("source", c.global.source);
        section(r, "grid", [&](ObjectReader &g) {
            g.get("xB", c.global.grid.xB);
            g.get("t", c.global.grid.t);
            g.get("Q2", c.global.grid.Q2);
        });
    });
    root.finish();
    try {
        c.validate();
    } catch (const ConfigError &) {
        throw;
    } catch (const Error &e) {
        throw ConfigError(e.what());
    }
    return c;
}

RunConfig load_config(const std::string &path) {
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const IoError &e) {
        throw ConfigError(e.what());
    }
    return parse_config(text);
}

std::string dump_config(const RunConfig &c) {
    ordered_json j;
    j["paths"] = {{"data", c.paths.data},
                  {"truth", c.paths.truth},
                  {"reference", c.paths.reference},
                  {"output", c.paths.output}};
    j["models"] = c.models;
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["fit"] = {{"epochs", c.fit.epochs},
                {"lr_classical", c.fit.lr_classical},
                {"lr_quantum", c.fit.lr_quantum},
                {"beta1", c.fit.beta1},
                {"beta2", c.fit.beta2},
                {"adam_eps", c.fit.adam_eps},
                {"early_stop_loss", c.fit.early_stop_loss},
                {"gradient", c.fit.gradient},
                {"layerwise_growth", c.fit.layerwise_growth}};
    j["replicas"] = {{"count", c.replicas.count},
                     {"mode", c.replicas.mode},
                     {"outlier_factor", c.replicas.outlier_factor}};
    j["pseudodata"] = {{"generator", c.pseudodata.generator},
                       {"noise_scale", c.pseudodata.noise_scale},
                       {"synthetic_bins", c.pseudodata.synthetic_bins},
                       {"template_seed", c.pseudodata.template_seed},
                       {"qualifier_grid", c.pseudodata.qualifier_grid}};
    j["qualifier"] = {{"noise_scale", c.qualifier.noise_scale},
                      {"threshold", c.qualifier.threshold}};
    j["global"] = {{"replicas", c.global.replicas},
                   {"epochs", c.global.epochs},
                   {"lr", c.global.lr},
                   {"layers", c.global.layers},
                   {"width", c.global.width},
                   {"dropout", c.global.dropout},
                   {"batch_norm", c.global.batch_norm},
                   {"activations", c.global.activations},
                   {"source", c.global.source},
                   {"grid", {{"xB", c.global.grid.xB}, {"t", c.global.grid.t}, {"Q2", c.global.grid.Q2}}}};
    return j.dump(2) + "\n";
}

} // namespace qcff::cli
