#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qcff/globalfit/globalfit.hpp"
#include "qcff/models/regressor.hpp"
#include "qcff/training/fit.hpp"
#include "qcff/training/replicas.hpp"

namespace qcff::cli {

struct Paths {
    std::string data = "data.csv";
    std::string truth;     // optional CFF truth table for evaluate
    std::string reference; // optional reference surface CSV for the global overlay
    std::string output = "qcff_out";
};

struct FitSettings {
    std::size_t epochs = 2000;
    double lr_classical = 1e-3;
    double lr_quantum = 5e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double early_stop_loss = 0.0;
    std::string gradient = "adjoint"; // or "parameter_shift"
    bool layerwise_growth = true;     // FQDNN only
};

struct ReplicaSettings {
    std::size_t count = 100;
    std::string mode = "gaussian"; // or "identical"
    double outlier_factor = 10.0;
};

struct PseudodataSettings {
    std::string generator = "basic"; // or "realistic"
    double noise_scale = 1.0;
    std::size_t synthetic_bins = 0; // > 0: synthetic templates instead of paths.data
    std::uint64_t template_seed = 7;
    bool qualifier_grid = false; // also write the 2500-spec manifest per set
};

struct QualifierSettings {
    double noise_scale = 1.0; // s applied to the measured sigma_F
    double threshold = 0.0;   // |xi_hat| <= threshold counts as a tie
};

struct GridSettings {
    std::array<double, 3> xB{0.1, 0.6, 26}; // lo, hi, n
    std::array<double, 3> t{-0.5, -0.1, 21};
    std::array<double, 3> Q2{2.5, 2.5, 1};
};

struct GlobalSettings {
    std::size_t replicas = 1000;
    std::size_t epochs = 400;
    double lr = 2e-3;
    std::size_t layers = 8;
    std::size_t width = 36;
    double dropout = 0.1;
    bool batch_norm = false;
    std::vector<std::string> activations; // empty: the default cycle
    /// "qualified" picks each bin's model from qualify.csv; otherwise a
    /// model name used for every bin.
    std::string source = "qualified";
    GridSettings grid;
};

/// Validated on load; unknown keys are rejected at every level.
struct RunConfig {
    Paths paths;
    std::vector<std::string> models{"cdnn", "fqdnn"};
    std::uint64_t seed = 42;
    std::size_t workers = 1;
    FitSettings fit;
    ReplicaSettings replicas;
    PseudodataSettings pseudodata;
    QualifierSettings qualifier;
    GlobalSettings global;

    /// Throws ConfigError naming the offending key.
    void validate() const;

    std::vector<models::ModelClass> model_classes() const;
    training::FitConfig fit_config(models::ModelClass m) const;
    models::ModelOptions model_options(models::ModelClass m) const;
    training::ReplicaOptions replica_options() const;
    globalfit::GlobalNetSpec global_spec() const;
    globalfit::GlobalTrainOptions global_options() const;
};

/// Parses JSON text; throws ConfigError on syntax errors, wrong types,
/// unknown keys or invalid values.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string &path);
/// Every key with its value, in a stable order.
std::string dump_config(const RunConfig &config);

} // namespace qcff::cli
