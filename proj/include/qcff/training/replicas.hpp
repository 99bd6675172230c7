#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qcff/models/regressor.hpp"
#include "qcff/physics/forward_model.hpp"
#include "qcff/training/data.hpp"
#include "qcff/training/fit.hpp"

namespace qcff::training {

/// Gaussian: F_i redrawn from Normal(F_i, sigma_i) per replica.
/// Identical: every replica sees the same data.
enum class ResampleMode { Gaussian, Identical };

std::string to_string(ResampleMode m);
ResampleMode parse_resample_mode(std::string_view name);

struct ReplicaOptions {
    std::size_t n_replicas = 100;
    ResampleMode mode = ResampleMode::Gaussian;
    /// Independent initialisation per replica. With false every replica
    /// starts from config.seed.
    bool vary_seed = true;
    std::size_t workers = 1;
    /// Replicas with final loss above outlier_factor * median are excluded.
    double outlier_factor = 10.0;

    void validate() const;
};

struct ReplicaRecord {
    std::size_t index = 0;
    std::uint64_t init_seed = 0;
    std::uint64_t noise_seed = 0;
    physics::CFFSet cffs;
    double final_loss = 0.0;
    std::size_t epochs_run = 0;
    bool ok = false;
    std::string error; // set when the fit threw
    bool excluded = false;
};

struct ReplicaEnsemble {
    std::int64_t set_id = 0;
    models::ModelClass model = models::ModelClass::CDNN;
    ResampleMode mode = ResampleMode::Gaussian;
    std::vector<ReplicaRecord> replicas;
    std::size_t n_failed = 0;
    std::size_t n_excluded = 0; // outliers only, failed fits not counted

    /// CFFs of replicas that converged and were not excluded.
    std::vector<physics::CFFSet> included() const;
};

/// Replica r uses derive_seed(config.seed, set_id, r, kNoise) for its noise
/// and derive_seed(config.seed, set_id, r, kInit) for its initialisation.
/// Fit errors are recorded per replica. Any worker count gives the same
/// ensemble.
ReplicaEnsemble fit_replicas(models::ModelClass model, const KinematicBin &bin,
                             const ReplicaOptions &replicas, const FitConfig &config,
                             const models::ModelOptions &options);

/// Marks outliers in place and updates n_excluded.
void flag_outliers(ReplicaEnsemble &ensemble, double factor);

} // namespace qcff::training
