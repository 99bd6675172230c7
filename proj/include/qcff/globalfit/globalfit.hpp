#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcff/models/mlp.hpp"
#include "qcff/physics/forward_model.hpp"

namespace qcff::globalfit {

/// Input features are (xB, t, Q2, xi) with xi = xB / (2 - xB).
inline constexpr std::size_t kNumFeatures = 4;
std::array<double, kNumFeatures> features(double xB, double t, double Q2);

struct GlobalNetSpec {
    std::vector<std::size_t> hidden;             // widths of the hidden layers
    std::vector<models::Activation> activations; // one per hidden layer
    std::vector<bool> batch_norm;                // one per hidden layer
    std::vector<double> dropout;                 // one per hidden layer, training only

    /// 8 x 36 with the cyclic order relu, leaky, tanh, relu6, tanhshrink,
    /// relu, tanh, leaky; dropout 0.1, batch norm off.
    static GlobalNetSpec standard();
    /// Same activation cycle on `layers` x `width`; used for toy ensembles.
    static GlobalNetSpec small(std::size_t layers, std::size_t width, double dropout = 0.1);

    /// Throws ConfigError for inconsistent lengths, zero widths, or dropout
    /// outside {0} and [0.1, 0.5].
    void validate() const;
    models::MlpSpec mlp() const;
};

/// Per-bin local extraction handed to the global fit.
struct LocalExtraction {
    std::int64_t set_id = 0;
    double xB = 0.0;
    double t = 0.0;
    double Q2 = 0.0;
    physics::CFFSet mean;
    physics::CFFSet sigma; // nonnegative; zero disables the jitter
};

struct GlobalTrainOptions {
    std::size_t epochs = 400;
    double lr = 2e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    bool bootstrap = true; // resample bins with replacement
    bool jitter = true;    // add sigma * N(0, 1) to each target
    std::size_t workers = 1;

    void validate() const;
};

/// Affine standardisation z = (v - shift) / scale, per column.
struct Standardizer {
    std::vector<double> shift;
    std::vector<double> scale;
};

struct GlobalReplica {
    std::size_t index = 0;
    std::vector<std::size_t> bootstrap; // indices into the training set
    std::vector<double> params;
    models::BatchNormState bn; // running statistics, empty without batch norm
    double final_loss = 0.0;   // inference-mode loss on the resample
    bool ok = true;
    std::string error;
};

struct GlobalEnsemble {
    GlobalNetSpec spec;
    std::uint64_t seed = 0;
    Standardizer inputs;
    Standardizer targets;
    std::vector<std::array<double, 3>> hull_points; // training (xB, t, Q2)
    std::vector<GlobalReplica> replicas;

    std::size_t n_ok() const;
};

/// Trains one network per replica on a bootstrap resample of `data` with
/// sigma-jittered CFF targets. Replica r draws its resample and jitter from
/// stream kBootstrap, its initial weights from kInit and its dropout masks
/// from kDropout, all keyed by (seed, 0, r). A replica whose loss turns
/// non-finite is kept with ok = false and ignored by predictions.
/// Throws InsufficientReplicasError for n_replicas < 2 and
/// DegenerateDataError for empty data.
GlobalEnsemble train_global(std::span<const LocalExtraction> data, const GlobalNetSpec &spec,
                            std::size_t n_replicas, std::uint64_t seed,
                            const GlobalTrainOptions &options = {});

struct EnsembleStats {
    physics::CFFSet mean;
    physics::CFFSet sigma; // divides by N - 1
};

/// Mean and N-1 standard deviation per CFF. Throws EmptyEnsembleError for
/// no values and InsufficientReplicasError for one.
EnsembleStats ensemble_stats(std::span<const physics::CFFSet> values);

struct GlobalPrediction {
    physics::CFFSet mean;
    physics::CFFSet sigma;
    bool extrapolated = false; // outside the convex hull of the training kinematics
};

/// Prediction of one replica (dropout off).
physics::CFFSet predict_replica(const GlobalEnsemble &ens, std::size_t replica, double xB,
                                double t, double Q2);

/// Ensemble mean and sigma over the usable replicas. Throws
/// EmptyEnsembleError when none are usable.
GlobalPrediction predict_global(const GlobalEnsemble &ens, double xB, double t, double Q2);

/// Whether p lies in the convex hull of `points`, decided by a
/// non-negative least-squares fit of convex weights in standardised
/// coordinates.
bool in_convex_hull(std::span<const std::array<double, 3>> points,
                    const std::array<double, 3> &p, double tol = 1e-7);

/// Lawson-Hanson non-negative least squares: argmin |A x - b| with x >= 0.
/// A is row-major with `cols` columns.
std::vector<double> nnls(std::span<const double> A, std::size_t cols, std::span<const double> b);

struct GridAxis {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 1;
    std::vector<double> values() const;
};

struct SurfacePoint {
    double xB = 0.0;
    double t = 0.0;
    double Q2 = 0.0;
    GlobalPrediction prediction;
};

/// Predictions on the tensor grid, xB outermost and Q2 innermost.
std::vector<SurfacePoint> surface(const GlobalEnsemble &ens, const GridAxis &xB,
                                  const GridAxis &t, const GridAxis &Q2);

/// CSV: xB,t,Q2,ReH,ReH_sigma,ReE,ReE_sigma,ReHt,ReHt_sigma,DVCS,DVCS_sigma,extrapolated
void write_surface_csv(std::ostream &os, std::span<const SurfacePoint> points);
std::vector<SurfacePoint> read_surface_csv(std::istream &is);

/// JSON round trip of a trained ensemble.
void write_ensemble(std::ostream &os, const GlobalEnsemble &ens);
GlobalEnsemble read_ensemble(std::istream &is);

} // namespace qcff::globalfit
