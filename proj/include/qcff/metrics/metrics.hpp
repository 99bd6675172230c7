#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qcff/physics/forward_model.hpp"
#include "qcff/pseudodata/generator.hpp"
#include "qcff/training/replicas.hpp"

namespace qcff::metrics {

using PerCff = std::array<double, 4>;

PerCff mean_cffs(std::span<const physics::CFFSet> cffs);

/// |mean - truth| per target. Throws MissingTruthError without a truth and
/// EmptyEnsembleError for an empty ensemble.
PerCff accuracy(std::span<const physics::CFFSet> cffs,
                const std::optional<physics::CFFSet> &truth);

/// Population standard deviation (divides by N). Throws
/// InsufficientReplicasError for N < 2.
PerCff precision(std::span<const physics::CFFSet> cffs);

/// Sample standard deviation (divides by N - 1). Throws
/// InsufficientReplicasError for N < 2.
double sample_sigma(std::span<const double> values);

struct ErrorReport {
    PerCff accuracy{};
    PerCff precision{};
    PerCff algorithmic{};
    PerCff methodological{};
};

/// Spread of fits to identical copies of the bin with independent seeds.
PerCff algorithmic_error(models::ModelClass model, const training::KinematicBin &bin,
                         std::size_t n_replicas, const training::FitConfig &config,
                         const models::ModelOptions &options, std::size_t workers = 1);

struct MethodologicalOptions {
    std::size_t n_draws = 20;
    double param_spread = 0.05; // relative, per generator parameter
    double noise_scale = 0.0;   // noise on the regenerated pseudodata
    std::uint64_t seed = 17;
    std::size_t workers = 1;
};

/// Population spread of (extracted - truth) over fits to pseudodata built
/// from perturbed generators at the template's kinematics.
PerCff methodological_error(models::ModelClass model, const training::KinematicBin &templ,
                            const pseudodata::GeneratorSet &generator,
                            const MethodologicalOptions &mopts,
                            const training::FitConfig &config,
                            const models::ModelOptions &options);

struct BinSummary {
    physics::CFFSet mean;
    physics::CFFSet truth;
    physics::CFFSet sigma;
};

/// Sum over targets of the bin-averaged (mean - truth)^2 / sigma^2.
/// Throws ZeroSigmaError for a zero sigma and EmptyEnsembleError for no bins.
double m_chi2(std::span<const BinSummary> bins);

inline constexpr double kPhiMinDeg = 7.5;
inline constexpr double kPhiMaxDeg = 352.5;
inline constexpr int kSimpsonIntervals = 2048;

/// Composite Simpson rule; `intervals` is rounded up to an even count.
double simpson(const std::function<double(double)> &f, double a, double b,
               int intervals = kSimpsonIntervals);

/// Integral of |fit(phi) - truth(phi)| over [phi_min, phi_max], phi in degrees.
/// Sign changes are bracketed on the Simpson grid and refined by bisection;
/// each smooth piece is then integrated by Simpson.
double m_dvcs(const std::function<double(double)> &fit, const std::function<double(double)> &truth,
              double phi_min_deg = kPhiMinDeg, double phi_max_deg = kPhiMaxDeg);

/// M_DVCS between the forward-model curves of two CFF sets.
double m_dvcs(const physics::Kinematics &kin, const physics::FormFactors &ff,
              const physics::CFFSet &fit, const physics::CFFSet &truth,
              double phi_min_deg = kPhiMinDeg, double phi_max_deg = kPhiMaxDeg);

/// M_cdnn / M_qdnn - 1. Throws DivisionByZeroError for m_qdnn == 0 and
/// DomainError for negative inputs.
double xi_outperformance(double m_cdnn, double m_qdnn);

/// Residual sum of squares of the OLS line over the total sum of squares.
/// Throws DegenerateDataError for fewer than 3 points, constant y or
/// constant x.
double nonlinearity(std::span<const double> x, std::span<const double> y);

/// Nonlinearity of the bin's (phi, F) points.
double bin_nonlinearity(const training::KinematicBin &bin);

struct ScaledError {
    double value = 0.0;
    std::size_t n_used = 0;
    std::size_t n_excluded = 0; // (point, replica) pairs with F <= 0
};

/// Mean of s sigma_i / F_{i,r} over points i and replicas r; pairs with
/// F <= 0 are skipped and counted.
ScaledError avg_scaled_error(std::span<const double> sigma,
                             const std::vector<std::vector<double>> &F_replicas, double s);

struct QualifierFeatures {
    double eps_bar_s = 0.0;
    double nonlinearity = 0.0;
    double xi_hat = 0.0;
    std::optional<double> xi; // measured outperformance, when available
};

inline constexpr double kQualifierEps = 1.98;
inline constexpr double kQualifierNonlin = -0.132;
inline constexpr double kQualifierConst = -0.583;

double qualifier(double eps_bar_s, double nonlinearity);
QualifierFeatures make_features(double eps_bar_s, double nonlinearity);

enum class Recommendation { QDNN, CDNN, Tie };
/// QDNN iff xi_hat > threshold, CDNN iff xi_hat < -threshold.
Recommendation recommend(double xi_hat, double threshold = 0.0);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t n_used = 0;
    std::size_t n_excluded = 0;
};

/// Ordinary least squares of y on x. Throws DegenerateDataError for fewer
/// than 3 points or constant x.
LinearFit ols(std::span<const double> x, std::span<const double> y);

/// OLS of measured xi on xi_hat. With outlier_z > 0, pairs whose residual
/// exceeds outlier_z robust standard deviations (1.4826 MAD) of the first
/// fit are dropped and the line refitted.
LinearFit qualifier_calibration(std::span<const double> xi_hat, std::span<const double> xi,
                                double outlier_z = 3.5);

struct RankCorrelation {
    double rho = 0.0;
    double p_value = 1.0; // two-sided, t approximation with n - 2 dof
};

/// Spearman rank correlation with average ranks for ties. Throws
/// DegenerateDataError for fewer than 3 pairs or a constant variable.
RankCorrelation spearman(std::span<const double> x, std::span<const double> y);

/// Median; the mean of the two middle values for an even count. Throws
/// EmptyEnsembleError for no values.
double median(std::vector<double> values);

/// A model class with the settings it is trained under.
struct ModelSetup {
    models::ModelClass model = models::ModelClass::CDNN;
    training::FitConfig config;
    models::ModelOptions options;

    static ModelSetup defaults(models::ModelClass model, std::size_t epochs = 2000);
};

struct CellOptions {
    std::size_t n_replicas = 50;
    std::uint64_t seed = 23; // pseudodata noise
    std::size_t workers = 1;
};

/// Both model classes fitted to the same pseudodata replicas of one
/// (bin, noise scale) cell.
struct CellResult {
    std::int64_t set_id = 0;
    double noise_scale = 0.0;
    double eps_bar_s = 0.0;
    double nonlinearity = 0.0; // mean over replicas of the (phi, F) nonlinearity
    double xi_hat = 0.0;
    std::vector<double> m_cdnn; // M_DVCS per replica against the truth curve
    std::vector<double> m_qdnn;
    double median_m_cdnn = 0.0;
    double median_m_qdnn = 0.0;
    double median_xi = 0.0; // median over replicas of M_cdnn / M_qdnn - 1
    std::size_t n_failed = 0;
};

/// Replica r is make_pseudobin(templ, truth, s) with noise seed
/// derive_seed(seed, set_id, r, kNoise), so every noise scale sees the same
/// standard-normal draws. Each model is initialised from
/// derive_seed(config.seed, set_id, r, kInit). A replica where either fit
/// throws a NumericError is dropped from both lists and counted.
CellResult compare_on_pseudodata(const training::KinematicBin &templ,
                                 const physics::CFFSet &truth, double noise_scale,
                                 const ModelSetup &classical, const ModelSetup &quantum,
                                 const CellOptions &options);

} // namespace qcff::metrics
