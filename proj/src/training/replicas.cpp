#include "qcff/training/replicas.hpp"

#include <algorithm>
#include <cctype>
#include <random>

#include "qcff/errors.hpp"
#include "qcff/util/parallel.hpp"
#include "qcff/util/rng.hpp"

namespace qcff::training {

std::string to_string(ResampleMode m) {
    return m == ResampleMode::Gaussian ? "gaussian" : "identical";
}

ResampleMode parse_resample_mode(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "gaussian") return ResampleMode::Gaussian;
    if (s == "identical") return ResampleMode::Identical;
    throw ConfigError("unknown resample mode '" + std::string(name) + "'");
}

void ReplicaOptions::validate() const {
    if (n_replicas < 2) {
        throw ConfigError("at least 2 replicas are required");
    }
    if (!(outlier_factor > 1.0)) {
        throw ConfigError("outlier_factor must exceed 1");
    }
}

std::vector<physics::CFFSet> ReplicaEnsemble::included() const {
    std::vector<physics::CFFSet> out;
    for (const auto &r : replicas) {
        if (r.ok && !r.excluded) {
            out.push_back(r.cffs);
        }
    }
    return out;
}

void flag_outliers(ReplicaEnsemble &ensemble, double factor) {
    std::vector<double> losses;
    for (auto &r : ensemble.replicas) {
        r.excluded = false;
        if (r.ok) {
            losses.push_back(r.final_loss);
        }
    }
    ensemble.n_excluded = 0;
    if (losses.empty()) {
        return;
    }
    const auto mid = losses.begin() + static_cast<std::ptrdiff_t>(losses.size() / 2);
    std::nth_element(losses.begin(), mid, losses.end());
    double median = *mid;
    if (losses.size() % 2 == 0) {
        median = 0.5 * (median + *std::max_element(losses.begin(), mid));
    }
    for (auto &r : ensemble.replicas) {
        if (r.ok && r.final_loss > factor * median) {
            r.excluded = true;
            ++ensemble.n_excluded;
        }
    }
}

ReplicaEnsemble fit_replicas(models::ModelClass model, const KinematicBin &bin,
                             const ReplicaOptions &replicas, const FitConfig &config,
                             const models::ModelOptions &options) {
    replicas.validate();
    config.validate();
    bin.validate();
    const auto response = bin.response();
    const auto x = bin.inputs();
    const auto F = bin.F();
    const auto sigma = bin.sigmas();

    ReplicaEnsemble ens;
    ens.set_id = bin.set_id;
    ens.model = model;
    ens.mode = replicas.mode;
    ens.replicas.resize(replicas.n_replicas);

    parallel_for(replicas.n_replicas, replicas.workers, [&](std::size_t r) {
        ReplicaRecord &rec = ens.replicas[r];
        rec.index = r;
        rec.noise_seed = derive_seed(config.seed, bin.set_id, r, streams::kNoise);
        rec.init_seed = replicas.vary_seed
                            ? derive_seed(config.seed, bin.set_id, r, streams::kInit)
                            : config.seed;
        std::vector<double> target = F;
        if (replicas.mode == ResampleMode::Gaussian) {
            Rng rng(rec.noise_seed);
            std::normal_distribution<double> nd(0.0, 1.0);
            for (std::size_t i = 0; i < target.size(); ++i) {
                target[i] += sigma[i] * nd(rng);
            }
        }
        FitConfig c = config;
        c.seed = rec.init_seed;
        c.trace_stride = std::max<std::size_t>(c.epochs, 1);
        try {
            const auto res = fit_targets(model, response, x, target, sigma, c, options);
            rec.cffs = res.cffs;
            rec.final_loss = res.final_loss;
            rec.epochs_run = res.epochs_run;
            rec.ok = true;
        } catch (const Error &e) {
            rec.ok = false;
            rec.error = e.what();
        }
    });

    for (const auto &r : ens.replicas) {
        ens.n_failed += r.ok ? 0 : 1;
    }
    flag_outliers(ens, replicas.outlier_factor);
    return ens;
}

} // namespace qcff::training
