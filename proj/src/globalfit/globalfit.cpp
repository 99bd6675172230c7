#include "qcff/globalfit/globalfit.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "qcff/errors.hpp"
#include "qcff/util/format.hpp"
#include "qcff/util/parallel.hpp"
#include "qcff/util/rng.hpp"

namespace qcff::globalfit {

using physics::CFFSet;

std::array<double, kNumFeatures> features(double xB, double t, double Q2) {
    return {xB, t, Q2, xB / (2.0 - xB)};
}

GlobalNetSpec GlobalNetSpec::small(std::size_t layers, std::size_t width, double dropout) {
    using models::Activation;
    static constexpr std::array<Activation, 8> cycle{
        Activation::ReLU,       Activation::LeakyReLU, Activation::Tanh, Activation::ReLU6,
        Activation::Tanhshrink, Activation::ReLU,      Activation::Tanh, Activation::LeakyReLU};
    GlobalNetSpec s;
    s.hidden.assign(layers, width);
    for (std::size_t l = 0; l < layers; ++l) {
        s.activations.push_back(cycle[l % cycle.size()]);
    }
    s.batch_norm.assign(layers, false);
    s.dropout.assign(layers, dropout);
    return s;
}

GlobalNetSpec GlobalNetSpec::standard() { return small(8, 36, 0.1); }

void GlobalNetSpec::validate() const {
    if (hidden.empty()) {
        throw ConfigError("global net needs at least one hidden layer");
    }
    if (activations.size() != hidden.size() || batch_norm.size() != hidden.size() ||
        dropout.size() != hidden.size()) {
        throw ConfigError("global net activations, batch_norm and dropout need one entry per "
                          "hidden layer (" + std::to_string(hidden.size()) + ")");
    }
    for (std::size_t w : hidden) {
        if (w == 0) {
            throw ConfigError("global net hidden widths must be positive");
        }
    }
    for (double p : dropout) {
        if (!(p == 0.0 || (p >= 0.1 && p <= 0.5))) {
            throw ConfigError("global net dropout must be 0 or in [0.1, 0.5], got " +
                              format_double(p));
        }
    }
}

models::MlpSpec GlobalNetSpec::mlp() const {
    validate();
    models::MlpSpec m;
    m.widths.push_back(kNumFeatures);
    m.widths.insert(m.widths.end(), hidden.begin(), hidden.end());
    m.widths.push_back(CFFSet::size());
    m.activations = activations;
    m.batch_norm = batch_norm;
    return m;
}

void GlobalTrainOptions::validate() const {
    if (!(lr > 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) ||
        !(eps > 0.0)) {
        throw ConfigError("global training needs lr > 0, betas in [0, 1) and eps > 0");
    }
}

std::size_t GlobalEnsemble::n_ok() const {
    return static_cast<std::size_t>(
        std::count_if(replicas.begin(), replicas.end(), [](const auto &r) { return r.ok; }));
}

namespace {

Standardizer fit_standardizer(const std::vector<std::vector<double>> &rows) {
    const std::size_t d = rows.front().size();
    Standardizer s{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
    const double n = static_cast<double>(rows.size());
    for (std::size_t k = 0; k < d; ++k) {
        double m = 0.0;
        for (const auto &r : rows) m += r[k];
        m /= n;
        double ss = 0.0;
        for (const auto &r : rows) ss += (r[k] - m) * (r[k] - m);
        const double sd = std::sqrt(ss / n);
        s.shift[k] = m;
        s.scale[k] = sd > 1e-12 * std::max(1.0, std::abs(m)) ? sd : 1.0;
    }
    return s;
}

Eigen::VectorXd input_column(const GlobalEnsemble &ens, double xB, double t, double Q2) {
    const auto f = features(xB, t, Q2);
    Eigen::VectorXd x(kNumFeatures);
    for (std::size_t k = 0; k < kNumFeatures; ++k) {
        x[static_cast<Eigen::Index>(k)] = (f[k] - ens.inputs.shift[k]) / ens.inputs.scale[k];
    }
    return x;
}

void train_replica(const models::Mlp &net, const GlobalNetSpec &spec, const Eigen::MatrixXd &X_all,
                   const Eigen::MatrixXd &T_mean, const Eigen::MatrixXd &T_sigma,
                   std::uint64_t seed, const GlobalTrainOptions &o, GlobalReplica &rep) {
    const auto n = X_all.cols();
    const std::size_t r = rep.index;
    Rng boot(derive_seed(seed, 0, r, streams::kBootstrap));
    rep.bootstrap.resize(static_cast<std::size_t>(n));
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        rep.bootstrap[static_cast<std::size_t>(i)] =
            static_cast<std::size_t>(o.bootstrap ? pick(boot) : i);
    }
    Eigen::MatrixXd X(X_all.rows(), n);
    Eigen::MatrixXd T(T_mean.rows(), n);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto j = static_cast<Eigen::Index>(rep.bootstrap[static_cast<std::size_t>(i)]);
        X.col(i) = X_all.col(j);
        for (Eigen::Index k = 0; k < T.rows(); ++k) {
            const double z = o.jitter ? nd(boot) : 0.0;
            T(k, i) = T_mean(k, j) + z * T_sigma(k, j);
        }
    }

    Rng init(derive_seed(seed, 0, r, streams::kInit));
    Rng drop(derive_seed(seed, 0, r, streams::kDropout));
    rep.params = net.init_params(init);
    const bool any_bn = std::find(spec.batch_norm.begin(), spec.batch_norm.end(), true) !=
                        spec.batch_norm.end();
    rep.bn = any_bn ? net.init_batch_norm_state() : models::BatchNormState{};

    models::MlpTrainOptions to;
    to.dropout = spec.dropout;
    to.rng = &drop;
    to.bn_state = any_bn ? &rep.bn : nullptr;

    const std::size_t P = rep.params.size();
    std::vector<double> m(P, 0.0), v(P, 0.0), grad(P);
    const double scale = 1.0 / static_cast<double>(T.size());
    models::Mlp::Tape tape;
    for (std::size_t epoch = 0; epoch < o.epochs; ++epoch) {
        const Eigen::MatrixXd Y = net.forward_train(rep.params, X, tape, to);
        const Eigen::MatrixXd R = Y - T;
        const double L = R.squaredNorm() * scale;
        if (!std::isfinite(L)) {
            throw DivergenceError("global replica " + std::to_string(r) +
                                  " diverged at epoch " + std::to_string(epoch));
        }
        std::fill(grad.begin(), grad.end(), 0.0);
        net.backward(rep.params, tape, 2.0 * scale * R, grad);
        const double t1 = static_cast<double>(epoch + 1);
        const double c1 = 1.0 - std::pow(o.beta1, t1);
        const double c2 = 1.0 - std::pow(o.beta2, t1);
        for (std::size_t k = 0; k < P; ++k) {
            m[k] = o.beta1 * m[k] + (1.0 - o.beta1) * grad[k];
            v[k] = o.beta2 * v[k] + (1.0 - o.beta2) * grad[k] * grad[k];
            rep.params[k] -= o.lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + o.eps);
        }
    }
    const Eigen::MatrixXd Y = net.forward(rep.params, X, any_bn ? &rep.bn : nullptr);
    rep.final_loss = (Y - T).squaredNorm() * scale;
    if (!std::isfinite(rep.final_loss)) {
        throw DivergenceError("global replica " + std::to_string(r) + " has a non-finite loss");
    }
}

} // namespace

GlobalEnsemble train_global(std::span<const LocalExtraction> data, const GlobalNetSpec &spec,
                            std::size_t n_replicas, std::uint64_t seed,
                            const GlobalTrainOptions &options) {
    if (n_replicas < 2) {
        throw InsufficientReplicasError("global ensemble needs at least 2 replicas, got " +
                                        std::to_string(n_replicas));
    }
    if (data.empty()) {
        throw DegenerateDataError("global fit needs at least one local extraction");
    }
    options.validate();
    const models::Mlp net(spec.mlp());

    std::vector<std::vector<double>> in_rows, out_rows;
    for (const auto &e : data) {
        const auto f = features(e.xB, e.t, e.Q2);
        for (double v : f) {
            if (!std::isfinite(v)) {
                throw DomainError("global fit input for set " + std::to_string(e.set_id) +
                                  " is not finite");
            }
        }
        for (std::size_t k = 0; k < CFFSet::size(); ++k) {
            if (!std::isfinite(e.mean[k]) || !std::isfinite(e.sigma[k]) || e.sigma[k] < 0.0) {
                throw DomainError("global fit target for set " + std::to_string(e.set_id) +
                                  " needs finite mean and sigma >= 0");
            }
        }
        in_rows.emplace_back(f.begin(), f.end());
        const auto a = e.mean.to_array();
        out_rows.emplace_back(a.begin(), a.end());
    }

    GlobalEnsemble ens;
    ens.spec = spec;
    ens.seed = seed;
    ens.inputs = fit_standardizer(in_rows);
    ens.targets = fit_standardizer(out_rows);

    const auto n = static_cast<Eigen::Index>(data.size());
    Eigen::MatrixXd X(kNumFeatures, n), Tm(CFFSet::size(), n), Ts(CFFSet::size(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto &e = data[static_cast<std::size_t>(i)];
        X.col(i) = input_column(ens, e.xB, e.t, e.Q2);
        for (std::size_t k = 0; k < CFFSet::size(); ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            Tm(kk, i) = (e.mean[k] - ens.targets.shift[k]) / ens.targets.scale[k];
            Ts(kk, i) = e.sigma[k] / ens.targets.scale[k];
        }
        ens.hull_points.push_back({e.xB, e.t, e.Q2});
    }

    ens.replicas.resize(n_replicas);
    parallel_for(n_replicas, options.workers, [&](std::size_t r) {
        auto &rep = ens.replicas[r];
        rep.index = r;
        try {
            train_replica(net, spec, X, Tm, Ts, seed, options, rep);
        } catch (const NumericError &e) {
            rep.ok = false;
            rep.error = e.what();
        }
    });
    return ens;
}

EnsembleStats ensemble_stats(std::span<const CFFSet> values) {
    if (values.empty()) {
        throw EmptyEnsembleError("ensemble statistics need at least one replica");
    }
    if (values.size() < 2) {
        throw InsufficientReplicasError("ensemble sigma needs at least 2 replicas");
    }
    const double N = static_cast<double>(values.size());
    EnsembleStats s;
    for (std::size_t k = 0; k < CFFSet::size(); ++k) {
        double m = 0.0;
        for (const auto &v : values) m += v[k];
        m /= N;
        double ss = 0.0;
        for (const auto &v : values) ss += (v[k] - m) * (v[k] - m);
        s.mean[k] = m;
        s.sigma[k] = std::sqrt(ss / (N - 1.0));
    }
    return s;
}

CFFSet predict_replica(const GlobalEnsemble &ens, std::size_t replica, double xB, double t,
                       double Q2) {
    if (replica >= ens.replicas.size()) {
        throw IndexError("global replica " + std::to_string(replica) + " out of range");
    }
    const auto &rep = ens.replicas[replica];
    const models::Mlp net(ens.spec.mlp());
    Eigen::MatrixXd x = input_column(ens, xB, t, Q2);
    const Eigen::MatrixXd y = net.forward(rep.params, x, rep.bn.mean.empty() ? nullptr : &rep.bn);
    CFFSet out;
    for (std::size_t k = 0; k < CFFSet::size(); ++k) {
        out[k] = y(static_cast<Eigen::Index>(k), 0) * ens.targets.scale[k] + ens.targets.shift[k];
    }
    return out;
}

GlobalPrediction predict_global(const GlobalEnsemble &ens, double xB, double t, double Q2) {
    std::vector<CFFSet> preds;
    for (std::size_t r = 0; r < ens.replicas.size(); ++r) {
        if (ens.replicas[r].ok) {
            preds.push_back(predict_replica(ens, r, xB, t, Q2));
        }
    }
    if (preds.empty()) {
        throw EmptyEnsembleError("global ensemble has no usable replicas");
    }
    const auto s = ensemble_stats(preds);
    GlobalPrediction p{s.mean, s.sigma, false};
    p.extrapolated = !ens.hull_points.empty() && !in_convex_hull(ens.hull_points, {xB, t, Q2});
    return p;
}

std::vector<double> nnls(std::span<const double> A, std::size_t cols, std::span<const double> b) {
    if (cols == 0 || A.size() != cols * b.size()) {
        throw ShapeError("nnls: matrix has " + std::to_string(A.size()) + " entries for " +
                         std::to_string(b.size()) + " rows and " + std::to_string(cols) +
                         " columns");
    }
    const auto m = static_cast<Eigen::Index>(b.size());
    const auto n = static_cast<Eigen::Index>(cols);
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const RowMajor> M(A.data(), m, n);
    const Eigen::Map<const Eigen::VectorXd> y(b.data(), m);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);
    const double tol = 10.0 * std::numeric_limits<double>::epsilon() *
                       std::max<double>(static_cast<double>(std::max(m, n)), 1.0) *
                       std::max(1.0, M.cwiseAbs().maxCoeff());

    auto solve_passive = [&](Eigen::VectorXd &z) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
        }
        Eigen::MatrixXd Ap(m, static_cast<Eigen::Index>(idx.size()));
        for (std::size_t c = 0; c < idx.size(); ++c) Ap.col(static_cast<Eigen::Index>(c)) = M.col(idx[c]);
        const Eigen::VectorXd zp = Ap.colPivHouseholderQr().solve(y);
        z.setZero(n);
        for (std::size_t c = 0; c < idx.size(); ++c) z[idx[c]] = zp[static_cast<Eigen::Index>(c)];
    };

    const std::size_t max_outer = 3 * static_cast<std::size_t>(n) + 10;
    for (std::size_t it = 0; it < max_outer; ++it) {
        const Eigen::VectorXd w = M.transpose() * (y - M * x);
        Eigen::Index best = -1;
        double wmax = tol;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!passive[static_cast<std::size_t>(j)] && w[j] > wmax) {
                wmax = w[j];
                best = j;
            }
        }
        if (best < 0) {
            break;
        }
        passive[static_cast<std::size_t>(best)] = true;
        Eigen::VectorXd z;
        for (;;) {
            solve_passive(z);
            bool feasible = true;
            double alpha = 1.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) {
                    feasible = false;
                    alpha = std::min(alpha, x[j] / (x[j] - z[j]));
                }
            }
            if (feasible) {
                break;
            }
            x += alpha * (z - x);
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[static_cast<std::size_t>(j)] && x[j] <= tol) {
                    passive[static_cast<std::size_t>(j)] = false;
                    x[j] = 0.0;
                }
            }
        }
        x = z;
    }
    return {x.data(), x.data() + n};
}

bool in_convex_hull(std::span<const std::array<double, 3>> points, const std::array<double, 3> &p,
                    double tol) {
    if (points.empty()) {
        return false;
    }
    std::array<double, 3> mean{}, sd{};
    const double N = static_cast<double>(points.size());
    for (const auto &q : points) {
        for (std::size_t k = 0; k < 3; ++k) mean[k] += q[k] / N;
    }
    for (const auto &q : points) {
        for (std::size_t k = 0; k < 3; ++k) sd[k] += (q[k] - mean[k]) * (q[k] - mean[k]) / N;
    }
    for (auto &s : sd) {
        s = s > 0.0 ? std::sqrt(s) : 1.0;
    }
    // Rows: the three coordinates, then a heavily weighted sum-to-one row.
    const double w = 1e3;
    const std::size_t n = points.size();
    std::vector<double> A(4 * n);
    std::vector<double> b(4);
    for (std::size_t k = 0; k < 3; ++k) {
        for (std::size_t j = 0; j < n; ++j) A[k * n + j] = (points[j][k] - mean[k]) / sd[k];
        b[k] = (p[k] - mean[k]) / sd[k];
    }
    for (std::size_t j = 0; j < n; ++j) A[3 * n + j] = w;
    b[3] = w;
    const auto lam = nnls(A, n, b);
    double sum = 0.0;
    std::array<double, 3> r{};
    for (std::size_t j = 0; j < n; ++j) {
        sum += lam[j];
        for (std::size_t k = 0; k < 3; ++k) r[k] += lam[j] * A[k * n + j];
    }
    double res = (sum - 1.0) * (sum - 1.0);
    for (std::size_t k = 0; k < 3; ++k) res += (r[k] - b[k]) * (r[k] - b[k]);
    return std::sqrt(res) <= tol;
}

std::vector<double> GridAxis::values() const {
    if (n == 0 || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw ConfigError("grid axis needs n >= 1 and finite bounds");
    }
    if (n == 1) {
        return {lo};
    }
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return v;
}

std::vector<SurfacePoint> surface(const GlobalEnsemble &ens, const GridAxis &xB,
                                  const GridAxis &t, const GridAxis &Q2) {
    std::vector<SurfacePoint> out;
    for (double x : xB.values()) {
        for (double tt : t.values()) {
            for (double q : Q2.values()) {
                out.push_back({x, tt, q, predict_global(ens, x, tt, q)});
            }
        }
    }
    return out;
}

namespace {

std::string surface_header() {
    std::string h = "xB,t,Q2";
    for (const char *name : physics::kCffNames) {
        h += std::string(",") + name + "," + name + "_sigma";
    }
    return h + ",extrapolated";
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

} // namespace

void write_surface_csv(std::ostream &os, std::span<const SurfacePoint> points) {
    os << surface_header() << '\n';
    for (const auto &p : points) {
        os << format_double(p.xB) << ',' << format_double(p.t) << ',' << format_double(p.Q2);
        for (std::size_t k = 0; k < CFFSet::size(); ++k) {
            os << ',' << format_double(p.prediction.mean[k]) << ','
               << format_double(p.prediction.sigma[k]);
        }
        os << ',' << (p.prediction.extrapolated ? 1 : 0) << '\n';
    }
}

std::vector<SurfacePoint> read_surface_csv(std::istream &is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw SchemaError("surface CSV is empty");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != surface_header()) {
        throw SchemaError("surface CSV header mismatch: expected '" + surface_header() + "'");
    }
    std::vector<SurfacePoint> out;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        const auto f = split_commas(line);
        if (f.size() != 12) {
            throw SchemaError("surface CSV row " + std::to_string(row) + ": expected 12 columns, got " +
                              std::to_string(f.size()));
        }
        try {
            SurfacePoint p;
            p.xB = parse_double(f[0]);
            p.t = parse_double(f[1]);
            p.Q2 = parse_double(f[2]);
            for (std::size_t k = 0; k < CFFSet::size(); ++k) {
                p.prediction.mean[k] = parse_double(f[3 + 2 * k]);
                p.prediction.sigma[k] = parse_double(f[4 + 2 * k]);
            }
            if (f[11] != "0" && f[11] != "1") {
                throw SchemaError("extrapolated must be 0 or 1");
            }
            p.prediction.extrapolated = f[11] == "1";
            out.push_back(p);
        } catch (const SchemaError &e) {
            throw SchemaError("surface CSV row " + std::to_string(row) + ": " + e.what());
        }
    }
    return out;
}

void write_ensemble(std::ostream &os, const GlobalEnsemble &ens) {
    using nlohmann::json;
    json j;
    j["format"] = "qcff-global-ensemble";
    j["version"] = 1;
    j["seed"] = ens.seed;
    json spec;
    spec["hidden"] = ens.spec.hidden;
    std::vector<std::string> acts;
    for (auto a : ens.spec.activations) acts.push_back(models::to_string(a));
    spec["activations"] = acts;
    spec["batch_norm"] = ens.spec.batch_norm;
    spec["dropout"] = ens.spec.dropout;
    j["spec"] = spec;
    j["inputs"] = {{"shift", ens.inputs.shift}, {"scale", ens.inputs.scale}};
    j["targets"] = {{"shift", ens.targets.shift}, {"scale", ens.targets.scale}};
    j["hull_points"] = ens.hull_points;
    json reps = json::array();
    for (const auto &r : ens.replicas) {
        json jr;
        jr["index"] = r.index;
        jr["ok"] = r.ok;
        jr["error"] = r.error;
        jr["final_loss"] = r.ok ? json(r.final_loss) : json(nullptr);
        jr["bootstrap"] = r.bootstrap;
        jr["params"] = r.ok ? json(r.params) : json::array();
        json bm = json::array(), bv = json::array();
        for (std::size_t l = 0; l < r.bn.mean.size(); ++l) {
            bm.push_back(std::vector<double>(r.bn.mean[l].begin(), r.bn.mean[l].end()));
            bv.push_back(std::vector<double>(r.bn.var[l].begin(), r.bn.var[l].end()));
        }
        jr["bn_mean"] = bm;
        jr["bn_var"] = bv;
        reps.push_back(jr);
    }
    j["replicas"] = reps;
    os << j.dump(1) << '\n';
}

GlobalEnsemble read_ensemble(std::istream &is) {
    using nlohmann::json;
    try {
        const json j = json::parse(is);
        if (j.at("format") != "qcff-global-ensemble" || j.at("version") != 1) {
            throw SchemaError("not a version 1 global ensemble file");
        }
        GlobalEnsemble ens;
        ens.seed = j.at("seed").get<std::uint64_t>();
        const auto &s = j.at("spec");
        ens.spec.hidden = s.at("hidden").get<std::vector<std::size_t>>();
        for (const auto &a : s.at("activations")) {
            ens.spec.activations.push_back(models::parse_activation(a.get<std::string>()));
        }
        ens.spec.batch_norm = s.at("batch_norm").get<std::vector<bool>>();
        ens.spec.dropout = s.at("dropout").get<std::vector<double>>();
        const models::Mlp net(ens.spec.mlp());
        ens.inputs = {j.at("inputs").at("shift").get<std::vector<double>>(),
                      j.at("inputs").at("scale").get<std::vector<double>>()};
        ens.targets = {j.at("targets").at("shift").get<std::vector<double>>(),
                       j.at("targets").at("scale").get<std::vector<double>>()};
        if (ens.inputs.shift.size() != kNumFeatures || ens.inputs.scale.size() != kNumFeatures ||
            ens.targets.shift.size() != CFFSet::size() ||
            ens.targets.scale.size() != CFFSet::size()) {
            throw SchemaError("standardisation vectors have the wrong length");
        }
        ens.hull_points = j.at("hull_points").get<std::vector<std::array<double, 3>>>();
        for (const auto &jr : j.at("replicas")) {
            GlobalReplica r;
            r.index = jr.at("index").get<std::size_t>();
            r.ok = jr.at("ok").get<bool>();
            r.error = jr.at("error").get<std::string>();
            r.final_loss = r.ok ? jr.at("final_loss").get<double>() : 0.0;
            r.bootstrap = jr.at("bootstrap").get<std::vector<std::size_t>>();
            r.params = jr.at("params").get<std::vector<double>>();
            if (r.ok && r.params.size() != net.num_params()) {
                throw ShapeError("replica " + std::to_string(r.index) + " has " +
                                 std::to_string(r.params.size()) + " parameters, expected " +
                                 std::to_string(net.num_params()));
            }
            for (const auto &m : jr.at("bn_mean")) {
                const auto v = m.get<std::vector<double>>();
                r.bn.mean.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
            }
            for (const auto &m : jr.at("bn_var")) {
                const auto v = m.get<std::vector<double>>();
                r.bn.var.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
            }
            ens.replicas.push_back(std::move(r));
        }
        return ens;
    } catch (const json::exception &e) {
        throw SchemaError(std::string("global ensemble file: ") + e.what());
    }
}

} // namespace qcff::globalfit
