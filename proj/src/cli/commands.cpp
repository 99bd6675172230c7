#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "qcff/cli/app.hpp"
#include "qcff/errors.hpp"
#include "qcff/globalfit/globalfit.hpp"
#include "qcff/io/io.hpp"
#include "qcff/metrics/metrics.hpp"
#include "qcff/models/complexity.hpp"
#include "qcff/pseudodata/generator.hpp"
#include "qcff/util/format.hpp"
#include "qcff/util/rng.hpp"

namespace qcff::cli {

namespace fs = std::filesystem;
using physics::CFFSet;

int exit_code_for(const std::exception &e) {
    if (dynamic_cast<const ConfigError *>(&e)) return kExitUsage;
    if (dynamic_cast<const DataError *>(&e)) return kExitData;
    return kExitNumeric;
}

fs::path output_dir(const RunConfig &config) {
    if (const char *env = std::getenv("QCFF_OUTPUT_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return config.paths.output;
}

namespace {

std::string num(double v) { return format_double(v); }

std::string pct(std::size_t part, std::size_t whole) {
    return whole == 0 ? "0" : num(100.0 * static_cast<double>(part) / static_cast<double>(whole));
}

pseudodata::GeneratorSet generator_of(const RunConfig &c) {
    return c.pseudodata.generator == "realistic" ? pseudodata::GeneratorSet::realistic()
                                                 : pseudodata::GeneratorSet::basic();
}

fs::path fit_path(const Context &ctx, models::ModelClass m, std::int64_t set_id) {
    return ctx.out_dir / "fits" / models::to_string(m) / ("set_" + std::to_string(set_id) + ".csv");
}

std::optional<std::vector<io::FitRecord>> load_fit(const Context &ctx, models::ModelClass m,
                                                   std::int64_t set_id) {
    const auto p = fit_path(ctx, m, set_id);
    if (!fs::exists(p)) {
        return std::nullopt;
    }
    std::istringstream in(io::read_file(p));
    return io::read_fit_records(in, p.string());
}

// A per-bin file counts as complete when it holds every replica of the
// configured run for that set and model.
bool complete(const std::vector<io::FitRecord> &recs, std::size_t n, std::int64_t set_id,
              models::ModelClass m) {
    if (recs.size() != n) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (recs[i].set_id != set_id || recs[i].model != m || recs[i].replica != i) return false;
    }
    return true;
}

std::string cff_header(const std::string &suffix) {
    std::string h;
    for (const char *name : physics::kCffNames) h += std::string(",") + name + suffix;
    return h;
}

void put_cffs(std::ostream &os, const metrics::PerCff &v) {
    for (double x : v) os << ',' << num(x);
}

void put_blank(std::ostream &os, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) os << ',';
}

struct QualifyRow {
    std::int64_t set_id = 0;
    std::string recommendation; // QDNN, CDNN, Tie or empty when flagged
};

std::map<std::int64_t, QualifyRow> read_qualify(const Context &ctx) {
    const auto p = ctx.out_dir / "qualify.csv";
    if (!fs::exists(p)) {
        throw IoError("'" + p.string() + "' not found; run qualify first or set global.source");
    }
    std::istringstream in(io::read_file(p));
    const auto t = io::read_csv(in, p.string());
    const auto c_id = t.column("set_id"), c_rec = t.column("recommendation");
    std::map<std::int64_t, QualifyRow> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        QualifyRow q{t.integer(r, c_id), t.rows[r][c_rec]};
        out[q.set_id] = q;
    }
    return out;
}

std::string recommendation_name(metrics::Recommendation r) {
    switch (r) {
    case metrics::Recommendation::QDNN: return "QDNN";
    case metrics::Recommendation::CDNN: return "CDNN";
    default: return "Tie";
    }
}

} // namespace

void cmd_generate(const Context &ctx) {
    const auto &c = ctx.config;
    const auto templates = c.pseudodata.synthetic_bins > 0
                               ? pseudodata::synthetic_templates(c.pseudodata.synthetic_bins,
                                                                 c.pseudodata.template_seed)
                               : io::load_bins(c.paths.data);
    const auto gen = generator_of(c);
    std::vector<training::KinematicBin> noisy, clean;
    io::TruthTable truth;
    std::size_t n_points = 0;
    for (const auto &t : templates) {
        const auto pb = pseudodata::make_pseudobin(t, gen, c.pseudodata.noise_scale,
                                                   derive_seed(c.seed, t.set_id, 0, streams::kNoise));
        noisy.push_back(pb.bin);
        auto exact = pb.bin;
        for (std::size_t i = 0; i < exact.points.size(); ++i) exact.points[i].F = pb.F_true[i];
        clean.push_back(exact);
        truth[t.set_id] = pb.truth;
        n_points += t.points.size();
    }
    std::ostringstream a, b, tr;
    io::write_bins(a, noisy);
    io::write_bins(b, clean);
    io::write_truth(tr, truth);
    io::write_file(ctx.out_dir / "pseudodata.csv", a.str());
    io::write_file(ctx.out_dir / "pseudodata_true.csv", b.str());
    io::write_file(ctx.out_dir / "truth.csv", tr.str());
    ctx.out << "generate: " << templates.size() << " sets, " << n_points
            << " points, noise scale " << num(c.pseudodata.noise_scale) << '\n';

    if (!c.pseudodata.qualifier_grid) {
        return;
    }
    std::ostringstream m;
    m << "set_id,index,ReH,ReE,ReHt,DVCS,noise_scale\n";
    std::size_t n_specs = 0;
    for (const auto &t : templates) {
        const auto recs = load_fit(ctx, models::ModelClass::CDNN, t.set_id);
        if (!recs) {
            throw IoError("qualifier grid for set " + std::to_string(t.set_id) +
                          " needs CDNN fits; run fit-local with cdnn on the template data first");
        }
        const auto inc = io::to_ensemble(*recs).included();
        const auto [lo, hi] = pseudodata::interval95(inc);
        for (const auto &s : pseudodata::qualifier_grid(lo, hi)) {
            m << t.set_id << ',' << s.index;
            for (std::size_t k = 0; k < 4; ++k) m << ',' << num(s.cffs[k]);
            m << ',' << num(s.noise_scale) << '\n';
            ++n_specs;
        }
    }
    io::write_file(ctx.out_dir / "qualifier_manifest.csv", m.str());
    ctx.out << "generate: qualifier grid " << templates.size() << " sets x 2500 = " << n_specs
            << " replica specs\n";
}

void cmd_fit_local(const Context &ctx) {
    const auto &c = ctx.config;
    const auto bins = io::load_bins(c.paths.data);
    const auto ropts = c.replica_options();
    std::size_t fitted = 0, resumed = 0, failed = 0;
    std::ostringstream summary;
    summary << "set_id,model,n_replicas,n_included,n_failed,n_excluded" << cff_header("")
            << cff_header("_sigma") << ",status\n";
    for (auto model : c.model_classes()) {
        const auto config = c.fit_config(model);
        const auto options = c.model_options(model);
        for (const auto &bin : bins) {
            std::optional<std::vector<io::FitRecord>> recs;
            try {
                recs = load_fit(ctx, model, bin.set_id);
            } catch (const DataError &) {
                recs.reset(); // unreadable partial file: refit
            }
            if (recs && complete(*recs, ropts.n_replicas, bin.set_id, model)) {
                ++resumed;
            } else {
                try {
                    const auto ens = training::fit_replicas(model, bin, ropts, config, options);
                    recs = io::to_records(ens);
                    std::ostringstream csv;
                    io::write_fit_records(csv, *recs);
                    const auto p = fit_path(ctx, model, bin.set_id);
                    io::write_file(fs::path(p).replace_extension(".json"), io::fit_records_json(*recs));
                    io::write_file(p, csv.str());
                    ++fitted;
                } catch (const Error &e) {
                    if (dynamic_cast<const ConfigError *>(&e)) throw;
                    ctx.err << "fit-local: set " << bin.set_id << " " << models::to_string(model)
                            << " failed: " << e.what() << '\n';
                    summary << bin.set_id << ',' << models::to_string(model) << ",0,0,0,0";
                    put_blank(summary, 8);
                    summary << ",failed\n";
                    ++failed;
                    continue;
                }
            }
            const auto ens = io::to_ensemble(*recs);
            const auto inc = ens.included();
            summary << bin.set_id << ',' << models::to_string(model) << ',' << recs->size() << ','
                    << inc.size() << ',' << ens.n_failed << ',' << ens.n_excluded;
            if (!inc.empty()) {
                put_cffs(summary, metrics::mean_cffs(inc));
            } else {
                put_blank(summary, 4);
            }
            if (inc.size() >= 2) {
                put_cffs(summary, metrics::precision(inc));
            } else {
                put_blank(summary, 4);
            }
            summary << ",ok\n";
        }
    }
    io::write_file(ctx.out_dir / "fits" / "summary.csv", summary.str());
    ctx.out << "fit-local: " << fitted << " fitted, " << resumed << " resumed, " << failed
            << " failed\n";
    if (failed > 0 && fitted + resumed == 0) {
        throw ConvergenceError("fit-local: every bin failed");
    }
}

void cmd_evaluate(const Context &ctx) {
    const auto &c = ctx.config;
    const auto bins = io::load_bins(c.paths.data);
    std::optional<io::TruthTable> truth;
    if (!c.paths.truth.empty()) {
        truth = io::load_truth(c.paths.truth);
    }
    std::ostringstream ev, xi, sum;
    ev << "set_id,model,n_included" << cff_header("_mean") << cff_header("_precision")
       << cff_header("_accuracy") << ",m_dvcs\n";
    xi << "set_id,quantum_model,m_dvcs_cdnn,m_dvcs_qdnn,xi\n";
    std::map<models::ModelClass, std::vector<metrics::BinSummary>> by_model;
    std::size_t rows = 0;
    for (const auto &bin : bins) {
        std::optional<CFFSet> t;
        if (truth) {
            if (auto it = truth->find(bin.set_id); it != truth->end()) t = it->second;
        }
        std::map<models::ModelClass, double> mdvcs;
        for (auto model : c.model_classes()) {
            const auto recs = load_fit(ctx, model, bin.set_id);
            if (!recs) continue;
            const auto inc = io::to_ensemble(*recs).included();
            if (inc.empty()) continue;
            const auto mean = metrics::mean_cffs(inc);
            ev << bin.set_id << ',' << models::to_string(model) << ',' << inc.size();
            put_cffs(ev, mean);
            std::optional<metrics::PerCff> prec;
            if (inc.size() >= 2) {
                prec = metrics::precision(inc);
                put_cffs(ev, *prec);
            } else {
                put_blank(ev, 4);
            }
            if (t) {
                put_cffs(ev, metrics::accuracy(inc, t));
                const double m = metrics::m_dvcs(bin.kinematics(), physics::kelly_form_factors(bin.t),
                                                 CFFSet::from_array(mean), *t);
                mdvcs[model] = m;
                ev << ',' << num(m) << '\n';
                if (prec && std::all_of(prec->begin(), prec->end(), [](double s) { return s > 0.0; })) {
                    by_model[model].push_back(
                        {CFFSet::from_array(mean), *t, CFFSet::from_array(*prec)});
                }
            } else {
                put_blank(ev, 5);
                ev << '\n';
            }
            ++rows;
        }
        if (auto it = mdvcs.find(models::ModelClass::CDNN); it != mdvcs.end()) {
            for (const auto &[model, m] : mdvcs) {
                if (!models::is_quantum(model) || m <= 0.0) continue;
                xi << bin.set_id << ',' << models::to_string(model) << ',' << num(it->second) << ','
                   << num(m) << ',' << num(metrics::xi_outperformance(it->second, m)) << '\n';
            }
        }
    }
    sum << "model,n_bins,m_chi2\n";
    for (const auto &[model, list] : by_model) {
        sum << models::to_string(model) << ',' << list.size() << ',' << num(metrics::m_chi2(list))
            << '\n';
    }
    io::write_file(ctx.out_dir / "evaluation.csv", ev.str());
    io::write_file(ctx.out_dir / "evaluation_xi.csv", xi.str());
    io::write_file(ctx.out_dir / "evaluation_summary.csv", sum.str());
    ctx.out << "evaluate: " << rows << " (bin, model) rows" << (truth ? "" : ", no truth table")
            << '\n';
}

void cmd_qualify(const Context &ctx) {
    const auto &c = ctx.config;
    const auto bins = io::load_bins(c.paths.data);
    std::ostringstream q;
    q << "set_id,eps_bar_s,nonlinearity,xi_hat,recommendation,flag\n";
    std::map<std::string, std::size_t> counts{{"QDNN", 0}, {"CDNN", 0}, {"Tie", 0}};
    std::size_t flagged = 0;
    for (const auto &bin : bins) {
        try {
            const std::vector<std::vector<double>> F{bin.F()};
            const auto eps = metrics::avg_scaled_error(bin.sigmas(), F, c.qualifier.noise_scale);
            const double nl = metrics::bin_nonlinearity(bin);
            const double xh = metrics::qualifier(eps.value, nl);
            const auto rec = recommendation_name(metrics::recommend(xh, c.qualifier.threshold));
            ++counts[rec];
            q << bin.set_id << ',' << num(eps.value) << ',' << num(nl) << ',' << num(xh) << ','
              << rec << ',' << (eps.n_excluded > 0 ? "nonpositive_F_skipped" : "") << '\n';
        } catch (const DegenerateDataError &e) {
            ++flagged;
            ctx.err << "qualify: set " << bin.set_id << " flagged: " << e.what() << '\n';
            q << bin.set_id << ",,,,,degenerate\n";
        }
    }
    const std::size_t n = counts["QDNN"] + counts["CDNN"] + counts["Tie"];
    std::ostringstream s;
    s << "bucket,count,percent\n";
    for (const char *b : {"QDNN", "CDNN", "Tie"}) {
        s << b << ',' << counts[b] << ',' << pct(counts[b], n) << '\n';
    }
    s << "flagged," << flagged << ",\n";
    io::write_file(ctx.out_dir / "qualify.csv", q.str());
    io::write_file(ctx.out_dir / "qualify_summary.csv", s.str());
    ctx.out << "qualify: " << n << " bins, QDNN " << pct(counts["QDNN"], n) << "%, CDNN "
            << pct(counts["CDNN"], n) << "%, tie " << pct(counts["Tie"], n) << "%, " << flagged
            << " flagged\n";
}

void cmd_fit_global(const Context &ctx) {
    const auto &c = ctx.config;
    const auto bins = io::load_bins(c.paths.data);
    const auto classes = c.model_classes();
    std::optional<models::ModelClass> quantum;
    for (auto m : classes) {
        if (models::is_quantum(m)) {
            quantum = m;
            break;
        }
    }
    std::map<std::int64_t, QualifyRow> qual;
    if (c.global.source == "qualified") {
        qual = read_qualify(ctx);
    }
    std::vector<globalfit::LocalExtraction> data;
    std::ostringstream inputs;
    inputs << "set_id,model,xB,t,Q2" << cff_header("") << cff_header("_sigma") << '\n';
    for (const auto &bin : bins) {
        models::ModelClass model = models::ModelClass::CDNN;
        if (c.global.source == "qualified") {
            const auto it = qual.find(bin.set_id);
            if (it == qual.end() || it->second.recommendation.empty()) {
                ctx.err << "fit-global: set " << bin.set_id << " has no recommendation, skipped\n";
                continue;
            }
            if (it->second.recommendation == "QDNN" && quantum) model = *quantum;
        } else {
            model = models::parse_model_class(c.global.source);
        }
        const auto recs = load_fit(ctx, model, bin.set_id);
        if (!recs) {
            ctx.err << "fit-global: set " << bin.set_id << " has no " << models::to_string(model)
                    << " fits, skipped\n";
            continue;
        }
        const auto inc = io::to_ensemble(*recs).included();
        if (inc.size() < 2) {
            ctx.err << "fit-global: set " << bin.set_id << " has fewer than 2 usable replicas, skipped\n";
            continue;
        }
        const auto mean = CFFSet::from_array(metrics::mean_cffs(inc));
        const auto sigma = CFFSet::from_array(metrics::precision(inc));
        data.push_back({bin.set_id, bin.xB, bin.t, bin.Q2, mean, sigma});
        inputs << bin.set_id << ',' << models::to_string(model) << ',' << num(bin.xB) << ','
               << num(bin.t) << ',' << num(bin.Q2);
        put_cffs(inputs, mean.to_array());
        put_cffs(inputs, sigma.to_array());
        inputs << '\n';
    }
    const auto ens =
        globalfit::train_global(data, c.global_spec(), c.global.replicas, c.seed, c.global_options());
    const auto &g = c.global.grid;
    auto axis = [](const std::array<double, 3> &a) {
        return globalfit::GridAxis{a[0], a[1], static_cast<std::size_t>(a[2])};
    };
    const auto surf = globalfit::surface(ens, axis(g.xB), axis(g.t), axis(g.Q2));
    std::ostringstream e, s;
    globalfit::write_ensemble(e, ens);
    globalfit::write_surface_csv(s, surf);
    io::write_file(ctx.out_dir / "global" / "inputs.csv", inputs.str());
    io::write_file(ctx.out_dir / "global" / "ensemble.json", e.str());
    io::write_file(ctx.out_dir / "global" / "surface.csv", s.str());

    if (!c.paths.reference.empty()) {
        std::istringstream in(io::read_file(c.paths.reference));
        const auto t = io::read_csv(in, c.paths.reference);
        const auto cx = t.column("xB"), ct = t.column("t"), cq = t.column("Q2");
        std::array<std::size_t, 4> cols{};
        for (std::size_t k = 0; k < 4; ++k) cols[k] = t.column(physics::kCffNames[k]);
        std::ostringstream cmp;
        cmp << "xB,t,Q2";
        for (const char *name : physics::kCffNames) {
            cmp << ',' << name << "_reference," << name << "_mean," << name << "_sigma," << name
                << "_pull";
        }
        cmp << ",extrapolated\n";
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const double xB = t.number(r, cx), tt = t.number(r, ct), Q2 = t.number(r, cq);
            const auto p = globalfit::predict_global(ens, xB, tt, Q2);
            cmp << num(xB) << ',' << num(tt) << ',' << num(Q2);
            for (std::size_t k = 0; k < 4; ++k) {
                const double ref = t.number(r, cols[k]);
                cmp << ',' << num(ref) << ',' << num(p.mean[k]) << ',' << num(p.sigma[k]) << ',';
                if (p.sigma[k] > 0.0) cmp << num((p.mean[k] - ref) / p.sigma[k]);
            }
            cmp << ',' << (p.extrapolated ? 1 : 0) << '\n';
        }
        io::write_file(ctx.out_dir / "global" / "comparison.csv", cmp.str());
    }
    ctx.out << "fit-global: " << data.size() << " bins, " << ens.n_ok() << "/" << ens.replicas.size()
            << " replicas usable, " << surf.size() << " surface points\n";
}

void cmd_report(const Context &ctx) {
    std::ostringstream r;
    r << "# qcff report\n\n## Model complexity\n\n| model | parameters | FLOPs |\n|---|---|---|\n";
    const auto cd = models::count_complexity(models::MlpSpec::cdnn());
    const auto bq = models::count_complexity(models::QdnnSpec::basic());
    const auto fq = models::count_complexity(models::QdnnSpec::full());
    r << "| cdnn | " << cd.n_params << " | " << cd.n_flops << " |\n";
    r << "| basic_qdnn | " << bq.n_params << " | " << bq.n_flops << " |\n";
    r << "| fqdnn | " << fq.n_params << " | " << fq.n_flops << " |\n";

    auto table = [&](const fs::path &p, const std::string &title) {
        if (!fs::exists(p)) return;
        std::istringstream in(io::read_file(p));
        const auto t = io::read_csv(in, p.string());
        r << "\n## " << title << "\n\n|";
        for (const auto &h : t.header) r << ' ' << h << " |";
        r << "\n|";
        for (std::size_t i = 0; i < t.header.size(); ++i) r << "---|";
        r << '\n';
        for (const auto &row : t.rows) {
            r << '|';
            for (const auto &f : row) r << ' ' << f << " |";
            r << '\n';
        }
    };
    table(ctx.out_dir / "evaluation_summary.csv", "Closure metrics");
    table(ctx.out_dir / "qualify_summary.csv", "Qualifier recommendations");

    const auto fits = ctx.out_dir / "fits" / "summary.csv";
    if (fs::exists(fits)) {
        std::istringstream in(io::read_file(fits));
        const auto t = io::read_csv(in, fits.string());
        const auto cm = t.column("model"), cs = t.column("status");
        std::map<std::string, std::pair<std::size_t, std::size_t>> per;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            auto &e = per[t.rows[i][cm]];
            (t.rows[i][cs] == "ok" ? e.first : e.second) += 1;
        }
        r << "\n## Local fits\n\n| model | bins fitted | bins failed |\n|---|---|---|\n";
        for (const auto &[m, e] : per) r << "| " << m << " | " << e.first << " | " << e.second << " |\n";
    }

    const auto surf = ctx.out_dir / "global" / "surface.csv";
    if (fs::exists(surf)) {
        std::istringstream in(io::read_file(surf));
        const auto pts = globalfit::read_surface_csv(in);
        metrics::PerCff mean_sigma{};
        std::size_t extrap = 0;
        for (const auto &p : pts) {
            for (std::size_t k = 0; k < 4; ++k) mean_sigma[k] += p.prediction.sigma[k] / static_cast<double>(pts.size());
            extrap += p.prediction.extrapolated ? 1 : 0;
        }
        r << "\n## Global fit surface\n\n" << pts.size() << " grid points, " << extrap
          << " outside the training hull.\n\n| CFF | mean sigma |\n|---|---|\n";
        for (std::size_t k = 0; k < 4; ++k) {
            r << "| " << physics::kCffNames[k] << " | " << num(mean_sigma[k]) << " |\n";
        }
    }
    io::write_file(ctx.out_dir / "report.md", r.str());
    ctx.out << "report: " << (ctx.out_dir / "report.md").string() << '\n';
}

} // namespace qcff::cli
