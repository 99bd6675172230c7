#include "qcff/io/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qcff/errors.hpp"
#include "qcff/util/format.hpp"

namespace qcff::io {

namespace {

std::vector<std::string> split(const std::string &line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        std::string f = line.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.erase(f.begin());
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.pop_back();
        out.push_back(std::move(f));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

template <class Int>
Int parse_int(const std::string &s) {
    Int v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw SchemaError("cannot parse '" + s + "' as an integer");
    }
    return v;
}

void require_header(const CsvTable &t, std::string_view expected) {
    std::vector<std::string> want;
    std::string line(expected);
    want = split(line);
    for (const auto &name : t.header) {
        if (std::find(want.begin(), want.end(), name) == want.end()) {
            throw SchemaError(t.source + ", line 1: unknown column '" + name + "'; expected " +
                              std::string(expected));
        }
    }
    for (const auto &name : want) {
        t.column(name);
    }
    if (t.header.size() != want.size()) {
        throw SchemaError(t.source + ", line 1: duplicate columns; expected " + std::string(expected));
    }
}

} // namespace

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw SchemaError(source + ", line 1: missing column '" + std::string(name) + "'");
}

void CsvTable::fail(std::size_t row, std::size_t col, const std::string &what) const {
    throw SchemaError(source + ", line " + std::to_string(line_numbers[row]) + ", column " +
                      header[col] + ": " + what);
}

double CsvTable::number(std::size_t row, std::size_t col) const {
    double v = 0.0;
    try {
        v = parse_double(rows[row][col]);
    } catch (const SchemaError &e) {
        fail(row, col, e.what());
    }
    if (!std::isfinite(v)) {
        fail(row, col, "value '" + rows[row][col] + "' is not finite");
    }
    return v;
}

std::int64_t CsvTable::integer(std::size_t row, std::size_t col) const {
    try {
        return parse_int<std::int64_t>(rows[row][col]);
    } catch (const SchemaError &e) {
        fail(row, col, e.what());
    }
}

std::uint64_t CsvTable::unsigned_integer(std::size_t row, std::size_t col) const {
    try {
        return parse_int<std::uint64_t>(rows[row][col]);
    } catch (const SchemaError &e) {
        fail(row, col, e.what());
    }
}

CsvTable read_csv(std::istream &is, std::string source) {
    CsvTable t;
    t.source = std::move(source);
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line);
        if (!have_header) {
            if (lineno != 1) {
                throw SchemaError(t.source + ": header must be on line 1");
            }
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size()) {
            throw SchemaError(t.source + ", line " + std::to_string(lineno) + ": expected " +
                              std::to_string(t.header.size()) + " columns, got " +
                              std::to_string(fields.size()));
        }
        t.rows.push_back(std::move(fields));
        t.line_numbers.push_back(lineno);
    }
    if (!have_header) {
        throw SchemaError(t.source + ": empty file");
    }
    return t;
}

std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path &path, std::string_view content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory '" + path.parent_path().string() + "': " +
                          ec.message());
        }
    }
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open '" + tmp.string() + "' for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw IoError("write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
    }
}

std::vector<training::KinematicBin> read_bins(std::istream &is, const std::string &source) {
    const auto t = read_csv(is, source);
    require_header(t, kDataHeader);
    const std::size_t c_id = t.column("set_id"), c_k = t.column("k"), c_q = t.column("Q2"),
                      c_x = t.column("xB"), c_t = t.column("t"), c_phi = t.column("phi_deg"),
                      c_F = t.column("F"), c_s = t.column("sigma_F");
    std::map<std::int64_t, training::KinematicBin> bins;
    std::map<std::int64_t, std::size_t> first_row;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto id = t.integer(r, c_id);
        const double k = t.number(r, c_k), Q2 = t.number(r, c_q), xB = t.number(r, c_x),
                     tt = t.number(r, c_t);
        training::DataPoint p{t.number(r, c_phi), t.number(r, c_F), t.number(r, c_s)};
        if (!(p.sigma_F > 0.0)) {
            t.fail(r, c_s, "sigma_F must be > 0, got " + t.rows[r][c_s]);
        }
        if (p.phi_deg < 0.0 || p.phi_deg >= 360.0) {
            t.fail(r, c_phi, "phi_deg must lie in [0, 360), got " + t.rows[r][c_phi]);
        }
        auto [it, fresh] = bins.try_emplace(id);
        auto &b = it->second;
        if (fresh) {
            b.set_id = id;
            b.k = k;
            b.Q2 = Q2;
            b.xB = xB;
            b.t = tt;
            first_row[id] = t.line_numbers[r];
        } else {
            const std::array<std::pair<double, std::size_t>, 4> have{
                {{b.k, c_k}, {b.Q2, c_q}, {b.xB, c_x}, {b.t, c_t}}};
            const std::array<double, 4> got{k, Q2, xB, tt};
            for (std::size_t j = 0; j < 4; ++j) {
                if (have[j].first != got[j]) {
                    t.fail(r, have[j].second,
                           "set " + std::to_string(id) + " has kinematics differing from line " +
                               std::to_string(first_row[id]));
                }
            }
        }
        b.points.push_back(p);
    }
    std::vector<training::KinematicBin> out;
    for (auto &[id, b] : bins) {
        try {
            b.validate();
        } catch (const DataError &e) {
            throw SchemaError(source + ": " + e.what());
        }
        out.push_back(std::move(b));
    }
    return out;
}

std::vector<training::KinematicBin> load_bins(const std::filesystem::path &path) {
    std::istringstream in(read_file(path));
    return read_bins(in, path.string());
}

void write_bins(std::ostream &os, const std::vector<training::KinematicBin> &bins) {
    os << kDataHeader << '\n';
    for (const auto &b : bins) {
        for (const auto &p : b.points) {
            os << b.set_id << ',' << format_double(b.k) << ',' << format_double(b.Q2) << ','
               << format_double(b.xB) << ',' << format_double(b.t) << ',' << format_double(p.phi_deg)
               << ',' << format_double(p.F) << ',' << format_double(p.sigma_F) << '\n';
        }
    }
}

TruthTable read_truth(std::istream &is, const std::string &source) {
    const auto t = read_csv(is, source);
    require_header(t, "set_id,ReH,ReE,ReHt,DVCS");
    const std::size_t c_id = t.column("set_id");
    std::array<std::size_t, 4> cols{};
    for (std::size_t k = 0; k < 4; ++k) cols[k] = t.column(physics::kCffNames[k]);
    TruthTable out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto id = t.integer(r, c_id);
        physics::CFFSet c;
        for (std::size_t k = 0; k < 4; ++k) c[k] = t.number(r, cols[k]);
        if (!out.emplace(id, c).second) {
            t.fail(r, c_id, "duplicate set_id " + std::to_string(id));
        }
    }
    return out;
}

TruthTable load_truth(const std::filesystem::path &path) {
    std::istringstream in(read_file(path));
    return read_truth(in, path.string());
}

void write_truth(std::ostream &os, const TruthTable &truth) {
    os << "set_id,ReH,ReE,ReHt,DVCS\n";
    for (const auto &[id, c] : truth) {
        os << id;
        for (std::size_t k = 0; k < 4; ++k) os << ',' << format_double(c[k]);
        os << '\n';
    }
}

std::vector<FitRecord> to_records(const training::ReplicaEnsemble &ens) {
    std::vector<FitRecord> out;
    for (const auto &r : ens.replicas) {
        FitRecord f;
        f.set_id = ens.set_id;
        f.model = ens.model;
        f.replica = r.index;
        f.seed = r.init_seed;
        f.noise_seed = r.noise_seed;
        f.cffs = r.cffs;
        f.final_loss = r.final_loss;
        f.epochs_run = r.epochs_run;
        f.status = !r.ok ? "failed" : (r.excluded ? "excluded" : "ok");
        if (!r.ok) {
            f.cffs = {};
            f.final_loss = 0.0;
        }
        out.push_back(f);
    }
    return out;
}

training::ReplicaEnsemble to_ensemble(const std::vector<FitRecord> &records) {
    if (records.empty()) {
        throw EmptyEnsembleError("no fit records");
    }
    training::ReplicaEnsemble e;
    e.set_id = records.front().set_id;
    e.model = records.front().model;
    for (const auto &f : records) {
        if (f.set_id != e.set_id || f.model != e.model) {
            throw SchemaError("fit records mix sets or models");
        }
        training::ReplicaRecord r;
        r.index = f.replica;
        r.init_seed = f.seed;
        r.noise_seed = f.noise_seed;
        r.cffs = f.cffs;
        r.final_loss = f.final_loss;
        r.epochs_run = f.epochs_run;
        r.ok = f.status != "failed";
        r.excluded = f.status == "excluded";
        if (!r.ok) {
            r.error = "failed";
            ++e.n_failed;
        }
        if (r.excluded) ++e.n_excluded;
        e.replicas.push_back(r);
    }
    return e;
}

void write_fit_records(std::ostream &os, const std::vector<FitRecord> &records) {
    os << kFitHeader << '\n';
    for (const auto &f : records) {
        os << f.set_id << ',' << models::to_string(f.model) << ',' << f.replica << ',' << f.seed
           << ',' << f.noise_seed;
        for (std::size_t k = 0; k < 4; ++k) os << ',' << format_double(f.cffs[k]);
        os << ',' << format_double(f.final_loss) << ',' << f.epochs_run << ',' << f.status << '\n';
    }
}

std::vector<FitRecord> read_fit_records(std::istream &is, const std::string &source) {
    const auto t = read_csv(is, source);
    require_header(t, kFitHeader);
    const std::size_t c_id = t.column("set_id"), c_m = t.column("model"), c_r = t.column("replica"),
                      c_seed = t.column("seed"), c_ns = t.column("noise_seed"),
                      c_loss = t.column("final_loss"), c_ep = t.column("epochs_run"),
                      c_st = t.column("status");
    std::vector<FitRecord> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        FitRecord f;
        f.set_id = t.integer(r, c_id);
        try {
            f.model = models::parse_model_class(t.rows[r][c_m]);
        } catch (const ConfigError &e) {
            t.fail(r, c_m, e.what());
        }
        f.replica = static_cast<std::size_t>(t.unsigned_integer(r, c_r));
        f.seed = t.unsigned_integer(r, c_seed);
        f.noise_seed = t.unsigned_integer(r, c_ns);
        for (std::size_t k = 0; k < 4; ++k) f.cffs[k] = t.number(r, t.column(physics::kCffNames[k]));
        f.final_loss = t.number(r, c_loss);
        f.epochs_run = static_cast<std::size_t>(t.unsigned_integer(r, c_ep));
        f.status = t.rows[r][c_st];
        if (f.status != "ok" && f.status != "excluded" && f.status != "failed") {
            t.fail(r, c_st, "status must be ok, excluded or failed");
        }
        out.push_back(f);
    }
    return out;
}

std::string fit_records_json(const std::vector<FitRecord> &records) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["schema"] = "qcff-fit-records";
    j["version"] = 1;
    ordered_json arr = ordered_json::array();
    for (const auto &f : records) {
        ordered_json r;
        r["set_id"] = f.set_id;
        r["model"] = models::to_string(f.model);
        r["replica"] = f.replica;
        r["seed"] = f.seed;
        r["noise_seed"] = f.noise_seed;
        ordered_json c;
        for (std::size_t k = 0; k < 4; ++k) c[physics::kCffNames[k]] = f.cffs[k];
        r["cffs"] = c;
        r["final_loss"] = f.final_loss;
        r["epochs_run"] = f.epochs_run;
        r["status"] = f.status;
        arr.push_back(r);
    }
    j["records"] = arr;
    return j.dump(1) + "\n";
}

std::vector<FitRecord> parse_fit_records_json(std::string_view text) {
    using nlohmann::json;
    try {
        const auto j = json::parse(text);
        if (j.at("schema") != "qcff-fit-records" || j.at("version") != 1) {
            throw SchemaError("not a version 1 fit-record document");
        }
        std::vector<FitRecord> out;
        for (const auto &r : j.at("records")) {
            FitRecord f;
            f.set_id = r.at("set_id").get<std::int64_t>();
            f.model = models::parse_model_class(r.at("model").get<std::string>());
            f.replica = r.at("replica").get<std::size_t>();
            f.seed = r.at("seed").get<std::uint64_t>();
            f.noise_seed = r.at("noise_seed").get<std::uint64_t>();
            for (std::size_t k = 0; k < 4; ++k) {
                f.cffs[k] = r.at("cffs").at(physics::kCffNames[k]).get<double>();
            }
            f.final_loss = r.at("final_loss").get<double>();
            f.epochs_run = r.at("epochs_run").get<std::size_t>();
            f.status = r.at("status").get<std::string>();
            out.push_back(f);
        }
        return out;
    } catch (const json::exception &e) {
        throw SchemaError(std::string("fit-record JSON: ") + e.what());
    }
}

} // namespace qcff::io
