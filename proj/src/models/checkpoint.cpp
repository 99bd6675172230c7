#include "qcff/models/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "qcff/errors.hpp"
#include "qcff/util/format.hpp"

namespace qcff::models {

namespace {

std::string next_line(std::istream &is, const char *what) {
    std::string line;
    if (!std::getline(is, line)) {
        throw SchemaError(std::string("checkpoint truncated before ") + what);
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return line;
}

std::istringstream expect_key(std::istream &is, const std::string &key) {
    const std::string line = next_line(is, key.c_str());
    std::istringstream ss(line);
    std::string k;
    ss >> k;
    if (k != key) {
        throw SchemaError("checkpoint: expected '" + key + "', found '" + line + "'");
    }
    return ss;
}

} // namespace

void Checkpoint::validate() const {
    const std::size_t expect = model == ModelClass::CDNN ? Mlp(mlp).num_params()
                                                         : Qdnn(qdnn).num_params();
    if (params.size() != expect) {
        throw ShapeError("checkpoint holds " + std::to_string(params.size()) +
                         " parameters, spec needs " + std::to_string(expect));
    }
}

void write_checkpoint(std::ostream &os, const Checkpoint &ckpt) {
    ckpt.validate();
    os << "qcff-checkpoint 1\n";
    os << "model " << to_string(ckpt.model) << "\n";
    os << "seed " << ckpt.seed << "\n";
    if (ckpt.model == ModelClass::CDNN) {
        os << "widths";
        for (auto w : ckpt.mlp.widths) os << ' ' << w;
        os << "\nactivations";
        for (auto a : ckpt.mlp.activations) os << ' ' << to_string(a);
        os << "\n";
    } else {
        const auto &q = ckpt.qdnn;
        os << "qdnn " << q.n_inputs << ' ' << q.n_qubits << ' ' << q.n_layers << ' '
           << q.entangle_range << ' '
           << (q.pattern == qsim::EntanglerPattern::Cyclic ? "cyclic" : "fixed") << ' '
           << q.head_width << ' ' << q.n_outputs << ' ' << to_string(q.head_activation) << "\n";
    }
    os << "params " << ckpt.params.size() << "\n";
    for (double v : ckpt.params) {
        os << format_double(v) << "\n";
    }
}

Checkpoint read_checkpoint(std::istream &is) {
    Checkpoint c;
    if (next_line(is, "header") != "qcff-checkpoint 1") {
        throw SchemaError("not a qcff checkpoint (bad header)");
    }
    {
        auto ss = expect_key(is, "model");
        std::string m;
        ss >> m;
        c.model = parse_model_class(m);
    }
    {
        auto ss = expect_key(is, "seed");
        if (!(ss >> c.seed)) throw SchemaError("checkpoint: bad seed");
    }
    if (c.model == ModelClass::CDNN) {
        auto ws = expect_key(is, "widths");
        c.mlp.widths.clear();
        for (std::size_t w; ws >> w;) c.mlp.widths.push_back(w);
        auto as = expect_key(is, "activations");
        c.mlp.activations.clear();
        for (std::string a; as >> a;) c.mlp.activations.push_back(parse_activation(a));
        c.mlp.batch_norm.clear();
        c.mlp.validate();
    } else {
        auto ss = expect_key(is, "qdnn");
        std::string pattern;
        std::string act;
        auto &q = c.qdnn;
        if (!(ss >> q.n_inputs >> q.n_qubits >> q.n_layers >> q.entangle_range >> pattern >>
              q.head_width >> q.n_outputs >> act)) {
            throw SchemaError("checkpoint: malformed qdnn line");
        }
        if (pattern == "cyclic") {
            q.pattern = qsim::EntanglerPattern::Cyclic;
        } else if (pattern == "fixed") {
            q.pattern = qsim::EntanglerPattern::Fixed;
        } else {
            throw SchemaError("checkpoint: unknown entangler pattern '" + pattern + "'");
        }
        q.head_activation = parse_activation(act);
        q.validate();
    }
    std::size_t n = 0;
    {
        auto ss = expect_key(is, "params");
        if (!(ss >> n)) throw SchemaError("checkpoint: bad parameter count");
    }
    c.params.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        c.params.push_back(parse_double(next_line(is, "parameter values")));
    }
    c.validate();
    return c;
}

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt) {
    std::ofstream os(path);
    if (!os) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    write_checkpoint(os, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
    std::ifstream is(path);
    if (!is) {
        throw IoError("cannot open " + path.string());
    }
    return read_checkpoint(is);
}

} // namespace qcff::models
