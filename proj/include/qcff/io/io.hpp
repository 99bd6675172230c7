#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qcff/models/regressor.hpp"
#include "qcff/physics/forward_model.hpp"
#include "qcff/training/data.hpp"
#include "qcff/training/replicas.hpp"

namespace qcff::io {

/// Comma-separated table with a header row. No quoting: every field in the
/// formats below is a number or a bare token.
struct CsvTable {
    std::string source; // used in diagnostics
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers; // 1-based file line of each row

    /// Column index by name; throws SchemaError when absent.
    std::size_t column(std::string_view name) const;
    /// Field parsed as a double; SchemaError names the line and column.
    double number(std::size_t row, std::size_t col) const;
    std::int64_t integer(std::size_t row, std::size_t col) const;
    std::uint64_t unsigned_integer(std::size_t row, std::size_t col) const;
    [[noreturn]] void fail(std::size_t row, std::size_t col, const std::string &what) const;
};

/// Reads a table; blank lines are skipped, a trailing CR is dropped.
/// Throws SchemaError on ragged rows or an empty file.
CsvTable read_csv(std::istream &is, std::string source);
/// Throws IoError when the file cannot be opened.
std::string read_file(const std::filesystem::path &path);
/// Writes atomically through a temporary sibling; throws IoError.
void write_file(const std::filesystem::path &path, std::string_view content);

/// Data schema, one row per phi point:
///   set_id,k,Q2,xB,t,phi_deg,F,sigma_F
inline constexpr std::string_view kDataHeader = "set_id,k,Q2,xB,t,phi_deg,F,sigma_F";

/// Parses data rows into bins sorted by set_id, points in file order.
/// Rejects missing or unknown columns, unparseable or non-finite fields,
/// sigma_F <= 0 and rows of one set_id with differing kinematics, naming
/// the offending line and column. Bins are then validate()d.
std::vector<training::KinematicBin> read_bins(std::istream &is, const std::string &source = "data");
std::vector<training::KinematicBin> load_bins(const std::filesystem::path &path);
void write_bins(std::ostream &os, const std::vector<training::KinematicBin> &bins);

/// Truth schema: set_id,ReH,ReE,ReHt,DVCS
using TruthTable = std::map<std::int64_t, physics::CFFSet>;
TruthTable read_truth(std::istream &is, const std::string &source = "truth");
TruthTable load_truth(const std::filesystem::path &path);
void write_truth(std::ostream &os, const TruthTable &truth);

/// One fitted replica of one bin.
struct FitRecord {
    std::int64_t set_id = 0;
    models::ModelClass model = models::ModelClass::CDNN;
    std::size_t replica = 0;
    std::uint64_t seed = 0;       // initialisation seed
    std::uint64_t noise_seed = 0; // resampling seed
    physics::CFFSet cffs;
    double final_loss = 0.0;
    std::size_t epochs_run = 0;
    std::string status; // "ok", "excluded" or "failed"

    bool operator==(const FitRecord &) const = default;
};

/// set_id,model,replica,seed,noise_seed,ReH,ReE,ReHt,DVCS,final_loss,epochs_run,status
inline constexpr std::string_view kFitHeader =
    "set_id,model,replica,seed,noise_seed,ReH,ReE,ReHt,DVCS,final_loss,epochs_run,status";

std::vector<FitRecord> to_records(const training::ReplicaEnsemble &ensemble);
/// Rebuilds an ensemble for one (set_id, model); failed replicas keep ok = false.
training::ReplicaEnsemble to_ensemble(const std::vector<FitRecord> &records);

void write_fit_records(std::ostream &os, const std::vector<FitRecord> &records);
std::vector<FitRecord> read_fit_records(std::istream &is, const std::string &source = "fits");
/// JSON mirror of the CSV: {"schema": "qcff-fit-records", "version": 1, "records": [...]}.
std::string fit_records_json(const std::vector<FitRecord> &records);
std::vector<FitRecord> parse_fit_records_json(std::string_view text);

} // namespace qcff::io
