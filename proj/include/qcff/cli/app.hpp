#pragma once

#include <exception>
#include <filesystem>
#include <iosfwd>

#include "qcff/cli/config.hpp"

namespace qcff::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

/// ConfigError -> 1, DataError -> 2, NumericError and anything else -> 3.
int exit_code_for(const std::exception &e);

/// Output directory: QCFF_OUTPUT_DIR when set and non-empty, else paths.output.
std::filesystem::path output_dir(const RunConfig &config);

struct Context {
    RunConfig config;
    std::filesystem::path out_dir;
    std::ostream &out; // one-line summaries
    std::ostream &err; // per-bin warnings
};

// Each command writes its files under ctx.out_dir. Files are fully
// determined by (config, inputs); reruns are byte-identical.

/// pseudodata.csv, pseudodata_true.csv, truth.csv and, with
/// pseudodata.qualifier_grid, qualifier_manifest.csv (needs CDNN fits).
void cmd_generate(const Context &ctx);
/// fits/<model>/set_<id>.csv (+ .json) per bin and fits/summary.csv.
/// Complete per-bin files from an earlier run are kept.
void cmd_fit_local(const Context &ctx);
/// evaluation.csv, evaluation_xi.csv and evaluation_summary.csv.
void cmd_evaluate(const Context &ctx);
/// qualify.csv and qualify_summary.csv.
void cmd_qualify(const Context &ctx);
/// global/inputs.csv, global/ensemble.json, global/surface.csv and, with
/// paths.reference, global/comparison.csv.
void cmd_fit_global(const Context &ctx);
/// report.md from whatever the other commands left in the output directory.
void cmd_report(const Context &ctx);

/// Parses the command line and dispatches; returns the exit code.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace qcff::cli
